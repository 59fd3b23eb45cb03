#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dspd/errors.hpp"
#include "dspd/policy.hpp"
#include "dspd/sampling.hpp"

namespace dspd {

/// Dual (Lagrangian) gradient sample from one T1-horizon batch:
/// (1/N) (sum_{t=0}^{T1} gamma^{t/2} g_{i,t} - c_i). Uses only the
/// estimating agent's own constraint rewards.
inline double estimate_dual_grad(const AgentView& view, double c_i, int num_agents,
                                 double gamma) {
    const double root = std::sqrt(gamma);
    const int i = view.agent();
    double acc = 0.0;
    double w = 1.0;
    for (long t = 0; t <= view.horizon(); ++t, w *= root) acc += w * view.g(i, t);
    return (acc - c_i) / static_cast<double>(num_agents);
}

/// Truncated-Q sample over the tail half of a 2-horizon batch:
/// (1/N) sum_{t=0}^{T3} gamma^{t/2} sum_{j in N^{kappa+2kappa_p}_i}
/// (f_j + mu_hat^i_j g_j), rewards read from the split point onward.
/// mu_hat_row is the estimating agent's own row of multiplier estimates.
inline double estimate_truncated_q(const AgentView& view, const Eigen::VectorXd& mu_hat_row,
                                   int num_agents, double gamma) {
    if (view.split() < 0) throw ContractError("estimate_truncated_q: view has no split point");
    const double root = std::sqrt(gamma);
    double acc = 0.0;
    double w = 1.0;
    for (long t = view.split(); t <= view.horizon(); ++t, w *= root) {
        double step = 0.0;
        for (int j : view.reward_agents())
            step += view.f(j, t) + mu_hat_row[j] * view.g(j, t);
        acc += w * step;
    }
    return acc / static_cast<double>(num_agents);
}

/// Policy-gradient sample: (1/(1-gamma)) * Qhat * sum over coupling
/// neighbors j of grad_{theta_i} log pi_j at the split-point state-action,
/// with every log-gradient evaluated at the estimating agent's own
/// parameter estimates.
template <class ParamsRow>
Eigen::VectorXd estimate_policy_grad(const AgentView& view, double q_hat,
                                     const ParamsRow& theta_hat_row,
                                     const CoupledSoftmaxPolicy& policy, double gamma) {
    if (view.split() < 0) throw ContractError("estimate_policy_grad: view has no split point");
    const int i = view.agent();
    const long t2 = view.split();
    Eigen::VectorXd score = Eigen::VectorXd::Zero(policy.param_dim());
    for (int j : policy.coupling_set(i))
        score += policy.grad_log(i, j, view.state(j, t2), view.action(j, t2), theta_hat_row);
    return (q_hat / (1.0 - gamma)) * score;
}

namespace detail {

template <class T, class Add, class Scale>
T pairwise_reduce(std::span<const T> values, Add add, Scale scale) {
    if (values.empty()) throw ContractError("batch_average: empty batch");
    // bottom-up pairwise summation for a scheduling-independent result
    std::vector<T> buf(values.begin(), values.end());
    std::size_t n = buf.size();
    while (n > 1) {
        const std::size_t half = n / 2;
        for (std::size_t k = 0; k < half; ++k) buf[k] = add(buf[2 * k], buf[2 * k + 1]);
        if (n % 2 == 1) buf[half] = buf[n - 1];
        n = half + n % 2;
    }
    return scale(buf[0], 1.0 / static_cast<double>(values.size()));
}

} // namespace detail

inline double batch_average(std::span<const double> values) {
    return detail::pairwise_reduce<double>(
        values, [](double a, double b) { return a + b; },
        [](double a, double s) { return a * s; });
}

inline Eigen::VectorXd batch_average(std::span<const Eigen::VectorXd> values) {
    return detail::pairwise_reduce<Eigen::VectorXd>(
        values, [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a + b).eval(); },
        [](const Eigen::VectorXd& a, double s) { return (a * s).eval(); });
}

/// Theorem-2 bound constants for the two estimators.
inline double dual_grad_bound(double reward_bound_g, double c_max, int num_agents,
                              double gamma) {
    return (reward_bound_g + c_max) / ((1.0 - std::sqrt(gamma)) * num_agents);
}

inline double policy_grad_bound(double grad_norm_bound, int num_agents, double reward_bound_f,
                                double mu_tilde_max, double reward_bound_g, double gamma) {
    return grad_norm_bound * num_agents * (reward_bound_f + mu_tilde_max * reward_bound_g) /
           ((1.0 - gamma) * (1.0 - std::sqrt(gamma)));
}

} // namespace dspd
