#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "dspd/errors.hpp"
#include "dspd/graph.hpp"
#include "dspd/rng.hpp"

namespace dspd {

/// Per-agent policy parameter vectors, one flat table of size
/// states x actions per agent (row-major: index = s * num_actions + a).
using JointPolicyParams = std::vector<Eigen::VectorXd>;

inline nlohmann::json params_to_json(const JointPolicyParams& theta) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& v : theta) {
        nlohmann::json flat = nlohmann::json::array();
        for (Eigen::Index k = 0; k < v.size(); ++k) flat.push_back(v[k]);
        out.push_back(std::move(flat));
    }
    return out;
}

inline JointPolicyParams params_from_json(const nlohmann::json& j) {
    JointPolicyParams theta;
    for (const auto& row : j) {
        Eigen::VectorXd v(row.size());
        for (std::size_t k = 0; k < row.size(); ++k) v[static_cast<Eigen::Index>(k)] = row[k];
        theta.push_back(std::move(v));
    }
    return theta;
}

/// Coupled softmax policy family: agent i draws actions from a softmax of
/// mixed logits, 0.9 * theta_i[s_i, a] plus 0.1 split evenly across the
/// parameter tables of its coupling neighbors, all evaluated at agent i's
/// own state row. States at or beyond the parameter row count are
/// absorbed-terminal sentinels: the policy plays the last action with
/// probability one and carries no parameter dependence there.
///
/// Parameter lookups go through a provider callable `const VectorXd&(int j)`
/// so the same code path serves true parameters and per-agent estimate
/// rows. State lookups go through `int(int j)` so estimator code can pass
/// a locality-enforcing view.
class CoupledSoftmaxPolicy {
  public:
    CoupledSoftmaxPolicy(const DirectedGraph& env_graph, int kappa_p, int param_states,
                         int num_actions, double self_weight = 0.9,
                         double neighbor_weight = 0.1)
        : kappa_p_(kappa_p),
          param_states_(param_states),
          num_actions_(num_actions),
          self_w_(self_weight),
          nb_w_(neighbor_weight) {
        if (kappa_p < 1) throw ConfigError("coupled policy: kappa_p must be >= 1");
        if (param_states < 1 || num_actions < 1)
            throw ConfigError("coupled policy: empty state or action space");
        const int n = env_graph.num_agents();
        coupling_.resize(n);
        for (int i = 0; i < n; ++i) coupling_[i] = k_hop_neighborhood(env_graph, i, kappa_p);
    }

    int num_agents() const { return static_cast<int>(coupling_.size()); }
    int num_actions() const { return num_actions_; }
    int param_states() const { return param_states_; }
    int param_dim() const { return param_states_ * num_actions_; }
    int kappa_p() const { return kappa_p_; }

    /// N^{kappa_p}_i, sorted, including i.
    const std::vector<int>& coupling_set(int i) const { return coupling_.at(i); }

    JointPolicyParams zero_params() const {
        return JointPolicyParams(coupling_.size(), Eigen::VectorXd::Zero(param_dim()));
    }

    bool is_terminal_state(int s) const { return s >= param_states_; }

    /// Action distribution of agent i at local state s_i. The provider
    /// must supply a parameter vector for every coupling neighbor of i.
    template <class Params>
    Eigen::VectorXd action_probabilities(int i, int s_i, const Params& params) const {
        Eigen::VectorXd p(num_actions_);
        if (is_terminal_state(s_i)) {
            p.setZero();
            p[num_actions_ - 1] = 1.0;
            return p;
        }
        Eigen::VectorXd logits = mixed_logits(i, s_i, params);
        const double mx = logits.maxCoeff();
        p = (logits.array() - mx).exp();
        p /= p.sum();
        return p;
    }

    template <class Params>
    int sample_action(int i, int s_i, const Params& params, RngStream& rng) const {
        if (is_terminal_state(s_i)) return num_actions_ - 1;
        const Eigen::VectorXd p = action_probabilities(i, s_i, params);
        return rng.categorical({p.data(), static_cast<std::size_t>(p.size())});
    }

    /// d/d theta_i of log pi_j(a_j | s_j). Nonzero only on the s_j row:
    /// entry (s_j, a) = w * (1{a = a_j} - pi_j(a)), with w = 0.9 when
    /// i = j and 0.1/(|N^{kappa_p}_j| - 1) otherwise.
    /// Throws ContractError when theta_i does not enter pi_j at all.
    template <class Params>
    Eigen::VectorXd grad_log(int wrt_i, int of_j, int s_j, int a_j,
                             const Params& params) const {
        if (!in_coupling(of_j, wrt_i))
            throw ContractError("grad_log: agent " + std::to_string(wrt_i) +
                                " is outside the coupling range of agent " +
                                std::to_string(of_j));
        return grad_log_permissive(wrt_i, of_j, s_j, a_j, params);
    }

    /// Debug entry point: returns the zero vector instead of throwing when
    /// theta_i does not appear in pi_j.
    template <class Params>
    Eigen::VectorXd grad_log_permissive(int wrt_i, int of_j, int s_j, int a_j,
                                        const Params& params) const {
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(param_dim());
        if (!in_coupling(of_j, wrt_i) || is_terminal_state(s_j)) return grad;
        const Eigen::VectorXd p = action_probabilities(of_j, s_j, params);
        const int others = static_cast<int>(coupling_[of_j].size()) - 1;
        const double w = (wrt_i == of_j) ? self_w_ : nb_w_ / static_cast<double>(others);
        for (int a = 0; a < num_actions_; ++a)
            grad[s_j * num_actions_ + a] = w * ((a == a_j ? 1.0 : 0.0) - p[a]);
        return grad;
    }

    /// Concrete instantiation of the log-gradient norm bound for this
    /// family: each gradient lives on one state row, entries
    /// w*(1{a=a_j} - p_a), so its norm is below w*sqrt(2) with w <= 0.9.
    double grad_norm_bound() const { return self_w_ * std::sqrt(2.0); }

  private:
    bool in_coupling(int j, int i) const {
        const auto& c = coupling_.at(j);
        return std::binary_search(c.begin(), c.end(), i);
    }

    template <class Params>
    Eigen::VectorXd mixed_logits(int i, int s_i, const Params& params) const {
        const auto& nbh = coupling_[i];
        const int others = static_cast<int>(nbh.size()) - 1;
        Eigen::VectorXd logits(num_actions_);
        for (int a = 0; a < num_actions_; ++a) {
            const int idx = s_i * num_actions_ + a;
            double v = self_w_ * params(i)[idx];
            if (others > 0) {
                double acc = 0.0;
                for (int j : nbh)
                    if (j != i) acc += params(j)[idx];
                v += nb_w_ / static_cast<double>(others) * acc;
            }
            logits[a] = v;
        }
        return logits;
    }

    int kappa_p_, param_states_, num_actions_;
    double self_w_, nb_w_;
    std::vector<std::vector<int>> coupling_;
};

/// Parameter provider backed by true joint parameters.
struct TrueParamsView {
    const JointPolicyParams* theta;
    const Eigen::VectorXd& operator()(int j) const { return (*theta)[j]; }
};

/// Samples the executed joint action: every agent i draws from its policy
/// evaluated at its own estimate row (never the true parameters), and
/// actions are independent across agents given the state.
template <class PerAgentParams>
JointAction sample_joint_action(const CoupledSoftmaxPolicy& policy, const GlobalState& s,
                                const PerAgentParams& params_of_agent, RngStream& rng) {
    JointAction a(policy.num_agents());
    for (int i = 0; i < policy.num_agents(); ++i)
        a[i] = policy.sample_action(i, s[i], params_of_agent(i), rng);
    return a;
}

} // namespace dspd
