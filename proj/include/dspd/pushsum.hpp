#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "dspd/errors.hpp"
#include "dspd/graph.hpp"
#include "dspd/policy.hpp"

namespace dspd {

/// Every agent's local estimates of all agents' Lagrange multipliers and
/// policy parameters, maintained by the push-sum protocol. breve_* are the
/// intermediate mass variables exchanged on the learning network; hat_*
/// are the ratio estimates actually consumed by the algorithm; p is the
/// push-sum weight vector (init 1, total mass N forever under
/// column-stochastic mixing).
///
/// Index convention: entry (i, j) is agent i's value for agent j, matching
/// the mu-breve/mu-hat superscript-subscript order.
struct EstimateBank {
    Eigen::VectorXd p;
    Eigen::MatrixXd breve_mu; // (i,j)
    Eigen::MatrixXd hat_mu;   // (i,j)
    std::vector<JointPolicyParams> breve_theta; // [i][j]
    std::vector<JointPolicyParams> hat_theta;   // [i][j]

    static EstimateBank zero(int n, int theta_dim) {
        EstimateBank b;
        b.p = Eigen::VectorXd::Ones(n);
        b.breve_mu = Eigen::MatrixXd::Zero(n, n);
        b.hat_mu = Eigen::MatrixXd::Zero(n, n);
        b.breve_theta.assign(n, JointPolicyParams(n, Eigen::VectorXd::Zero(theta_dim)));
        b.hat_theta.assign(n, JointPolicyParams(n, Eigen::VectorXd::Zero(theta_dim)));
        return b;
    }

    int num_agents() const { return static_cast<int>(p.size()); }
    int theta_dim() const { return static_cast<int>(breve_theta.at(0).at(0).size()); }
};

/// One synchronous push-sum round (protocol step 1): advances the weight
/// vector p <- W p and recomputes both ratio estimates from the current
/// breve values. Breve values are untouched.
inline void pushsum_ratio_step(EstimateBank& bank, const WeightMatrix& w) {
    const int n = bank.num_agents();
    if (w.size() != n) throw ContractError("pushsum: weight matrix size mismatch");
    const Eigen::MatrixXd& W = w.matrix();
    bank.p = W * bank.p;
    for (int i = 0; i < n; ++i)
        if (!(bank.p[i] > 0.0))
            throw ProtocolError("push-sum weight of agent " + std::to_string(i + 1) +
                                " reached " + std::to_string(bank.p[i]) +
                                " (learning graph is missing a self-loop)");
    bank.hat_mu = (W * bank.breve_mu).array().colwise() / bank.p.array();
    for (int j = 0; j < n; ++j) {
        // theta columns mix the same way as mu columns
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd acc = Eigen::VectorXd::Zero(bank.theta_dim());
            for (int l = 0; l < n; ++l)
                if (W(i, l) != 0.0) acc += W(i, l) * bank.breve_theta[l][j];
            bank.hat_theta[i][j] = acc / bank.p[i];
        }
    }
}

/// Recomputes the mu ratio estimates from the current breve values without
/// advancing p (the mid-iteration refresh after the dual update: the
/// weight vector advances exactly once per learning-graph round).
inline void refresh_hat_mu(EstimateBank& bank, const WeightMatrix& w) {
    bank.hat_mu = (w.matrix() * bank.breve_mu).array().colwise() / bank.p.array();
}

/// Injects the dual updates into the intermediate variables:
/// breve_mu[.][j] <- W (breve_mu[.][j] + N * delta_j * e_j). Preserves the
/// exact identity (1/N) sum_i breve_mu[i][j] = mu_j for the new truth.
inline void inject_mu_update(EstimateBank& bank, const Eigen::VectorXd& delta,
                             const WeightMatrix& w) {
    const int n = bank.num_agents();
    if (delta.size() != n) throw ContractError("inject: delta size mismatch");
    Eigen::MatrixXd m = bank.breve_mu;
    m.diagonal() += static_cast<double>(n) * delta;
    bank.breve_mu = w.matrix() * m;
}

/// Same injection for the policy-parameter intermediates.
inline void inject_theta_update(EstimateBank& bank, const std::vector<Eigen::VectorXd>& delta,
                                const WeightMatrix& w) {
    const int n = bank.num_agents();
    if (static_cast<int>(delta.size()) != n) throw ContractError("inject: delta size mismatch");
    const Eigen::MatrixXd& W = w.matrix();
    std::vector<JointPolicyParams> next(n, JointPolicyParams(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Eigen::VectorXd acc = Eigen::VectorXd::Zero(bank.theta_dim());
            for (int l = 0; l < n; ++l) {
                if (W(i, l) == 0.0) continue;
                if (l == j)
                    acc += W(i, l) * (bank.breve_theta[l][j] + static_cast<double>(n) * delta[j]);
                else
                    acc += W(i, l) * bank.breve_theta[l][j];
            }
            next[i][j] = std::move(acc);
        }
    bank.breve_theta = std::move(next);
}

/// Mean-preservation residuals against the supplied true values; used by
/// the per-iteration spot asserts and the acceptance suite.
inline double mu_mean_preservation_error(const EstimateBank& bank, const Eigen::VectorXd& mu) {
    const int n = bank.num_agents();
    double worst = 0.0;
    for (int j = 0; j < n; ++j)
        worst = std::max(worst, std::abs(bank.breve_mu.col(j).mean() - mu[j]));
    return worst;
}

inline double theta_mean_preservation_error(const EstimateBank& bank,
                                            const JointPolicyParams& theta) {
    const int n = bank.num_agents();
    double worst = 0.0;
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(bank.theta_dim());
        for (int i = 0; i < n; ++i) mean += bank.breve_theta[i][j];
        mean /= static_cast<double>(n);
        worst = std::max(worst, (mean - theta[j]).cwiseAbs().maxCoeff());
    }
    return worst;
}

inline nlohmann::json bank_to_json(const EstimateBank& bank) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["p"] = std::vector<double>(bank.p.data(), bank.p.data() + bank.p.size());
    nlohmann::json bm = nlohmann::json::array(), hm = nlohmann::json::array();
    for (int i = 0; i < bank.num_agents(); ++i) {
        bm.push_back(std::vector<double>(bank.breve_mu.row(i).begin(), bank.breve_mu.row(i).end()));
        hm.push_back(std::vector<double>(bank.hat_mu.row(i).begin(), bank.hat_mu.row(i).end()));
    }
    j["breve_mu"] = bm;
    j["hat_mu"] = hm;
    nlohmann::json bt = nlohmann::json::array(), ht = nlohmann::json::array();
    for (int i = 0; i < bank.num_agents(); ++i) {
        bt.push_back(params_to_json(bank.breve_theta[i]));
        ht.push_back(params_to_json(bank.hat_theta[i]));
    }
    j["breve_theta"] = bt;
    j["hat_theta"] = ht;
    return j;
}

inline EstimateBank bank_from_json(const nlohmann::json& j) {
    if (j.value("format_version", 0) != 1)
        throw ConfigError("bank snapshot: unsupported format_version");
    EstimateBank b;
    const auto p = j.at("p").get<std::vector<double>>();
    const int n = static_cast<int>(p.size());
    b.p = Eigen::Map<const Eigen::VectorXd>(p.data(), n);
    b.breve_mu.resize(n, n);
    b.hat_mu.resize(n, n);
    for (int i = 0; i < n; ++i) {
        const auto bm = j.at("breve_mu").at(i).get<std::vector<double>>();
        const auto hm = j.at("hat_mu").at(i).get<std::vector<double>>();
        for (int k = 0; k < n; ++k) {
            b.breve_mu(i, k) = bm.at(k);
            b.hat_mu(i, k) = hm.at(k);
        }
    }
    for (int i = 0; i < n; ++i) {
        b.breve_theta.push_back(params_from_json(j.at("breve_theta").at(i)));
        b.hat_theta.push_back(params_from_json(j.at("hat_theta").at(i)));
    }
    return b;
}

} // namespace dspd
