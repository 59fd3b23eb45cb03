#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dspd/errors.hpp"
#include "dspd/graph.hpp"
#include "dspd/rng.hpp"

namespace dspd {

/// Per-agent local state indices; length equals the agent count.
using GlobalState = std::vector<int>;
/// Per-agent local action indices.
using JointAction = std::vector<int>;

struct RewardPair {
    std::vector<double> f;
    std::vector<double> g;
};

/// Abstract CMARL environment with a factorized transition kernel: agent
/// i's next state depends only on the states of its environmental
/// neighborhood and its own action. Implementations must be immutable
/// after construction; transition/rewards are pure given an RngStream, so
/// concurrent rollouts each own a private substream.
class CmarlModel {
  public:
    virtual ~CmarlModel() = default;

    virtual int num_agents() const = 0;
    virtual int num_states(int agent) const = 0;
    virtual int num_actions(int agent) const = 0;
    virtual const DirectedGraph& env_graph() const = 0;
    virtual double gamma() const = 0;
    virtual double reward_bound_f() const = 0;
    virtual double reward_bound_g() const = 0;
    virtual const std::vector<double>& constraint_thresholds() const = 0;

    /// States below this index carry policy parameters; states at or above
    /// it are absorbed-terminal sentinels where the policy has no
    /// parameter dependence.
    virtual int num_policy_states(int agent) const { return num_states(agent); }

    virtual GlobalState initial_state(RngStream& rng) const = 0;
    virtual GlobalState transition(const GlobalState& s, const JointAction& a,
                                   RngStream& rng) const = 0;
    virtual RewardPair rewards(const GlobalState& s, const JointAction& a) const = 0;

    // --- exact-enumeration support (oracle-scale models only) ---

    /// Number of joint (state, action) pairs, or -1 on overflow.
    long long joint_pair_count() const {
        long long states = 1, pairs = 1;
        for (int i = 0; i < num_agents(); ++i) {
            states *= num_states(i);
            pairs *= static_cast<long long>(num_states(i)) * num_actions(i);
            if (pairs < 0 || pairs > (1LL << 62)) return -1;
        }
        return pairs;
    }

    long long joint_state_count() const {
        long long states = 1;
        for (int i = 0; i < num_agents(); ++i) {
            states *= num_states(i);
            if (states < 0 || states > (1LL << 62)) return -1;
        }
        return states;
    }

    /// Exact computations refuse models above this many joint pairs.
    void require_enumerable(long long cap = 1000000) const {
        const long long pairs = joint_pair_count();
        if (pairs < 0 || pairs > cap)
            throw SizeCapError("model has " +
                               (pairs < 0 ? std::string("> 2^62") : std::to_string(pairs)) +
                               " joint state-action pairs, above the cap of " +
                               std::to_string(cap));
    }

    /// P_i(s'_i | s_{N_i}, a_i). Only required for enumerable models; the
    /// default refuses.
    virtual double local_transition_prob(int /*agent*/, const GlobalState& /*s*/,
                                         int /*a_i*/, int /*s_next_i*/) const {
        throw SizeCapError("model does not expose exact transition probabilities");
    }

    /// rho(s) for a full joint state. Only required for enumerable models.
    virtual double initial_prob(const GlobalState& /*s*/) const {
        throw SizeCapError("model does not expose an exact initial distribution");
    }
};

/// Small tabular model loaded from a JSON description: per-agent kernel
/// tables P_i(s'_i | s_{N_i}, a_i), reward tables f_i/g_i over (s_i, a_i),
/// and a product-form initial distribution. These are the oracle test
/// fixtures.
class TableModel final : public CmarlModel {
  public:
    static TableModel from_json(const nlohmann::json& j) { return TableModel(j); }

    static TableModel from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open model file: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("bad JSON in " + path + ": " + e.what());
        }
        return TableModel(j);
    }

    int num_agents() const override { return n_; }
    int num_states(int) const override { return ns_; }
    int num_actions(int) const override { return na_; }
    const DirectedGraph& env_graph() const override { return graph_; }
    double gamma() const override { return gamma_; }
    double reward_bound_f() const override { return rf_; }
    double reward_bound_g() const override { return rg_; }
    const std::vector<double>& constraint_thresholds() const override { return c_; }

    GlobalState initial_state(RngStream& rng) const override {
        GlobalState s(n_);
        for (int i = 0; i < n_; ++i)
            s[i] = rng.categorical({rho_[i].data(), rho_[i].size()});
        return s;
    }

    GlobalState transition(const GlobalState& s, const JointAction& a,
                           RngStream& rng) const override {
        GlobalState next(n_);
        for (int i = 0; i < n_; ++i) {
            const double* row = kernel_row(i, s, a[i]);
            next[i] = rng.categorical({row, static_cast<std::size_t>(ns_)});
        }
        return next;
    }

    RewardPair rewards(const GlobalState& s, const JointAction& a) const override {
        RewardPair r;
        r.f.resize(n_);
        r.g.resize(n_);
        for (int i = 0; i < n_; ++i) {
            r.f[i] = f_[i][s[i] * na_ + a[i]];
            r.g[i] = g_[i][s[i] * na_ + a[i]];
        }
        return r;
    }

    double local_transition_prob(int agent, const GlobalState& s, int a_i,
                                 int s_next_i) const override {
        return kernel_row(agent, s, a_i)[s_next_i];
    }

    double initial_prob(const GlobalState& s) const override {
        double p = 1.0;
        for (int i = 0; i < n_; ++i) p *= rho_[i][s[i]];
        return p;
    }

    const std::string& name() const { return name_; }

  private:
    explicit TableModel(const nlohmann::json& j) {
        try {
            name_ = j.value("name", "table");
            n_ = j.at("agents").get<int>();
            ns_ = j.at("states_per_agent").get<int>();
            na_ = j.at("actions_per_agent").get<int>();
            gamma_ = j.at("gamma").get<double>();
            rf_ = j.at("reward_bound_f").get<double>();
            rg_ = j.at("reward_bound_g").get<double>();
            c_ = j.at("constraints").get<std::vector<double>>();
            std::vector<std::pair<int, int>> edges;
            for (const auto& e : j.at("env_edges")) {
                if (e.size() != 2) throw ConfigError("env_edges entries must be pairs");
                edges.push_back({e[0].get<int>() - 1, e[1].get<int>() - 1});
            }
            graph_ = DirectedGraph(n_, edges);
            if (gamma_ <= 0.0 || gamma_ >= 1.0)
                throw ConfigError("table model: gamma must lie in (0,1)");
            if (static_cast<int>(c_.size()) != n_)
                throw ConfigError("table model: constraints must list one c_i per agent");

            rho_.assign(n_, std::vector<double>());
            const auto& rho = j.at("rho_product");
            for (int i = 0; i < n_; ++i) {
                rho_[i] = rho.at(i).get<std::vector<double>>();
                normalize_checked(rho_[i], "rho[" + std::to_string(i) + "]");
            }

            f_ = load_reward_table(j.at("f"), "f");
            g_ = load_reward_table(j.at("g"), "g");

            // kernels[i] is indexed [nbhd-state][a_i][s'_i]; the
            // neighborhood state index is mixed-radix over the sorted
            // in-neighborhood of i (self included via explicit edge).
            kernels_.resize(n_);
            nbhd_.resize(n_);
            const auto& kj = j.at("kernels");
            for (int i = 0; i < n_; ++i) {
                nbhd_[i] = k_hop_neighborhood(graph_, i, 1);
                std::size_t rows = 1;
                for (std::size_t k = 0; k < nbhd_[i].size(); ++k) rows *= ns_;
                auto& tab = kernels_[i];
                tab.assign(rows * na_ * ns_, 0.0);
                const auto& ki = kj.at(i);
                if (ki.size() != rows)
                    throw ConfigError("kernel " + std::to_string(i) + ": expected " +
                                      std::to_string(rows) + " neighborhood rows");
                for (std::size_t r = 0; r < rows; ++r)
                    for (int a = 0; a < na_; ++a) {
                        std::vector<double> row = ki.at(r).at(a).get<std::vector<double>>();
                        if (static_cast<int>(row.size()) != ns_)
                            throw ConfigError("kernel row has wrong length");
                        normalize_checked(row, "kernel");
                        for (int s2 = 0; s2 < ns_; ++s2)
                            tab[(r * na_ + a) * ns_ + s2] = row[s2];
                    }
            }
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("table model JSON: ") + e.what());
        }
        for (int i = 0; i < n_; ++i)
            for (int s = 0; s < ns_; ++s)
                for (int a = 0; a < na_; ++a) {
                    if (std::abs(f_[i][s * na_ + a]) > rf_ + 1e-12)
                        throw ConfigError("f table exceeds declared reward bound R_f");
                    if (std::abs(g_[i][s * na_ + a]) > rg_ + 1e-12)
                        throw ConfigError("g table exceeds declared reward bound R_g");
                }
    }

    std::vector<std::vector<double>> load_reward_table(const nlohmann::json& j,
                                                       const std::string& which) const {
        std::vector<std::vector<double>> t(n_);
        for (int i = 0; i < n_; ++i) {
            const auto& ti = j.at(i);
            t[i].resize(static_cast<std::size_t>(ns_) * na_);
            if (ti.size() != static_cast<std::size_t>(ns_))
                throw ConfigError(which + " table " + std::to_string(i) + " has wrong row count");
            for (int s = 0; s < ns_; ++s) {
                auto row = ti.at(s).get<std::vector<double>>();
                if (static_cast<int>(row.size()) != na_)
                    throw ConfigError(which + " table row has wrong length");
                for (int a = 0; a < na_; ++a) t[i][s * na_ + a] = row[a];
            }
        }
        return t;
    }

    static void normalize_checked(std::vector<double>& p, const std::string& what) {
        double sum = 0.0;
        for (double v : p) {
            if (v < 0.0) throw ConfigError(what + ": negative probability");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ConfigError(what + ": probabilities sum to " + std::to_string(sum));
        for (double& v : p) v /= sum;
    }

    const double* kernel_row(int i, const GlobalState& s, int a_i) const {
        std::size_t idx = 0;
        for (int j : nbhd_[i]) idx = idx * ns_ + s[j];
        return kernels_[i].data() + (idx * na_ + a_i) * ns_;
    }

    std::string name_;
    int n_ = 0, ns_ = 0, na_ = 0;
    double gamma_ = 0.0, rf_ = 0.0, rg_ = 0.0;
    std::vector<double> c_;
    DirectedGraph graph_;
    std::vector<std::vector<double>> rho_, f_, g_;
    std::vector<std::vector<double>> kernels_;
    std::vector<std::vector<int>> nbhd_;
};

} // namespace dspd
