#pragma once

#include <functional>
#include <vector>

#include "dspd/errors.hpp"
#include "dspd/graph.hpp"
#include "dspd/model.hpp"
#include "dspd/rng.hpp"

namespace dspd {

/// Draws a geometric horizon with the failures-before-first-success
/// convention: P(T = t) = (1-p)^t p, so P(T >= t) = (1-p)^t. When capped,
/// the draw is truncated and the event is reported to the caller via the
/// flag; capped draws are kept, not resampled.
struct HorizonDraw {
    long t;
    bool capped;
};

inline HorizonDraw draw_horizon(double success_prob, RngStream& rng, long cap = -1) {
    long t = rng.geometric(success_prob);
    if (cap >= 0 && t > cap) return {cap, true};
    return {t, false};
}

/// Default cap: 10x the mean of the geometric distribution, at least 1.
inline long default_horizon_cap(double success_prob) {
    if (success_prob >= 1.0) return 1;
    const double mean = (1.0 - success_prob) / success_prob;
    return std::max<long>(1, static_cast<long>(10.0 * mean));
}

/// A sampled episode: states, actions and rewards at t = 0..T inclusive
/// ("length T" carries T+1 records). split marks the boundary of the
/// 2-horizon scheme (the state at split is shared by both halves).
struct Trajectory {
    std::vector<GlobalState> states;
    std::vector<JointAction> actions;
    std::vector<RewardPair> rewards;
    long split = -1;

    long horizon() const { return static_cast<long>(states.size()) - 1; }
};

/// Rolls out `horizon`+1 steps from s_0 ~ rho. The action sampler is any
/// callable (const GlobalState&, RngStream&) -> JointAction.
template <class ActionSampler>
Trajectory rollout(const CmarlModel& model, ActionSampler&& sample, long horizon,
                   RngStream& rng) {
    if (horizon < 0) throw ContractError("rollout: horizon must be >= 0");
    Trajectory traj;
    traj.states.reserve(horizon + 1);
    traj.actions.reserve(horizon + 1);
    traj.rewards.reserve(horizon + 1);
    GlobalState s = model.initial_state(rng);
    for (long t = 0; t <= horizon; ++t) {
        JointAction a = sample(s, rng);
        traj.rewards.push_back(model.rewards(s, a));
        traj.states.push_back(s);
        traj.actions.push_back(a);
        if (t < horizon) s = model.transition(s, a, rng);
    }
    return traj;
}

/// Locality-filtered projection of a trajectory for one agent: state-action
/// data restricted to N^{2 kappa_p}_i and reward data restricted to
/// N^{kappa + 2 kappa_p}_i. Data outside those sets is never copied in,
/// and accessors refuse out-of-range agents outright, so estimator code
/// physically cannot depend on forbidden information.
class AgentView {
  public:
    AgentView(const Trajectory& traj, int agent, int kappa, int kappa_p,
              const DirectedGraph& env_graph)
        : agent_(agent),
          horizon_(traj.horizon()),
          split_(traj.split),
          n_(env_graph.num_agents()),
          sa_agents_(k_hop_neighborhood(env_graph, agent, 2 * kappa_p)),
          rw_agents_(k_hop_neighborhood(env_graph, agent, kappa + 2 * kappa_p)) {
        sa_slot_.assign(n_, -1);
        rw_slot_.assign(n_, -1);
        for (std::size_t k = 0; k < sa_agents_.size(); ++k) sa_slot_[sa_agents_[k]] = static_cast<int>(k);
        for (std::size_t k = 0; k < rw_agents_.size(); ++k) rw_slot_[rw_agents_[k]] = static_cast<int>(k);
        const long len = horizon_ + 1;
        states_.resize(sa_agents_.size() * len);
        actions_.resize(sa_agents_.size() * len);
        f_.resize(rw_agents_.size() * len);
        g_.resize(rw_agents_.size() * len);
        for (long t = 0; t < len; ++t) {
            for (std::size_t k = 0; k < sa_agents_.size(); ++k) {
                states_[k * len + t] = traj.states[t][sa_agents_[k]];
                actions_[k * len + t] = traj.actions[t][sa_agents_[k]];
            }
            for (std::size_t k = 0; k < rw_agents_.size(); ++k) {
                f_[k * len + t] = traj.rewards[t].f[rw_agents_[k]];
                g_[k * len + t] = traj.rewards[t].g[rw_agents_[k]];
            }
        }
    }

    int agent() const { return agent_; }
    long horizon() const { return horizon_; }
    long split() const { return split_; }
    const std::vector<int>& state_action_agents() const { return sa_agents_; }
    const std::vector<int>& reward_agents() const { return rw_agents_; }

    int state(int j, long t) const { return states_[sa_index(j, t)]; }
    int action(int j, long t) const { return actions_[sa_index(j, t)]; }
    double f(int j, long t) const { return f_[rw_index(j, t)]; }
    double g(int j, long t) const { return g_[rw_index(j, t)]; }

  private:
    std::size_t sa_index(int j, long t) const {
        check_time(t);
        if (j < 0 || j >= n_ || sa_slot_[j] < 0)
            throw LocalityError("agent " + std::to_string(agent_) +
                                " has no state-action access to agent " + std::to_string(j));
        return static_cast<std::size_t>(sa_slot_[j]) * (horizon_ + 1) + t;
    }

    std::size_t rw_index(int j, long t) const {
        check_time(t);
        if (j < 0 || j >= n_ || rw_slot_[j] < 0)
            throw LocalityError("agent " + std::to_string(agent_) +
                                " has no reward access to agent " + std::to_string(j));
        return static_cast<std::size_t>(rw_slot_[j]) * (horizon_ + 1) + t;
    }

    void check_time(long t) const {
        if (t < 0 || t > horizon_)
            throw ContractError("view: time index " + std::to_string(t) + " out of range");
    }

    int agent_;
    long horizon_, split_;
    int n_;
    std::vector<int> sa_agents_, rw_agents_;
    std::vector<int> sa_slot_, rw_slot_;
    std::vector<int> states_, actions_;
    std::vector<double> f_, g_;
};

inline AgentView agent_view(const Trajectory& traj, int agent, int kappa, int kappa_p,
                            const DirectedGraph& env_graph) {
    return AgentView(traj, agent, kappa, kappa_p, env_graph);
}

} // namespace dspd
