#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dspd/errors.hpp"
#include "dspd/graph.hpp"
#include "dspd/model.hpp"

namespace dspd {

/// Which agent set the constraint reward counts. The literal notation
/// N^E_{-i} denotes the complement of the environmental neighborhood,
/// which is the default; the all-others reading (everyone but i) is kept
/// behind this switch because the notation is ambiguous on the source
/// side. The active reading is echoed into run_meta output.
enum class GReading { complement, all_others };

inline const char* to_string(GReading r) {
    return r == GReading::complement ? "complement" : "all_others";
}

struct GridWorldSpec {
    int width = 5;
    int height = 5;
    int target_x = 4;
    int target_y = 0;
    std::vector<std::pair<int, int>> starts = {{2, 1}, {3, 1}, {2, 2}, {1, 0}};
    double chi_max = 0.1;
    double chi_min = 0.02;
    double gamma = 0.9;
    double constraint = -5.0;          // c_i, same for every agent
    GReading g_reading = GReading::complement;
    bool chi_neighborhood_includes_self = true;
};

/// Stochastic multi-agent GridWorld on a bidirectional chain of agents.
///
/// Cells are indexed row-major as y*width + x with x rightward and y
/// upward; one extra sentinel state (index width*height) marks an agent
/// that was absorbed at the target on an earlier step, so the "10 on the
/// arrival step, 0 afterwards" reward rule stays a pure function of the
/// state. Coordinates leaving the grid are clamped to the boundary.
class GridWorldModel final : public CmarlModel {
  public:
    explicit GridWorldModel(GridWorldSpec spec = {})
        : spec_(std::move(spec)),
          n_(static_cast<int>(spec_.starts.size())),
          cells_(spec_.width * spec_.height),
          graph_(DirectedGraph::chain_bidirectional(n_)),
          c_(n_, spec_.constraint) {
        if (spec_.width < 1 || spec_.height < 1) throw ConfigError("gridworld: empty grid");
        if (spec_.chi_min > spec_.chi_max || spec_.chi_min < 0.0 || spec_.chi_max > 1.0)
            throw ConfigError("gridworld: need 0 <= chi_min <= chi_max <= 1");
        if (spec_.gamma <= 0.0 || spec_.gamma >= 1.0)
            throw ConfigError("gridworld: gamma must lie in (0,1)");
        goal_ = cell_index(spec_.target_x, spec_.target_y);
        for (auto [x, y] : spec_.starts)
            if (x < 0 || x >= spec_.width || y < 0 || y >= spec_.height)
                throw ConfigError("gridworld: start position off the grid");
        // max distance to target over the grid bounds the move penalty
        double far = 0.0;
        for (int x = 0; x < spec_.width; ++x)
            for (int y = 0; y < spec_.height; ++y)
                far = std::max(far, distance_to_goal(x, y));
        rf_ = std::max(10.0, 1.0 + far);
        rg_ = 5.0 * (n_ - 1);
        nbh_.resize(n_);
        gset_.resize(n_);
        for (int i = 0; i < n_; ++i) {
            nbh_[i] = k_hop_neighborhood(graph_, i, 1);
            if (!spec_.chi_neighborhood_includes_self)
                std::erase(nbh_[i], i);
            if (spec_.g_reading == GReading::complement) {
                gset_[i] = exclusion_sets(graph_, i, 1, i).second; // N \ N^E_i
            } else {
                for (int j = 0; j < n_; ++j)
                    if (j != i) gset_[i].push_back(j);
            }
        }
    }

    static constexpr int kUp = 0, kDown = 1, kLeft = 2, kRight = 3, kStay = 4;

    int num_agents() const override { return n_; }
    int num_states(int) const override { return cells_ + 1; } // + absorbed sentinel
    int num_policy_states(int) const override { return cells_; }
    int num_actions(int) const override { return 5; }
    const DirectedGraph& env_graph() const override { return graph_; }
    double gamma() const override { return spec_.gamma; }
    double reward_bound_f() const override { return rf_; }
    double reward_bound_g() const override { return rg_; }
    const std::vector<double>& constraint_thresholds() const override { return c_; }
    const GridWorldSpec& spec() const { return spec_; }
    int goal_cell() const { return goal_; }
    int absorbed_state() const { return cells_; }

    GlobalState initial_state(RngStream&) const override {
        GlobalState s(n_);
        for (int i = 0; i < n_; ++i) s[i] = cell_index(spec_.starts[i].first, spec_.starts[i].second);
        return s;
    }

    GlobalState transition(const GlobalState& s, const JointAction& a,
                           RngStream& rng) const override {
        GlobalState next(n_);
        for (int i = 0; i < n_; ++i) {
            if (s[i] == absorbed_state() || s[i] == goal_) {
                next[i] = absorbed_state();
                continue;
            }
            const double chi = perturbation_rate(i, s);
            int dx = 0, dy = 0;
            action_delta(a[i], dx, dy);
            const double u = rng.uniform01();
            if (u >= 1.0 - chi) {
                // uniform over the four unit perturbations
                const int which = static_cast<int>((u - (1.0 - chi)) / (chi / 4.0));
                switch (which < 4 ? which : 3) {
                    case 0: dy += 1; break;
                    case 1: dy -= 1; break;
                    case 2: dx -= 1; break;
                    default: dx += 1; break;
                }
            }
            const int x = clamp_coord(cell_x(s[i]) + dx, spec_.width);
            const int y = clamp_coord(cell_y(s[i]) + dy, spec_.height);
            next[i] = cell_index(x, y);
        }
        return next;
    }

    RewardPair rewards(const GlobalState& s, const JointAction&) const override {
        RewardPair r;
        r.f.resize(n_);
        r.g.resize(n_);
        for (int i = 0; i < n_; ++i) {
            if (s[i] == absorbed_state()) {
                r.f[i] = 0.0;
                r.g[i] = 0.0;
                continue;
            }
            if (s[i] == goal_) {
                r.f[i] = 10.0;
            } else {
                r.f[i] = -1.0 - distance_to_goal(cell_x(s[i]), cell_y(s[i]));
            }
            int off_goal = 0;
            for (int j : gset_[i])
                if (!at_goal(s[j])) ++off_goal;
            r.g[i] = -5.0 * static_cast<double>(off_goal);
        }
        return r;
    }

    /// Perturbation probability for agent i in state s: interpolates from
    /// chi_max down to chi_min as the environmental neighbors reach the
    /// goal.
    double perturbation_rate(int i, const GlobalState& s) const {
        int done = 0;
        for (int j : nbh_[i])
            if (at_goal(s[j])) ++done;
        const double frac = static_cast<double>(done) / static_cast<double>(nbh_[i].size());
        return spec_.chi_max - (spec_.chi_max - spec_.chi_min) * frac;
    }

    bool at_goal(int state) const { return state == goal_ || state == absorbed_state(); }

    int cell_index(int x, int y) const { return y * spec_.width + x; }
    int cell_x(int cell) const { return cell % spec_.width; }
    int cell_y(int cell) const { return cell / spec_.width; }

    double distance_to_goal(int x, int y) const {
        const double dx = x - spec_.target_x, dy = y - spec_.target_y;
        return std::sqrt(dx * dx + dy * dy);
    }

    static void action_delta(int a, int& dx, int& dy) {
        switch (a) {
            case kUp: dx = 0; dy = 1; break;
            case kDown: dx = 0; dy = -1; break;
            case kLeft: dx = -1; dy = 0; break;
            case kRight: dx = 1; dy = 0; break;
            case kStay: dx = 0; dy = 0; break;
            default: throw ContractError("gridworld: bad action index " + std::to_string(a));
        }
    }

    /// Discounted return of the perturbation-free shortest-path walk from
    /// each start, averaged over agents. Deterministic value iteration on
    /// the single-agent grid; used as the learning-progress yardstick.
    double deterministic_upper_bound() const {
        const int cap = cells_;
        std::vector<double> v(cap + 1, 0.0), next(cap + 1, 0.0);
        for (int sweep = 0; sweep < 4 * (spec_.width + spec_.height); ++sweep) {
            for (int cell = 0; cell <= cap; ++cell) {
                if (cell == cap) { next[cell] = 0.0; continue; }
                if (cell == goal_) { next[cell] = 10.0; continue; } // then absorbed at 0
                double best = -1e300;
                for (int a = 0; a < 5; ++a) {
                    int dx = 0, dy = 0;
                    action_delta(a, dx, dy);
                    const int x = clamp_coord(cell_x(cell) + dx, spec_.width);
                    const int y = clamp_coord(cell_y(cell) + dy, spec_.height);
                    best = std::max(best, spec_.gamma * v[cell_index(x, y)]);
                }
                next[cell] = -1.0 - distance_to_goal(cell_x(cell), cell_y(cell)) + best;
            }
            v.swap(next);
        }
        double total = 0.0;
        for (auto [x, y] : spec_.starts) total += v[cell_index(x, y)];
        return total / static_cast<double>(n_);
    }

  private:
    static int clamp_coord(int v, int extent) { return std::min(std::max(v, 0), extent - 1); }

    GridWorldSpec spec_;
    int n_, cells_, goal_ = 0;
    double rf_ = 0.0, rg_ = 0.0;
    DirectedGraph graph_;
    std::vector<double> c_;
    std::vector<std::vector<int>> nbh_;  // chi neighborhoods
    std::vector<std::vector<int>> gset_; // constraint-reward agent sets
};

} // namespace dspd
