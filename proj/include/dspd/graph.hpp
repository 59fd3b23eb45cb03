#pragma once

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dspd/errors.hpp"

namespace dspd {

/// Directed communication graph. An edge (j -> i) means agent i receives
/// from agent j. Agents are 0-based internally; the "j i" text format used
/// in run configs is 1-based.
class DirectedGraph {
  public:
    DirectedGraph() = default;

    DirectedGraph(int n, const std::vector<std::pair<int, int>>& edges_from_to) : n_(n) {
        if (n <= 0) throw ConfigError("graph: agent count must be positive");
        in_.resize(n);
        out_.resize(n);
        std::set<std::pair<int, int>> seen;
        for (auto [from, to] : edges_from_to) {
            check_agent(from);
            check_agent(to);
            if (!seen.insert({from, to}).second) continue; // ignore duplicates
            in_[to].push_back(from);
            out_[from].push_back(to);
        }
        for (auto& v : in_) std::sort(v.begin(), v.end());
        for (auto& v : out_) std::sort(v.begin(), v.end());
    }

    static DirectedGraph chain_bidirectional(int n) {
        std::vector<std::pair<int, int>> e;
        for (int i = 0; i + 1 < n; ++i) {
            e.push_back({i, i + 1});
            e.push_back({i + 1, i});
        }
        return DirectedGraph(n, e);
    }

    static DirectedGraph complete_with_self_loops(int n) {
        std::vector<std::pair<int, int>> e;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) e.push_back({i, j});
        return DirectedGraph(n, e);
    }

    /// Parses an adjacency-list text block, one edge "j i" per line
    /// (1-based), meaning agent i receives from agent j. '#' starts a
    /// comment.
    static DirectedGraph from_edge_list_text(int n, const std::string& text) {
        std::vector<std::pair<int, int>> e;
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            std::istringstream ls(line);
            long j = 0, i = 0;
            if (!(ls >> j)) continue; // blank line
            if (!(ls >> i)) throw ConfigError("graph: edge line needs two indices: '" + line + "'");
            std::string extra;
            if (ls >> extra) throw ConfigError("graph: trailing tokens on edge line: '" + line + "'");
            if (j < 1 || j > n || i < 1 || i > n)
                throw ConfigError("graph: agent index out of range [1.." + std::to_string(n) +
                                  "] on line '" + line + "'");
            e.push_back({static_cast<int>(j - 1), static_cast<int>(i - 1)});
        }
        return DirectedGraph(n, e);
    }

    DirectedGraph with_self_loops() const {
        std::vector<std::pair<int, int>> e = edges();
        for (int i = 0; i < n_; ++i) e.push_back({i, i});
        return DirectedGraph(n_, e);
    }

    int num_agents() const { return n_; }

    /// In-neighbors of i (agents i receives from), sorted.
    const std::vector<int>& in_neighbors(int i) const {
        check_agent(i);
        return in_[i];
    }

    /// Out-neighbors of j (agents that receive from j), sorted.
    const std::vector<int>& out_neighbors(int j) const {
        check_agent(j);
        return out_[j];
    }

    std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> e;
        for (int j = 0; j < n_; ++j)
            for (int i : out_[j]) e.push_back({j, i});
        return e;
    }

    bool has_edge(int from, int to) const {
        check_agent(from);
        check_agent(to);
        return std::binary_search(out_[from].begin(), out_[from].end(), to);
    }

    /// BFS distances toward i along the receive-from orientation: d(j) is
    /// the length of the shortest directed path j -> ... -> i.
    std::vector<int> distances_to(int i) const {
        check_agent(i);
        std::vector<int> dist(n_, -1);
        std::deque<int> queue{i};
        dist[i] = 0;
        while (!queue.empty()) {
            const int v = queue.front();
            queue.pop_front();
            for (int u : in_[v]) {
                if (dist[u] < 0) {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        return dist;
    }

    bool strongly_connected() const {
        auto reach = [&](const std::vector<std::vector<int>>& adj) {
            std::vector<char> vis(n_, 0);
            std::deque<int> queue{0};
            vis[0] = 1;
            int count = 1;
            while (!queue.empty()) {
                const int v = queue.front();
                queue.pop_front();
                for (int u : adj[v])
                    if (!vis[u]) {
                        vis[u] = 1;
                        ++count;
                        queue.push_back(u);
                    }
            }
            return count == n_;
        };
        return reach(out_) && reach(in_);
    }

  private:
    void check_agent(int i) const {
        if (i < 0 || i >= n_)
            throw ContractError("graph: agent index " + std::to_string(i) + " out of range");
    }

    int n_ = 0;
    std::vector<std::vector<int>> in_, out_;
};

/// N^kappa_i: agents whose graph distance to i is at most kappa, always
/// including i itself. Sorted ascending.
inline std::vector<int> k_hop_neighborhood(const DirectedGraph& g, int i, int kappa) {
    if (kappa < 0) throw ContractError("k_hop_neighborhood: kappa must be >= 0");
    const auto dist = g.distances_to(i);
    std::vector<int> out;
    for (int j = 0; j < g.num_agents(); ++j)
        if (dist[j] >= 0 && dist[j] <= kappa) out.push_back(j);
    return out;
}

/// (N^kappa_{i,-j}, N^kappa_{-i}): the kappa-neighborhood of i minus {j},
/// and the complement of the kappa-neighborhood in the agent set.
inline std::pair<std::vector<int>, std::vector<int>>
exclusion_sets(const DirectedGraph& g, int i, int kappa, int j) {
    const auto nbh = k_hop_neighborhood(g, i, kappa);
    std::vector<int> minus_j;
    for (int v : nbh)
        if (v != j) minus_j.push_back(v);
    std::vector<int> complement;
    std::size_t pos = 0;
    for (int v = 0; v < g.num_agents(); ++v) {
        while (pos < nbh.size() && nbh[pos] < v) ++pos;
        if (pos == nbh.size() || nbh[pos] != v) complement.push_back(v);
    }
    return {minus_j, complement};
}

/// Column-stochastic push-sum weight matrix: entry (i,j) = 1/|out(j)| when
/// i is an out-neighbor of j, 0 otherwise.
class WeightMatrix {
  public:
    explicit WeightMatrix(Eigen::MatrixXd w) : w_(std::move(w)) {
        for (Eigen::Index c = 0; c < w_.cols(); ++c) {
            const double colsum = w_.col(c).sum();
            if (std::abs(colsum - 1.0) > 1e-12)
                throw ProtocolError("weight matrix column " + std::to_string(c) +
                                    " sums to " + std::to_string(colsum));
            if ((w_.col(c).array() < 0.0).any())
                throw ProtocolError("weight matrix has a negative entry");
        }
    }

    const Eigen::MatrixXd& matrix() const { return w_; }
    double operator()(int i, int j) const { return w_(i, j); }
    int size() const { return static_cast<int>(w_.rows()); }

  private:
    Eigen::MatrixXd w_;
};

inline WeightMatrix weight_matrix(const DirectedGraph& g) {
    const int n = g.num_agents();
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        const auto& out = g.out_neighbors(j);
        if (out.empty())
            throw ConfigError("weight_matrix: agent " + std::to_string(j + 1) +
                              " has an empty out-neighborhood (missing self-loop?)");
        const double share = 1.0 / static_cast<double>(out.size());
        for (int i : out) w(i, j) = share;
    }
    return WeightMatrix(std::move(w));
}

/// Sequence of learning graphs indexed by iteration m >= 1; cyclic when
/// used past its length. Learning graphs are normalized to contain a
/// self-loop on every agent: push-sum needs each node to retain mass.
class TimeVaryingSchedule {
  public:
    TimeVaryingSchedule(std::vector<DirectedGraph> graphs, int window)
        : graphs_(std::move(graphs)), window_(window) {
        if (graphs_.empty()) throw ConfigError("schedule: needs at least one graph");
        if (window_ < 1) throw ConfigError("schedule: window D must be >= 1");
        const int n = graphs_.front().num_agents();
        for (auto& g : graphs_) {
            if (g.num_agents() != n)
                throw ConfigError("schedule: all graphs must share the agent count");
            g = g.with_self_loops();
        }
    }

    int num_agents() const { return graphs_.front().num_agents(); }
    int period() const { return static_cast<int>(graphs_.size()); }
    int window() const { return window_; }

    /// Graph used at iteration m (1-based).
    const DirectedGraph& graph(long m) const {
        if (m < 1) throw ContractError("schedule: iteration index starts at 1");
        return graphs_[static_cast<std::size_t>((m - 1) % period())];
    }

  private:
    std::vector<DirectedGraph> graphs_;
    int window_;
};

/// True iff the union of edges over every window of D consecutive graphs
/// is strongly connected. For a cyclic schedule it is enough to check one
/// full period of window alignments.
inline bool is_uniformly_strongly_connected(const TimeVaryingSchedule& sched, int window) {
    if (window < 1) throw ContractError("window D must be >= 1");
    const int n = sched.num_agents();
    const int period = sched.period();
    const long cycles = std::lcm<long>(period, window) / window;
    for (long k = 0; k < cycles; ++k) {
        std::set<std::pair<int, int>> uni;
        for (long m = k * window + 1; m <= (k + 1) * window; ++m)
            for (auto e : sched.graph(m).edges()) uni.insert(e);
        DirectedGraph u(n, {uni.begin(), uni.end()});
        if (!u.strongly_connected()) return false;
    }
    return true;
}

inline bool is_uniformly_strongly_connected(const TimeVaryingSchedule& sched) {
    return is_uniformly_strongly_connected(sched, sched.window());
}

} // namespace dspd
