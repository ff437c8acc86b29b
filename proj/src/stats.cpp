#include "cldsim/stats.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>

namespace cldsim {

double density(const CausalGraph& g) {
  const double n = static_cast<double>(g.node_count());
  if (g.node_count() < 2) return 0.0;
  return static_cast<double>(g.edge_count()) / (n * (n - 1.0));
}

double transitivity(const CausalGraph& g) {
  const auto adj = g.undirected_neighbors();
  const std::size_t n = adj.size();
  std::vector<char> mark(n, 0);
  std::size_t closed = 0;  // each triangle counted once per corner
  std::size_t triples = 0;
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t d = adj[v].size();
    triples += d * (d - (d > 0 ? 1 : 0)) / 2;
    for (std::size_t w : adj[v]) mark[w] = 1;
    for (std::size_t i = 0; i < adj[v].size(); ++i) {
      for (std::size_t x : adj[adj[v][i]]) {
        if (x > adj[v][i] && mark[x]) ++closed;
      }
    }
    for (std::size_t w : adj[v]) mark[w] = 0;
  }
  if (triples == 0) return 0.0;
  // closed == 3 * triangles
  return static_cast<double>(closed) / static_cast<double>(triples);
}

namespace {

// Unit-capacity max flow on the split-vertex network of the undirected
// projection. Vertex v becomes in(v)=2v -> out(v)=2v+1 with capacity 1, and
// each undirected edge {a,b} becomes out(a)->in(b) and out(b)->in(a).
class SplitFlowNetwork {
 public:
  explicit SplitFlowNetwork(const CausalGraph& g) : n_(g.node_count()) {
    const std::size_t size = 2 * n_;
    base_.assign(size * size, 0);
    neighbors_.assign(size, {});
    auto link = [&](std::size_t a, std::size_t b) {
      base_[a * size + b] += 1;
      neighbors_[a].push_back(b);
      neighbors_[b].push_back(a);
    };
    for (std::size_t v = 0; v < n_; ++v) link(2 * v, 2 * v + 1);
    const auto adj = g.undirected_neighbors();
    for (std::size_t a = 0; a < n_; ++a) {
      for (std::size_t b : adj[a]) link(2 * a + 1, 2 * b);
    }
    for (auto& row : neighbors_) {
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end()), row.end());
    }
  }

  std::size_t max_flow(std::size_t u, std::size_t v) const {
    const std::size_t size = 2 * n_;
    std::vector<int> residual = base_;
    const std::size_t source = 2 * u + 1;
    const std::size_t sink = 2 * v;
    std::size_t flow = 0;
    std::vector<std::size_t> parent(size);
    const std::size_t none = std::numeric_limits<std::size_t>::max();
    while (true) {
      std::fill(parent.begin(), parent.end(), none);
      parent[source] = source;
      std::queue<std::size_t> frontier;
      frontier.push(source);
      while (!frontier.empty() && parent[sink] == none) {
        std::size_t a = frontier.front();
        frontier.pop();
        for (std::size_t b : neighbors_[a]) {
          if (parent[b] == none && residual[a * size + b] > 0) {
            parent[b] = a;
            frontier.push(b);
          }
        }
      }
      if (parent[sink] == none) return flow;
      for (std::size_t b = sink; b != source; b = parent[b]) {
        std::size_t a = parent[b];
        residual[a * size + b] -= 1;
        residual[b * size + a] += 1;
      }
      ++flow;
    }
  }

 private:
  std::size_t n_;
  std::vector<int> base_;
  std::vector<std::vector<std::size_t>> neighbors_;
};

}  // namespace

std::size_t local_node_connectivity(const CausalGraph& g, std::size_t u, std::size_t v) {
  if (u >= g.node_count() || v >= g.node_count() || u == v) {
    throw Error(ErrorKind::invalid_input, "local connectivity needs two distinct nodes");
  }
  return SplitFlowNetwork(g).max_flow(u, v);
}

double average_connectivity(const CausalGraph& g) {
  const std::size_t n = g.node_count();
  if (n < 2) throw Error(ErrorKind::undefined_statistic, "average connectivity needs at least 2 nodes");
  SplitFlowNetwork net(g);
  std::size_t total = 0;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) total += net.max_flow(u, v);
  }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return static_cast<double>(total) / pairs;
}

namespace {

// Strongly connected component of `start` within the subgraph induced by
// vertices >= start.
std::vector<char> component_from(const CausalGraph& g, std::size_t start) {
  const std::size_t n = g.node_count();
  std::vector<char> fwd(n, 0), bwd(n, 0);
  auto sweep = [&](std::vector<char>& seen, bool forward) {
    std::vector<std::size_t> stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
      std::size_t a = stack.back();
      stack.pop_back();
      const auto& next = forward ? g.successors(a) : g.predecessors(a);
      for (std::size_t b : next) {
        if (b >= start && !seen[b]) {
          seen[b] = 1;
          stack.push_back(b);
        }
      }
    }
  };
  sweep(fwd, true);
  sweep(bwd, false);
  std::vector<char> comp(n, 0);
  for (std::size_t v = 0; v < n; ++v) comp[v] = fwd[v] && bwd[v];
  return comp;
}

class JohnsonCycles {
 public:
  JohnsonCycles(const CausalGraph& g, std::size_t cap)
      : g_(g), cap_(cap), blocked_(g.node_count(), 0), blocker_of_(g.node_count()) {}

  std::size_t run() {
    const std::size_t n = g_.node_count();
    for (std::size_t s = 0; s < n; ++s) {
      component_ = component_from(g_, s);
      if (std::count(component_.begin(), component_.end(), 1) < 2) continue;
      std::fill(blocked_.begin(), blocked_.end(), 0);
      for (auto& b : blocker_of_) b.clear();
      start_ = s;
      circuit(s);
    }
    return found_;
  }

 private:
  void unblock(std::size_t v) {
    blocked_[v] = 0;
    auto waiting = std::move(blocker_of_[v]);
    blocker_of_[v].clear();
    for (std::size_t w : waiting) {
      if (blocked_[w]) unblock(w);
    }
  }

  bool circuit(std::size_t v) {
    bool closed = false;
    blocked_[v] = 1;
    for (std::size_t w : g_.successors(v)) {
      if (!component_[w]) continue;
      if (w == start_) {
        if (++found_ > cap_) {
          throw Error(ErrorKind::resource_limit,
                      "more than " + std::to_string(cap_) + " simple cycles; raise the cycle cap");
        }
        closed = true;
      } else if (!blocked_[w] && circuit(w)) {
        closed = true;
      }
    }
    if (closed) {
      unblock(v);
    } else {
      for (std::size_t w : g_.successors(v)) {
        if (!component_[w]) continue;
        auto& list = blocker_of_[w];
        if (std::find(list.begin(), list.end(), v) == list.end()) list.push_back(v);
      }
    }
    return closed;
  }

  const CausalGraph& g_;
  std::size_t cap_;
  std::size_t start_ = 0;
  std::size_t found_ = 0;
  std::vector<char> component_;
  std::vector<char> blocked_;
  std::vector<std::vector<std::size_t>> blocker_of_;
};

}  // namespace

std::size_t count_cycles(const CausalGraph& g, std::size_t cap) {
  return JohnsonCycles(g, cap).run();
}

GraphStats stats(const CausalGraph& g, std::size_t cycle_cap) {
  GraphStats s;
  s.nodes = g.node_count();
  s.edges = g.edge_count();
  s.cycles = count_cycles(g, cycle_cap);
  s.density = density(g);
  s.transitivity = transitivity(g);
  if (s.nodes >= 2) s.avg_connectivity = average_connectivity(g);
  return s;
}

}  // namespace cldsim
