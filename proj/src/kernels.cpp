#include "cldsim/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "cldsim/error.hpp"

namespace cldsim {

// ---------------------------------------------------------------------------
// Configuration

double KernelConfig::subgraph_weight(std::size_t size) const {
  if (size == 0) return 0.0;
  return size <= subgraph_weights.size() ? subgraph_weights[size - 1] : 1.0;
}

void KernelConfig::validate() const {
  auto bad = [](const std::string& msg) { throw Error(ErrorKind::invalid_input, msg); };
  if (wl_iterations < 0) bad("wl_iterations must be >= 0");
  if (pyramid_dims < 1) bad("pyramid_dims must be >= 1");
  if (pyramid_levels < 1 || pyramid_levels > 30) bad("pyramid_levels must be in [1, 30]");
  if (subgraph_max_size < 1 || subgraph_max_size > 4) bad("subgraph_max_size must be in [1, 4]");
  for (double w : subgraph_weights) {
    if (!std::isfinite(w) || w < 0.0) bad("subgraph_weights must be finite and >= 0");
  }
  if (product_graph_cap < 1) bad("product_graph_cap must be >= 1");
}

KernelConfig parse_kernel_config(std::string_view json_text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::malformed_input, std::string("kernel config: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::malformed_input, "kernel config: expected an object");
  KernelConfig cfg;
  auto int_field = [&](const std::string& key, int& target) {
    const auto& v = doc[key];
    if (!v.is_number_integer()) throw Error(ErrorKind::malformed_input, "kernel config: " + key + " must be an integer");
    target = v.get<int>();
  };
  for (const auto& [key, value] : doc.items()) {
    if (key == "wl_iterations") {
      int_field(key, cfg.wl_iterations);
    } else if (key == "pyramid_dims") {
      int_field(key, cfg.pyramid_dims);
    } else if (key == "pyramid_levels") {
      int_field(key, cfg.pyramid_levels);
    } else if (key == "subgraph_max_size") {
      int_field(key, cfg.subgraph_max_size);
    } else if (key == "subgraph_weights") {
      if (!value.is_array()) throw Error(ErrorKind::malformed_input, "kernel config: subgraph_weights must be an array");
      cfg.subgraph_weights.clear();
      for (const auto& w : value) {
        if (!w.is_number()) throw Error(ErrorKind::malformed_input, "kernel config: subgraph_weights must be numbers");
        cfg.subgraph_weights.push_back(w.get<double>());
      }
    } else if (key == "use_polarity_in_g2_g3") {
      if (!value.is_boolean()) throw Error(ErrorKind::malformed_input, "kernel config: " + key + " must be a boolean");
      cfg.use_polarity_in_g2_g3 = value.get<bool>();
    } else if (key == "product_graph_cap") {
      if (!value.is_number_unsigned()) {
        throw Error(ErrorKind::malformed_input, "kernel config: product_graph_cap must be a positive integer");
      }
      cfg.product_graph_cap = value.get<std::size_t>();
    } else {
      throw Error(ErrorKind::malformed_input, "kernel config: unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

std::string kernel_config_json(const KernelConfig& cfg) {
  nlohmann::json weights = nlohmann::json::array();
  for (int s = 1; s <= cfg.subgraph_max_size; ++s) weights.push_back(cfg.subgraph_weight(static_cast<std::size_t>(s)));
  nlohmann::ordered_json doc = {
      {"wl_iterations", cfg.wl_iterations},
      {"pyramid_dims", cfg.pyramid_dims},
      {"pyramid_levels", cfg.pyramid_levels},
      {"subgraph_max_size", cfg.subgraph_max_size},
      {"subgraph_weights", weights},
      {"use_polarity_in_g2_g3", cfg.use_polarity_in_g2_g3},
      {"product_graph_cap", cfg.product_graph_cap},
  };
  return doc.dump();
}

double normalize_kernel(double kxy, double kxx, double kyy) {
  if (kxx < 0.0 || kyy < 0.0) throw Error(ErrorKind::internal, "negative self-kernel");
  if (kxx == 0.0 || kyy == 0.0) return 0.0;
  if (kxy == kxx && kxx == kyy) return 1.0;
  return std::clamp(kxy / std::sqrt(kxx * kyy), 0.0, 1.0);
}

namespace {

template <typename Key>
double dot(const std::map<Key, double>& a, const std::map<Key, double>& b) {
  double sum = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      sum += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  return sum;
}

template <typename Key>
RawKernel raw_from(const std::map<Key, double>& a, const std::map<Key, double>& b) {
  return {dot(a, b), dot(a, a), dot(b, b)};
}

void accumulate(RawKernel& total, const RawKernel& part) {
  total.cross += part.cross;
  total.self_a += part.self_a;
  total.self_b += part.self_b;
}

// ---------------------------------------------------------------------------
// Weisfeiler-Lehman relabeling shared by g4 and g5. Both graphs are relabeled
// with one dictionary per round so equal labels mean equal subtrees.

using Labels = std::vector<int>;

class JointRelabeling {
 public:
  JointRelabeling(const CausalGraph& a, const CausalGraph& b, Labels init_a, Labels init_b)
      : graphs_{&a, &b}, labels_{std::move(init_a), std::move(init_b)} {}

  const Labels& labels(std::size_t which) const { return labels_[which]; }

  void step() {
    using Signature = std::pair<int, std::vector<std::pair<int, int>>>;
    std::map<Signature, int> dictionary;
    std::array<Labels, 2> next;
    for (std::size_t w = 0; w < 2; ++w) {
      const CausalGraph& g = *graphs_[w];
      const Labels& cur = labels_[w];
      next[w].resize(g.node_count());
      for (std::size_t v = 0; v < g.node_count(); ++v) {
        Signature sig{cur[v], {}};
        for (std::size_t s : g.successors(v)) sig.second.emplace_back(0, cur[s]);
        for (std::size_t p : g.predecessors(v)) sig.second.emplace_back(1, cur[p]);
        std::sort(sig.second.begin(), sig.second.end());
        auto [it, inserted] = dictionary.emplace(std::move(sig), static_cast<int>(dictionary.size()));
        next[w][v] = it->second;
      }
    }
    labels_ = std::move(next);
  }

 private:
  std::array<const CausalGraph*, 2> graphs_;
  std::array<Labels, 2> labels_;
};

std::pair<Labels, Labels> name_labels(const CausalGraph& a, const CausalGraph& b) {
  std::map<std::string, int> ids;
  auto assign = [&](const CausalGraph& g) {
    Labels out;
    for (const Node& n : g.nodes()) out.push_back(ids.emplace(n.name, static_cast<int>(ids.size())).first->second);
    return out;
  };
  Labels la = assign(a);
  Labels lb = assign(b);
  return {std::move(la), std::move(lb)};
}

std::map<int, double> vertex_histogram(const Labels& labels) {
  std::map<int, double> h;
  for (int l : labels) h[l] += 1.0;
  return h;
}

using EdgeFeature = std::tuple<int, int, int>;

std::map<EdgeFeature, double> edge_histogram(const CausalGraph& g, const Labels& labels) {
  std::map<EdgeFeature, double> h;
  for (const Edge& e : g.edges()) {
    h[{labels[e.src], labels[e.dst], e.polarity == Polarity::positive ? 0 : 1}] += 1.0;
  }
  return h;
}

bool either_empty(const CausalGraph& a, const CausalGraph& b) { return a.empty() || b.empty(); }

}  // namespace

RawKernel wl_vertex_histogram_raw(const CausalGraph& a, const CausalGraph& b, const KernelConfig& cfg) {
  cfg.validate();
  RawKernel total;
  if (either_empty(a, b)) return total;
  auto [la, lb] = name_labels(a, b);
  JointRelabeling wl(a, b, std::move(la), std::move(lb));
  for (int it = 0; it <= cfg.wl_iterations; ++it) {
    if (it > 0) wl.step();
    accumulate(total, raw_from(vertex_histogram(wl.labels(0)), vertex_histogram(wl.labels(1))));
  }
  return total;
}

RawKernel wl_edge_histogram_raw(const CausalGraph& a, const CausalGraph& b, const KernelConfig& cfg) {
  cfg.validate();
  RawKernel total;
  if (either_empty(a, b)) return total;
  JointRelabeling wl(a, b, Labels(a.node_count(), 0), Labels(b.node_count(), 0));
  for (int it = 0; it <= cfg.wl_iterations; ++it) {
    if (it > 0) wl.step();
    accumulate(total, raw_from(edge_histogram(a, wl.labels(0)), edge_histogram(b, wl.labels(1))));
  }
  return total;
}

// ---------------------------------------------------------------------------
// Shortest paths (g2)

std::vector<int> shortest_path_lengths(const CausalGraph& g) {
  const std::size_t n = g.node_count();
  constexpr int unreachable = -1;
  std::vector<int> dist(n * n, unreachable);
  for (std::size_t v = 0; v < n; ++v) dist[v * n + v] = 0;
  for (const Edge& e : g.edges()) dist[e.src * n + e.dst] = 1;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const int ik = dist[i * n + k];
      if (ik < 0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        const int kj = dist[k * n + j];
        if (kj < 0) continue;
        int& ij = dist[i * n + j];
        if (ij < 0 || ik + kj < ij) ij = ik + kj;
      }
    }
  }
  return dist;
}

namespace {

using PathFeature = std::tuple<std::string, std::string, int, int>;

std::map<PathFeature, double> path_histogram(const CausalGraph& g, bool with_polarity) {
  const std::size_t n = g.node_count();
  const auto dist = shortest_path_lengths(g);
  std::map<PathFeature, double> h;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      const int d = dist[u * n + v];
      if (u == v || d <= 0) continue;
      int polarity = -1;
      if (with_polarity) {
        // First hop of the shortest path whose intermediate id sequence is
        // lexicographically smallest: greedily the smallest-id successor
        // that stays on a shortest path.
        std::size_t first = v;
        if (d > 1) {
          bool found = false;
          for (std::size_t w : g.successors(u)) {
            if (dist[w * n + v] != d - 1) continue;
            if (!found || g.nodes()[w].id < g.nodes()[first].id) {
              first = w;
              found = true;
            }
          }
        }
        polarity = static_cast<int>(g.edges()[*g.find_edge(u, first)].polarity);
      }
      h[{g.nodes()[u].name, g.nodes()[v].name, d, polarity}] += 1.0;
    }
  }
  return h;
}

}  // namespace

RawKernel shortest_path_raw(const CausalGraph& a, const CausalGraph& b, const KernelConfig& cfg) {
  cfg.validate();
  if (either_empty(a, b)) return {};
  return raw_from(path_histogram(a, cfg.use_polarity_in_g2_g3), path_histogram(b, cfg.use_polarity_in_g2_g3));
}

// ---------------------------------------------------------------------------
// Subgraph matching (g3)

namespace {

class ProductGraph {
 public:
  ProductGraph(const CausalGraph& a, const CausalGraph& b, const KernelConfig& cfg) {
    for (std::size_t u = 0; u < a.node_count(); ++u) {
      for (std::size_t w = 0; w < b.node_count(); ++w) {
        if (a.nodes()[u].name != b.nodes()[w].name) continue;
        vertices_.emplace_back(u, w);
        if (vertices_.size() > cfg.product_graph_cap) {
          throw Error(ErrorKind::resource_limit, "product graph exceeds " + std::to_string(cfg.product_graph_cap) +
                                                     " vertices; raise product_graph_cap");
        }
      }
    }
    const std::size_t p = vertices_.size();
    adjacent_.assign(p * p, 0);
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = i + 1; j < p; ++j) {
        const bool ok = compatible(a, b, vertices_[i], vertices_[j], cfg.use_polarity_in_g2_g3);
        adjacent_[i * p + j] = adjacent_[j * p + i] = ok ? 1 : 0;
      }
    }
  }

  /// counts[s] = number of cliques with s vertices, s in 1..max_size.
  std::vector<double> clique_counts(std::size_t max_size) const {
    std::vector<double> counts(max_size + 1, 0.0);
    std::vector<std::size_t> all(vertices_.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    extend(all, 0, max_size, counts);
    return counts;
  }

 private:
  static bool compatible(const CausalGraph& a, const CausalGraph& b, std::pair<std::size_t, std::size_t> x,
                         std::pair<std::size_t, std::size_t> y, bool with_polarity) {
    auto [u, u2] = x;
    auto [v, v2] = y;
    if (u == v || u2 == v2) return false;
    auto same_link = [&](std::size_t s, std::size_t t, std::size_t s2, std::size_t t2) {
      auto ea = a.find_edge(s, t);
      auto eb = b.find_edge(s2, t2);
      if (ea.has_value() != eb.has_value()) return false;
      if (ea && with_polarity) return a.edges()[*ea].polarity == b.edges()[*eb].polarity;
      return true;
    };
    return same_link(u, v, u2, v2) && same_link(v, u, v2, u2);
  }

  // Each clique is enumerated once, as an increasing vertex sequence.
  void extend(const std::vector<std::size_t>& candidates, std::size_t depth, std::size_t max_size,
              std::vector<double>& counts) const {
    const std::size_t p = vertices_.size();
    for (std::size_t idx = 0; idx < candidates.size(); ++idx) {
      const std::size_t v = candidates[idx];
      counts[depth + 1] += 1.0;
      if (depth + 1 == max_size) continue;
      std::vector<std::size_t> next;
      for (std::size_t k = idx + 1; k < candidates.size(); ++k) {
        if (adjacent_[v * p + candidates[k]]) next.push_back(candidates[k]);
      }
      if (!next.empty()) extend(next, depth + 1, max_size, counts);
    }
  }

  std::vector<std::pair<std::size_t, std::size_t>> vertices_;
  std::vector<char> adjacent_;
};

double subgraph_value(const CausalGraph& a, const CausalGraph& b, const KernelConfig& cfg) {
  const auto max_size = static_cast<std::size_t>(cfg.subgraph_max_size);
  const auto counts = ProductGraph(a, b, cfg).clique_counts(max_size);
  double total = 0.0;
  for (std::size_t s = 1; s <= max_size; ++s) total += cfg.subgraph_weight(s) * counts[s];
  return total;
}

}  // namespace

RawKernel subgraph_matching_raw(const CausalGraph& a, const CausalGraph& b, const KernelConfig& cfg) {
  cfg.validate();
  if (either_empty(a, b)) return {};
  return {subgraph_value(a, b, cfg), subgraph_value(a, a, cfg), subgraph_value(b, b, cfg)};
}

// ---------------------------------------------------------------------------
// Pyramid match (g1)

std::vector<std::vector<double>> spectral_embedding(const CausalGraph& g, int dims) {
  if (dims < 1) throw Error(ErrorKind::invalid_input, "embedding needs at least one dimension");
  const std::size_t n = g.node_count();
  const auto d = static_cast<std::size_t>(dims);
  std::vector<std::vector<double>> coords(n, std::vector<double>(d, 0.0));
  if (n == 0) return coords;

  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const Edge& e : g.edges()) {
    adj(static_cast<Eigen::Index>(e.src), static_cast<Eigen::Index>(e.dst)) = 1.0;
    adj(static_cast<Eigen::Index>(e.dst), static_cast<Eigen::Index>(e.src)) = 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(adj);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::internal, "eigendecomposition failed");

  struct Pair {
    double magnitude;
    std::vector<double> vec;
  };
  std::vector<Pair> pairs;
  for (std::size_t k = 0; k < n; ++k) {
    Pair p{std::abs(solver.eigenvalues()(static_cast<Eigen::Index>(k))), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
      p.vec[i] = solver.eigenvectors()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    }
    auto lead = std::find_if(p.vec.begin(), p.vec.end(), [](double x) { return std::abs(x) > 1e-12; });
    if (lead != p.vec.end() && *lead < 0.0) {
      for (double& x : p.vec) x = -x;
    }
    pairs.push_back(std::move(p));
  }
  constexpr double tie = 1e-9;
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) { return x.magnitude > y.magnitude; });
  // Within runs of equal |eigenvalue|, order eigenvectors lexicographically.
  for (std::size_t start = 0; start < pairs.size();) {
    std::size_t end = start + 1;
    while (end < pairs.size() && pairs[start].magnitude - pairs[end].magnitude <= tie) ++end;
    std::sort(pairs.begin() + static_cast<std::ptrdiff_t>(start), pairs.begin() + static_cast<std::ptrdiff_t>(end),
              [](const Pair& x, const Pair& y) { return x.vec < y.vec; });
    start = end;
  }
  for (std::size_t k = 0; k < std::min(d, n); ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      // Snap to a 1e-9 grid so solver jitter cannot straddle a cell boundary.
      const double x = std::round(std::abs(pairs[k].vec[i]) * 1e9) / 1e9;
      coords[i][k] = std::clamp(x, 0.0, 1.0);
    }
  }
  return coords;
}

namespace {

using Cell = std::pair<std::string, std::vector<std::uint32_t>>;

std::vector<std::map<Cell, double>> pyramid(const CausalGraph& g, const KernelConfig& cfg) {
  const auto coords = spectral_embedding(g, cfg.pyramid_dims);
  std::vector<std::map<Cell, double>> levels(static_cast<std::size_t>(cfg.pyramid_levels));
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const std::uint32_t cells = 1u << l;
    for (std::size_t v = 0; v < g.node_count(); ++v) {
      Cell key{g.nodes()[v].name, {}};
      for (double x : coords[v]) {
        auto idx = static_cast<std::uint32_t>(std::floor(x * static_cast<double>(cells)));
        key.second.push_back(std::min(idx, cells - 1));
      }
      levels[l][key] += 1.0;
    }
  }
  return levels;
}

double intersection(const std::map<Cell, double>& a, const std::map<Cell, double>& b) {
  double sum = 0.0;
  for (const auto& [cell, count] : a) {
    auto it = b.find(cell);
    if (it != b.end()) sum += std::min(count, it->second);
  }
  return sum;
}

double pyramid_value(const std::vector<std::map<Cell, double>>& a, const std::vector<std::map<Cell, double>>& b) {
  const std::size_t levels = a.size();
  std::vector<double> matches(levels);
  for (std::size_t l = 0; l < levels; ++l) matches[l] = intersection(a[l], b[l]);
  double total = matches[levels - 1];
  for (std::size_t l = 0; l + 1 < levels; ++l) {
    total += (matches[l] - matches[l + 1]) / std::ldexp(1.0, static_cast<int>(levels - 1 - l));
  }
  return total;
}

}  // namespace

RawKernel pyramid_match_raw(const CausalGraph& a, const CausalGraph& b, const KernelConfig& cfg) {
  cfg.validate();
  if (either_empty(a, b)) return {};
  const auto pa = pyramid(a, cfg);
  const auto pb = pyramid(b, cfg);
  return {pyramid_value(pa, pb), pyramid_value(pa, pa), pyramid_value(pb, pb)};
}

// ---------------------------------------------------------------------------

double wl_vertex_histogram(const CausalGraph& a, const CausalGraph& b, const KernelConfig& cfg) {
  return wl_vertex_histogram_raw(a, b, cfg).normalized();
}
double wl_edge_histogram(const CausalGraph& a, const CausalGraph& b, const KernelConfig& cfg) {
  return wl_edge_histogram_raw(a, b, cfg).normalized();
}
double shortest_path_kernel(const CausalGraph& a, const CausalGraph& b, const KernelConfig& cfg) {
  return shortest_path_raw(a, b, cfg).normalized();
}
double subgraph_matching_kernel(const CausalGraph& a, const CausalGraph& b, const KernelConfig& cfg) {
  return subgraph_matching_raw(a, b, cfg).normalized();
}
double pyramid_match_kernel(const CausalGraph& a, const CausalGraph& b, const KernelConfig& cfg) {
  return pyramid_match_raw(a, b, cfg).normalized();
}

double kernel(Metric which, const CausalGraph& a, const CausalGraph& b, const KernelConfig& cfg) {
  switch (which) {
    case Metric::g1: return pyramid_match_kernel(a, b, cfg);
    case Metric::g2: return shortest_path_kernel(a, b, cfg);
    case Metric::g3: return subgraph_matching_kernel(a, b, cfg);
    case Metric::g4: return wl_vertex_histogram(a, b, cfg);
    case Metric::g5: return wl_edge_histogram(a, b, cfg);
    default: throw Error(ErrorKind::invalid_input, std::string(to_string(which)) + " is not a graph kernel");
  }
}

KernelScores kernel_scores(const CausalGraph& a, const CausalGraph& b, const KernelConfig& cfg) {
  return {pyramid_match_kernel(a, b, cfg), shortest_path_kernel(a, b, cfg), subgraph_matching_kernel(a, b, cfg),
          wl_vertex_histogram(a, b, cfg), wl_edge_histogram(a, b, cfg)};
}

std::vector<double> gram_matrix(const std::vector<CausalGraph>& graphs, Metric which, const KernelConfig& cfg) {
  if (graphs.empty()) throw Error(ErrorKind::empty_input, "gram matrix needs at least one graph");
  const std::size_t n = graphs.size();
  std::vector<double> gram(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double k = kernel(which, graphs[i], graphs[j], cfg);
      gram[i * n + j] = gram[j * n + i] = k;
    }
  }
  return gram;
}

}  // namespace cldsim
