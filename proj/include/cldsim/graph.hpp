#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cldsim/error.hpp"

namespace cldsim {

enum class Polarity : std::uint8_t { positive, negative };

/// "+" or "-".
std::string_view to_string(Polarity p);
std::optional<Polarity> parse_polarity(std::string_view token);
Polarity flipped(Polarity p);

/// Lowercases ASCII letters, trims, and collapses internal whitespace runs.
/// Throws ErrorKind::invalid_name when nothing remains.
std::string canonical_name(std::string_view raw);

struct Node {
  std::string id;
  std::string name;  // canonical

  bool operator==(const Node&) const = default;
};

// Endpoints are indices into CausalGraph::nodes().
struct Edge {
  std::size_t src = 0;
  std::size_t dst = 0;
  Polarity polarity = Polarity::positive;

  bool operator==(const Edge&) const = default;
};

/// Immutable directed graph with polarity-labeled edges. Construct through
/// GraphBuilder, which enforces unique ids, no self-loops, and at most one
/// edge per ordered pair.
class CausalGraph {
 public:
  CausalGraph() = default;

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return nodes_.empty(); }

  std::optional<std::size_t> index_of(std::string_view id) const;
  /// Index into edges() of the edge src -> dst, if present.
  std::optional<std::size_t> find_edge(std::size_t src, std::size_t dst) const;
  bool has_edge(std::size_t src, std::size_t dst) const { return find_edge(src, dst).has_value(); }

  const std::vector<std::size_t>& successors(std::size_t v) const { return out_[v]; }
  const std::vector<std::size_t>& predecessors(std::size_t v) const { return in_[v]; }

  /// Symmetric neighbor sets of the undirected projection, sorted ascending.
  std::vector<std::vector<std::size_t>> undirected_neighbors() const;

  std::vector<std::string> names() const;

  /// Same node ids, names, and edge set with polarities, regardless of order.
  friend bool same_graph(const CausalGraph& a, const CausalGraph& b);

 private:
  friend class GraphBuilder;

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
  std::unordered_map<std::string, std::size_t> id_index_;
  std::unordered_map<std::uint64_t, std::size_t> edge_index_;
};

bool same_graph(const CausalGraph& a, const CausalGraph& b);

class GraphBuilder {
 public:
  /// Returns the node index. Canonicalizes the name.
  std::size_t add_node(std::string id, std::string_view name);
  void add_edge(std::string_view src_id, std::string_view dst_id, Polarity polarity);
  void add_edge(std::size_t src, std::size_t dst, Polarity polarity);

  bool has_node(std::string_view id) const { return graph_.index_of(id).has_value(); }
  const CausalGraph& peek() const { return graph_; }

  CausalGraph build() &&;

 private:
  CausalGraph graph_;
};

/// Copy of `g` with nodes and edges re-emitted in the given orders. Used for
/// reorder-invariance checks and perturbation.
CausalGraph rebuild(const CausalGraph& g, const std::vector<std::size_t>& node_order,
                    const std::vector<std::size_t>& edge_order);

struct ValidationIssue {
  std::string message;
};

/// Non-fatal findings: duplicate variable names, isolated nodes.
std::vector<ValidationIssue> validate(const CausalGraph& g);

}  // namespace cldsim
