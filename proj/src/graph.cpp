#include "cldsim/graph.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <tuple>

namespace cldsim {

namespace {

std::uint64_t pair_key(std::size_t src, std::size_t dst) {
  return (static_cast<std::uint64_t>(src) << 32) | static_cast<std::uint64_t>(dst);
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string_view to_string(Polarity p) { return p == Polarity::positive ? "+" : "-"; }

std::optional<Polarity> parse_polarity(std::string_view token) {
  if (token == "+") return Polarity::positive;
  if (token == "-") return Polarity::negative;
  return std::nullopt;
}

Polarity flipped(Polarity p) {
  return p == Polarity::positive ? Polarity::negative : Polarity::positive;
}

std::string canonical_name(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (out.empty()) {
    throw Error(ErrorKind::invalid_name, "variable name is empty after canonicalization");
  }
  return out;
}

std::optional<std::size_t> CausalGraph::index_of(std::string_view id) const {
  auto it = id_index_.find(std::string(id));
  if (it == id_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> CausalGraph::find_edge(std::size_t src, std::size_t dst) const {
  auto it = edge_index_.find(pair_key(src, dst));
  if (it == edge_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::vector<std::size_t>> CausalGraph::undirected_neighbors() const {
  std::vector<std::vector<std::size_t>> adj(nodes_.size());
  for (const Edge& e : edges_) {
    adj[e.src].push_back(e.dst);
    adj[e.dst].push_back(e.src);
  }
  for (auto& row : adj) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  return adj;
}

std::vector<std::string> CausalGraph::names() const {
  std::vector<std::string> out;
  out.reserve(nodes_.size());
  for (const Node& n : nodes_) out.push_back(n.name);
  return out;
}

bool same_graph(const CausalGraph& a, const CausalGraph& b) {
  if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return false;
  std::map<std::string, std::string> names_a;
  for (const Node& n : a.nodes()) names_a.emplace(n.id, n.name);
  for (const Node& n : b.nodes()) {
    auto it = names_a.find(n.id);
    if (it == names_a.end() || it->second != n.name) return false;
  }
  using Key = std::tuple<std::string, std::string, Polarity>;
  auto edge_set = [](const CausalGraph& g) {
    std::vector<Key> keys;
    for (const Edge& e : g.edges()) {
      keys.emplace_back(g.nodes()[e.src].id, g.nodes()[e.dst].id, e.polarity);
    }
    std::sort(keys.begin(), keys.end());
    return keys;
  };
  return edge_set(a) == edge_set(b);
}

std::size_t GraphBuilder::add_node(std::string id, std::string_view name) {
  if (id.empty()) throw Error(ErrorKind::invalid_input, "node id is empty");
  if (graph_.id_index_.count(id) != 0) {
    throw Error(ErrorKind::duplicate_node_id, "node id '" + id + "' declared twice");
  }
  std::size_t index = graph_.nodes_.size();
  graph_.nodes_.push_back(Node{id, canonical_name(name)});
  graph_.out_.emplace_back();
  graph_.in_.emplace_back();
  graph_.id_index_.emplace(std::move(id), index);
  return index;
}

void GraphBuilder::add_edge(std::string_view src_id, std::string_view dst_id, Polarity polarity) {
  auto src = graph_.index_of(src_id);
  if (!src) {
    throw Error(ErrorKind::dangling_endpoint, "edge source '" + std::string(src_id) + "' is not a declared node");
  }
  auto dst = graph_.index_of(dst_id);
  if (!dst) {
    throw Error(ErrorKind::dangling_endpoint, "edge target '" + std::string(dst_id) + "' is not a declared node");
  }
  add_edge(*src, *dst, polarity);
}

void GraphBuilder::add_edge(std::size_t src, std::size_t dst, Polarity polarity) {
  const std::size_t n = graph_.nodes_.size();
  if (src >= n || dst >= n) {
    throw Error(ErrorKind::dangling_endpoint, "edge endpoint index out of range");
  }
  const auto& nodes = graph_.nodes_;
  if (src == dst) {
    throw Error(ErrorKind::self_loop, "self-loop on node '" + nodes[src].id + "'");
  }
  if (graph_.has_edge(src, dst)) {
    throw Error(ErrorKind::duplicate_edge,
                "edge '" + nodes[src].id + "' -> '" + nodes[dst].id + "' appears twice");
  }
  graph_.edge_index_.emplace(pair_key(src, dst), graph_.edges_.size());
  graph_.edges_.push_back(Edge{src, dst, polarity});
  graph_.out_[src].push_back(dst);
  graph_.in_[dst].push_back(src);
}

CausalGraph GraphBuilder::build() && {
  for (auto& row : graph_.out_) std::sort(row.begin(), row.end());
  for (auto& row : graph_.in_) std::sort(row.begin(), row.end());
  return std::move(graph_);
}

CausalGraph rebuild(const CausalGraph& g, const std::vector<std::size_t>& node_order,
                    const std::vector<std::size_t>& edge_order) {
  GraphBuilder b;
  for (std::size_t v : node_order) b.add_node(g.nodes()[v].id, g.nodes()[v].name);
  for (std::size_t e : edge_order) {
    const Edge& edge = g.edges()[e];
    b.add_edge(g.nodes()[edge.src].id, g.nodes()[edge.dst].id, edge.polarity);
  }
  return std::move(b).build();
}

std::vector<ValidationIssue> validate(const CausalGraph& g) {
  std::vector<ValidationIssue> issues;
  std::map<std::string, std::vector<std::string>> by_name;
  for (const Node& n : g.nodes()) by_name[n.name].push_back(n.id);
  for (const auto& [name, ids] : by_name) {
    if (ids.size() < 2) continue;
    std::string joined;
    for (const auto& id : ids) joined += (joined.empty() ? "" : ", ") + id;
    issues.push_back({"duplicate variable name '" + name + "' on nodes " + joined});
  }
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    if (g.successors(v).empty() && g.predecessors(v).empty() && g.node_count() > 1) {
      issues.push_back({"node '" + g.nodes()[v].id + "' has no causal links"});
    }
  }
  return issues;
}

}  // namespace cldsim
