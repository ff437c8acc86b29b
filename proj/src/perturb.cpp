#include <algorithm>
#include <charconv>
#include <random>
#include <set>
#include <tuple>

#include "cldsim/error.hpp"
#include "cldsim/graph_io.hpp"
#include "cldsim/pipeline.hpp"
#include "cldsim/text_metrics.hpp"

namespace cldsim {

std::string_view to_string(PerturbKind k) {
  switch (k) {
    case PerturbKind::rename_node: return "rename_node";
    case PerturbKind::delete_node: return "delete_node";
    case PerturbKind::add_node: return "add_node";
    case PerturbKind::delete_edge: return "delete_edge";
    case PerturbKind::add_edge: return "add_edge";
    case PerturbKind::flip_polarity: return "flip_polarity";
    case PerturbKind::reverse_edge: return "reverse_edge";
  }
  return "unknown";
}

std::optional<PerturbKind> parse_perturb_kind(std::string_view id) {
  for (auto k : all_perturb_kinds) {
    if (to_string(k) == id) return k;
  }
  return std::nullopt;
}

std::map<PerturbKind, std::size_t> PerturbationPlan::parse_ops(std::string_view spec) {
  std::map<PerturbKind, std::size_t> ops;
  std::size_t start = 0;
  while (start < spec.size()) {
    auto comma = spec.find(',', start);
    auto item = spec.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    start = comma == std::string_view::npos ? spec.size() : comma + 1;
    if (item.empty()) continue;
    auto eq = item.find('=');
    auto kind = parse_perturb_kind(item.substr(0, eq));
    if (!kind) throw Error(ErrorKind::invalid_input, "unknown perturbation '" + std::string(item.substr(0, eq)) + "'");
    std::size_t count = 1;
    if (eq != std::string_view::npos) {
      auto digits = item.substr(eq + 1);
      auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), count);
      if (ec != std::errc{} || p != digits.data() + digits.size()) {
        throw Error(ErrorKind::invalid_input, "bad count in '" + std::string(item) + "'");
      }
    }
    ops[*kind] += count;
  }
  return ops;
}

namespace {

// mt19937_64 output is fixed by the standard; distributions are not, so
// bounded draws are done by hand.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (stream * 0x9E3779B97F4A7C15ull);
    for (int i = 0; i < 3; ++i) {
      s += 0x9E3779B97F4A7C15ull;
      std::uint64_t z = s;
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
      z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
      s = z ^ (z >> 31);
    }
    engine_.seed(s);
  }

  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  bool coin() { return (engine_() >> 63) != 0; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

const std::map<std::string, std::vector<std::string>>& synonyms() {
  static const std::map<std::string, std::vector<std::string>> table = {
      {"population", {"people", "inhabitants"}},
      {"growth", {"expansion"}},
      {"increase", {"rise", "gain"}},
      {"net", {"overall"}},
      {"capacity", {"limit"}},
      {"carrying", {"supporting"}},
      {"resources", {"supplies", "assets"}},
      {"capita", {"person", "head"}},
      {"rate", {"speed"}},
      {"birth", {"natality"}},
      {"death", {"mortality"}},
      {"student", {"pupil", "learner"}},
      {"enrollment", {"registration", "attendance"}},
      {"school", {"academy"}},
      {"ranking", {"rating", "standing"}},
      {"strain", {"pressure", "stress"}},
      {"demand", {"need"}},
      {"food", {"nutrition"}},
      {"pollution", {"contamination"}},
      {"decline", {"decrease"}},
  };
  return table;
}

const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> words = {
      "birth rate",    "death rate",      "food supply",     "pollution",       "industrial output",
      "land yield",    "technology",      "consumption",     "growth factor",   "available resources",
      "crowding",      "quality of life", "capital",         "investment",      "depletion rate",
      "fertility",     "life expectancy", "arable land",     "water supply",    "energy use",
  };
  return words;
}

std::string pseudo_word(Rng& rng) {
  static const char* onsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"};
  static const char* vowels[] = {"a", "e", "i", "o", "u"};
  std::string w;
  const std::size_t syllables = 2 + rng.below(2);
  for (std::size_t i = 0; i < syllables; ++i) {
    w += onsets[rng.below(std::size(onsets))];
    w += vowels[rng.below(std::size(vowels))];
  }
  return w;
}

// Two-word phrase none of whose tokens is in `avoid`.
std::string fresh_phrase(Rng& rng, const std::set<std::string>& avoid) {
  while (true) {
    std::string a = pseudo_word(rng);
    std::string b = pseudo_word(rng);
    if (a != b && avoid.count(a) == 0 && avoid.count(b) == 0) return a + " " + b;
  }
}

struct WorkGraph {
  struct Link {
    std::string src;
    std::string dst;
    Polarity polarity;
  };
  std::vector<Node> nodes;
  std::vector<Link> links;
  std::size_t next_id = 0;

  explicit WorkGraph(const CausalGraph& g) {
    for (const Node& n : g.nodes()) nodes.push_back(n);
    for (const Edge& e : g.edges()) links.push_back({g.nodes()[e.src].id, g.nodes()[e.dst].id, e.polarity});
  }

  bool has_link(const std::string& s, const std::string& d) const {
    return std::any_of(links.begin(), links.end(), [&](const Link& l) { return l.src == s && l.dst == d; });
  }
  bool has_name(const std::string& name) const {
    return std::any_of(nodes.begin(), nodes.end(), [&](const Node& n) { return n.name == name; });
  }
  std::string new_id() {
    while (true) {
      std::string id = "p" + std::to_string(next_id++);
      if (std::none_of(nodes.begin(), nodes.end(), [&](const Node& n) { return n.id == id; })) return id;
    }
  }
  std::set<std::string> tokens() const {
    std::set<std::string> out;
    for (const Node& n : nodes) {
      for (auto& t : tokenize(n.name)) out.insert(t);
    }
    return out;
  }

  CausalGraph build() const {
    GraphBuilder b;
    for (const Node& n : nodes) b.add_node(n.id, n.name);
    for (const Link& l : links) b.add_edge(l.src, l.dst, l.polarity);
    return std::move(b).build();
  }
};

AppliedOp apply(PerturbKind kind, WorkGraph& g, Rng& rng, std::size_t max_nodes) {
  AppliedOp op{kind, false, {}};
  auto skip = [&](std::string why) {
    op.detail = std::move(why);
    return op;
  };
  switch (kind) {
    case PerturbKind::rename_node: {
      if (g.nodes.empty()) return skip("no nodes");
      Node& node = g.nodes[rng.below(g.nodes.size())];
      auto tokens = tokenize(node.name);
      std::vector<std::size_t> with_synonym;
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (synonyms().count(tokens[i]) != 0) with_synonym.push_back(i);
      }
      std::string renamed;
      // 0: synonym substitution, 1: token swap, 2: fresh phrase
      std::vector<int> strategies{2};
      if (!with_synonym.empty()) strategies.push_back(0);
      if (tokens.size() >= 2) strategies.push_back(1);
      switch (strategies[rng.below(strategies.size())]) {
        case 0: {
          std::size_t i = with_synonym[rng.below(with_synonym.size())];
          const auto& options = synonyms().at(tokens[i]);
          tokens[i] = options[rng.below(options.size())];
          break;
        }
        case 1: {
          std::size_t i = rng.below(tokens.size() - 1);
          std::swap(tokens[i], tokens[i + 1]);
          break;
        }
        default: tokens = tokenize(fresh_phrase(rng, g.tokens())); break;
      }
      for (const auto& t : tokens) renamed += (renamed.empty() ? "" : " ") + t;
      op.detail = "'" + node.name + "' -> '" + renamed + "'";
      node.name = renamed;
      op.applied = true;
      return op;
    }
    case PerturbKind::delete_node: {
      if (g.nodes.size() <= 1) return skip("graph must keep at least one node");
      std::size_t victim = rng.below(g.nodes.size());
      const std::string id = g.nodes[victim].id;
      op.detail = "'" + g.nodes[victim].name + "'";
      g.nodes.erase(g.nodes.begin() + static_cast<std::ptrdiff_t>(victim));
      std::erase_if(g.links, [&](const WorkGraph::Link& l) { return l.src == id || l.dst == id; });
      op.applied = true;
      return op;
    }
    case PerturbKind::add_node: {
      if (g.nodes.size() >= max_nodes) return skip("node limit reached");
      std::vector<std::string> unused;
      for (const auto& w : vocabulary()) {
        if (!g.has_name(w)) unused.push_back(w);
      }
      std::string name = unused.empty() || rng.below(4) == 0 ? fresh_phrase(rng, g.tokens())
                                                              : unused[rng.below(unused.size())];
      std::string id = g.new_id();
      op.detail = "'" + name + "'";
      if (!g.nodes.empty()) {
        const std::string other = g.nodes[rng.below(g.nodes.size())].id;
        const Polarity pol = rng.coin() ? Polarity::positive : Polarity::negative;
        if (rng.coin()) {
          g.links.push_back({id, other, pol});
        } else {
          g.links.push_back({other, id, pol});
        }
        op.detail += " linked to " + other;
      }
      g.nodes.push_back(Node{id, name});
      op.applied = true;
      return op;
    }
    case PerturbKind::delete_edge: {
      if (g.links.empty()) return skip("no edges");
      std::size_t victim = rng.below(g.links.size());
      op.detail = g.links[victim].src + " -> " + g.links[victim].dst;
      g.links.erase(g.links.begin() + static_cast<std::ptrdiff_t>(victim));
      op.applied = true;
      return op;
    }
    case PerturbKind::add_edge: {
      std::vector<std::pair<std::size_t, std::size_t>> open;
      for (std::size_t s = 0; s < g.nodes.size(); ++s) {
        for (std::size_t d = 0; d < g.nodes.size(); ++d) {
          if (s != d && !g.has_link(g.nodes[s].id, g.nodes[d].id)) open.emplace_back(s, d);
        }
      }
      if (open.empty()) return skip("graph is complete");
      auto [s, d] = open[rng.below(open.size())];
      const Polarity pol = rng.coin() ? Polarity::positive : Polarity::negative;
      g.links.push_back({g.nodes[s].id, g.nodes[d].id, pol});
      op.detail = g.nodes[s].id + " -> " + g.nodes[d].id + " (" + std::string(to_string(pol)) + ")";
      op.applied = true;
      return op;
    }
    case PerturbKind::flip_polarity: {
      if (g.links.empty()) return skip("no edges");
      auto& link = g.links[rng.below(g.links.size())];
      link.polarity = flipped(link.polarity);
      op.detail = link.src + " -> " + link.dst + " now " + std::string(to_string(link.polarity));
      op.applied = true;
      return op;
    }
    case PerturbKind::reverse_edge: {
      std::vector<std::size_t> candidates;
      for (std::size_t i = 0; i < g.links.size(); ++i) {
        if (!g.has_link(g.links[i].dst, g.links[i].src)) candidates.push_back(i);
      }
      if (candidates.empty()) return skip("every edge already has a reverse");
      auto& link = g.links[candidates[rng.below(candidates.size())]];
      std::swap(link.src, link.dst);
      op.detail = link.dst + " -> " + link.src + " reversed";
      op.applied = true;
      return op;
    }
  }
  return skip("unknown kind");
}

}  // namespace

PerturbedGraph perturb(const CausalGraph& ref, const PerturbationPlan& plan, std::size_t index) {
  Rng rng(plan.seed, index + 1);
  std::vector<PerturbKind> schedule;
  for (PerturbKind kind : all_perturb_kinds) {
    auto it = plan.ops.find(kind);
    if (it == plan.ops.end()) continue;
    const std::size_t count = plan.up_to ? rng.below(it->second + 1) : it->second;
    schedule.insert(schedule.end(), count, kind);
  }
  rng.shuffle(schedule);

  WorkGraph work(ref);
  PerturbedGraph out;
  for (PerturbKind kind : schedule) out.ops.push_back(apply(kind, work, rng, plan.max_nodes));
  out.graph = work.build();
  return out;
}

std::vector<ManifestEntry> perturb_corpus(const CausalGraph& ref, const PerturbationPlan& plan, std::size_t n,
                                          const std::filesystem::path& out_dir) {
  if (n == 0) throw Error(ErrorKind::invalid_input, "corpus size must be at least 1");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw Error(ErrorKind::io, "cannot create '" + out_dir.string() + "'" + (ec ? ": " + ec.message() : ""));
  }
  const std::size_t width = std::max<std::size_t>(4, std::to_string(n - 1).size());
  std::vector<ManifestEntry> entries;
  entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto result = perturb(ref, plan, i);
    std::string digits = std::to_string(i);
    std::string file = "graph_" + std::string(width - digits.size(), '0') + digits + ".json";
    write_file_atomic(out_dir / file, to_json(result.graph));
    entries.push_back({std::move(file), std::move(result.ops)});
  }
  write_file_atomic(out_dir / "manifest.json", manifest_json(plan, entries));
  return entries;
}

CausalGraph rename_all(const CausalGraph& g, std::uint64_t seed) {
  Rng rng(seed, 0);
  std::set<std::string> avoid;
  for (const Node& n : g.nodes()) {
    for (auto& t : tokenize(n.name)) avoid.insert(t);
  }
  GraphBuilder b;
  for (const Node& n : g.nodes()) {
    std::string name = fresh_phrase(rng, avoid);
    for (auto& t : tokenize(name)) avoid.insert(t);
    b.add_node(n.id, name);
  }
  for (const Edge& e : g.edges()) b.add_edge(e.src, e.dst, e.polarity);
  return std::move(b).build();
}

}  // namespace cldsim
