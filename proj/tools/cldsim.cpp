#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cldsim/embeddings.hpp"
#include "cldsim/error.hpp"
#include "cldsim/graph.hpp"
#include "cldsim/graph_io.hpp"
#include "cldsim/metrics.hpp"
#include "cldsim/pipeline.hpp"
#include "cldsim/stats.hpp"

namespace fs = std::filesystem;
using namespace cldsim;

namespace {

constexpr int exit_input = 1;
constexpr int exit_usage = 2;
constexpr int exit_internal = 70;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string format = "human";
  std::string out;
  std::string config_path;
  std::string strategy = "ref_best_match";
  std::string embed;
  std::string embed_cache;
  std::string metrics = "all";
  unsigned jobs = 1;
  std::string timestamp;
  std::size_t cycle_cap = default_cycle_cap;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

// file:<path> | http:<url> | det:seed=<s>,dim=<d>
std::shared_ptr<const EmbeddingProvider> make_provider(const Options& o) {
  if (o.embed.empty()) {
    if (!o.embed_cache.empty()) throw UsageError("--embed-cache needs --embed");
    return nullptr;
  }
  std::shared_ptr<const EmbeddingProvider> p;
  const auto colon = o.embed.find(':');
  const std::string scheme = o.embed.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : o.embed.substr(colon + 1);
  if (colon == std::string::npos || rest.empty()) throw UsageError("bad --embed value '" + o.embed + "'");
  if (scheme == "file") {
    p = file_provider_load(rest);
  } else if (scheme == "http") {
    p = http_provider(rest);
  } else if (scheme == "det") {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> dim;
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      auto comma = rest.find(',', pos);
      if (comma == std::string::npos) comma = rest.size();
      const std::string kv = rest.substr(pos, comma - pos);
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("bad det: field '" + kv + "'");
      const std::string key = kv.substr(0, eq);
      const std::string val = kv.substr(eq + 1);
      try {
        std::size_t used = 0;
        const unsigned long long n = std::stoull(val, &used);
        if (used != val.size() || val.starts_with('-')) throw std::invalid_argument(val);
        if (key == "seed") {
          seed = n;
        } else if (key == "dim") {
          dim = n;
        } else {
          throw UsageError("unknown det: field '" + key + "'");
        }
      } catch (const std::logic_error&) {
        throw UsageError("bad number in det: field '" + kv + "'");
      }
      pos = comma + 1;
    }
    if (!seed || !dim) throw UsageError("det: needs seed=<s>,dim=<d>");
    p = deterministic_provider(*seed, *dim);
  } else {
    throw UsageError("unknown embedding source '" + scheme + "' (expected file:, http:, det:)");
  }
  if (!o.embed_cache.empty()) p = cached(p, o.embed_cache);
  return p;
}

ComparisonConfig make_config(const Options& o) {
  ComparisonConfig c;
  if (!o.config_path.empty()) c.kernels = parse_kernel_config(read_file(o.config_path));
  c.kernels.validate();
  auto s = parse_strategy(o.strategy);
  if (!s) throw UsageError("unknown strategy '" + o.strategy + "'");
  c.strategy = *s;
  try {
    c.metrics = MetricSet::parse(o.metrics);
  } catch (const Error& e) {
    throw UsageError(e.detail());
  }
  return c;
}

void check_format(const Options& o, bool csv_ok) {
  if (o.format == "human" || o.format == "json" || (csv_ok && o.format == "csv")) return;
  throw UsageError("unsupported --format '" + o.format + "'");
}

void emit(const Options& o, const std::string& machine) {
  if (o.out.empty()) {
    std::cout << machine;
  } else {
    write_file_atomic(o.out, machine);
  }
}

void print_scores(const ComparisonReport& r) {
  std::cout << "ref: " << r.ref_id << "\ncmp: " << r.cmp_id << "\n";
  for (const auto& [m, v] : r.scores) {
    std::string label(to_string(m));
    std::cout << "  " << label << "  " << fmt(v) << "\n";
  }
  if (r.config.metrics.any_semantic()) std::cout << "strategy: " << to_string(r.config.strategy) << "\n";
  if (!r.config.provider_id.empty()) std::cout << "provider: " << r.config.provider_id << "\n";
}

int run_compare(const Options& o, const std::string& ref_path, const std::string& cmp_path) {
  check_format(o, true);
  const auto config = make_config(o);
  const auto provider = make_provider(o);
  const auto ref = load_graph(ref_path);
  const auto cmp = load_graph(cmp_path);
  auto report = compare(ref, cmp, provider.get(), config, fs::path(ref_path).filename().string(),
                        fs::path(cmp_path).filename().string());
  if (!o.timestamp.empty()) report.timestamp = o.timestamp;
  if (o.format == "human") {
    print_scores(report);
    if (!o.out.empty()) write_file_atomic(o.out, reports_json({report}));
  } else {
    emit(o, o.format == "csv" ? reports_csv({report}) : reports_json({report}));
  }
  return 0;
}

int run_batch(const Options& o, const std::string& ref_path, const std::string& dir) {
  check_format(o, true);
  BatchOptions bo;
  bo.config = make_config(o);
  bo.jobs = o.jobs;
  bo.ref_id = fs::path(ref_path).filename().string();
  const auto provider = make_provider(o);
  const auto ref = load_graph(ref_path);
  auto result = batch(ref, fs::path(dir), provider.get(), bo);
  if (!o.timestamp.empty()) {
    for (auto& r : result.reports) r.timestamp = o.timestamp;
  }

  if (!o.out.empty()) {
    fs::create_directories(o.out);
    const fs::path out(o.out);
    write_file_atomic(out / "reports.json", reports_json(result.reports));
    write_file_atomic(out / "reports.csv", reports_csv(result.reports));
    write_file_atomic(out / "summary.json", summaries_json(result.summaries));
    nlohmann::ordered_json rejects = nlohmann::ordered_json::array();
    for (const auto& r : result.rejects) rejects.push_back({{"file", r.file}, {"reason", r.reason}});
    write_file_atomic(out / "rejects.json", rejects.dump(2) + "\n");
  }

  if (o.format == "human") {
    std::cout << "compared " << result.reports.size() << " graph(s) against " << bo.ref_id << ", "
              << result.rejects.size() << " rejected\n";
    for (const auto& [m, s] : result.summaries) {
      std::cout << "  " << to_string(m) << "  min " << fmt(s.min) << "  median " << fmt(s.median) << "  mean "
                << fmt(s.mean) << "  max " << fmt(s.max) << "\n";
    }
    for (const auto& r : result.rejects) std::cout << "rejected " << r.file << ": " << r.reason << "\n";
    if (!o.out.empty()) std::cout << "wrote " << o.out << "\n";
  } else if (o.out.empty()) {
    std::cout << (o.format == "csv" ? reports_csv(result.reports) : reports_json(result.reports));
  }
  return result.rejects.empty() ? 0 : exit_input;
}

int run_stats(const Options& o, const std::string& path) {
  check_format(o, false);
  const auto g = load_graph(path);
  const auto s = stats(g, o.cycle_cap);
  if (o.format == "human") {
    std::cout << "n=" << s.nodes << " m=" << s.edges << " cycles=" << s.cycles << "\n";
    std::cout << "density " << fmt(s.density) << "\n";
    std::cout << "transitivity " << fmt(s.transitivity) << "\n";
    std::cout << "avg_connectivity " << (s.avg_connectivity ? fmt(*s.avg_connectivity) : "undefined") << "\n";
    return 0;
  }
  nlohmann::ordered_json doc = {{"nodes", s.nodes},
                                {"edges", s.edges},
                                {"cycles", s.cycles},
                                {"density", s.density},
                                {"transitivity", s.transitivity},
                                {"avg_connectivity", s.avg_connectivity ? nlohmann::ordered_json(*s.avg_connectivity)
                                                                        : nlohmann::ordered_json(nullptr)}};
  emit(o, doc.dump(2) + "\n");
  return 0;
}

int run_validate(const Options& o, const std::string& path) {
  check_format(o, false);
  const auto g = load_graph(path);
  const auto issues = validate(g);
  if (o.format == "json") {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& i : issues) arr.push_back(i.message);
    emit(o, nlohmann::ordered_json{{"nodes", g.node_count()}, {"edges", g.edge_count()}, {"warnings", arr}}.dump(2) +
                "\n");
    return 0;
  }
  std::cout << "ok: " << g.node_count() << " nodes, " << g.edge_count() << " edges\n";
  for (const auto& i : issues) std::cout << "warning: " << i.message << "\n";
  return 0;
}

int run_perturb(const Options& o, const std::string& ref_path, std::size_t n, std::uint64_t seed,
                const std::string& ops, bool up_to, std::size_t max_nodes) {
  if (o.out.empty()) throw UsageError("perturb needs --out DIR");
  PerturbationPlan plan;
  plan.seed = seed;
  plan.up_to = up_to;
  plan.max_nodes = max_nodes;
  try {
    plan.ops = PerturbationPlan::parse_ops(ops);
  } catch (const Error& e) {
    throw UsageError(e.detail());
  }
  const auto ref = load_graph(ref_path);
  const auto entries = perturb_corpus(ref, plan, n, o.out);
  std::cout << "wrote " << entries.size() << " graph(s) and manifest.json to " << o.out << "\n";
  return 0;
}

void shared_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--format", o.format, "human | json | csv");
  cmd->add_option("--out", o.out, "Output file (directory for batch/perturb)");
}

void compare_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_path, "Kernel hyperparameters (JSON file)");
  cmd->add_option("--strategy", o.strategy, "ref_best_match | symmetric_best_match | optimal_assignment_penalized");
  cmd->add_option("--embed", o.embed, "file:<path> | http:<url> | det:seed=<s>,dim=<d>");
  cmd->add_option("--embed-cache", o.embed_cache, "TSV cache layered over --embed");
  cmd->add_option("--metrics", o.metrics, "Comma list of m1..m4,g1..g5, or all");
  cmd->add_option("--timestamp", o.timestamp, "Timestamp recorded in reports");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal graph similarity metrics"};
  app.require_subcommand(1);
  Options o;
  std::string a, b;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string ops;
  bool up_to = false;
  std::size_t max_nodes = 8;

  auto* compare_cmd = app.add_subcommand("compare", "Score one graph against a reference");
  compare_cmd->add_option("REF", a)->required();
  compare_cmd->add_option("CMP", b)->required();
  shared_flags(compare_cmd, o);
  compare_flags(compare_cmd, o);

  auto* batch_cmd = app.add_subcommand("batch", "Score every graph in a directory against a reference");
  batch_cmd->add_option("REF", a)->required();
  batch_cmd->add_option("DIR", b)->required();
  shared_flags(batch_cmd, o);
  compare_flags(batch_cmd, o);
  batch_cmd->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::Range(1u, 1024u));

  auto* stats_cmd = app.add_subcommand("stats", "Graph statistics");
  stats_cmd->add_option("GRAPH", a)->required();
  shared_flags(stats_cmd, o);
  stats_cmd->add_option("--cycle-cap", o.cycle_cap, "Give up after this many cycles");

  auto* perturb_cmd = app.add_subcommand("perturb", "Generate a seeded perturbation corpus");
  perturb_cmd->add_option("REF", a)->required();
  perturb_cmd->add_option("--n", n, "Number of graphs")->required();
  perturb_cmd->add_option("--seed", seed, "RNG seed")->required();
  perturb_cmd->add_option("--ops", ops, "kind=count,... (rename_node, delete_node, add_node, delete_edge, "
                                        "add_edge, flip_polarity, reverse_edge)")
      ->required();
  perturb_cmd->add_option("--out", o.out, "Output directory")->required();
  perturb_cmd->add_flag("--up-to", up_to, "Draw each op count uniformly from [0, count]");
  perturb_cmd->add_option("--max-nodes", max_nodes, "Skip add_node at this size");

  auto* validate_cmd = app.add_subcommand("validate", "Parse a graph and report warnings");
  validate_cmd->add_option("GRAPH", a)->required();
  shared_flags(validate_cmd, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_usage;
  }

  try {
    if (compare_cmd->parsed()) return run_compare(o, a, b);
    if (batch_cmd->parsed()) return run_batch(o, a, b);
    if (stats_cmd->parsed()) return run_stats(o, a);
    if (perturb_cmd->parsed()) return run_perturb(o, a, n, seed, ops, up_to, max_nodes);
    if (validate_cmd->parsed()) return run_validate(o, a);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return exit_usage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::internal ? exit_internal : exit_input;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: io: " << e.what() << "\n";
    return exit_input;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return exit_internal;
  }
  return exit_usage;
}
