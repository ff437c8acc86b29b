#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cldsim/embeddings.hpp"
#include "cldsim/graph.hpp"
#include "cldsim/kernels.hpp"
#include "cldsim/metrics.hpp"
#include "cldsim/semantic.hpp"

namespace cldsim {

/// Everything needed to reproduce a report.
struct ComparisonConfig {
  KernelConfig kernels;
  Strategy strategy = Strategy::ref_best_match;
  MetricSet metrics = MetricSet::all();
  /// Empty when no embedding provider was used.
  std::string provider_id;
};

struct ComparisonReport {
  std::string ref_id;
  std::string cmp_id;
  /// One entry per selected metric.
  std::map<Metric, double> scores;
  ComparisonConfig config;
  std::optional<std::string> timestamp;

  std::optional<double> score(Metric m) const;
};

/// Computes every metric in `config.metrics`. m3/m4 need `provider`
/// (ErrorKind::missing_provider otherwise); semantic metrics throw
/// ErrorKind::empty_graph on an empty graph. `config.provider_id` is filled in.
ComparisonReport compare(const CausalGraph& ref, const CausalGraph& cmp, const EmbeddingProvider* provider,
                         ComparisonConfig config, std::string ref_id = "ref", std::string cmp_id = "cmp");

/// As above with the reference embeddings precomputed (batch reuse).
ComparisonReport compare(const CausalGraph& ref, const std::vector<EmbeddingVector>& ref_vectors,
                         const CausalGraph& cmp, const EmbeddingProvider* provider, ComparisonConfig config,
                         std::string ref_id, std::string cmp_id);

struct DistributionSummary {
  Metric metric = Metric::m1;
  std::size_t count = 0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  /// Lower middle element for even counts.
  double median = 0.0;
  /// 21 equal-width bin edges; the last bin is right-closed.
  std::vector<double> edges;
  std::vector<std::size_t> counts;
};

inline constexpr std::size_t summary_bins = 20;

/// Bins span the metric's scale; m4 uses [observed min, 0].
/// Throws ErrorKind::empty_input on an empty list.
DistributionSummary summarize(const std::vector<double>& values, Metric metric);

struct RejectedFile {
  std::string file;
  std::string reason;
};

struct BatchResult {
  std::vector<ComparisonReport> reports;  // sorted by cmp_id
  std::map<Metric, DistributionSummary> summaries;
  std::vector<RejectedFile> rejects;
};

struct BatchOptions {
  ComparisonConfig config;
  /// Worker threads for per-graph comparisons.
  unsigned jobs = 1;
  std::string ref_id = "ref";
};

/// Graph files directly in `corpus_dir` (any extension; "manifest.json" is
/// skipped), compared against `ref` in file-name order. Unparseable files and
/// per-graph comparison failures are collected in `rejects`.
/// Throws ErrorKind::empty_input when no graph could be compared.
BatchResult batch(const CausalGraph& ref, const std::filesystem::path& corpus_dir, const EmbeddingProvider* provider,
                  const BatchOptions& options);

/// In-memory variant; ids are used as cmp_id.
BatchResult batch(const CausalGraph& ref, const std::vector<std::pair<std::string, CausalGraph>>& corpus,
                  const EmbeddingProvider* provider, const BatchOptions& options);

enum class PerturbKind { rename_node, delete_node, add_node, delete_edge, add_edge, flip_polarity, reverse_edge };

inline constexpr std::array<PerturbKind, 7> all_perturb_kinds = {
    PerturbKind::rename_node,   PerturbKind::delete_node, PerturbKind::add_node,    PerturbKind::delete_edge,
    PerturbKind::add_edge,      PerturbKind::flip_polarity, PerturbKind::reverse_edge};

std::string_view to_string(PerturbKind k);
std::optional<PerturbKind> parse_perturb_kind(std::string_view id);

struct PerturbationPlan {
  std::uint64_t seed = 0;
  std::map<PerturbKind, std::size_t> ops;
  /// When set, each output graph draws every count uniformly from [0, count].
  bool up_to = false;
  /// add_node is skipped once a graph has this many nodes.
  std::size_t max_nodes = 8;

  /// "rename_node=2,delete_edge=1"; empty means no ops.
  static std::map<PerturbKind, std::size_t> parse_ops(std::string_view spec);
};

struct AppliedOp {
  PerturbKind kind = PerturbKind::rename_node;
  bool applied = false;
  std::string detail;
};

struct PerturbedGraph {
  CausalGraph graph;
  std::vector<AppliedOp> ops;
};

/// The i-th graph of the corpus for `plan`; deterministic per (seed, index).
PerturbedGraph perturb(const CausalGraph& ref, const PerturbationPlan& plan, std::size_t index);

struct ManifestEntry {
  std::string file;
  std::vector<AppliedOp> ops;
};

/// Writes graph_0000.json ... and manifest.json into `out_dir`; returns the
/// manifest entries. Throws ErrorKind::io when the directory is unwritable.
std::vector<ManifestEntry> perturb_corpus(const CausalGraph& ref, const PerturbationPlan& plan, std::size_t n,
                                          const std::filesystem::path& out_dir);

/// Every node renamed to a fresh pseudo-word phrase sharing no token with any
/// original name; structure and polarities are kept.
CausalGraph rename_all(const CausalGraph& g, std::uint64_t seed);

// Serialization (JSON/CSV schemas used by the CLI).
std::string config_json(const ComparisonConfig& config);
std::string reports_json(const std::vector<ComparisonReport>& reports);
/// Header `cmp_id,m1,...,g5`; unselected metrics are empty cells.
std::string reports_csv(const std::vector<ComparisonReport>& reports);
std::string summaries_json(const std::map<Metric, DistributionSummary>& summaries);
std::string manifest_json(const PerturbationPlan& plan, const std::vector<ManifestEntry>& entries);

}  // namespace cldsim
