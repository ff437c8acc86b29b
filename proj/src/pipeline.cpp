#include "cldsim/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <thread>

#include <nlohmann/json.hpp>

#include "cldsim/error.hpp"
#include "cldsim/graph_io.hpp"

namespace cldsim {

std::optional<double> ComparisonReport::score(Metric m) const {
  auto it = scores.find(m);
  if (it == scores.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// compare

ComparisonReport compare(const CausalGraph& ref, const CausalGraph& cmp, const EmbeddingProvider* provider,
                         ComparisonConfig config, std::string ref_id, std::string cmp_id) {
  std::vector<EmbeddingVector> ref_vectors;
  if (config.metrics.needs_embeddings()) {
    if (provider == nullptr) {
      throw Error(ErrorKind::missing_provider, "m3/m4 need an embedding source");
    }
    if (ref.empty()) throw Error(ErrorKind::empty_graph, "reference graph has no variables");
    ref_vectors = provider->embed(ref.names());
  }
  return compare(ref, ref_vectors, cmp, provider, std::move(config), std::move(ref_id), std::move(cmp_id));
}

ComparisonReport compare(const CausalGraph& ref, const std::vector<EmbeddingVector>& ref_vectors,
                         const CausalGraph& cmp, const EmbeddingProvider* provider, ComparisonConfig config,
                         std::string ref_id, std::string cmp_id) {
  config.kernels.validate();
  ComparisonReport report;
  report.ref_id = std::move(ref_id);
  report.cmp_id = std::move(cmp_id);

  const MetricSet& metrics = config.metrics;
  if (metrics.any_semantic()) {
    if (ref.empty()) throw Error(ErrorKind::empty_graph, "reference graph has no variables");
    if (cmp.empty()) throw Error(ErrorKind::empty_graph, "comparison graph has no variables");
  }
  std::vector<EmbeddingVector> cmp_vectors;
  if (metrics.needs_embeddings()) {
    if (provider == nullptr) throw Error(ErrorKind::missing_provider, "m3/m4 need an embedding source");
    cmp_vectors = provider->embed(cmp.names());
    config.provider_id = provider->identity();
  } else {
    config.provider_id.clear();
  }

  for (Metric m : all_metrics) {
    if (!metrics.contains(m)) continue;
    if (is_semantic(m)) {
      auto matrix = needs_embeddings(m) ? pairwise_matrix(m, ref, cmp, ref_vectors, cmp_vectors)
                                        : pairwise_matrix(m, ref, cmp, {}, {});
      report.scores[m] = aggregate(matrix, config.strategy);
    } else {
      report.scores[m] = kernel(m, ref, cmp, config.kernels);
    }
  }
  report.config = std::move(config);
  return report;
}

// ---------------------------------------------------------------------------
// summarize

DistributionSummary summarize(const std::vector<double>& values, Metric metric) {
  if (values.empty()) throw Error(ErrorKind::empty_input, "cannot summarize an empty list");
  DistributionSummary s;
  s.metric = metric;
  s.count = values.size();
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  s.median = sorted[(sorted.size() - 1) / 2];
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());

  Scale scale = scale_of(metric);
  double lo = metric == Metric::m4 ? s.min : scale.lo;
  double hi = scale.hi;
  const double width = (hi - lo) / static_cast<double>(summary_bins);
  s.edges.resize(summary_bins + 1);
  for (std::size_t i = 0; i <= summary_bins; ++i) s.edges[i] = lo + width * static_cast<double>(i);
  s.edges.back() = hi;
  s.counts.assign(summary_bins, 0);
  for (double v : values) {
    std::size_t bin = summary_bins - 1;
    if (width > 0.0) {
      const double pos = std::floor((v - lo) / width);
      bin = pos <= 0.0 ? 0 : std::min(static_cast<std::size_t>(pos), summary_bins - 1);
    }
    ++s.counts[bin];
  }
  return s;
}

// ---------------------------------------------------------------------------
// batch

BatchResult batch(const CausalGraph& ref, const std::vector<std::pair<std::string, CausalGraph>>& corpus,
                  const EmbeddingProvider* provider, const BatchOptions& options) {
  if (corpus.empty()) throw Error(ErrorKind::empty_input, "empty corpus");
  BatchResult result;

  std::vector<EmbeddingVector> ref_vectors;
  if (options.config.metrics.needs_embeddings()) {
    if (provider == nullptr) throw Error(ErrorKind::missing_provider, "m3/m4 need an embedding source");
    if (ref.empty()) throw Error(ErrorKind::empty_graph, "reference graph has no variables");
    ref_vectors = provider->embed(ref.names());
  }

  std::vector<std::optional<ComparisonReport>> slots(corpus.size());
  std::vector<std::string> failures(corpus.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < corpus.size(); i = next++) {
      try {
        slots[i] = compare(ref, ref_vectors, corpus[i].second, provider, options.config, options.ref_id,
                           corpus[i].first);
      } catch (const Error& e) {
        failures[i] = e.what();
      } catch (const std::exception& e) {
        failures[i] = std::string("internal: ") + e.what();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(corpus.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }

  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (slots[i]) {
      result.reports.push_back(std::move(*slots[i]));
    } else {
      result.rejects.push_back({corpus[i].first, failures[i]});
    }
  }
  std::stable_sort(result.reports.begin(), result.reports.end(),
                   [](const ComparisonReport& a, const ComparisonReport& b) { return a.cmp_id < b.cmp_id; });

  if (!result.reports.empty()) {
    for (Metric m : all_metrics) {
      if (!options.config.metrics.contains(m)) continue;
      std::vector<double> values;
      values.reserve(result.reports.size());
      for (const auto& r : result.reports) values.push_back(r.scores.at(m));
      result.summaries.emplace(m, summarize(values, m));
    }
  }
  return result;
}

BatchResult batch(const CausalGraph& ref, const std::filesystem::path& corpus_dir, const EmbeddingProvider* provider,
                  const BatchOptions& options) {
  std::error_code ec;
  if (!std::filesystem::is_directory(corpus_dir, ec)) {
    throw Error(ErrorKind::io, "'" + corpus_dir.string() + "' is not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(corpus_dir)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    if (name == "manifest.json" || name.starts_with(".")) continue;
    files.push_back(entry.path());
  }
  if (files.empty()) throw Error(ErrorKind::empty_input, "empty corpus: no graph files in '" + corpus_dir.string() + "'");
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });

  std::vector<std::pair<std::string, CausalGraph>> corpus;
  std::vector<RejectedFile> unreadable;
  for (const auto& file : files) {
    try {
      corpus.emplace_back(file.filename().string(), load_graph(file));
    } catch (const Error& e) {
      unreadable.push_back({file.filename().string(), e.what()});
    }
  }
  BatchResult result;
  if (!corpus.empty()) result = batch(ref, corpus, provider, options);
  result.rejects.insert(result.rejects.end(), unreadable.begin(), unreadable.end());
  std::sort(result.rejects.begin(), result.rejects.end(),
            [](const RejectedFile& a, const RejectedFile& b) { return a.file < b.file; });
  return result;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

using ojson = nlohmann::ordered_json;

std::string number(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

ojson config_object(const ComparisonConfig& config) {
  return ojson{{"kernels", ojson::parse(kernel_config_json(config.kernels))},
               {"strategy", std::string(to_string(config.strategy))},
               {"metrics", config.metrics.to_string()},
               {"provider_id", config.provider_id.empty() ? ojson(nullptr) : ojson(config.provider_id)}};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string config_json(const ComparisonConfig& config) { return config_object(config).dump(); }

std::string reports_json(const std::vector<ComparisonReport>& reports) {
  ojson arr = ojson::array();
  for (const auto& r : reports) {
    ojson semantic = ojson::object();
    ojson kernels = ojson::object();
    for (const auto& [m, v] : r.scores) (is_semantic(m) ? semantic : kernels)[std::string(to_string(m))] = v;
    if (r.config.metrics.any_semantic()) semantic["strategy"] = std::string(to_string(r.config.strategy));
    arr.push_back(ojson{{"ref_id", r.ref_id},
                        {"cmp_id", r.cmp_id},
                        {"semantic", semantic},
                        {"kernels", kernels},
                        {"config", config_object(r.config)},
                        {"timestamp", r.timestamp ? ojson(*r.timestamp) : ojson(nullptr)}});
  }
  return arr.dump(2) + "\n";
}

std::string reports_csv(const std::vector<ComparisonReport>& reports) {
  std::string out = "cmp_id";
  for (Metric m : all_metrics) out += "," + std::string(to_string(m));
  out += "\n";
  for (const auto& r : reports) {
    out += csv_field(r.cmp_id);
    for (Metric m : all_metrics) {
      out += ",";
      if (auto v = r.score(m)) out += number(*v);
    }
    out += "\n";
  }
  return out;
}

std::string summaries_json(const std::map<Metric, DistributionSummary>& summaries) {
  ojson doc = ojson::object();
  for (const auto& [m, s] : summaries) {
    doc[std::string(to_string(m))] = ojson{{"count", s.count},
                                           {"min", s.min},
                                           {"max", s.max},
                                           {"mean", s.mean},
                                           {"median", s.median},
                                           {"histogram", ojson{{"edges", s.edges}, {"counts", s.counts}}}};
  }
  return doc.dump(2) + "\n";
}

std::string manifest_json(const PerturbationPlan& plan, const std::vector<ManifestEntry>& entries) {
  ojson ops = ojson::object();
  for (const auto& [kind, count] : plan.ops) ops[std::string(to_string(kind))] = count;
  ojson graphs = ojson::array();
  for (const auto& e : entries) {
    ojson applied = ojson::array();
    for (const auto& op : e.ops) {
      applied.push_back(ojson{{"kind", std::string(to_string(op.kind))},
                              {"status", op.applied ? "applied" : "skipped"},
                              {"detail", op.detail}});
    }
    graphs.push_back(ojson{{"file", e.file}, {"ops", applied}});
  }
  ojson doc = {{"seed", plan.seed},
               {"plan", ojson{{"ops", ops}, {"up_to", plan.up_to}, {"max_nodes", plan.max_nodes}}},
               {"count", entries.size()},
               {"graphs", graphs}};
  return doc.dump(2) + "\n";
}

}  // namespace cldsim
