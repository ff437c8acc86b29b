#pragma once

#include <array>
#include <bitset>
#include <optional>
#include <string>
#include <string_view>

namespace cldsim {

// m1 BLEU, m2 fuzzy ratio, m3 cosine, m4 negative Euclidean distance;
// g1 pyramid match, g2 shortest path, g3 subgraph matching,
// g4 WL vertex histogram, g5 WL edge histogram.
enum class Metric { m1, m2, m3, m4, g1, g2, g3, g4, g5 };

inline constexpr std::array<Metric, 9> all_metrics = {Metric::m1, Metric::m2, Metric::m3, Metric::m4, Metric::g1,
                                                      Metric::g2, Metric::g3, Metric::g4, Metric::g5};

std::string_view to_string(Metric m);
std::optional<Metric> parse_metric(std::string_view id);

inline bool is_semantic(Metric m) { return static_cast<int>(m) <= static_cast<int>(Metric::m4); }
inline bool needs_embeddings(Metric m) { return m == Metric::m3 || m == Metric::m4; }

/// Declared score range. m4 is unbounded below.
struct Scale {
  double lo;
  double hi;
};
Scale scale_of(Metric m);

class MetricSet {
 public:
  MetricSet() = default;
  static MetricSet all();
  /// Comma-separated ids such as "m1,m2,g5". Throws ErrorKind::invalid_input.
  static MetricSet parse(std::string_view list);

  void insert(Metric m) { bits_.set(static_cast<std::size_t>(m)); }
  bool contains(Metric m) const { return bits_.test(static_cast<std::size_t>(m)); }
  bool empty() const { return bits_.none(); }
  bool any_semantic() const;
  bool any_kernel() const;
  bool needs_embeddings() const { return contains(Metric::m3) || contains(Metric::m4); }
  std::string to_string() const;

 private:
  std::bitset<9> bits_;
};

}  // namespace cldsim
