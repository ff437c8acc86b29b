#include "cldsim/metrics.hpp"

#include <limits>

#include "cldsim/error.hpp"

namespace cldsim {

std::string_view to_string(Metric m) {
  static constexpr std::array<std::string_view, 9> names = {"m1", "m2", "m3", "m4", "g1",
                                                            "g2", "g3", "g4", "g5"};
  return names[static_cast<std::size_t>(m)];
}

std::optional<Metric> parse_metric(std::string_view id) {
  for (Metric m : all_metrics) {
    if (to_string(m) == id) return m;
  }
  return std::nullopt;
}

Scale scale_of(Metric m) {
  switch (m) {
    case Metric::m3: return {-1.0, 1.0};
    case Metric::m4: return {-std::numeric_limits<double>::infinity(), 0.0};
    default: return {0.0, 1.0};
  }
}

MetricSet MetricSet::all() {
  MetricSet s;
  s.bits_.set();
  return s;
}

MetricSet MetricSet::parse(std::string_view list) {
  MetricSet s;
  std::size_t start = 0;
  while (start <= list.size()) {
    auto comma = list.find(',', start);
    auto item = list.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item == "all") {
      s.bits_.set();
    } else {
      auto m = parse_metric(item);
      if (!m) throw Error(ErrorKind::invalid_input, "unknown metric '" + std::string(item) + "'");
      s.insert(*m);
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return s;
}

bool MetricSet::any_semantic() const {
  for (Metric m : all_metrics) {
    if (is_semantic(m) && contains(m)) return true;
  }
  return false;
}

bool MetricSet::any_kernel() const {
  for (Metric m : all_metrics) {
    if (!is_semantic(m) && contains(m)) return true;
  }
  return false;
}

std::string MetricSet::to_string() const {
  std::string out;
  for (Metric m : all_metrics) {
    if (!contains(m)) continue;
    if (!out.empty()) out += ',';
    out += cldsim::to_string(m);
  }
  return out;
}

}  // namespace cldsim
