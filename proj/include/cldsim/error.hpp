#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cldsim {

enum class ErrorKind {
  invalid_name,
  malformed_input,
  unknown_polarity,
  dangling_endpoint,
  duplicate_edge,
  duplicate_node_id,
  self_loop,
  conflicting_label,
  undefined_statistic,
  resource_limit,
  invalid_input,
  dimension_mismatch,
  zero_norm,
  missing_embedding,
  inconsistent_dimension,
  transport,
  protocol_violation,
  http_status,
  provider_mismatch,
  store_corruption,
  missing_provider,
  empty_graph,
  empty_input,
  io,
  internal,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; `kind` distinguishes diagnostics.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace cldsim
