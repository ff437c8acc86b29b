#include "cldsim/error.hpp"

namespace cldsim {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_name: return "invalid-name";
    case ErrorKind::malformed_input: return "malformed-input";
    case ErrorKind::unknown_polarity: return "unknown-polarity";
    case ErrorKind::dangling_endpoint: return "dangling-endpoint";
    case ErrorKind::duplicate_edge: return "duplicate-edge";
    case ErrorKind::duplicate_node_id: return "duplicate-node-id";
    case ErrorKind::self_loop: return "self-loop";
    case ErrorKind::conflicting_label: return "conflicting-label";
    case ErrorKind::undefined_statistic: return "undefined-statistic";
    case ErrorKind::resource_limit: return "resource-limit";
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::dimension_mismatch: return "dimension-mismatch";
    case ErrorKind::zero_norm: return "zero-norm";
    case ErrorKind::missing_embedding: return "missing-embedding";
    case ErrorKind::inconsistent_dimension: return "inconsistent-dimension";
    case ErrorKind::transport: return "transport";
    case ErrorKind::protocol_violation: return "protocol-violation";
    case ErrorKind::http_status: return "http-status";
    case ErrorKind::provider_mismatch: return "provider-mismatch";
    case ErrorKind::store_corruption: return "store-corruption";
    case ErrorKind::missing_provider: return "missing-provider";
    case ErrorKind::empty_graph: return "empty-graph";
    case ErrorKind::empty_input: return "empty-input";
    case ErrorKind::io: return "io";
    case ErrorKind::internal: return "internal";
  }
  return "unknown";
}

}  // namespace cldsim
