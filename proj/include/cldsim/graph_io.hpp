#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "cldsim/graph.hpp"

namespace cldsim {

// JSON schema:
//   {"nodes":[{"id":str,"name":str}...],
//    "edges":[{"src":str,"dst":str,"polarity":"+"|"-"}...]}
// Unknown keys are rejected at every level. Diagnostics carry a location
// such as "edges[2].polarity".
CausalGraph parse_json(std::string_view text);
std::string to_json(const CausalGraph& g, int indent = 2);

// Mermaid-style edge list:
//   graph TD
//   SE[Student Enrollment] -- "+" --> SC[School Capacity Strain]
//   SC -- "-" --> SE
// A bare `ID[Label]` line declares an isolated node. `#` lines are comments.
CausalGraph parse_cld_text(std::string_view text);
std::string to_cld_text(const CausalGraph& g);

/// Dispatches on extension: .json is JSON, .mmd/.cld/.txt is CLD text,
/// anything else is sniffed (leading '{' means JSON).
CausalGraph load_graph(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace cldsim
