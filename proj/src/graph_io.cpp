#include "cldsim/graph_io.hpp"

#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

namespace cldsim {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) {
      throw Error(ErrorKind::malformed_input, where + ": unknown key '" + key + "'");
    }
  }
}

const std::string& require_string(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorKind::malformed_input, where + ": missing '" + key + "'");
  if (!it->is_string()) {
    throw Error(ErrorKind::malformed_input, where + "." + key + ": expected a string");
  }
  return it->get_ref<const std::string&>();
}

const json& require_array(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorKind::malformed_input, std::string("missing '") + key + "'");
  if (!it->is_array()) throw Error(ErrorKind::malformed_input, std::string(key) + ": expected an array");
  return *it;
}

// Re-throws builder errors with the JSON location prefixed.
template <typename F>
void at_location(const std::string& where, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    throw Error(e.kind(), where + ": " + e.detail());
  }
}

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail_at(std::size_t line_no, ErrorKind kind, const std::string& msg) {
  throw Error(kind, "line " + std::to_string(line_no) + ": " + msg);
}

}  // namespace

CausalGraph parse_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::malformed_input, "byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::malformed_input, "top level: expected an object");
  reject_unknown_keys(doc, {"nodes", "edges"}, "top level");

  GraphBuilder builder;
  const json& nodes = require_array(doc, "nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string where = "nodes[" + std::to_string(i) + "]";
    const json& node = nodes[i];
    if (!node.is_object()) throw Error(ErrorKind::malformed_input, where + ": expected an object");
    reject_unknown_keys(node, {"id", "name"}, where);
    const auto& id = require_string(node, "id", where);
    const auto& name = require_string(node, "name", where);
    at_location(where, [&] { builder.add_node(id, name); });
  }

  auto edges_it = doc.find("edges");
  if (edges_it != doc.end()) {
    const json& edges = require_array(doc, "edges");
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const std::string where = "edges[" + std::to_string(i) + "]";
      const json& edge = edges[i];
      if (!edge.is_object()) throw Error(ErrorKind::malformed_input, where + ": expected an object");
      reject_unknown_keys(edge, {"src", "dst", "polarity"}, where);
      const auto& src = require_string(edge, "src", where);
      const auto& dst = require_string(edge, "dst", where);
      const auto& pol = require_string(edge, "polarity", where);
      auto polarity = parse_polarity(pol);
      if (!polarity) {
        throw Error(ErrorKind::unknown_polarity, where + ".polarity: '" + pol + "' is not \"+\" or \"-\"");
      }
      at_location(where, [&] { builder.add_edge(src, dst, *polarity); });
    }
  }
  return std::move(builder).build();
}

std::string to_json(const CausalGraph& g, int indent) {
  json nodes = json::array();
  for (const Node& n : g.nodes()) nodes.push_back({{"id", n.id}, {"name", n.name}});
  json edges = json::array();
  for (const Edge& e : g.edges()) {
    edges.push_back({{"src", g.nodes()[e.src].id},
                     {"dst", g.nodes()[e.dst].id},
                     {"polarity", std::string(to_string(e.polarity))}});
  }
  json doc = {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
  return doc.dump(indent) + "\n";
}

CausalGraph parse_cld_text(std::string_view text) {
  static const std::regex header(R"(^(graph|flowchart)(\s+(TD|TB|BT|LR|RL))?$)");
  static const std::regex node_ref(R"(^([A-Za-z0-9_]+)(?:\[([^\]]*)\])?$)");
  static const std::regex edge_line(
      R"re(^([A-Za-z0-9_]+(?:\[[^\]]*\])?)\s*--\s*"([^"]*)"\s*-->\s*([A-Za-z0-9_]+(?:\[[^\]]*\])?)$)re");

  GraphBuilder builder;
  std::map<std::string, std::string, std::less<>> labels;  // id -> canonical label
  bool seen_statement = false;
  std::size_t line_no = 0;

  auto fail = [&](ErrorKind kind, const std::string& msg) { fail_at(line_no, kind, msg); };

  // Declares or re-mentions a node; returns its id.
  auto mention = [&](const std::string& ref) -> std::string {
    std::smatch m;
    if (!std::regex_match(ref, m, node_ref)) fail_at(line_no, ErrorKind::malformed_input, "bad node reference '" + ref + "'");
    std::string id = m[1].str();
    auto known = labels.find(id);
    if (m[2].matched) {
      std::string label;
      try {
        label = canonical_name(m[2].str());
      } catch (const Error& e) {
        fail(e.kind(), "node '" + id + "' has an empty label");
      }
      if (known == labels.end()) {
        builder.add_node(id, label);
        labels.emplace(id, label);
      } else if (known->second != label) {
        fail(ErrorKind::conflicting_label,
             "node '" + id + "' relabeled '" + label + "' (first seen as '" + known->second + "')");
      }
    } else if (known == labels.end()) {
      fail(ErrorKind::dangling_endpoint, "node '" + id + "' used before it was given a label");
    }
    return id;
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    std::string line(trim(raw));
    if (line.empty() || line.front() == '#') continue;
    if (!seen_statement && std::regex_match(line, header)) {
      seen_statement = true;
      continue;
    }
    seen_statement = true;

    std::smatch m;
    if (std::regex_match(line, m, edge_line)) {
      std::string sign = m[2].str();
      auto polarity = parse_polarity(sign);
      if (!polarity) fail(ErrorKind::unknown_polarity, "'" + sign + "' is not \"+\" or \"-\"");
      std::string src = mention(m[1].str());
      std::string dst = mention(m[3].str());
      try {
        builder.add_edge(src, dst, *polarity);
      } catch (const Error& e) {
        fail(e.kind(), e.detail());
      }
    } else if (std::regex_match(line, m, node_ref) && m[2].matched) {
      mention(line);
    } else {
      fail(ErrorKind::malformed_input, "expected `ID[Label] -- \"+\" --> ID[Label]`, got '" + line + "'");
    }
  }
  return std::move(builder).build();
}

std::string to_cld_text(const CausalGraph& g) {
  std::ostringstream out;
  out << "graph TD\n";
  std::vector<bool> declared(g.node_count(), false);
  auto ref = [&](std::size_t v) {
    std::string s = g.nodes()[v].id;
    if (!declared[v]) {
      s += "[" + g.nodes()[v].name + "]";
      declared[v] = true;
    }
    return s;
  };
  for (const Edge& e : g.edges()) {
    std::string src = ref(e.src);
    std::string dst = ref(e.dst);
    out << src << " -- \"" << to_string(e.polarity) << "\" --> " << dst << "\n";
  }
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    if (!declared[v]) out << ref(v) << "\n";
  }
  return out.str();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::io, "short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::io, "cannot replace '" + path.string() + "': " + ec.message());
}

CausalGraph load_graph(const std::filesystem::path& path) {
  std::string content = read_file(path);
  auto ext = path.extension().string();
  auto prefix = [&](const Error& e) { return Error(e.kind(), path.filename().string() + ": " + e.detail()); };
  try {
    if (ext == ".json") return parse_json(content);
    if (ext == ".mmd" || ext == ".cld" || ext == ".txt") return parse_cld_text(content);
    auto first = trim(content);
    if (!first.empty() && first.front() == '{') return parse_json(content);
    return parse_cld_text(content);
  } catch (const Error& e) {
    throw prefix(e);
  }
}

}  // namespace cldsim
