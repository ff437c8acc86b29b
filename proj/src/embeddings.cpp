#include "cldsim/embeddings.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <system_error>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cldsim/error.hpp"
#include "cldsim/graph.hpp"
#include "cldsim/graph_io.hpp"

namespace cldsim {

namespace {

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw Error(ErrorKind::internal, "cannot format number");
  return std::string(buf, end);
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

[[noreturn]] void store_error(ErrorKind kind, std::size_t line_no, const std::string& msg) {
  throw Error(kind, "line " + std::to_string(line_no) + ": " + msg);
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

// Uniform in (0, 1].
double unit_open(std::uint64_t& state) {
  return (static_cast<double>(splitmix64(state) >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

// ---------------------------------------------------------------------------
// EmbeddingStore

EmbeddingStore::EmbeddingStore(std::size_t dim, std::string provider_id)
    : dim_(dim), provider_id_(std::move(provider_id)) {
  if (dim_ == 0) throw Error(ErrorKind::invalid_input, "embedding dim must be positive");
  if (provider_id_.find_first_of("\t\n") != std::string::npos) {
    throw Error(ErrorKind::invalid_input, "provider id may not contain tabs or newlines");
  }
}

const EmbeddingVector* EmbeddingStore::find(const std::string& canonical_phrase) const {
  auto it = entries_.find(canonical_phrase);
  return it == entries_.end() ? nullptr : &it->second;
}

void EmbeddingStore::insert(const std::string& phrase, EmbeddingVector v) {
  if (v.dim() != dim_) {
    throw Error(ErrorKind::inconsistent_dimension, "vector for '" + phrase + "' has dim " +
                                                       std::to_string(v.dim()) + ", store dim is " +
                                                       std::to_string(dim_));
  }
  for (double x : v.values) {
    if (!std::isfinite(x)) throw Error(ErrorKind::invalid_input, "non-finite value for '" + phrase + "'");
  }
  std::string key = canonical_name(phrase);
  if (key.find('\t') != std::string::npos) {
    throw Error(ErrorKind::invalid_input, "phrase '" + key + "' contains a tab");
  }
  entries_.insert_or_assign(std::move(key), std::move(v));
}

EmbeddingStore EmbeddingStore::parse(std::string_view text) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    auto nl = text.find('\n', pos);
    line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    return true;
  };

  std::string_view line;
  if (!next_line(line)) throw Error(ErrorKind::malformed_input, "line 1: missing header");
  auto header = split_tabs(line);
  if (header.size() != 2 || !header[0].starts_with("#dim=") || !header[1].starts_with("#provider=")) {
    store_error(ErrorKind::malformed_input, line_no, "expected header '#dim=<d>\\t#provider=<id>'");
  }
  auto dim_text = header[0].substr(5);
  std::size_t dim = 0;
  auto [p, ec] = std::from_chars(dim_text.data(), dim_text.data() + dim_text.size(), dim);
  if (ec != std::errc{} || p != dim_text.data() + dim_text.size() || dim == 0) {
    store_error(ErrorKind::malformed_input, line_no, "bad dim '" + std::string(dim_text) + "'");
  }
  EmbeddingStore store(dim, std::string(header[1].substr(10)));

  while (next_line(line)) {
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() - 1 != dim) {
      store_error(ErrorKind::inconsistent_dimension, line_no,
                  std::to_string(fields.size() - 1) + " values, header dim is " + std::to_string(dim));
    }
    EmbeddingVector v;
    v.values.reserve(dim);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      double x = 0.0;
      auto f = fields[i];
      auto [end, err] = std::from_chars(f.data(), f.data() + f.size(), x);
      if (err != std::errc{} || end != f.data() + f.size() || !std::isfinite(x)) {
        store_error(ErrorKind::malformed_input, line_no, "bad number '" + std::string(f) + "'");
      }
      v.values.push_back(x);
    }
    try {
      store.insert(std::string(fields[0]), std::move(v));
    } catch (const Error& e) {
      store_error(e.kind(), line_no, e.detail());
    }
  }
  return store;
}

EmbeddingStore EmbeddingStore::load(const std::filesystem::path& path) {
  std::string text = read_file(path);
  try {
    return parse(text);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.detail());
  }
}

std::string EmbeddingStore::serialize() const {
  std::string out = "#dim=" + std::to_string(dim_) + "\t#provider=" + provider_id_ + "\n";
  for (const auto& [phrase, v] : entries_) {
    out += phrase;
    for (double x : v.values) {
      out += '\t';
      out += format_double(x);
    }
    out += '\n';
  }
  return out;
}

void EmbeddingStore::save_atomic(const std::filesystem::path& path) const {
  write_file_atomic(path, serialize());
}

// ---------------------------------------------------------------------------
// FileProvider

std::vector<EmbeddingVector> FileProvider::embed(std::span<const std::string> phrases) const {
  std::vector<EmbeddingVector> out;
  out.reserve(phrases.size());
  for (const auto& phrase : phrases) {
    const EmbeddingVector* v = store_.find(canonical_name(phrase));
    if (v == nullptr) throw Error(ErrorKind::missing_embedding, "no embedding for '" + phrase + "'");
    out.push_back(*v);
  }
  return out;
}

std::unique_ptr<EmbeddingProvider> file_provider_load(const std::filesystem::path& path) {
  return std::make_unique<FileProvider>(EmbeddingStore::load(path));
}

// ---------------------------------------------------------------------------
// DeterministicProvider

DeterministicProvider::DeterministicProvider(std::uint64_t seed, std::size_t dim) : seed_(seed), dim_(dim) {
  if (dim_ < 2) throw Error(ErrorKind::invalid_input, "deterministic provider needs dim >= 2");
}

std::string DeterministicProvider::identity() const {
  return "det:seed=" + std::to_string(seed_) + ",dim=" + std::to_string(dim_);
}

EmbeddingVector DeterministicProvider::token_vector(std::string_view token) const {
  std::uint64_t state = fnv1a(token) ^ (seed_ * 0xD1B54A32D192ED03ull);
  splitmix64(state);
  EmbeddingVector v;
  v.values.resize(dim_);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    // Box-Muller pairs; portable across standard libraries.
    for (std::size_t i = 0; i < dim_; i += 2) {
      const double r = std::sqrt(-2.0 * std::log(unit_open(state)));
      const double theta = 2.0 * std::numbers::pi * unit_open(state);
      v.values[i] = r * std::cos(theta);
      if (i + 1 < dim_) v.values[i + 1] = r * std::sin(theta);
    }
    for (double x : v.values) norm2 += x * x;
  } while (norm2 == 0.0);
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : v.values) x *= inv;
  return v;
}

std::vector<EmbeddingVector> DeterministicProvider::embed(std::span<const std::string> phrases) const {
  std::vector<EmbeddingVector> out;
  out.reserve(phrases.size());
  for (const auto& phrase : phrases) {
    const auto tokens = tokenize(canonical_name(phrase));
    EmbeddingVector mean;
    mean.values.assign(dim_, 0.0);
    for (const auto& token : tokens) {
      const auto tv = token_vector(token);
      for (std::size_t i = 0; i < dim_; ++i) mean.values[i] += tv.values[i];
    }
    for (double& x : mean.values) x /= static_cast<double>(tokens.size());
    out.push_back(std::move(mean));
  }
  return out;
}

std::unique_ptr<EmbeddingProvider> deterministic_provider(std::uint64_t seed, std::size_t dim) {
  return std::make_unique<DeterministicProvider>(seed, dim);
}

// ---------------------------------------------------------------------------
// HttpProvider

HttpProvider::HttpProvider(std::string url, HttpProviderOptions options) : options_(options) {
  if (options_.batch_size == 0) throw Error(ErrorKind::invalid_input, "batch size must be positive");
  if (url.starts_with("https://")) {
    throw Error(ErrorKind::invalid_input, "https endpoints are not supported; use a local http sidecar");
  }
  if (!url.starts_with("http://")) url = "http://" + url;
  while (url.size() > 7 && url.back() == '/') url.pop_back();
  auto slash = url.find('/', 7);
  scheme_host_port_ = url.substr(0, slash);
  base_path_ = slash == std::string::npos ? "" : url.substr(slash);
  if (scheme_host_port_.size() <= 7) throw Error(ErrorKind::invalid_input, "embedding URL has no host");
  base_url_ = url;
}

void HttpProvider::learn(std::size_t dim, const std::string& model) const {
  std::lock_guard lock(mutex_);
  if (dim_ == 0) {
    dim_ = dim;
    model_ = model;
    return;
  }
  if (dim != dim_) {
    throw Error(ErrorKind::protocol_violation,
                "server changed dim from " + std::to_string(dim_) + " to " + std::to_string(dim));
  }
}

HttpProvider::Batch HttpProvider::post_batch(std::span<const std::string> texts, std::size_t offset) const {
  const std::string where = "batch [" + std::to_string(offset) + ", " + std::to_string(offset + texts.size()) + ")";
  nlohmann::json body = {{"texts", nlohmann::json(std::vector<std::string>(texts.begin(), texts.end()))}};

  httplib::Client client(scheme_host_port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  auto res = client.Post(base_path_ + "/embed", body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorKind::transport, where + ": " + httplib::to_string(res.error()) + " (" + base_url_ + ")");
  }
  if (res->status != 200) {
    std::string detail = res->body;
    try {
      auto err = nlohmann::json::parse(res->body);
      if (err.is_object() && err.contains("error") && err["error"].is_string()) detail = err["error"];
    } catch (const nlohmann::json::exception&) {
    }
    throw Error(ErrorKind::http_status, where + ": status " + std::to_string(res->status) + ": " + detail);
  }

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::protocol_violation, where + ": response is not JSON");
  }
  if (!doc.is_object() || !doc.contains("vectors") || !doc["vectors"].is_array() || !doc.contains("dim") ||
      !doc["dim"].is_number_unsigned() || !doc.contains("model") || !doc["model"].is_string()) {
    throw Error(ErrorKind::protocol_violation, where + ": expected {\"vectors\":[...],\"dim\":int,\"model\":str}");
  }
  Batch batch;
  batch.dim = doc["dim"].get<std::size_t>();
  batch.model = doc["model"].get<std::string>();
  const auto& vectors = doc["vectors"];
  if (vectors.size() != texts.size()) {
    throw Error(ErrorKind::protocol_violation, where + ": " + std::to_string(vectors.size()) +
                                                   " vectors for " + std::to_string(texts.size()) + " texts");
  }
  if (batch.dim == 0) throw Error(ErrorKind::protocol_violation, where + ": dim 0");
  for (const auto& row : vectors) {
    if (!row.is_array() || row.size() != batch.dim) {
      throw Error(ErrorKind::protocol_violation, where + ": vector length differs from dim " + std::to_string(batch.dim));
    }
    EmbeddingVector v;
    v.values.reserve(batch.dim);
    for (const auto& x : row) {
      if (!x.is_number()) throw Error(ErrorKind::protocol_violation, where + ": non-numeric vector entry");
      v.values.push_back(x.get<double>());
    }
    batch.vectors.push_back(std::move(v));
  }
  return batch;
}

std::vector<EmbeddingVector> HttpProvider::embed(std::span<const std::string> phrases) const {
  std::vector<EmbeddingVector> out;
  out.reserve(phrases.size());
  for (std::size_t offset = 0; offset < phrases.size(); offset += options_.batch_size) {
    auto chunk = phrases.subspan(offset, std::min(options_.batch_size, phrases.size() - offset));
    Batch batch = post_batch(chunk, offset);
    learn(batch.dim, batch.model);
    for (auto& v : batch.vectors) out.push_back(std::move(v));
  }
  return out;
}

void HttpProvider::probe() const {
  {
    std::lock_guard lock(mutex_);
    if (dim_ != 0) return;
  }
  const std::string text = "probe";
  Batch batch = post_batch(std::span<const std::string>(&text, 1), 0);
  learn(batch.dim, batch.model);
}

std::size_t HttpProvider::dim() const {
  probe();
  std::lock_guard lock(mutex_);
  return dim_;
}

std::string HttpProvider::identity() const {
  probe();
  std::lock_guard lock(mutex_);
  return model_;
}

std::unique_ptr<EmbeddingProvider> http_provider(std::string url, HttpProviderOptions options) {
  return std::make_unique<HttpProvider>(std::move(url), options);
}

// ---------------------------------------------------------------------------
// CachedProvider

CachedProvider::CachedProvider(std::shared_ptr<const EmbeddingProvider> inner, std::filesystem::path store_path)
    : inner_(std::move(inner)), path_(std::move(store_path)) {
  if (!inner_) throw Error(ErrorKind::missing_provider, "cache needs an inner provider");
  std::error_code ec;
  if (!std::filesystem::exists(path_, ec)) return;
  try {
    store_ = std::make_unique<EmbeddingStore>(EmbeddingStore::load(path_));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::io) throw;
    throw Error(ErrorKind::store_corruption, e.detail());
  }
  const std::string inner_id = inner_->identity();
  if (store_->provider_id() != inner_id) {
    throw Error(ErrorKind::provider_mismatch, path_.string() + " was written by '" + store_->provider_id() +
                                                  "', not '" + inner_id + "'");
  }
}

std::size_t CachedProvider::cached_count() const {
  std::lock_guard lock(mutex_);
  return store_ ? store_->size() : 0;
}

std::vector<EmbeddingVector> CachedProvider::embed(std::span<const std::string> phrases) const {
  std::vector<std::string> keys;
  keys.reserve(phrases.size());
  for (const auto& p : phrases) keys.push_back(canonical_name(p));

  std::vector<std::string> misses;
  {
    std::lock_guard lock(mutex_);
    std::set<std::string> seen;
    for (const auto& key : keys) {
      if ((store_ == nullptr || store_->find(key) == nullptr) && seen.insert(key).second) misses.push_back(key);
    }
  }

  if (!misses.empty()) {
    auto fetched = inner_->embed(misses);
    if (fetched.size() != misses.size()) {
      throw Error(ErrorKind::protocol_violation, "inner provider returned a short batch");
    }
    std::lock_guard lock(mutex_);
    auto next = store_ ? std::make_unique<EmbeddingStore>(*store_)
                       : std::make_unique<EmbeddingStore>(fetched.front().dim(), inner_->identity());
    for (std::size_t i = 0; i < misses.size(); ++i) next->insert(misses[i], std::move(fetched[i]));
    next->save_atomic(path_);
    store_ = std::move(next);
  }

  std::vector<EmbeddingVector> out;
  out.reserve(keys.size());
  std::lock_guard lock(mutex_);
  for (const auto& key : keys) out.push_back(*store_->find(key));
  return out;
}

std::unique_ptr<EmbeddingProvider> cached(std::shared_ptr<const EmbeddingProvider> inner,
                                          std::filesystem::path store_path) {
  return std::make_unique<CachedProvider>(std::move(inner), std::move(store_path));
}

}  // namespace cldsim
