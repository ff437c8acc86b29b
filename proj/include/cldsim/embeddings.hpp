#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "cldsim/text_metrics.hpp"

namespace cldsim {

/// Maps canonical phrases to vectors of one shared dimension. Implementations
/// are deterministic per identity() and safe for concurrent embed() calls.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  /// One vector per phrase, in input order.
  virtual std::vector<EmbeddingVector> embed(std::span<const std::string> phrases) const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::string identity() const = 0;
};

// In-memory phrase table with the TSV on-disk format:
//   #dim=<d>\t#provider=<id>
//   phrase\tv1\t...\tvd
class EmbeddingStore {
 public:
  EmbeddingStore(std::size_t dim, std::string provider_id);

  static EmbeddingStore load(const std::filesystem::path& path);
  static EmbeddingStore parse(std::string_view text);

  std::string serialize() const;
  void save_atomic(const std::filesystem::path& path) const;

  std::size_t dim() const { return dim_; }
  const std::string& provider_id() const { return provider_id_; }
  std::size_t size() const { return entries_.size(); }

  const EmbeddingVector* find(const std::string& canonical_phrase) const;
  /// Canonicalizes the phrase. Throws ErrorKind::inconsistent_dimension on a
  /// dim mismatch.
  void insert(const std::string& phrase, EmbeddingVector v);

 private:
  std::size_t dim_;
  std::string provider_id_;
  std::map<std::string, EmbeddingVector> entries_;
};

/// Serves exactly the phrases of a TSV store; anything else is
/// ErrorKind::missing_embedding.
class FileProvider final : public EmbeddingProvider {
 public:
  explicit FileProvider(EmbeddingStore store) : store_(std::move(store)) {}

  std::vector<EmbeddingVector> embed(std::span<const std::string> phrases) const override;
  std::size_t dim() const override { return store_.dim(); }
  std::string identity() const override { return store_.provider_id(); }

  const EmbeddingStore& store() const { return store_; }

 private:
  EmbeddingStore store_;
};

std::unique_ptr<EmbeddingProvider> file_provider_load(const std::filesystem::path& path);

/// Phrase vector = mean over tokens of seeded pseudo-random unit vectors.
/// Identical tokens always get identical vectors, so token order is ignored.
class DeterministicProvider final : public EmbeddingProvider {
 public:
  DeterministicProvider(std::uint64_t seed, std::size_t dim);

  std::vector<EmbeddingVector> embed(std::span<const std::string> phrases) const override;
  std::size_t dim() const override { return dim_; }
  std::string identity() const override;

  EmbeddingVector token_vector(std::string_view token) const;

 private:
  std::uint64_t seed_;
  std::size_t dim_;
};

std::unique_ptr<EmbeddingProvider> deterministic_provider(std::uint64_t seed, std::size_t dim);

struct HttpProviderOptions {
  std::size_t batch_size = 64;
  std::chrono::milliseconds timeout{30'000};
};

/// Client for POST <base>/embed with body {"texts":[...]} answering
/// {"vectors":[[...]...],"dim":int,"model":str}. identity() is the server's
/// model name; dim() and identity() probe the server on first use.
class HttpProvider final : public EmbeddingProvider {
 public:
  explicit HttpProvider(std::string url, HttpProviderOptions options = {});

  std::vector<EmbeddingVector> embed(std::span<const std::string> phrases) const override;
  std::size_t dim() const override;
  std::string identity() const override;

  const std::string& url() const { return base_url_; }

 private:
  struct Batch {
    std::vector<EmbeddingVector> vectors;
    std::size_t dim = 0;
    std::string model;
  };

  Batch post_batch(std::span<const std::string> texts, std::size_t offset) const;
  void learn(std::size_t dim, const std::string& model) const;
  void probe() const;

  std::string scheme_host_port_;
  std::string base_path_;
  std::string base_url_;
  HttpProviderOptions options_;
  mutable std::mutex mutex_;
  mutable std::size_t dim_ = 0;
  mutable std::string model_;
};

std::unique_ptr<EmbeddingProvider> http_provider(std::string url, HttpProviderOptions options = {});

/// Serves hits from a TSV store and fetches misses from `inner`, replacing
/// the store file atomically after each fetched batch. Opening a store
/// written by a different provider identity throws ErrorKind::provider_mismatch;
/// an unreadable store throws ErrorKind::store_corruption.
class CachedProvider final : public EmbeddingProvider {
 public:
  CachedProvider(std::shared_ptr<const EmbeddingProvider> inner, std::filesystem::path store_path);

  std::vector<EmbeddingVector> embed(std::span<const std::string> phrases) const override;
  std::size_t dim() const override { return inner_->dim(); }
  std::string identity() const override { return inner_->identity(); }

  std::size_t cached_count() const;

 private:
  std::shared_ptr<const EmbeddingProvider> inner_;
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  mutable std::unique_ptr<EmbeddingStore> store_;
};

std::unique_ptr<EmbeddingProvider> cached(std::shared_ptr<const EmbeddingProvider> inner,
                                          std::filesystem::path store_path);

}  // namespace cldsim
