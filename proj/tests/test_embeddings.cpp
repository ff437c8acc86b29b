#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <random>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cldsim/embeddings.hpp"
#include "cldsim/error.hpp"
#include "cldsim/graph_io.hpp"
#include "support/oracles.hpp"

using namespace cldsim;
namespace fs = std::filesystem;

namespace {

template <typename F>
ErrorKind kind_of(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::internal;
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("cldsim_emb_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Counts calls and answers from a deterministic provider.
class CountingProvider final : public EmbeddingProvider {
 public:
  explicit CountingProvider(std::uint64_t seed) : inner_(seed, 8) {}
  std::vector<EmbeddingVector> embed(std::span<const std::string> phrases) const override {
    ++calls;
    texts += phrases.size();
    return inner_.embed(phrases);
  }
  std::size_t dim() const override { return inner_.dim(); }
  std::string identity() const override { return inner_.identity(); }
  mutable std::atomic<int> calls{0};
  mutable std::atomic<std::size_t> texts{0};

 private:
  DeterministicProvider inner_;
};

class FailingProvider final : public EmbeddingProvider {
 public:
  std::vector<EmbeddingVector> embed(std::span<const std::string>) const override {
    throw Error(ErrorKind::transport, "down");
  }
  std::size_t dim() const override { return 8; }
  std::string identity() const override { return "det:seed=3,dim=8"; }
};

// In-process stand-in for the embedding sidecar. `mode` selects the reply.
class FakeServer {
 public:
  enum class Mode { echo, short_reply, bad_dim, status_400, not_json };

  FakeServer() {
    server_.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests;
      auto body = nlohmann::json::parse(req.body);
      const auto texts = body.at("texts").get<std::vector<std::string>>();
      max_batch = std::max(max_batch.load(), texts.size());
      DeterministicProvider det(99, 4);
      nlohmann::json vectors = nlohmann::json::array();
      for (const auto& v : det.embed(texts)) vectors.push_back(v.values);
      switch (mode.load()) {
        case Mode::echo: break;
        case Mode::short_reply: vectors.erase(vectors.begin()); break;
        case Mode::bad_dim: vectors[0].push_back(0.5); break;
        case Mode::status_400:
          res.status = 400;
          res.set_content(R"({"error":"texts too long"})", "application/json");
          return;
        case Mode::not_json: res.set_content("<html>", "text/html"); return;
      }
      res.set_content(nlohmann::json{{"vectors", vectors}, {"dim", 4}, {"model", "fake-model"}}.dump(),
                      "application/json");
    });
    port = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }

  std::atomic<Mode> mode{Mode::echo};
  std::atomic<int> requests{0};
  std::atomic<std::size_t> max_batch{0};
  int port = 0;

 private:
  httplib::Server server_;
  std::thread thread_;
};

}  // namespace

TEST(EmbeddingStore, TsvFormat) {
  auto store = EmbeddingStore::parse("#dim=3\t#provider=test\npopulation\t1\t0\t0\nNet  Increase\t0\t1\t0.5\n");
  EXPECT_EQ(store.dim(), 3u);
  EXPECT_EQ(store.provider_id(), "test");
  EXPECT_EQ(store.size(), 2u);
  ASSERT_NE(store.find("net increase"), nullptr);
  EXPECT_EQ(store.find("net increase")->values, (std::vector<double>{0, 1, 0.5}));
  EXPECT_EQ(EmbeddingStore::parse(store.serialize()).serialize(), store.serialize());

  EXPECT_EQ(kind_of([] { EmbeddingStore::parse("#dim=3\t#provider=t\na\t1\t2\t3\nb\t1\t2\n"); }),
            ErrorKind::inconsistent_dimension);
  try {
    EmbeddingStore::parse("#dim=2\t#provider=t\na\t1\tx\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_EQ(kind_of([] { EmbeddingStore::parse("a\t1\t2\n"); }), ErrorKind::malformed_input);
}

TEST(EmbeddingStore, RoundTripsDoublesExactly) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  EmbeddingStore store(5, "det:seed=1,dim=5");
  for (int i = 0; i < 20; ++i) {
    EmbeddingVector v;
    for (int k = 0; k < 5; ++k) v.values.push_back(normal(rng));
    store.insert("phrase " + std::to_string(i), v);
  }
  auto back = EmbeddingStore::parse(store.serialize());
  for (int i = 0; i < 20; ++i) {
    const auto key = "phrase " + std::to_string(i);
    EXPECT_EQ(back.find(key)->values, store.find(key)->values);
  }
}

TEST(FileProvider, Examples) {
  auto dir = scratch("file");
  write_file_atomic(dir / "e.tsv", "#dim=3\t#provider=fixture\npopulation\t1\t0\t0\ngrowth\t0\t1\t0\n");
  auto p = file_provider_load(dir / "e.tsv");
  EXPECT_EQ(p->dim(), 3u);
  EXPECT_EQ(p->identity(), "fixture");
  std::vector<std::string> q{"growth", "Population"};
  auto v = p->embed(q);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].values, (std::vector<double>{0, 1, 0}));
  std::vector<std::string> missing{"land"};
  EXPECT_EQ(kind_of([&] { p->embed(missing); }), ErrorKind::missing_embedding);

  write_file_atomic(dir / "bad.tsv", "#dim=3\t#provider=f\na\t1\t0\t0\nb\t1\t0\n");
  try {
    file_provider_load(dir / "bad.tsv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::inconsistent_dimension);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  fs::remove_all(dir);
}

TEST(DeterministicProvider, Examples) {
  DeterministicProvider p(7, 32);
  EXPECT_EQ(p.identity(), "det:seed=7,dim=32");
  std::vector<std::string> q{"population growth", "growth population", "population growth"};
  auto v = p.embed(q);
  EXPECT_EQ(v[0], v[2]);
  EXPECT_EQ(v[0], v[1]);
  EXPECT_EQ(v[0].dim(), 32u);
  EXPECT_EQ(kind_of([] { DeterministicProvider(1, 1); }), ErrorKind::invalid_input);
  EXPECT_NE(DeterministicProvider(8, 32).embed(q)[0], v[0]);

  // Token-disjoint phrases: mean cosine well below 0.5.
  std::mt19937_64 rng(5);
  double sum = 0;
  for (int i = 0; i < 100; ++i) {
    std::vector<std::string> pair{oracle::random_word(rng, 8, "abcdefghij") + "x",
                                  oracle::random_word(rng, 8, "klmnopqrst") + "y"};
    auto e = p.embed(pair);
    sum += cosine(e[0], e[1]);
  }
  EXPECT_LT(sum / 100, 0.5);
}

TEST(HttpProvider, EchoAndBatching) {
  FakeServer server;
  HttpProvider p(server.url(), {.batch_size = 2});
  EXPECT_EQ(p.dim(), 4u);
  EXPECT_EQ(p.identity(), "fake-model");
  std::vector<std::string> one{"population"};
  auto v = p.embed(one);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].dim(), 4u);
  EXPECT_EQ(v[0], DeterministicProvider(99, 4).embed(one)[0]);

  std::vector<std::string> five{"a", "b", "c", "d", "e"};
  const int before = server.requests;
  auto all = p.embed(five);
  EXPECT_EQ(all.size(), 5u);
  EXPECT_EQ(server.requests - before, 3);
  EXPECT_LE(server.max_batch.load(), 2u);
  EXPECT_EQ(all, DeterministicProvider(99, 4).embed(five));

  // The bare host:port form is accepted too.
  HttpProvider bare("127.0.0.1:" + std::to_string(server.port));
  EXPECT_EQ(bare.embed(one), v);
}

TEST(HttpProvider, ProtocolErrors) {
  FakeServer server;
  HttpProvider p(server.url(), {.batch_size = 2});
  std::vector<std::string> three{"a", "b", "c"};

  server.mode = FakeServer::Mode::short_reply;
  try {
    p.embed(three);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::protocol_violation);
    EXPECT_NE(std::string(e.what()).find("batch [0, 2)"), std::string::npos) << e.what();
  }
  server.mode = FakeServer::Mode::bad_dim;
  EXPECT_EQ(kind_of([&] { p.embed(three); }), ErrorKind::protocol_violation);
  server.mode = FakeServer::Mode::not_json;
  EXPECT_EQ(kind_of([&] { p.embed(three); }), ErrorKind::protocol_violation);
  server.mode = FakeServer::Mode::status_400;
  try {
    p.embed(three);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::http_status);
    EXPECT_NE(std::string(e.what()).find("texts too long"), std::string::npos) << e.what();
  }
  EXPECT_EQ(kind_of([] { HttpProvider("https://example.com"); }), ErrorKind::invalid_input);
}

TEST(HttpProvider, UnreachableHostLeavesNoCache) {
  // Bind a port, then close it so nothing listens there.
  int port;
  {
    httplib::Server s;
    port = s.bind_to_any_port("127.0.0.1");
  }
  auto dir = scratch("unreachable");
  auto http = std::shared_ptr<const EmbeddingProvider>(
      http_provider("http://127.0.0.1:" + std::to_string(port), {.timeout = std::chrono::milliseconds(500)}));
  std::vector<std::string> q{"population"};
  EXPECT_EQ(kind_of([&] { http->embed(q); }), ErrorKind::transport);
  EXPECT_EQ(kind_of([&] { cached(http, dir / "cache.tsv")->embed(q); }), ErrorKind::transport);
  EXPECT_FALSE(fs::exists(dir / "cache.tsv"));
  fs::remove_all(dir);
}

TEST(HttpProvider, CachedOverHttp) {
  FakeServer server;
  auto dir = scratch("httpcache");
  std::shared_ptr<const EmbeddingProvider> http = http_provider(server.url());
  auto c = cached(http, dir / "cache.tsv");
  std::vector<std::string> q{"population", "growth"};
  auto first = c->embed(q);
  const int after_first = server.requests;
  EXPECT_EQ(c->embed(q), first);
  EXPECT_EQ(server.requests, after_first);
  EXPECT_EQ(EmbeddingStore::load(dir / "cache.tsv").provider_id(), "fake-model");
  fs::remove_all(dir);
}

TEST(CachedProvider, HitsMissesAndPersistence) {
  auto dir = scratch("cache");
  auto inner = std::make_shared<CountingProvider>(3);
  {
    CachedProvider c(inner, dir / "store.tsv");
    std::vector<std::string> q{"population", "growth", "population"};
    auto v = c.embed(q);
    EXPECT_EQ(inner->calls, 1);
    EXPECT_EQ(inner->texts, 2u);  // deduplicated misses
    EXPECT_EQ(v, inner->embed(q));
    inner->calls = 0;
    EXPECT_EQ(c.embed(q), v);
    EXPECT_EQ(inner->calls, 0);
    EXPECT_EQ(c.cached_count(), 2u);
  }
  // A fresh instance reads the persisted store.
  CachedProvider again(inner, dir / "store.tsv");
  inner->calls = 0;
  std::vector<std::string> q{"Population"};
  again.embed(q);
  EXPECT_EQ(inner->calls, 0);
  EXPECT_FALSE(fs::exists(dir / "store.tsv.tmp"));
  fs::remove_all(dir);
}

TEST(CachedProvider, MismatchCorruptionAndFailure) {
  auto dir = scratch("cache_err");
  write_file_atomic(dir / "other.tsv", "#dim=8\t#provider=someone-else\n");
  auto inner = std::make_shared<CountingProvider>(3);
  EXPECT_EQ(kind_of([&] { CachedProvider(inner, dir / "other.tsv"); }), ErrorKind::provider_mismatch);

  write_file_atomic(dir / "broken.tsv", "#dim=8\t#provider=det:seed=3,dim=8\nphrase\t1\t2\n");
  EXPECT_EQ(kind_of([&] { CachedProvider(inner, dir / "broken.tsv"); }), ErrorKind::store_corruption);
  // Never silently rebuilt.
  EXPECT_EQ(read_file(dir / "broken.tsv"), "#dim=8\t#provider=det:seed=3,dim=8\nphrase\t1\t2\n");

  // A previous snapshot survives a failed fetch, and a stale temp file from an
  // interrupted write is ignored.
  {
    CachedProvider c(inner, dir / "good.tsv");
    std::vector<std::string> q{"population"};
    c.embed(q);
  }
  const auto snapshot = read_file(dir / "good.tsv");
  write_file_atomic(dir / "good.tsv.tmp", "garbage");
  CachedProvider failing(std::make_shared<FailingProvider>(), dir / "good.tsv");
  std::vector<std::string> miss{"growth"};
  EXPECT_EQ(kind_of([&] { failing.embed(miss); }), ErrorKind::transport);
  EXPECT_EQ(read_file(dir / "good.tsv"), snapshot);
  fs::remove_all(dir);
}

TEST(CachedProvider, EquivalentToInnerUnderRandomQueries) {
  auto dir = scratch("cache_prop");
  auto inner = std::make_shared<CountingProvider>(11);
  CachedProvider c(inner, dir / "s.tsv");
  std::mt19937_64 rng(2);
  for (int round = 0; round < 30; ++round) {
    std::vector<std::string> q;
    for (int k = std::uniform_int_distribution<int>(1, 6)(rng); k > 0; --k) {
      q.push_back(oracle::random_word(rng, 3, "abc") + "z");
    }
    EXPECT_EQ(c.embed(q), inner->embed(q));
  }
  fs::remove_all(dir);
}

TEST(CachedProvider, ConcurrentReaders) {
  auto dir = scratch("cache_mt");
  auto inner = std::make_shared<CountingProvider>(4);
  CachedProvider c(inner, dir / "s.tsv");
  std::vector<std::string> words;
  for (int i = 0; i < 40; ++i) words.push_back("w" + std::to_string(i));
  const auto expected = inner->embed(words);
  std::vector<std::jthread> pool;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 8; ++t) {
    pool.emplace_back([&, t] {
      for (int i = 0; i < 40; ++i) {
        std::vector<std::string> one{words[static_cast<std::size_t>((i * 7 + t) % 40)]};
        if (c.embed(one)[0] != expected[static_cast<std::size_t>((i * 7 + t) % 40)]) ++mismatches;
      }
    });
  }
  pool.clear();
  EXPECT_EQ(mismatches, 0);
  EXPECT_EQ(EmbeddingStore::load(dir / "s.tsv").size(), 40u);
  fs::remove_all(dir);
}
