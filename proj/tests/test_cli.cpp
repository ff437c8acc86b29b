#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "cldsim/graph_io.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int status;
  std::string out;
  std::string err;
};

const fs::path kData = CLDSIM_DATA_DIR;

Run run(const std::string& args) {
  const auto err_path = fs::temp_directory_path() / "cldsim_cli_stderr.txt";
  const std::string cmd = std::string(CLDSIM_CLI) + " " + args + " 2>" + err_path.string();
  Run r{};
  FILE* pipe = popen(cmd.c_str(), "r");
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.err = cldsim::read_file(err_path);
  return r;
}

std::string ref() { return (kData / "reference_ltg.json").string(); }

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("cldsim_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Cli, CompareIdentityPrintsNineMaxima) {
  auto r = run("compare " + ref() + " " + ref() + " --embed det:seed=7,dim=32");
  EXPECT_EQ(r.status, 0) << r.err;
  for (const char* line : {"m1  1.0000", "m2  1.0000", "m3  1.0000", "m4  0.0000", "g1  1.0000", "g2  1.0000",
                           "g3  1.0000", "g4  1.0000", "g5  1.0000"}) {
    EXPECT_NE(r.out.find(line), std::string::npos) << line;
  }
}

TEST(Cli, StatsReference) {
  auto r = run("stats " + ref());
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("n=4 m=5 cycles=2"), std::string::npos) << r.out;
  auto j = run("stats " + ref() + " --format json");
  auto doc = nlohmann::json::parse(j.out);
  EXPECT_EQ(doc["cycles"], 2);
  EXPECT_EQ(doc["avg_connectivity"], 1.0);
}

TEST(Cli, MissingProviderIsInputError) {
  auto r = run("compare " + ref() + " " + (kData / "ltg_strong.json").string());
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("missing-provider"), std::string::npos) << r.err;
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("compare " + ref() + " " + ref() + " --bogus").status, 2);
  EXPECT_EQ(run("frobnicate").status, 2);
  EXPECT_EQ(run("").status, 2);
  EXPECT_EQ(run("compare " + ref() + " " + ref() + " --metrics g1 --strategy nope").status, 2);
  EXPECT_EQ(run("compare " + ref() + " " + ref() + " --metrics q9").status, 2);
  EXPECT_EQ(run("compare " + ref() + " " + ref() + " --embed det:seed=1").status, 2);
  EXPECT_EQ(run("compare " + ref() + " " + ref() + " --embed ftp:x").status, 2);
  EXPECT_EQ(run("stats " + ref() + " --format xml").status, 2);
  EXPECT_EQ(run("--help").status, 0);
}

TEST(Cli, InputErrors) {
  auto dir = scratch("input");
  cldsim::write_file_atomic(dir / "bad.mmd", "A[x] -- \"?\" --> B[y]\n");
  auto r = run("validate " + (dir / "bad.mmd").string());
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("unknown-polarity"), std::string::npos) << r.err;
  EXPECT_EQ(run("stats " + (dir / "missing.json").string()).status, 1);
  fs::remove_all(dir);
}

TEST(Cli, MachineOutputIsByteIdentical) {
  const std::string args = "compare " + ref() + " " + (kData / "ltg_moderate.json").string() +
                           " --embed det:seed=7,dim=32 --format json";
  auto a = run(args);
  auto b = run(args);
  EXPECT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  auto doc = nlohmann::json::parse(a.out);  // nothing but JSON on stdout
  EXPECT_EQ(doc[0]["cmp_id"], "ltg_moderate.json");
  auto csv = run("compare " + ref() + " " + ref() + " --metrics g4 --format csv");
  EXPECT_EQ(csv.out, "cmp_id,m1,m2,m3,m4,g1,g2,g3,g4,g5\nreference_ltg.json,,,,,,,,1,\n");
}

TEST(Cli, ConfigFileAndStrategy) {
  auto dir = scratch("config");
  cldsim::write_file_atomic(dir / "k.json", R"({"wl_iterations":1,"pyramid_dims":2})");
  auto r = run("compare " + ref() + " " + ref() + " --metrics m2,g4 --config " + (dir / "k.json").string() +
               " --strategy optimal_assignment_penalized --format json");
  ASSERT_EQ(r.status, 0) << r.err;
  auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc[0]["config"]["kernels"]["wl_iterations"], 1);
  EXPECT_EQ(doc[0]["config"]["strategy"], "optimal_assignment_penalized");
  cldsim::write_file_atomic(dir / "bad.json", R"({"nope":1})");
  EXPECT_EQ(run("compare " + ref() + " " + ref() + " --metrics g4 --config " + (dir / "bad.json").string()).status, 1);
  fs::remove_all(dir);
}

TEST(Cli, PerturbThenBatch) {
  auto dir = scratch("pipeline");
  auto corpus = dir / "corpus";
  auto out = dir / "out";
  auto p = run("perturb " + ref() + " --n 25 --seed 3 --ops rename_node=2,add_edge=1,delete_edge=1 --up-to --out " +
               corpus.string());
  ASSERT_EQ(p.status, 0) << p.err;
  EXPECT_TRUE(fs::exists(corpus / "manifest.json"));
  EXPECT_TRUE(fs::exists(corpus / "graph_0024.json"));

  auto b = run("batch " + ref() + " " + corpus.string() + " --embed det:seed=7,dim=32 --embed-cache " +
               (dir / "cache.tsv").string() + " --jobs 2 --out " + out.string());
  ASSERT_EQ(b.status, 0) << b.err;
  EXPECT_NE(b.out.find("compared 25 graph(s)"), std::string::npos) << b.out;
  auto reports = nlohmann::json::parse(cldsim::read_file(out / "reports.json"));
  EXPECT_EQ(reports.size(), 25u);
  auto summary = nlohmann::json::parse(cldsim::read_file(out / "summary.json"));
  EXPECT_EQ(summary.size(), 9u);
  EXPECT_TRUE(nlohmann::json::parse(cldsim::read_file(out / "rejects.json")).empty());
  EXPECT_TRUE(fs::exists(dir / "cache.tsv"));
  const auto first = cldsim::read_file(out / "reports.json");

  // Same run served from the cache gives identical machine output.
  auto again = run("batch " + ref() + " " + corpus.string() + " --embed det:seed=7,dim=32 --embed-cache " +
                   (dir / "cache.tsv").string() + " --format json");
  EXPECT_EQ(again.out, first);

  // An unreadable file is listed and makes the exit status non-zero.
  cldsim::write_file_atomic(corpus / "zz_broken.json", "{");
  auto partial = run("batch " + ref() + " " + corpus.string() + " --metrics g2 --out " + out.string());
  EXPECT_EQ(partial.status, 1);
  auto rejects = nlohmann::json::parse(cldsim::read_file(out / "rejects.json"));
  ASSERT_EQ(rejects.size(), 1u);
  EXPECT_EQ(rejects[0]["file"], "zz_broken.json");
  fs::remove_all(dir);
}

TEST(Cli, ValidateWarnings) {
  auto dir = scratch("validate");
  cldsim::write_file_atomic(dir / "g.mmd", "A[x] -- \"+\" --> B[x]\nC[alone]\n");
  auto r = run("validate " + (dir / "g.mmd").string());
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("warning"), std::string::npos) << r.out;
  fs::remove_all(dir);
}
