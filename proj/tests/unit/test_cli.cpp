#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "himol/chem/molfile.hpp"
#include "himol/chem/smiles.hpp"
#include "himol/cli.hpp"
#include "json.hpp"
#include "toydata.hpp"

using namespace himol;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result himol_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_lines(const fs::path& p, const std::vector<std::string>& lines) {
  std::ofstream out(p);
  for (const auto& l : lines) out << l << '\n';
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("himol_cli_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("help, version and usage errors") {
  const auto help = himol_run({"--help"});
  CHECK(help.code == 0);
  for (const char* word : {"pretrain", "invert", "sample", "repair", "eval", "lowshot", "scaffold-split", "--nspdk-width",
                           "--assign-epochs", "--strict", "HIMOL_SEED", "[0.3]"}) {
    CHECK_MESSAGE(help.out.find(word) != std::string::npos, word);
  }
  const auto sub = himol_run({"sample", "--help"});
  CHECK(sub.code == 0);
  CHECK(sub.out.find("--provenance") != std::string::npos);
  CHECK(himol_run({"--version"}).code == 0);
  CHECK(himol_run({}).code == 1);
  CHECK(himol_run({"frobnicate"}).code == 1);
  CHECK(himol_run({"repair", "--in"}).code == 1);
  const auto missing = himol_run({"repair", "--in", "/nonexistent/a.smi", "--out", "/tmp/x.smi"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("/nonexistent/a.smi") != std::string::npos);
}

TEST_CASE("repair: deterministic output, trace, seed fallback, config file") {
  TempDir dir;
  Rng rng(2);
  std::vector<std::string> broken;
  for (const auto& s : testing::corpus(testing::Family::Mixed, 40, 3)) broken.push_back(testing::fuzz_invalid(s, rng));
  write_lines(dir / "a.smi", broken);
  REQUIRE(himol_run({"repair", "--in", dir / "a.smi", "--out", dir / "b1.smi", "--seed", "1", "--trace", dir / "t.jsonl"}).code == 0);
  REQUIRE(himol_run({"repair", "--in", dir / "a.smi", "--out", dir / "b2.smi", "--seed", "1"}).code == 0);
  CHECK(slurp(dir / "b1.smi") == slurp(dir / "b2.smi"));
  const auto out = chem::read_molecules(dir / "b1.smi");
  CHECK(out.size() == broken.size());
  std::size_t valid = 0;
  for (const auto& r : out) valid += chem::is_valid(r.smiles) ? 1 : 0;
  CHECK(valid >= broken.size() - 1);

  std::istringstream trace(slurp(dir / "t.jsonl"));
  std::string line;
  std::getline(trace, line);
  CHECK(nlohmann::json::parse(line)["format"] == "himol-repair-trace");
  std::size_t n = 0;
  while (std::getline(trace, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("rules"));
    CHECK(j["input"] == broken[n++]);
  }
  CHECK(n == broken.size());

  // Seed from the environment when --seed is absent.
  ::setenv("HIMOL_SEED", "1", 1);
  REQUIRE(himol_run({"repair", "--in", dir / "a.smi", "--out", dir / "b3.smi"}).code == 0);
  ::unsetenv("HIMOL_SEED");
  CHECK(slurp(dir / "b3.smi") == slurp(dir / "b1.smi"));

  write_lines(dir / "c.cfg", {"# repair settings", "seed = 1", "trace = " + (dir / "t2.jsonl")});
  REQUIRE(himol_run({"repair", "--config", dir / "c.cfg", "--in", dir / "a.smi", "--out", dir / "b4.smi"}).code == 0);
  CHECK(slurp(dir / "b4.smi") == slurp(dir / "b1.smi"));
  CHECK(fs::exists(dir / "t2.jsonl"));
  const auto echo = slurp(dir / "b4.smi.config");
  CHECK(echo.find("seed=1") != std::string::npos);

  write_lines(dir / "bad.cfg", {"seed = 1", "sead = 2"});
  const auto bad = himol_run({"repair", "--config", dir / "bad.cfg", "--in", dir / "a.smi", "--out", dir / "b5.smi"});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("sead") != std::string::npos);
}

TEST_CASE("artifact versions are checked") {
  TempDir dir;
  write_lines(dir / "v2.smi", {"#himol-molecules 2", "CCO"});
  const auto r = himol_run({"repair", "--in", dir / "v2.smi", "--out", dir / "o.smi"});
  CHECK(r.code == 1);
  CHECK(r.err.find("version") != std::string::npos);
  write_lines(dir / "fake.ckpt", {"not a checkpoint"});
  write_lines(dir / "t.smi", {"CCO", "CCN"});
  const auto c = himol_run({"invert", "--model", dir / "fake.ckpt", "--data", dir / "t.smi", "--out", dir / "e.ckpt"});
  CHECK(c.code == 1);
}

TEST_CASE("scaffold-split writes a labelled partition") {
  TempDir dir;
  std::vector<std::string> lines;
  std::size_t n = 0;
  for (const auto& s : testing::corpus(testing::Family::Mixed, 120, 4)) lines.push_back(s + "\t" + std::to_string(n++ % 2));
  write_lines(dir / "all.smi", lines);
  REQUIRE(himol_run({"scaffold-split", "--in", dir / "all.smi", "--out-prefix", dir / "sp", "--seed", "5"}).code == 0);
  std::size_t total = 0;
  for (const char* part : {"train", "valid", "test"}) {
    const auto recs = chem::read_molecules(dir / (std::string("sp.") + part + ".smi"));
    CHECK(!recs.empty());
    for (const auto& r : recs) CHECK(r.label.has_value());
    total += recs.size();
  }
  CHECK(total == lines.size());
  write_lines(dir / "one.smi", {"c1ccccc1C", "c1ccccc1O"});
  CHECK(himol_run({"scaffold-split", "--in", dir / "one.smi", "--out-prefix", dir / "x"}).code == 1);
}

TEST_CASE("pipeline smoke: pretrain, invert, strict sampling, eval, lowshot") {
  const auto start = std::chrono::steady_clock::now();
  TempDir dir;
  write_lines(dir / "corpus.smi", testing::corpus(testing::Family::Mixed, 200, 1));
  write_lines(dir / "train.smi", testing::corpus(testing::Family::Acyclic, 30, 2));
  write_lines(dir / "test.smi", testing::corpus(testing::Family::Acyclic, 30, 3));
  REQUIRE(himol_run({"pretrain", "--corpus", dir / "corpus.smi", "--out", dir / "m.ckpt", "--epochs", "3", "--embed", "32",
                     "--mlp", "64", "--context", "64", "--lr", "1e-3", "--seed", "1"})
              .code == 0);
  REQUIRE(himol_run({"invert", "--model", dir / "m.ckpt", "--data", dir / "train.smi", "--k", "3", "--epochs", "10",
                     "--out", dir / "e.ckpt", "--seed", "1"})
              .code == 0);
  const auto s = himol_run({"sample", "--model", dir / "m.ckpt", "--emb", dir / "e.ckpt", "--n", "100", "--strict",
                            "--repair", "--seed", "7", "--max-len", "50", "--out", dir / "gen.smi", "--provenance",
                            dir / "gen.jsonl"});
  REQUIRE_MESSAGE(s.code == 0, s.err);
  const auto gen = chem::read_molecules(dir / "gen.smi");
  CHECK(gen.size() == 100);
  REQUIRE(himol_run({"eval", "--gen", dir / "gen.smi", "--train", dir / "train.smi", "--test", dir / "test.smi",
                     "--model", dir / "m.ckpt", "--out", dir / "report.json"})
              .code == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(report["format"] == "himol-report");
  CHECK(report["validity"] == 100.0);
  CHECK(report["uniqueness"] == 100.0);
  CHECK(report["novelty"] == 100.0);
  CHECK(report["frechet"].is_number());
  CHECK(report["nspdk_mmd"].is_number());
  // Rerunning from the echoed configuration reproduces the batch.
  REQUIRE(himol_run({"sample", "--config", dir / "gen.smi.config", "--out", dir / "gen2.smi", "--provenance", dir / "g2.jsonl"}).code == 0);
  CHECK(slurp(dir / "gen2.smi") == slurp(dir / "gen.smi"));

  std::vector<std::string> pool, test;
  const auto arom = testing::corpus(testing::Family::Aromatic, 40, 8);
  const auto acyc = testing::corpus(testing::Family::Acyclic, 40, 9);
  for (std::size_t n = 0; n < 20; ++n) {
    pool.push_back(arom[n] + "\t1");
    pool.push_back(acyc[n] + "\t0");
    test.push_back(arom[20 + n] + "\t1");
    test.push_back(acyc[20 + n] + "\t0");
  }
  write_lines(dir / "pool.tsv", pool);
  write_lines(dir / "test.tsv", test);
  const auto low = himol_run({"lowshot", "--pool", dir / "pool.tsv", "--test", dir / "test.tsv", "--model", dir / "m.ckpt",
                              "--shots", "4", "--seeds", "2", "--epochs", "3", "--assign-epochs", "1", "--k", "2", "--max-len", "50",
                              "--temperature", "1.0", "--repair", "--out", dir / "low.json"});
  REQUIRE_MESSAGE(low.code == 0, low.err);
  const auto lj = nlohmann::json::parse(slurp(dir / "low.json"));
  CHECK(lj["per_seed"].size() == 2);
  const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 60.0;
  CHECK(minutes < 10.0);
  MESSAGE("pipeline smoke took " << minutes * 60.0 << " s");
}
