#include <doctest.h>

#include <chrono>

#include "himol/chem/smiles.hpp"
#include "himol/repair.hpp"
#include "toydata.hpp"

using namespace himol;
using himol::repair::Rule;

TEST_CASE("golden repairs are byte-exact") {
  const std::pair<const char*, const char*> cases[] = {
      {"CC)CCC", "CCCCC"}, {"CC(CCC", "CC(CCC)"}, {"CC1CCC", "CCCCC"}, {"C#C(=CC)C", "C#CC"}, {"CC1C1", "CCC"},
  };
  for (const auto& [in, out] : cases) {
    CAPTURE(in);
    const auto t = repair::repair(in, 0);
    CHECK(t.output == out);
    CHECK(!t.failed);
    CHECK(repair::replay(t.input, t.applied) == t.output);
  }
}

TEST_CASE("rule identities on golden cases") {
  CHECK(repair::repair("CC)CCC", 0).applied.at(0).rule == Rule::R1);
  CHECK(repair::repair("CC(CCC", 0).applied.at(0).rule == Rule::R2);
  CHECK(repair::repair("CC1CCC", 0).applied.at(0).rule == Rule::R3);
  CHECK(repair::repair("C#C(=CC)C", 0).applied.at(0).rule == Rule::R4);
  const auto r5 = repair::repair("CC1C1", 0);
  REQUIRE(r5.applied.size() == 1);
  CHECK(r5.applied[0] == repair::AppliedRule{Rule::R5, 2, "1C1", "C"});
}

TEST_CASE("valid input is the identity") {
  for (const char* s : {"CCCC", "c1ccccc1O", "C1CC1", "[NH4+].[Cl-]"}) {
    const auto t = repair::repair(s, 9);
    CHECK(t.output == s);
    CHECK(t.applied.empty());
  }
}

TEST_CASE("duplicate ring bond and same-atom closure") {
  CHECK(repair::repair("C11CC", 0).output == "CCC");
  CHECK(chem::is_valid(repair::repair("C12CCCC12", 0).output));
}

TEST_CASE("unrepairable input raises with partial trace") {
  CHECK_THROWS_AS(repair::repair("c1cccc1", 0), repair::RepairFailed);
  try {
    repair::repair("CC)c1cccc1", 0);
    FAIL("expected failure");
  } catch (const repair::RepairFailed& e) {
    CHECK(e.partial().failed);
    CHECK(e.partial().applied.size() == 1);
    CHECK(repair::replay(e.partial().input, e.partial().applied) == e.partial().output);
  }
  const auto t = repair::try_repair("C$C", 0);
  CHECK(t.failed);
}

TEST_CASE("fuzzed inputs: soundness, replay, determinism, low failure rate") {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(2024);
  const auto base = testing::corpus(testing::Family::Mixed, 200, 5);
  int failures = 0;
  const int n = 10000;
  for (int k = 0; k < n; ++k) {
    const std::string bad = testing::fuzz_invalid(base[rng.index(base.size())], rng);
    REQUIRE(!chem::is_valid(bad));
    const auto t = repair::try_repair(bad, static_cast<std::uint64_t>(k));
    if (t.failed) {
      ++failures;
      continue;
    }
    REQUIRE(chem::is_valid(t.output));
    REQUIRE(repair::replay(t.input, t.applied) == t.output);
    if (k % 50 == 0) CHECK(repair::try_repair(bad, static_cast<std::uint64_t>(k)) == t);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  MESSAGE("fuzz failures: " << failures << "/" << n << " in " << secs << " s");
  CHECK(failures < n / 100);
}

TEST_CASE("trace json line") {
  const auto t = repair::repair("CC)CCC", 3);
  CHECK(repair::to_json_line(t) ==
        R"js({"input":"CC)CCC","output":"CCCCC","rules":[{"rule":"R1","position":2,"before":")","after":""}],"failed":false,"seed":3})js");
}
