#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "himol/chem/smiles.hpp"
#include "himol/metrics.hpp"
#include "oracles.hpp"
#include "toydata.hpp"
#include "json.hpp"

using namespace himol;
using namespace himol::metrics;

namespace {

class Constant : public Classifier {
 public:
  explicit Constant(bool v) : v_(v) {}
  bool predict(const chem::MolGraph&) const override { return v_; }

 private:
  bool v_;
};

class FailsOnNitrogen : public Classifier {
 public:
  bool predict(const chem::MolGraph& g) const override {
    for (const auto& a : g.atoms()) {
      if (a.atomic_number == 7) throw ClassifierFailure("nitrogen");
    }
    return true;
  }
};

seq::ActivationStats stats(std::vector<double> mean, std::vector<double> cov) {
  seq::ActivationStats s;
  s.mean = std::move(mean);
  s.cov = std::move(cov);
  s.count = 10;
  return s;
}

std::vector<chem::MolGraph> graphs(const std::vector<std::string>& smiles) {
  std::vector<chem::MolGraph> out;
  for (const auto& s : smiles) out.push_back(chem::parse(s));
  return out;
}

}  // namespace

TEST_CASE("validity, uniqueness, novelty") {
  const std::vector<std::string> two{"CC1CCC", "CCCC"};
  CHECK(validity(two) == 50.0);
  CHECK(validity(std::vector<std::string>{"CCO", "c1ccccc1"}) == 100.0);
  CHECK(validity(std::vector<std::string>{}) == 0.0);
  CHECK(uniqueness(std::vector<std::string>{"CCO", "OCC"}) == 50.0);
  CHECK(uniqueness(std::vector<std::string>{"CCO", "CCN"}) == 100.0);
  CHECK(uniqueness(std::vector<std::string>{"C1"}) == 0.0);
  const std::vector<std::string> train{"CCO", "CCN"};
  CHECK(novelty(std::vector<std::string>{"OCC", "NCC"}, train) == 0.0);
  CHECK(novelty(std::vector<std::string>{"CCC", "CCCl"}, train) == 100.0);
  CHECK(novelty(std::vector<std::string>{"OCC", "CCCl"}, train) == 50.0);
  // Adding a training duplicate never raises novelty.
  Rng rng(3);
  const auto pool = testing::corpus(testing::Family::Mixed, 80, 5);
  std::vector<std::string> gen(pool.begin(), pool.begin() + 30);
  const std::vector<std::string> tr(pool.begin() + 20, pool.end());
  for (int step = 0; step < 20; ++step) {
    const double before = novelty(gen, tr);
    gen.push_back(tr[rng.index(tr.size())]);
    CHECK(novelty(gen, tr) <= before);
  }
}

TEST_CASE("active ratio: constant classifiers, failures, k-NN on two families") {
  const std::vector<std::string> gen{"CCO", "CCN", "c1ccccc1", "C1"};
  CHECK(active_ratio(gen, Constant(true)).percent == 100.0);
  CHECK(active_ratio(gen, Constant(false)).percent == 0.0);
  const auto f = active_ratio(gen, FailsOnNitrogen());
  CHECK(f.failures == 1);
  CHECK(f.scored == 2);
  CHECK(f.percent == 100.0);

  const auto arom = testing::corpus(testing::Family::Aromatic, 120, 31);
  const auto acyc = testing::corpus(testing::Family::Acyclic, 120, 32);
  std::vector<std::pair<std::string, bool>> labelled;
  for (std::size_t n = 0; n < 60; ++n) {
    labelled.emplace_back(arom[n], true);
    labelled.emplace_back(acyc[n], false);
  }
  const KnnTanimoto knn(labelled, 5);
  // Oracle: exhaustive similarity ranking over raw fingerprint bits.
  std::size_t agree = 0, correct = 0, total = 0;
  const auto bits = [](const chem::Fingerprint& fp) {
    std::vector<int> on;
    for (std::size_t b = 0; b < static_cast<std::size_t>(fp.width); ++b) {
      if (fp.test(b)) on.push_back(static_cast<int>(b));
    }
    return on;
  };
  std::vector<std::vector<int>> train_bits;
  for (const auto& [s, l] : labelled) train_bits.push_back(bits(chem::fingerprint(chem::parse(s))));
  for (std::size_t n = 60; n < 120; ++n) {
    for (const auto& [smiles, truth] : {std::pair{arom[n], true}, std::pair{acyc[n], false}}) {
      const auto q = bits(chem::fingerprint(chem::parse(smiles)));
      std::vector<std::pair<double, std::size_t>> sims;
      for (std::size_t t = 0; t < train_bits.size(); ++t) {
        std::vector<int> inter;
        std::set_intersection(q.begin(), q.end(), train_bits[t].begin(), train_bits[t].end(), std::back_inserter(inter));
        const double uni = static_cast<double>(q.size() + train_bits[t].size() - inter.size());
        sims.emplace_back(uni == 0 ? -1.0 : -static_cast<double>(inter.size()) / uni, t);
      }
      std::sort(sims.begin(), sims.end());
      int yes = 0;
      for (int k = 0; k < 5; ++k) yes += labelled[sims[static_cast<std::size_t>(k)].second].second ? 1 : 0;
      const bool oracle = yes >= 3;
      const bool pred = knn.predict(chem::parse(smiles));
      agree += pred == oracle ? 1 : 0;
      correct += pred == truth ? 1 : 0;
      ++total;
    }
  }
  CHECK(agree == total);
  CHECK(static_cast<double>(correct) / static_cast<double>(total) >= 0.95);
  CHECK_THROWS_AS(KnnTanimoto(std::vector<std::pair<std::string, bool>>{}, 5), ConfigError);
  CHECK_THROWS_AS(KnnTanimoto(labelled, 0), ConfigError);
}

TEST_CASE("NSPDK: single atom, permutation invariance, kernel bounds") {
  const auto c = nspdk_features(chem::parse("C"), {0, 0, 1u << 20});
  REQUIRE(c.size() == 1);
  CHECK(c[0].second == 1.0);
  Rng rng(17);
  const auto pool = testing::corpus(testing::Family::Mixed, 40, 9);
  for (const auto& s : pool) {
    const auto g = chem::parse(s);
    const auto perm = testing::random_permutation(rng, g.atom_count());
    CHECK(nspdk_features(g.permuted(perm)) == nspdk_features(g));
    const auto f = nspdk_features(g);
    CHECK(nspdk_kernel(f, f) == doctest::Approx(1.0).epsilon(1e-12));
  }
  for (std::size_t a = 0; a < 10; ++a) {
    for (std::size_t b = 0; b < 10; ++b) {
      const double k = nspdk_kernel(nspdk_features(chem::parse(pool[a])), nspdk_features(chem::parse(pool[b])));
      CHECK(k >= 0.0);
      CHECK(k <= 1.0 + 1e-12);
    }
  }
  CHECK_THROWS_AS(nspdk_features(chem::parse("CC"), {-1, 2, 1024}), ConfigError);
  CHECK_THROWS_AS(nspdk_features(chem::parse("CC"), {1, 2, 1000}), ConfigError);
}

TEST_CASE("NSPDK: hashed kernel matches the unhashed brute-force reference on small graphs") {
  Rng rng(23);
  std::vector<chem::MolGraph> gs;
  for (const char* s : {"C", "CC", "CCO", "C=CC#N", "c1ccccc1", "C1CC1O", "CC(C)(C)O", "OC(=O)C", "c1ccncc1", "C[NH3+]"}) {
    gs.push_back(chem::parse(s));
  }
  while (gs.size() < 40) gs.push_back(testing::random_small_graph(rng, 7));
  for (const NspdkConfig cfg : {NspdkConfig{}, NspdkConfig{1, 2, 1u << 20}, NspdkConfig{3, 6, 1u << 20}}) {
    std::vector<SparseVector> hashed;
    std::vector<testing::ExactNspdk> exact;
    for (const auto& g : gs) {
      hashed.push_back(nspdk_features(g, cfg));
      exact.push_back(testing::brute_force_nspdk(g, cfg.radius, cfg.distance));
      double total_h = 0.0, total_e = 0.0;
      for (const auto& [i, x] : hashed.back()) total_h += x;
      for (const auto& [k, x] : exact.back()) total_e += x;
      CHECK(total_h == total_e);
      CHECK(hashed.back().size() == exact.back().size());
    }
    for (std::size_t a = 0; a < gs.size(); ++a) {
      for (std::size_t b = a; b < gs.size(); ++b) {
        CHECK(nspdk_kernel(hashed[a], hashed[b]) == doctest::Approx(testing::exact_kernel(exact[a], exact[b])).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("NSPDK MMD: identical sets, non-negativity, family separation") {
  const auto arom = graphs(testing::corpus(testing::Family::Aromatic, 60, 41));
  const auto acyc = graphs(testing::corpus(testing::Family::Acyclic, 60, 42));
  const std::span<const chem::MolGraph> a1(arom.data(), 30), a2(arom.data() + 30, 30);
  const std::span<const chem::MolGraph> c1(acyc.data(), 30);
  CHECK(nspdk_mmd(a1, a1) <= 1e-9);
  const double same = nspdk_mmd(a1, a2);
  const double cross = nspdk_mmd(a1, c1);
  CHECK(same >= 0.0);
  CHECK(cross > same);
  CHECK(cross > 5.0 * same);
  CHECK_THROWS_AS(nspdk_mmd(std::span<const chem::MolGraph>{}, a1), ConfigError);
}

TEST_CASE("Frechet: identity, 1-D closed form, diagonal oracle, symmetry, PSD check") {
  const auto a = stats({0.5, -1.0}, {2.0, 0.3, 0.3, 1.0});
  CHECK(frechet(a, a) <= 1e-9);
  CHECK(frechet(stats({1.0}, {4.0}), stats({-2.0}, {0.25})) == doctest::Approx(9.0 + 2.25).epsilon(1e-12));
  const auto d1 = stats({1, 2, 3}, {1, 0, 0, 0, 4, 0, 0, 0, 9});
  const auto d2 = stats({0, 2, 5}, {4, 0, 0, 0, 1, 0, 0, 0, 0.25});
  const double expect = (1 + 0 + 4) + (1 + 1 + 2.5 * 2.5);
  CHECK(frechet(d1, d2) == doctest::Approx(expect).epsilon(1e-12));
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 6;
    std::vector<std::vector<double>> xs, ys;
    for (int n = 0; n < 12; ++n) {
      std::vector<double> x(d), y(d);
      for (auto& v : x) v = rng.normal();
      for (auto& v : y) v = 0.5 * rng.normal() + 0.3;
      xs.push_back(x);
      ys.push_back(y);
    }
    const auto sx = seq::activation_stats(xs), sy = seq::activation_stats(ys);
    const double f = frechet(sx, sy);
    CHECK(f >= 0.0);
    CHECK(std::abs(f - frechet(sy, sx)) <= 1e-9);
  }
  CHECK_THROWS_AS(frechet(stats({0, 0}, {1, 0, 0, -1}), a), NumericalError);
  CHECK_THROWS_AS(frechet(stats({0}, {1}), a), ConfigError);
}

TEST_CASE("evaluate: report arithmetic, gen = test, repaired variant, JSON") {
  const auto& m = testing::small_backbone();
  const auto test = testing::corpus(testing::Family::Mixed, 30, 51);
  const auto train = testing::corpus(testing::Family::Mixed, 30, 52);
  const auto same = evaluate(test, train, test, &m, nullptr);
  REQUIRE(same.raw.nspdk_mmd);
  REQUIRE(same.raw.frechet);
  CHECK(*same.raw.nspdk_mmd <= 1e-9);
  CHECK(*same.raw.frechet <= 1e-6);
  CHECK(!same.raw.active);
  CHECK(same.raw.errors.empty());

  Rng rng(8);
  std::vector<std::string> gen;
  for (int n = 0; n < 40; ++n) {
    const auto& base = test[rng.index(test.size())];
    gen.push_back(n % 2 == 0 ? base : testing::fuzz_invalid(base, rng));
  }
  EvalConfig cfg;
  cfg.repair = true;
  const Constant yes(true);
  const auto r = evaluate(gen, train, test, &m, &yes, cfg);
  for (const auto* rep : {&r.raw, &*r.repaired}) {
    CHECK(rep->counts.generated == 40);
    CHECK(rep->counts.unique <= rep->counts.valid);
    CHECK(rep->counts.valid <= rep->counts.generated);
    CHECK(rep->counts.novel <= rep->counts.valid);
    for (double p : {rep->validity, rep->uniqueness, rep->novelty}) CHECK((p >= 0.0 && p <= 100.0));
    CHECK(*rep->active == 100.0);
  }
  CHECK(r.raw.validity == 50.0);
  const bool all_repaired = r.repaired->warnings.empty();
  if (all_repaired) CHECK(r.repaired->validity == 100.0);
  CHECK(r.repaired->validity >= r.raw.validity);

  const auto j = nlohmann::json::parse(to_json(r));
  for (const char* key : {"validity", "uniqueness", "novelty", "active", "nspdk_mmd", "frechet", "generated", "valid",
                          "unique", "novel", "repaired_validity", "repaired_frechet", "nspdk_radius"}) {
    CHECK(j.contains(key));
  }

  const auto none = evaluate(std::vector<std::string>{"C1", "(("}, train, test, &m, nullptr);
  CHECK(none.raw.validity == 0.0);
  CHECK(none.raw.uniqueness == 0.0);
  CHECK(!none.raw.warnings.empty());
  CHECK(none.raw.errors.count("nspdk_mmd") == 1);
  CHECK(none.raw.errors.count("frechet") == 1);
}
