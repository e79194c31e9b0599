#include "himol/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "himol/chem/canon.hpp"
#include "himol/chem/smiles.hpp"
#include "himol/hash.hpp"
#include "himol/parallel.hpp"
#include "himol/repair.hpp"
#include "himol/rng.hpp"
#include "json.hpp"

namespace himol::metrics {

namespace {

double percent(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

// Canonical forms of the valid entries, in input order.
std::vector<std::string> valid_canonical(std::span<const std::string> gen) {
  std::vector<std::optional<std::string>> slots(gen.size());
  parallel_for(gen.size(), [&](std::size_t n) {
    try {
      slots[n] = chem::canonical_smiles(gen[n]);
    } catch (const Error&) {
    }
  });
  std::vector<std::string> out;
  for (auto& s : slots) {
    if (s) out.push_back(std::move(*s));
  }
  return out;
}

std::unordered_set<std::string> canonical_set(std::span<const std::string> smiles) {
  const auto v = valid_canonical(smiles);
  return {v.begin(), v.end()};
}

std::size_t count_unique(const std::vector<std::string>& canon) {
  return std::unordered_set<std::string>(canon.begin(), canon.end()).size();
}

std::size_t count_novel(const std::vector<std::string>& canon, const std::unordered_set<std::string>& train) {
  return static_cast<std::size_t>(std::count_if(canon.begin(), canon.end(), [&](const auto& s) { return !train.contains(s); }));
}

std::uint64_t atom_code(const chem::Atom& a) {
  return static_cast<std::uint64_t>(a.atomic_number) * 1000 + static_cast<std::uint64_t>(a.charge + 50) * 2 +
         (a.aromatic ? 1 : 0);
}

// Certificates of the radius-r neighbourhood of every atom; vertex labels
// carry the distance to the root.
std::vector<std::vector<std::uint64_t>> rooted_labels(const chem::MolGraph& g, const std::vector<std::vector<int>>& dist,
                                                      int radius) {
  const int n = static_cast<int>(g.atom_count());
  std::vector<std::vector<std::uint64_t>> out(static_cast<std::size_t>(radius + 1),
                                              std::vector<std::uint64_t>(static_cast<std::size_t>(n)));
  for (int u = 0; u < n; ++u) {
    const auto& du = dist[static_cast<std::size_t>(u)];
    for (int r = 0; r <= radius; ++r) {
      std::vector<int> keep;
      std::vector<int> index(static_cast<std::size_t>(n), -1);
      for (int v = 0; v < n; ++v) {
        const int d = du[static_cast<std::size_t>(v)];
        if (d >= 0 && d <= r) {
          index[static_cast<std::size_t>(v)] = static_cast<int>(keep.size());
          keep.push_back(v);
        }
      }
      chem::LabeledGraph lg;
      for (int v : keep) {
        lg.labels.push_back(atom_code(g.atom(v)) * 64 + static_cast<std::uint64_t>(du[static_cast<std::size_t>(v)]));
      }
      for (const auto& b : g.bonds()) {
        const int ia = index[static_cast<std::size_t>(b.a)], ib = index[static_cast<std::size_t>(b.b)];
        if (ia >= 0 && ib >= 0) lg.edges.push_back({ia, ib, static_cast<int>(b.order)});
      }
      out[static_cast<std::size_t>(r)][static_cast<std::size_t>(u)] = fnv1a(chem::certificate(lg));
    }
  }
  return out;
}

double trace_sqrt_psd(const Eigen::MatrixXd& m, const char* what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError(std::string("eigendecomposition failed for ") + what);
  double t = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const double ev = es.eigenvalues()[k];
    if (ev < -1e-8) throw NumericalError(std::string("negative eigenvalue in ") + what);
    t += std::sqrt(std::max(ev, 0.0));
  }
  return t;
}

Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed for covariance");
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (ev[k] < -1e-8) throw NumericalError("covariance is not positive semidefinite");
    ev[k] = std::sqrt(std::max(ev[k], 0.0));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd as_matrix(const seq::ActivationStats& s) {
  const auto d = static_cast<Eigen::Index>(s.dim());
  Eigen::MatrixXd m(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) m(r, c) = s.cov[static_cast<std::size_t>(r * d + c)];
  }
  return 0.5 * (m + m.transpose());
}

// Mean of kernel values over all pairs, summed row by row in a fixed order.
double mean_kernel(const std::vector<SparseVector>& a, const std::vector<SparseVector>& b) {
  std::vector<double> rows(a.size());
  parallel_for(a.size(), [&](std::size_t i) {
    double s = 0.0;
    for (const auto& y : b) s += nspdk_kernel(a[i], y);
    rows[i] = s;
  });
  const double total = std::accumulate(rows.begin(), rows.end(), 0.0);
  return total / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

std::vector<SparseVector> features_of(std::span<const chem::MolGraph> graphs, const NspdkConfig& config) {
  std::vector<SparseVector> out(graphs.size());
  parallel_for(graphs.size(), [&](std::size_t n) { out[n] = nspdk_features(graphs[n], config); });
  return out;
}

std::vector<chem::MolGraph> parse_valid(std::span<const std::string> smiles) {
  std::vector<std::optional<chem::MolGraph>> slots(smiles.size());
  parallel_for(smiles.size(), [&](std::size_t n) {
    try {
      slots[n] = chem::parse(smiles[n]);
    } catch (const Error&) {
    }
  });
  std::vector<chem::MolGraph> out;
  for (auto& g : slots) {
    if (g) out.push_back(std::move(*g));
  }
  return out;
}

std::vector<std::string> valid_strings(std::span<const std::string> smiles) {
  std::vector<std::string> out;
  for (const auto& s : smiles) {
    if (chem::is_valid(s)) out.push_back(s);
  }
  return out;
}

seq::ActivationStats stats_of(const seq::Backbone& model, std::span<const std::string> smiles) {
  std::vector<std::vector<double>> acts(smiles.size());
  parallel_for(smiles.size(), [&](std::size_t n) { acts[n] = seq::activations(model, smiles[n]); });
  return seq::activation_stats(acts);
}

template <typename F>
void guarded(MetricsReport& report, const std::string& name, F&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report.errors[name] = e.what();
  }
}

MetricsReport report_for(std::span<const std::string> gen, const std::unordered_set<std::string>& train_set,
                         const std::vector<chem::MolGraph>& test_graphs,
                         const std::optional<seq::ActivationStats>& test_stats, const seq::Backbone* backbone,
                         const Classifier* classifier, const EvalConfig& config) {
  MetricsReport r;
  const auto canon = valid_canonical(gen);
  r.counts.generated = gen.size();
  r.counts.valid = canon.size();
  r.counts.unique = count_unique(canon);
  r.counts.novel = count_novel(canon, train_set);
  r.validity = percent(r.counts.valid, r.counts.generated);
  r.uniqueness = percent(r.counts.unique, r.counts.valid);
  r.novelty = percent(r.counts.novel, r.counts.valid);
  if (r.counts.valid == 0) r.warnings.push_back("no valid molecules; ratios over valid molecules are 0");
  const auto valid = valid_strings(gen);
  if (classifier) {
    guarded(r, "active", [&] {
      const auto a = active_ratio(valid, *classifier);
      r.active = a.percent;
      if (a.failures > 0) r.warnings.push_back(std::to_string(a.failures) + " molecules failed classification");
      if (a.scored == 0) r.warnings.push_back("no molecules scored for activity");
    });
  }
  guarded(r, "nspdk_mmd", [&] {
    const auto graphs = parse_valid(valid);
    r.nspdk_mmd = nspdk_mmd(graphs, test_graphs, config.nspdk);
  });
  if (backbone) {
    guarded(r, "frechet", [&] {
      if (!test_stats) throw ConfigError("test set needs at least two valid molecules");
      if (valid.size() < 2) throw ConfigError("generated set needs at least two valid molecules");
      r.frechet = frechet(stats_of(*backbone, valid), *test_stats);
    });
  }
  return r;
}

void write_report(nlohmann::ordered_json& j, const MetricsReport& r, const std::string& prefix) {
  const auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  j[prefix + "validity"] = r.validity;
  j[prefix + "uniqueness"] = r.uniqueness;
  j[prefix + "novelty"] = r.novelty;
  j[prefix + "active"] = opt(r.active);
  j[prefix + "nspdk_mmd"] = opt(r.nspdk_mmd);
  j[prefix + "frechet"] = opt(r.frechet);
  j[prefix + "generated"] = r.counts.generated;
  j[prefix + "valid"] = r.counts.valid;
  j[prefix + "unique"] = r.counts.unique;
  j[prefix + "novel"] = r.counts.novel;
  j[prefix + "warnings"] = r.warnings;
  j[prefix + "errors"] = r.errors;
}

}  // namespace

double validity(std::span<const std::string> gen) { return percent(valid_canonical(gen).size(), gen.size()); }

double uniqueness(std::span<const std::string> gen) {
  const auto canon = valid_canonical(gen);
  return percent(count_unique(canon), canon.size());
}

double novelty(std::span<const std::string> gen, std::span<const std::string> train) {
  const auto canon = valid_canonical(gen);
  return percent(count_novel(canon, canonical_set(train)), canon.size());
}

KnnTanimoto::KnnTanimoto(std::span<const std::pair<std::string, bool>> labelled, int k) : k_(k) {
  if (labelled.empty()) throw ConfigError("classifier needs labelled molecules");
  if (k < 1) throw ConfigError("k must be at least 1");
  for (const auto& [smiles, label] : labelled) {
    fps_.push_back(chem::fingerprint(chem::parse(smiles)));
    labels_.push_back(label);
  }
}

bool KnnTanimoto::predict(const chem::MolGraph& graph) const {
  chem::Fingerprint fp;
  try {
    fp = chem::fingerprint(graph);
  } catch (const Error& e) {
    throw ClassifierFailure(std::string("fingerprint failed: ") + e.what());
  }
  std::vector<std::pair<double, std::size_t>> sims(fps_.size());
  for (std::size_t t = 0; t < fps_.size(); ++t) sims[t] = {-chem::tanimoto(fp, fps_[t]), t};
  const auto k = std::min(static_cast<std::size_t>(k_), sims.size());
  std::partial_sort(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(k), sims.end());
  std::size_t yes = 0;
  for (std::size_t t = 0; t < k; ++t) yes += labels_[sims[t].second] ? 1 : 0;
  if (2 * yes == k) return labels_[sims[0].second];
  return 2 * yes > k;
}

ActiveRatio active_ratio(std::span<const std::string> gen, const Classifier& classifier) {
  enum Outcome : int { Invalid, Inactive, Active, Failed };
  std::vector<int> out(gen.size(), Invalid);
  parallel_for(gen.size(), [&](std::size_t n) {
    chem::MolGraph g;
    try {
      g = chem::parse(gen[n]);
    } catch (const Error&) {
      return;
    }
    try {
      out[n] = classifier.predict(g) ? Active : Inactive;
    } catch (const ClassifierFailure&) {
      out[n] = Failed;
    }
  });
  ActiveRatio r;
  for (int o : out) {
    if (o == Failed) ++r.failures;
    if (o == Active || o == Inactive) ++r.scored;
    if (o == Active) ++r.active;
  }
  r.percent = percent(r.active, r.scored);
  return r;
}

SparseVector nspdk_features(const chem::MolGraph& graph, const NspdkConfig& config) {
  if (config.radius < 0 || config.distance < 0) throw ConfigError("NSPDK radius and distance must be non-negative");
  if (config.width == 0 || (config.width & (config.width - 1)) != 0) {
    throw ConfigError("NSPDK width must be a power of two");
  }
  const auto dist = chem::distance_matrix(graph);
  const auto labels = rooted_labels(graph, dist, config.radius);
  const int n = static_cast<int>(graph.atom_count());
  std::map<std::uint32_t, double> counts;
  for (int u = 0; u < n; ++u) {
    for (int v = u; v < n; ++v) {
      const int d = dist[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)];
      if (d < 0 || d > config.distance) continue;
      for (int r = 0; r <= config.radius; ++r) {
        std::uint64_t a = labels[static_cast<std::size_t>(r)][static_cast<std::size_t>(u)];
        std::uint64_t b = labels[static_cast<std::size_t>(r)][static_cast<std::size_t>(v)];
        if (a > b) std::swap(a, b);
        std::uint64_t h = hash_combine(hash_combine(static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(d)), a);
        h = splitmix64(hash_combine(h, b));
        counts[static_cast<std::uint32_t>(h & (config.width - 1))] += 1.0;
      }
    }
  }
  return {counts.begin(), counts.end()};
}

double nspdk_kernel(const SparseVector& a, const SparseVector& b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (const auto& [i, x] : a) aa += x * x;
  for (const auto& [i, y] : b) bb += y * y;
  if (aa == 0.0 || bb == 0.0) return 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      ab += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  return ab / std::sqrt(aa * bb);
}

double nspdk_mmd(std::span<const chem::MolGraph> gen, std::span<const chem::MolGraph> test, const NspdkConfig& config) {
  if (gen.empty() || test.empty()) throw ConfigError("NSPDK MMD needs non-empty molecule sets");
  const auto fg = features_of(gen, config);
  const auto ft = features_of(test, config);
  const double v = mean_kernel(fg, fg) + mean_kernel(ft, ft) - 2.0 * mean_kernel(fg, ft);
  return std::max(v, 0.0);
}

double frechet(const seq::ActivationStats& a, const seq::ActivationStats& b) {
  if (a.dim() != b.dim() || a.dim() == 0) throw ConfigError("activation statistics differ in dimension");
  const auto ca = as_matrix(a);
  const auto cb = as_matrix(b);
  double mean_term = 0.0;
  for (std::size_t e = 0; e < a.dim(); ++e) mean_term += (a.mean[e] - b.mean[e]) * (a.mean[e] - b.mean[e]);
  const Eigen::MatrixXd root = sqrt_psd(ca);
  Eigen::MatrixXd inner = root * cb * root;
  inner = 0.5 * (inner + inner.transpose());
  const double v = mean_term + ca.trace() + cb.trace() - 2.0 * trace_sqrt_psd(inner, "C_a^1/2 C_b C_a^1/2");
  return std::max(v, 0.0);
}

EvalResult evaluate(std::span<const std::string> gen, std::span<const std::string> train,
                    std::span<const std::string> test, const seq::Backbone* backbone, const Classifier* classifier,
                    const EvalConfig& config) {
  EvalResult out;
  out.config = config;
  const auto train_set = canonical_set(train);
  const auto test_valid = valid_strings(test);
  const auto test_graphs = parse_valid(test_valid);
  std::optional<seq::ActivationStats> test_stats;
  std::string test_stats_error;
  if (backbone && test_valid.size() >= 2) {
    try {
      test_stats = stats_of(*backbone, test_valid);
    } catch (const std::exception& e) {
      test_stats_error = e.what();
    }
  }
  const auto run = [&](std::span<const std::string> g) {
    auto r = report_for(g, train_set, test_graphs, test_stats, backbone, classifier, config);
    if (!test_stats_error.empty()) r.errors["frechet"] = test_stats_error;
    return r;
  };
  out.raw = run(gen);
  if (config.repair) {
    std::vector<std::string> fixed(gen.size());
    std::vector<int> failed(gen.size(), 0);
    parallel_for(gen.size(), [&](std::size_t n) {
      const auto t = repair::try_repair(gen[n], derive_seed(config.repair_seed, n));
      fixed[n] = t.failed ? gen[n] : t.output;
      failed[n] = t.failed ? 1 : 0;
    });
    out.repaired = run(fixed);
    const auto nfail = static_cast<std::size_t>(std::count(failed.begin(), failed.end(), 1));
    if (nfail > 0) out.repaired->warnings.push_back(std::to_string(nfail) + " repairs failed; raw strings kept");
  }
  return out;
}

std::string to_json(const EvalResult& result) {
  nlohmann::ordered_json j;
  j["format"] = "himol-report";
  j["version"] = 1;
  write_report(j, result.raw, "");
  if (result.repaired) write_report(j, *result.repaired, "repaired_");
  j["nspdk_radius"] = result.config.nspdk.radius;
  j["nspdk_distance"] = result.config.nspdk.distance;
  j["nspdk_width"] = result.config.nspdk.width;
  j["repair"] = result.config.repair;
  j["repair_seed"] = result.config.repair_seed;
  return j.dump(2);
}

}  // namespace himol::metrics
