#include "himol/sampler.hpp"

#include <cmath>
#include <functional>
#include "json.hpp"

#include "himol/chem/canon.hpp"
#include "himol/chem/smiles.hpp"
#include "himol/parallel.hpp"
#include "himol/repair.hpp"
#include "himol/rng.hpp"

namespace himol::sampler {

namespace {

struct Draw {
  std::optional<std::size_t> i, j;
  std::optional<double> lambda;
  seq::Prompt prompt;
};

DrawSpec spec_from_seed(std::size_t n, const SamplerConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  DrawSpec d;
  d.seed = seed;
  d.i = rng.index(n);
  d.j = rng.index(n);
  d.lambda = rng.uniform(config.l, 1.0 - config.l);
  if (config.fixed_pair) std::tie(d.i, d.j) = *config.fixed_pair;
  if (config.fixed_lambda) d.lambda = *config.fixed_lambda;
  return d;
}

using DrawMaker = std::function<Draw(std::uint64_t draw_seed)>;

SampleRecord finish(const seq::Backbone& model, const Draw& draw, std::uint64_t draw_seed,
                    const SamplerConfig& config, const double* head) {
  seq::DecodeConfig dc;
  dc.temperature = config.temperature;
  dc.max_len = config.max_len;
  dc.seed = derive_seed(draw_seed, 1);
  dc.greedy = config.greedy;
  const auto out = seq::decode(model, draw.prompt, dc, head);
  SampleRecord rec;
  rec.raw = out.smiles;
  rec.truncated = out.truncated;
  rec.i = draw.i;
  rec.j = draw.j;
  rec.lambda = draw.lambda;
  rec.seed = draw_seed;
  if (config.repair) {
    const auto trace = repair::try_repair(rec.raw, derive_seed(draw_seed, 2));
    if (trace.failed) {
      rec.repair_failed = true;
    } else {
      rec.repaired = trace.output;
    }
  }
  if (!rec.repair_failed) {
    try {
      rec.canonical = chem::canonical_smiles(rec.final_smiles());
      rec.valid = true;
    } catch (const Error&) {
      rec.valid = false;
    }
  }
  return rec;
}

SampleBatch run(const seq::Backbone& model, const SamplerConfig& config, const DrawMaker& make,
                const std::unordered_set<std::string>& training, const double* head) {
  validate(config);
  SampleBatch batch;
  batch.config = config;
  const auto target = static_cast<std::size_t>(config.max_samples);
  if (!config.strict) {
    batch.records.resize(target);
    parallel_for(target, [&](std::size_t d) {
      const std::uint64_t s = derive_seed(config.seed, d);
      batch.records[d] = finish(model, make(s), s, config, head);
    });
    batch.draws = target;
    return batch;
  }
  const std::size_t budget = target * static_cast<std::size_t>(config.budget_factor);
  std::unordered_set<std::string> seen;
  std::size_t next = 0;
  while (batch.records.size() < target) {
    if (next >= budget) {
      batch.draws = next;
      throw StrictExhausted("strict sampling accepted " + std::to_string(batch.records.size()) + " of " +
                                std::to_string(target) + " after " + std::to_string(budget) + " draws",
                            std::move(batch));
    }
    // Decode a chunk in parallel, then run the accept gate in draw order.
    const std::size_t want = target - batch.records.size();
    const std::size_t chunk = std::min(budget - next, std::max<std::size_t>(want, 16));
    std::vector<SampleRecord> slots(chunk);
    parallel_for(chunk, [&](std::size_t c) {
      const std::uint64_t s = derive_seed(config.seed, next + c);
      slots[c] = finish(model, make(s), s, config, head);
    });
    for (std::size_t c = 0; c < chunk; ++c) {
      ++batch.draws;
      auto& rec = slots[c];
      if (rec.valid && !training.contains(*rec.canonical) && seen.insert(*rec.canonical).second) {
        batch.records.push_back(std::move(rec));
        if (batch.records.size() == target) break;
      }
    }
    next += chunk;
  }
  return batch;
}

}  // namespace

DrawSpec draw_spec(std::size_t n, const SamplerConfig& config, std::uint64_t index) {
  if (n == 0) throw inversion::EmptyDataset("no molecules to interpolate");
  return spec_from_seed(n, config, derive_seed(config.seed, index));
}

SamplerConfig baseline_defaults() {
  SamplerConfig c;
  c.temperature = 2.0;
  return c;
}

double SampleBatch::resampling_ratio() const {
  if (records.empty()) return draws == 0 ? 1.0 : static_cast<double>(draws);
  return static_cast<double>(draws) / static_cast<double>(records.size());
}

Interpolated interpolate(const inversion::HierarchicalEmbeddings& state, std::size_t i, std::size_t j, double lambda,
                         const InterpolationMask& mask) {
  if (i >= state.n() || j >= state.n()) {
    throw IndexOutOfRange("molecule index out of range (" + std::to_string(std::max(i, j)) + " >= " +
                          std::to_string(state.n()) + ")");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
  const auto& ii = state.i[static_cast<std::size_t>(state.c[i])];
  const auto& ij = state.i[static_cast<std::size_t>(state.c[j])];
  const auto mix = [lambda](const Embedding& a, const Embedding& b, bool on) {
    if (!on || lambda == 1.0) return a;
    if (lambda == 0.0) return b;
    Embedding out(a.size());
    for (std::size_t e = 0; e < a.size(); ++e) out[e] = lambda * a[e] + (1.0 - lambda) * b[e];
    return out;
  };
  return {mix(ii, ij, mask.intermediate), mix(state.d[i], state.d[j], mask.detail)};
}

seq::Prompt sampling_prompt(const seq::Backbone& model, const inversion::HierarchicalEmbeddings& state,
                            const Interpolated& mixed) {
  const Embedding pseudo[3] = {state.s, mixed.intermediate, mixed.detail};
  return seq::make_prompt(model, seq::kSampleWords, pseudo);
}

void validate(const SamplerConfig& c) {
  if (!(c.l >= 0.0 && c.l < 0.5)) throw ConfigError("l must lie in [0, 0.5)");
  if (!c.greedy && !(c.temperature > 0.0)) throw ConfigError("temperature must be positive");
  if (c.max_samples < 0) throw ConfigError("max samples must be non-negative");
  if (c.max_len <= 0) throw ConfigError("max_len must be positive");
  if (c.budget_factor < 1) throw ConfigError("budget factor must be at least 1");
  if (c.fixed_lambda && !(*c.fixed_lambda >= 0.0 && *c.fixed_lambda <= 1.0)) {
    throw ConfigError("fixed lambda must lie in [0, 1]");
  }
}

SampleBatch sample(const inversion::HierarchicalEmbeddings& state, const seq::Backbone& model,
                   const SamplerConfig& config, const std::unordered_set<std::string>& training) {
  if (state.embed() != static_cast<std::size_t>(model.embed())) throw ConfigError("embedding width does not match the backbone");
  if (state.n() == 0) throw inversion::EmptyDataset("no molecules to interpolate");
  if (config.fixed_pair && (config.fixed_pair->first >= state.n() || config.fixed_pair->second >= state.n())) {
    throw IndexOutOfRange("fixed pair index out of range");
  }
  const DrawMaker make = [&](std::uint64_t s) {
    const DrawSpec spec = spec_from_seed(state.n(), config, s);
    Draw d;
    d.i = spec.i;
    d.j = spec.j;
    d.lambda = spec.lambda;
    d.prompt = sampling_prompt(model, state, interpolate(state, *d.i, *d.j, *d.lambda, config.mask));
    return d;
  };
  return run(model, config, make, training, state.head_ptr());
}

SampleBatch sample_baseline(const seq::Backbone& model, const seq::Prompt& prompt, const SamplerConfig& config,
                            const std::unordered_set<std::string>& training, const double* head) {
  for (const auto& e : prompt) {
    if (e.size() != static_cast<std::size_t>(model.embed())) throw ConfigError("prompt embedding width does not match the backbone");
  }
  const DrawMaker make = [&](std::uint64_t) {
    Draw d;
    d.prompt = prompt;
    return d;
  };
  return run(model, config, make, training, head);
}

std::unordered_set<std::string> canonical_set(std::span<const std::string> smiles) {
  std::unordered_set<std::string> out;
  for (const auto& s : smiles) {
    try {
      out.insert(chem::canonical_smiles(s));
    } catch (const Error&) {
    }
  }
  return out;
}

std::string to_json_line(const SampleRecord& r) {
  nlohmann::ordered_json j;
  j["raw"] = r.raw;
  j["repaired"] = r.repaired ? nlohmann::ordered_json(*r.repaired) : nlohmann::ordered_json(nullptr);
  j["valid"] = r.valid;
  j["repair_failed"] = r.repair_failed;
  j["i"] = r.i ? nlohmann::ordered_json(*r.i) : nlohmann::ordered_json(nullptr);
  j["j"] = r.j ? nlohmann::ordered_json(*r.j) : nlohmann::ordered_json(nullptr);
  j["lambda"] = r.lambda ? nlohmann::ordered_json(*r.lambda) : nlohmann::ordered_json(nullptr);
  j["seed"] = r.seed;
  j["truncated"] = r.truncated;
  j["canonical"] = r.canonical ? nlohmann::ordered_json(*r.canonical) : nlohmann::ordered_json(nullptr);
  return j.dump();
}

}  // namespace himol::sampler
