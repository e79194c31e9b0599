#include "himol/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "himol/chem/molfile.hpp"
#include "himol/chem/smiles.hpp"
#include "himol/inversion.hpp"
#include "himol/lowshot.hpp"
#include "himol/metrics.hpp"
#include "himol/parallel.hpp"
#include "himol/repair.hpp"
#include "himol/rng.hpp"
#include "himol/sampler.hpp"
#include "himol/seq/pretrain.hpp"
#include "himol/split.hpp"
#include "json.hpp"

namespace himol::cli {

namespace {

namespace fs = std::filesystem;

struct Common {
  std::uint64_t seed = 0;
  unsigned jobs = 0;
  std::string config;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Random seed (falls back to HIMOL_SEED)")
      ->envname("HIMOL_SEED")
      ->capture_default_str();
  sub->add_option("--jobs", c.jobs, "Worker cap; 0 = available cores")->capture_default_str();
  sub->add_option("--config", c.config, "File of 'key = value' lines using the long option names");
}

struct Expanded {
  std::vector<std::string> args;
  std::size_t from_config = 0;  // tokens args[1 .. from_config] came from files
};

// Expands "--config FILE" inside the subcommand's arguments into --key=value
// tokens placed before the command line, so explicit flags win.
Expanded expand_config(std::span<const std::string> args) {
  if (args.empty()) return {};
  std::vector<std::string> head{args[0]};
  std::vector<std::string> rest;
  for (std::size_t a = 1; a < args.size(); ++a) {
    std::string path;
    if (args[a] == "--config" && a + 1 < args.size()) {
      path = args[++a];
    } else if (args[a].starts_with("--config=")) {
      path = args[a].substr(9);
    } else {
      rest.push_back(args[a]);
      continue;
    }
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::vector<CLI::ConfigItem> items;
    try {
      items = CLI::ConfigINI().from_config(in);
    } catch (const CLI::Error& e) {
      throw ConfigError(path + ": " + e.what());
    }
    for (const auto& item : items) {
      if (item.name == "++" || item.name == "--") continue;
      if (!item.parents.empty()) throw ConfigError(path + ": sections are not supported (key '" + item.name + "')");
      if (item.name == "config") throw ConfigError(path + ": config files cannot include other config files");
      std::string value;
      for (std::size_t v = 0; v < item.inputs.size(); ++v) value += (v ? " " : "") + item.inputs[v];
      if (value.empty()) continue;  // unset option in an echoed config
      head.push_back("--" + item.name + "=" + value);
    }
  }
  const std::size_t from_config = head.size() - 1;
  head.insert(head.end(), rest.begin(), rest.end());
  return {std::move(head), from_config};
}

// Unknown keys from a config file surface as unexpected arguments; reject
// them up front with the key name.
void check_keys(const CLI::App* sub, const Expanded& expanded) {
  for (std::size_t a = 1; a <= expanded.from_config; ++a) {
    const auto& tok = expanded.args[a];
    const auto name = tok.substr(0, tok.find('='));
    if (sub->get_option_no_throw(name) == nullptr) {
      throw ConfigError("unknown config key '" + name.substr(2) + "' for " + sub->get_name());
    }
  }
}

// `resolved` replaces the echoed value of options whose effective value is
// decided after parsing.
void write_echo(const CLI::App* sub, const fs::path& primary, const std::map<std::string, std::string>& resolved = {}) {
  std::ofstream out(primary.string() + ".config", std::ios::trunc);
  if (!out) throw IoError("cannot write config echo next to " + primary.string());
  out << "# himol " << kVersion << " " << sub->get_name() << " effective configuration\n";
  std::istringstream lines(sub->config_to_str(true, false));
  std::string line;
  while (std::getline(lines, line)) {
    if (line.starts_with("config=") || line.starts_with("help")) continue;
    const auto key = line.substr(0, line.find('='));
    if (const auto it = resolved.find(key); it != resolved.end()) {
      out << key << '=' << it->second << '\n';
    } else {
      out << line << '\n';
    }
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string jsonl_header(const char* format) {
  nlohmann::ordered_json j;
  j["format"] = format;
  j["version"] = 1;
  return j.dump() + "\n";
}

std::vector<chem::MolRecord> molecules(const std::string& path) { return chem::read_molecules(path); }

// ---- subcommands ----------------------------------------------------------

struct PretrainArgs {
  std::string corpus, out;
  seq::PretrainConfig cfg;
};

void add_pretrain(CLI::App& app, PretrainArgs& a, Common& c, std::function<void()>& action, std::ostream& log) {
  auto* sub = app.add_subcommand("pretrain", "Train a backbone on a molecule corpus");
  sub->add_option("--corpus", a.corpus, "Molecule file")->required();
  sub->add_option("--out", a.out, "Backbone checkpoint to write")->required();
  sub->add_option("--epochs", a.cfg.epochs, "Passes over the corpus")->capture_default_str();
  sub->add_option("--batch", a.cfg.batch, "Molecules per step")->capture_default_str();
  sub->add_option("--lr", a.cfg.lr, "AdamW learning rate")->capture_default_str();
  sub->add_option("--weight-decay", a.cfg.weight_decay, "AdamW weight decay")->capture_default_str();
  sub->add_option("--clip", a.cfg.clip, "Gradient norm clip")->capture_default_str();
  sub->add_option("--embed", a.cfg.hyper.embed, "Embedding width")->capture_default_str();
  sub->add_option("--layers", a.cfg.hyper.layers, "Transformer layers")->capture_default_str();
  sub->add_option("--heads", a.cfg.hyper.heads, "Attention heads")->capture_default_str();
  sub->add_option("--context", a.cfg.hyper.context, "Context length")->capture_default_str();
  sub->add_option("--mlp", a.cfg.hyper.mlp, "MLP width")->capture_default_str();
  sub->add_option("--prompt-variants", a.cfg.prompt_variants, "Vary the training prompt words and <GEN> count")
      ->capture_default_str();
  add_common(sub, c);
  action = [&a, &c, sub, &log] {
    a.cfg.seed = c.seed;
    const auto corpus = chem::smiles_of(molecules(a.corpus));
    const auto r = seq::pretrain(corpus, a.cfg);
    seq::save(r.model, a.out);
    write_echo(sub, a.out);
    for (std::size_t e = 0; e < r.loss_history.size(); ++e) log << "epoch " << e + 1 << " loss " << r.loss_history[e] << '\n';
    log << "wrote " << a.out << " (" << r.model.params().size() << " weights, vocab " << r.model.vocab().size() << ")\n";
  };
}

struct InvertArgs {
  std::string model, data, out;
  inversion::InversionConfig cfg;
};

void add_invert(CLI::App& app, InvertArgs& a, Common& c, std::function<void()>& action, std::ostream& log) {
  auto* sub = app.add_subcommand("invert", "Learn hierarchical prompt tokens for a molecule set");
  sub->add_option("--model", a.model, "Backbone checkpoint")->required();
  sub->add_option("--data", a.data, "Molecule file")->required();
  sub->add_option("--out", a.out, "Embedding checkpoint to write")->required();
  sub->add_option("--k", a.cfg.k, "Number of intermediate tokens (clusters)")->capture_default_str();
  sub->add_option("--epochs", a.cfg.epochs, "Training epochs")->capture_default_str();
  sub->add_option("--batch", a.cfg.batch, "Molecules per step")->capture_default_str();
  sub->add_option("--lr", a.cfg.lr, "AdamW learning rate (linear decay)")->capture_default_str();
  sub->add_option("--clip", a.cfg.clip, "Gradient norm clip")->capture_default_str();
  sub->add_option("--assign-epochs", a.cfg.assign_epochs, "Epochs that refresh cluster assignments")
      ->capture_default_str();
  sub->add_option("--update-head", a.cfg.update_head, "Also learn a copy of the output head")->capture_default_str();
  sub->add_option("--head-lr", a.cfg.head_lr, "Learning rate of the head copy")->capture_default_str();
  add_common(sub, c);
  action = [&a, &c, sub, &log] {
    a.cfg.seed = c.seed;
    const auto model = seq::load_backbone(a.model);
    const auto data = chem::smiles_of(molecules(a.data));
    const auto r = inversion::train(data, model, a.cfg);
    inversion::save({r.state, a.cfg, inversion::dataset_hash(data), data}, a.out);
    write_echo(sub, a.out);
    std::vector<int> sizes(r.state.k(), 0);
    for (int k : r.state.c) ++sizes[static_cast<std::size_t>(k)];
    log << "final loss " << (r.loss_history.empty() ? 0.0 : r.loss_history.back()) << "; cluster sizes";
    for (int s : sizes) log << ' ' << s;
    log << "\nwrote " << a.out << '\n';
  };
}

struct SampleArgs {
  std::string model, emb, out, provenance, train, baseline = "none", interpolate = "both";
  std::optional<double> temperature;
  sampler::SamplerConfig cfg;
};

void add_sample(CLI::App& app, SampleArgs& a, Common& c, std::function<void()>& action, std::ostream& log) {
  auto* sub = app.add_subcommand("sample", "Generate molecules by interpolating learned tokens");
  sub->add_option("--model", a.model, "Backbone checkpoint")->required();
  sub->add_option("--emb", a.emb, "Embedding checkpoint (not needed for --baseline gen)");
  sub->add_option("--out", a.out, "Molecule file to write")->required();
  sub->add_option("--provenance", a.provenance, "JSON-lines provenance file");
  sub->add_option("--n", a.cfg.max_samples, "Number of molecules")->capture_default_str();
  sub->add_option("--l", a.cfg.l, "Lambda ~ Uniform(l, 1 - l), l in [0, 0.5)")->capture_default_str();
  sub->add_option("--temperature", a.temperature, "Sampling temperature (default 1.0; 2.0 with --baseline)");
  sub->add_option("--max-len", a.cfg.max_len, "Maximum generated tokens")->capture_default_str();
  sub->add_flag("--strict", a.cfg.strict, "Keep only valid, unique, novel molecules");
  sub->add_flag("--repair", a.cfg.repair, "Repair invalid outputs");
  sub->add_option("--budget-factor", a.cfg.budget_factor, "Strict mode draw budget per requested molecule")
      ->capture_default_str();
  sub->add_option("--interpolate", a.interpolate, "Levels to mix: both, intermediate or detail")
      ->check(CLI::IsMember({"both", "intermediate", "detail"}))
      ->capture_default_str();
  sub->add_option("--baseline", a.baseline, "No interpolation: 'gen' (<GEN> token) or 's' (shared token only)")
      ->check(CLI::IsMember({"none", "gen", "s"}))
      ->capture_default_str();
  sub->add_option("--train", a.train, "Training molecules for the novelty filter (default: those in --emb)");
  add_common(sub, c);
  action = [&a, &c, sub, &log] {
    auto cfg = a.cfg;
    cfg.seed = c.seed;
    const bool baseline = a.baseline != "none";
    cfg.temperature = a.temperature.value_or(baseline ? sampler::baseline_defaults().temperature : 1.0);
    cfg.mask = {a.interpolate != "detail", a.interpolate != "intermediate"};
    const auto model = seq::load_backbone(a.model);
    std::optional<inversion::EmbeddingCheckpoint> emb;
    if (!a.emb.empty()) emb = inversion::load_embeddings(a.emb);
    if (!emb && a.baseline != "gen") throw ConfigError("--emb is required unless --baseline gen");
    std::vector<std::string> train;
    if (!a.train.empty()) {
      train = chem::smiles_of(molecules(a.train));
    } else if (emb) {
      train = emb->dataset;
    }
    if (cfg.strict && train.empty()) log << "warning: no training molecules; novelty is not filtered\n";
    const auto train_set = sampler::canonical_set(train);
    sampler::SampleBatch batch;
    if (baseline) {
      seq::Embedding token;
      if (a.baseline == "gen") {
        const auto t = model.token_embedding(model.vocab().gen());
        token.assign(t.begin(), t.end());
      } else {
        token = emb->state.s;
      }
      const seq::Embedding pseudo[1] = {token};
      batch = sampler::sample_baseline(model, seq::make_prompt(model, seq::kSampleWords, pseudo), cfg, train_set,
                                       emb ? emb->state.head_ptr() : nullptr);
    } else {
      batch = sampler::sample(emb->state, model, cfg, train_set);
    }
    std::vector<chem::MolRecord> recs;
    std::string prov = jsonl_header("himol-provenance");
    std::size_t valid = 0;
    for (const auto& r : batch.records) {
      recs.push_back({r.final_smiles(), std::nullopt});
      prov += sampler::to_json_line(r) + "\n";
      valid += r.valid ? 1 : 0;
    }
    chem::write_molecules(a.out, recs);
    if (!a.provenance.empty()) write_text(a.provenance, prov);
    std::ostringstream tau;
    tau << cfg.temperature;
    write_echo(sub, a.out, {{"temperature", tau.str()}});
    log << "wrote " << recs.size() << " molecules to " << a.out << " (" << valid << " valid, resampling ratio "
        << batch.resampling_ratio() << ")\n";
  };
}

struct RepairArgs {
  std::string in, out, trace;
};

void add_repair(CLI::App& app, RepairArgs& a, Common& c, std::function<void()>& action, std::ostream& log) {
  auto* sub = app.add_subcommand("repair", "Repair SMILES strings with the rule-based editor");
  sub->add_option("--in", a.in, "Molecule file")->required();
  sub->add_option("--out", a.out, "Repaired molecule file (failures keep the input string)")->required();
  sub->add_option("--trace", a.trace, "JSON-lines file of applied rules");
  add_common(sub, c);
  action = [&a, &c, sub, &log] {
    const auto recs = molecules(a.in);
    std::vector<repair::RepairTrace> traces(recs.size());
    parallel_for(recs.size(), [&](std::size_t n) {
      traces[n] = repair::try_repair(recs[n].smiles, derive_seed(c.seed, n));
    });
    std::vector<chem::MolRecord> out;
    std::string trace = jsonl_header("himol-repair-trace");
    std::size_t failed = 0, changed = 0;
    for (std::size_t n = 0; n < recs.size(); ++n) {
      const auto& t = traces[n];
      failed += t.failed ? 1 : 0;
      changed += !t.failed && t.output != t.input ? 1 : 0;
      out.push_back({t.failed ? recs[n].smiles : t.output, recs[n].label});
      trace += repair::to_json_line(t) + "\n";
    }
    chem::write_molecules(a.out, out);
    if (!a.trace.empty()) write_text(a.trace, trace);
    write_echo(sub, a.out);
    log << recs.size() << " molecules: " << changed << " repaired, " << failed << " failed\n";
  };
}

struct EvalArgs {
  std::string gen, train, test, model, labels, out;
  int knn_k = 5;
  metrics::EvalConfig cfg;
};

void add_eval(CLI::App& app, EvalArgs& a, Common& c, std::function<void()>& action, std::ostream& log) {
  auto* sub = app.add_subcommand("eval", "Score generated molecules against training and test sets");
  sub->add_option("--gen", a.gen, "Generated molecule file")->required();
  sub->add_option("--train", a.train, "Training molecule file")->required();
  sub->add_option("--test", a.test, "Test molecule file")->required();
  sub->add_option("--model", a.model, "Backbone checkpoint for the Frechet distance");
  sub->add_option("--labels", a.labels, "Labelled molecules for the activity classifier");
  sub->add_option("--knn-k", a.knn_k, "Neighbours of the activity classifier")->capture_default_str();
  sub->add_option("--out", a.out, "JSON report")->required();
  sub->add_flag("--repair", a.cfg.repair, "Also report metrics after repairing every sample");
  sub->add_option("--nspdk-radius", a.cfg.nspdk.radius, "NSPDK neighbourhood radius")->capture_default_str();
  sub->add_option("--nspdk-distance", a.cfg.nspdk.distance, "NSPDK maximum pair distance")->capture_default_str();
  sub->add_option("--nspdk-width", a.cfg.nspdk.width, "NSPDK hashing width (power of two)")->capture_default_str();
  add_common(sub, c);
  action = [&a, &c, sub, &log] {
    a.cfg.repair_seed = c.seed;
    const auto gen = chem::smiles_of(molecules(a.gen));
    const auto train = chem::smiles_of(molecules(a.train));
    const auto test = chem::smiles_of(molecules(a.test));
    std::optional<seq::Backbone> model;
    if (!a.model.empty()) model = seq::load_backbone(a.model);
    std::optional<metrics::KnnTanimoto> knn;
    if (!a.labels.empty()) knn.emplace(lowshot::read_labelled(a.labels), a.knn_k);
    const auto r = metrics::evaluate(gen, train, test, model ? &*model : nullptr, knn ? &*knn : nullptr, a.cfg);
    write_text(a.out, metrics::to_json(r) + "\n");
    write_echo(sub, a.out);
    log << "validity " << r.raw.validity << " uniqueness " << r.raw.uniqueness << " novelty " << r.raw.novelty << '\n';
    for (const auto& [metric, msg] : r.raw.errors) log << "warning: " << metric << ": " << msg << '\n';
  };
}

struct LowshotArgs {
  std::string pool, test, model, out;
  int shots = 16;
  int seeds = 20;
  inversion::InversionConfig inv;
  sampler::SamplerConfig samp;
  lowshot::AugmentConfig aug;
};

void add_lowshot(CLI::App& app, LowshotArgs& a, Common& c, std::function<void()>& action, std::ostream& log) {
  auto* sub = app.add_subcommand("lowshot", "ROC-AUC change from augmenting k-shot training sets");
  sub->add_option("--pool", a.pool, "Labelled pool molecules")->required();
  sub->add_option("--test", a.test, "Labelled test molecules")->required();
  sub->add_option("--model", a.model, "Backbone checkpoint")->required();
  sub->add_option("--out", a.out, "JSON result")->required();
  sub->add_option("--shots", a.shots, "Molecules per class")->capture_default_str();
  sub->add_option("--seeds", a.seeds, "Number of seeds (seed, seed + 1, ...)")->capture_default_str();
  sub->add_option("--k", a.inv.k, "Intermediate tokens per class model")->capture_default_str();
  sub->add_option("--epochs", a.inv.epochs, "Inversion epochs")->capture_default_str();
  sub->add_option("--lr", a.inv.lr, "Inversion learning rate")->capture_default_str();
  sub->add_option("--assign-epochs", a.inv.assign_epochs, "Cluster refresh epochs")->capture_default_str();
  sub->add_option("--l", a.samp.l, "Lambda prior bound")->capture_default_str();
  sub->add_option("--temperature", a.samp.temperature, "Sampling temperature")->capture_default_str();
  sub->add_option("--max-len", a.samp.max_len, "Maximum generated tokens")->capture_default_str();
  sub->add_flag("--repair", a.samp.repair, "Repair generated molecules");
  sub->add_option("--multiplier", a.aug.multiplier, "Generated molecules per shot")->capture_default_str();
  sub->add_option("--knn-k", a.aug.knn_k, "Neighbours of the scoring classifier")->capture_default_str();
  add_common(sub, c);
  action = [&a, &c, sub, &log] {
    lowshot::LowShotTask task;
    task.shots = a.shots;
    task.pool = lowshot::read_labelled(a.pool);
    task.test = lowshot::read_labelled(a.test);
    if (a.seeds < 1) throw ConfigError("--seeds must be positive");
    for (int s = 0; s < a.seeds; ++s) task.seeds.push_back(c.seed + static_cast<std::uint64_t>(s));
    const auto model = seq::load_backbone(a.model);
    const auto gen = lowshot::inversion_generator(model, a.inv, a.samp);
    const auto r = lowshot::run_augmentation(task, gen, a.aug);
    write_text(a.out, lowshot::to_json(r, task) + "\n");
    write_echo(sub, a.out);
    for (const auto& w : r.warnings) log << "warning: " << w << '\n';
    log << "mean delta ROC-AUC " << r.mean_delta << " (95% CI " << r.ci_low << " .. " << r.ci_high << ", "
        << r.used << " seeds)\n";
  };
}

struct SplitArgs {
  std::string in, prefix;
  split::SplitRatios ratios;
};

void add_split(CLI::App& app, SplitArgs& a, Common& c, std::function<void()>& action, std::ostream& log) {
  auto* sub = app.add_subcommand("scaffold-split", "Split a molecule file by Bemis-Murcko scaffold");
  sub->add_option("--in", a.in, "Molecule file")->required();
  sub->add_option("--out-prefix", a.prefix, "Writes PREFIX.train.smi, PREFIX.valid.smi, PREFIX.test.smi")->required();
  sub->add_option("--train-ratio", a.ratios.train, "Train fraction")->capture_default_str();
  sub->add_option("--valid-ratio", a.ratios.valid, "Validation fraction")->capture_default_str();
  add_common(sub, c);
  action = [&a, &c, sub, &log] {
    const auto recs = molecules(a.in);
    const auto idx = split::scaffold_split_indices(chem::smiles_of(recs), c.seed, a.ratios);
    const auto write = [&](const std::vector<std::size_t>& part, const char* name) {
      std::vector<chem::MolRecord> out;
      for (std::size_t n : part) out.push_back(recs[n]);
      chem::write_molecules(a.prefix + "." + name + ".smi", out);
    };
    write(idx.train, "train");
    write(idx.valid, "valid");
    write(idx.test, "test");
    write_echo(sub, a.prefix);
    log << "train " << idx.train.size() << ", valid " << idx.valid.size() << ", test " << idx.test.size() << '\n';
  };
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical prompt-token inversion for molecule generation", "himol"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Common common;
  PretrainArgs pretrain;
  InvertArgs invert;
  SampleArgs sample;
  RepairArgs repair;
  EvalArgs eval;
  LowshotArgs low;
  SplitArgs split;
  std::function<void()> a_pretrain, a_invert, a_sample, a_repair, a_eval, a_low, a_split;
  add_pretrain(app, pretrain, common, a_pretrain, err);
  add_invert(app, invert, common, a_invert, err);
  add_sample(app, sample, common, a_sample, err);
  add_repair(app, repair, common, a_repair, err);
  add_eval(app, eval, common, a_eval, err);
  add_lowshot(app, low, common, a_low, err);
  add_split(app, split, common, a_split, err);
  const std::map<std::string, std::function<void()>*> actions{
      {"pretrain", &a_pretrain}, {"invert", &a_invert}, {"sample", &a_sample},           {"repair", &a_repair},
      {"eval", &a_eval},         {"lowshot", &a_low},   {"scaffold-split", &a_split}};

  try {
    const Expanded expanded = expand_config(args);
    if (!args.empty()) {
      if (const auto* sub = app.get_subcommand_no_throw(args[0])) check_keys(sub, expanded);
    }
    std::vector<std::string> reversed(expanded.args.rbegin(), expanded.args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
      const auto subs = app.get_subcommands();
      out << (subs.empty() ? app.help("", CLI::AppFormatMode::All) : subs.front()->help());
      return 0;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return 0;
    } catch (const CLI::CallForVersion&) {
      out << kVersion << '\n';
      return 0;
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << "\nrun 'himol --help' for usage\n";
      return 1;
    }
    set_max_jobs(common.jobs);
    (*actions.at(app.get_subcommands().front()->get_name()))();
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace himol::cli
