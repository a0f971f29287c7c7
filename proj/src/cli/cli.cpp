//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molmetric/cli.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "molmetric/chemnet.hpp"
#include "molmetric/fingerprint.hpp"
#include "molmetric/frechet.hpp"
#include "molmetric/harness.hpp"
#include "molmetric/parallel.hpp"
#include "molmetric/random.hpp"
#include "molmetric/smiles.hpp"

namespace molmetric::cli {
namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Config {
  std::string command;
  std::vector<std::string> inputs;
  std::string output;
  std::uint64_t seed = 42;
  double eps = frechet::kDefaultEps;
  int threads = 0;
  std::string model_path;
  std::optional<std::uint64_t> seeded_model;
  std::uint64_t seeded_model_value = 0;
  std::string bias;
  std::size_t n = 1000;
  int seeds = 5;
  int repeats = 0;  // 0: per-command default
  std::size_t sample_size = 10000;
  std::size_t subset = 5000;
  std::vector<std::size_t> sizes = harness::kConvergenceSizes;
  std::string reference;
  std::string timestamp;
};

chemnet::ChemNetModel load_model_from(const Config& c) {
  const bool file = !c.model_path.empty();
  if (file == c.seeded_model.has_value()) {
    throw UsageError("exactly one of --model or --seeded-model is required");
  }
  if (file) return chemnet::load_model(c.model_path);
  return chemnet::seeded_init(chemnet::Architecture{}, *c.seeded_model);
}

harness::Dataset load(const std::string& path, std::ostream& err) {
  harness::Dataset d = harness::load_dataset(path);
  for (const harness::Reject& r : d.rejects) {
    err << path << ':' << r.line << ": skipped row: " << r.reason << '\n';
  }
  if (d.records.empty()) throw InputError("no records in " + path);
  return d;
}

bool looks_like_stats(const std::string& path) {
  if (fs::path(path).extension() == ".stats") return true;
  std::ifstream in(path);
  if (!in) return false;
  char ch = 0;
  while (in.get(ch)) {
    if (!std::isspace(static_cast<unsigned char>(ch))) return ch == '{';
  }
  return false;
}

ordered_json stats_summary(const std::string& path, std::size_t n, double validity) {
  return {{"path", path}, {"n", n}, {"validity", validity}};
}

struct EmbeddedSet {
  frechet::GaussianStats<double> stats;
  ordered_json summary;
};

EmbeddedSet embed_set(const std::string& path, const harness::Featurizer& f,
                      std::ostream& err) {
  if (looks_like_stats(path)) {
    frechet::StatsFile file = frechet::load_stats(path);
    err << path << ": loaded statistics of " << file.stats.n << " molecules\n";
    return {std::move(file.stats),
            {{"path", path}, {"n", file.stats.n}, {"stats_file", true}}};
  }
  const harness::Dataset d = load(path, err);
  const harness::ValiditySplit split = harness::split_valid(d.smiles());
  err << path << ": " << split.valid.size() << " of " << split.total
      << " SMILES valid\n";
  return {f.stats(split.valid), stats_summary(path, split.total, split.fraction())};
}

int cmd_fcd(const Config& c, std::ostream& out, std::ostream& err) {
  const chemnet::ChemNetModel model = load_model_from(c);
  const harness::Featurizer f(model);
  const EmbeddedSet a = embed_set(c.inputs.at(0), f, err);
  const EmbeddedSet b = embed_set(c.inputs.at(1), f, err);
  const double d2 = frechet::frechet_distance(a.stats, b.stats, c.eps);
  err << "FCD = " << d2 << '\n';
  out << ordered_json{{"command", "fcd"}, {"fcd", d2}, {"a", a.summary},
                      {"b", b.summary}, {"eps", c.eps}}
             .dump(2)
      << '\n';
  return kExitOk;
}

std::vector<fingerprint::Fingerprint> valid_fps(const std::string& path,
                                                std::ostream& err, ordered_json& summary) {
  const harness::Dataset d = load(path, err);
  const harness::ValiditySplit split = harness::split_valid(d.smiles());
  err << path << ": " << split.valid.size() << " of " << split.total << " SMILES valid\n";
  summary = stats_summary(path, split.total, split.fraction());
  return harness::fingerprints(split.valid);
}

int cmd_ffd(const Config& c, std::ostream& out, std::ostream& err) {
  ordered_json sa, sb;
  const auto fa = valid_fps(c.inputs.at(0), err, sa);
  const auto fb = valid_fps(c.inputs.at(1), err, sb);
  const double d2 =
      harness::ffd(harness::fingerprint_stats(fa), harness::fingerprint_stats(fb), c.eps);
  err << "FFD = " << d2 << '\n';
  out << ordered_json{{"command", "ffd"}, {"ffd", d2}, {"a", sa}, {"b", sb}, {"eps", c.eps}}
             .dump(2)
      << '\n';
  return kExitOk;
}

int cmd_diversity(const Config& c, std::ostream& out, std::ostream& err) {
  ordered_json s;
  const auto fps = valid_fps(c.inputs.at(0), err, s);
  const int repeats = c.repeats > 0 ? c.repeats : 5;
  const double div = fingerprint::internal_diversity(fps, c.subset, repeats, c.seed);
  err << "internal diversity = " << div << '\n';
  out << ordered_json{{"command", "diversity"}, {"internal_diversity", div},
                      {"input", s},           {"subset_size", c.subset},
                      {"repeats", repeats},   {"seed", c.seed}}
             .dump(2)
      << '\n';
  return kExitOk;
}

int cmd_validity(const Config& c, std::ostream& out, std::ostream& err) {
  const harness::Dataset d = load(c.inputs.at(0), err);
  std::map<std::string, std::size_t> reasons;
  std::size_t valid = 0;
  for (const harness::DatasetRecord& r : d.records) {
    const smiles::Validity v = smiles::check_validity(r.smiles);
    if (v.valid) {
      ++valid;
    } else {
      ++reasons[v.reason ? std::string(smiles::to_string(*v.reason)) : "Unknown"];
    }
  }
  const double frac = static_cast<double>(valid) / static_cast<double>(d.records.size());
  err << valid << " of " << d.records.size() << " valid\n";
  out << ordered_json{{"command", "validity"}, {"n", d.records.size()}, {"valid", valid},
                      {"fraction", frac},      {"errors", reasons}}
             .dump(2)
      << '\n';
  return kExitOk;
}

int cmd_stats(const Config& c, std::ostream& out, std::ostream& err) {
  if (c.output.empty()) throw UsageError("stats needs -o <file>");
  const chemnet::ChemNetModel model = load_model_from(c);
  const harness::Featurizer f(model);
  const EmbeddedSet s = embed_set(c.inputs.at(0), f, err);
  frechet::save_stats(c.output, s.stats, c.eps);
  err << "wrote " << c.output << '\n';
  out << ordered_json{{"command", "stats"},       {"output", c.output},
                      {"dim", s.stats.dim()},     {"n", s.stats.n},
                      {"input", s.summary}}
             .dump(2)
      << '\n';
  return kExitOk;
}

int cmd_simulate(const Config& c, std::ostream& out, std::ostream& err) {
  const harness::Bias bias = harness::parse_bias(c.bias);
  const chemnet::ChemNetModel model = load_model_from(c);
  const harness::Featurizer f(model);
  const harness::Dataset d = load(c.inputs.at(0), err);
  err << "featurizing " << d.records.size() << " molecules\n";
  const harness::Pool pool = harness::make_pool(d.records, f);
  const harness::PoolReference ref = harness::make_reference(pool);
  const auto rows =
      harness::detection_experiment(pool, ref, bias, c.n, c.seeds, c.seed, c.eps);

  ordered_json runs = ordered_json::array();
  double fd = 0, fr = 0, gd = 0, gr = 0;
  for (const harness::DetectionRow& r : rows) {
    runs.push_back({{"seed", r.seed},
                    {"fcd_disturbed", r.fcd_disturbed},
                    {"fcd_random", r.fcd_random},
                    {"ffd_disturbed", r.ffd_disturbed},
                    {"ffd_random", r.ffd_random}});
    fd += r.fcd_disturbed;
    fr += r.fcd_random;
    gd += r.ffd_disturbed;
    gr += r.ffd_random;
  }
  const double k = rows.empty() ? 1.0 : static_cast<double>(rows.size());
  if (!c.output.empty() && !rows.empty()) {
    const auto idx = harness::disturbed_indices(pool.records, pool.fps, bias, c.n, rows[0].seed);
    std::ofstream o(c.output);
    if (!o) throw InputError("cannot write " + c.output);
    for (std::size_t i : idx) o << pool.records[i].smiles << '\n';
    err << "wrote disturbed set to " << c.output << '\n';
  }
  err << harness::bias_name(bias) << ": FCD " << fd / k << " vs random " << fr / k
      << ", FFD " << gd / k << " vs random " << gr / k << '\n';
  out << ordered_json{{"command", "simulate"},
                      {"bias", harness::bias_name(bias)},
                      {"n", c.n},
                      {"seed", c.seed},
                      {"mean_fcd_disturbed", fd / k},
                      {"mean_fcd_random", fr / k},
                      {"mean_ffd_disturbed", gd / k},
                      {"mean_ffd_random", gr / k},
                      {"runs", runs}}
             .dump(2)
      << '\n';
  return kExitOk;
}

int cmd_converge(const Config& c, std::ostream& out, std::ostream& err) {
  const chemnet::ChemNetModel model = load_model_from(c);
  const harness::Featurizer f(model);
  const harness::Dataset d = load(c.inputs.at(0), err);
  const harness::ValiditySplit split = harness::split_valid(d.smiles());
  err << "embedding " << split.valid.size() << " molecules\n";
  const Eigen::MatrixXd emb = f.embed(split.valid);
  const frechet::GaussianStats<double> reference =
      c.reference.empty() ? frechet::estimate_stats(emb) : frechet::load_stats(c.reference).stats;
  const int repeats = c.repeats > 0 ? c.repeats : 5;
  const auto rows =
      harness::convergence_experiment(emb, reference, c.sizes, repeats, c.seed, c.eps);
  ordered_json table = ordered_json::array();
  for (const harness::ConvergenceRow& r : rows) {
    if (r.skipped) {
      err << "size " << r.size << ": skipped, pool holds " << emb.rows() << '\n';
      table.push_back({{"size", r.size}, {"skipped", true}});
    } else {
      err << "size " << r.size << ": " << r.mean << " +- " << r.std << '\n';
      table.push_back({{"size", r.size}, {"repeats", r.repeats},
                       {"mean_d2", r.mean}, {"std_d2", r.std}});
    }
  }
  if (!c.output.empty()) {
    std::ofstream o(c.output, std::ios::binary);
    if (!o) throw InputError("cannot write " + c.output);
    o << harness::convergence_csv(rows);
  }
  out << ordered_json{{"command", "converge"}, {"pool", emb.rows()}, {"seed", c.seed},
                      {"rows", table}}
             .dump(2)
      << '\n';
  return kExitOk;
}

int cmd_score(const Config& c, std::ostream& out, std::ostream& err) {
  const chemnet::ChemNetModel model = load_model_from(c);
  const harness::Featurizer f(model);
  const harness::Dataset cand = load(c.inputs.at(0), err);
  const EmbeddedSet ref = embed_set(c.inputs.at(1), f, err);
  const int repeats = c.repeats > 0 ? c.repeats : 10;
  const harness::ScoreResult s = harness::score_generator(
      cand.smiles(), ref.stats, f, c.sample_size, repeats, c.seed, c.eps);
  err << "FCD = " << s.mean << " +- " << s.std << " (validity " << s.validity << ")\n";
  out << ordered_json{{"command", "score"},      {"fcd_mean", s.mean},
                      {"fcd_std", s.std},        {"validity", s.validity},
                      {"n_valid", s.n_valid},    {"n_total", s.n_total},
                      {"sample_size", s.sample_size}, {"repeats", s.repeats},
                      {"seed", c.seed},          {"reference", ref.summary}}
             .dump(2)
      << '\n';
  return kExitOk;
}

int cmd_baseline(const Config& c, std::ostream& out, std::ostream& err) {
  if (c.n < 1) throw UsageError("baseline needs -n >= 1");
  const auto smiles = harness::random_cno_baseline(c.n, c.seed);
  const harness::ValiditySplit split = harness::split_valid(smiles);
  if (!c.output.empty()) {
    std::ofstream o(c.output);
    if (!o) throw InputError("cannot write " + c.output);
    for (const std::string& s : smiles) o << s << '\n';
  }
  err << "generated " << smiles.size() << " strings, " << split.valid.size()
      << " valid\n";
  ordered_json j = {{"command", "baseline"}, {"n", c.n}, {"seed", c.seed},
                    {"validity", split.fraction()}};
  if (c.output.empty()) {
    j["smiles"] = smiles;
  } else {
    j["output"] = c.output;
  }
  out << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_report(const Config& c, std::ostream& out, std::ostream& err) {
  if (c.inputs.size() < 2) throw UsageError("report needs a reference and at least one set");
  const chemnet::ChemNetModel model = load_model_from(c);
  const harness::Featurizer f(model);
  const harness::Dataset refd = load(c.inputs[0], err);
  harness::NamedSet reference{fs::path(c.inputs[0]).stem().string(), refd.records};
  const auto ref_stats = c.reference.empty()
                             ? f.stats(harness::split_valid(reference.smiles_list()).valid)
                             : frechet::load_stats(c.reference).stats;
  std::vector<harness::NamedSet> sets;
  for (std::size_t i = 1; i < c.inputs.size(); ++i) {
    sets.push_back({fs::path(c.inputs[i]).stem().string(), load(c.inputs[i], err).records});
  }
  harness::ReportOptions opts;
  opts.seed = c.seed;
  opts.eps = c.eps;
  opts.diversity_subset = c.subset;
  if (c.repeats > 0) opts.diversity_repeats = c.repeats;
  opts.timestamp = c.timestamp;
  const std::string ref_id = c.reference.empty() ? c.inputs[0] : c.reference;
  const harness::MetricReport report =
      harness::run_report(reference, ref_stats, ref_id, sets, f, opts, c.output);
  err << harness::report_csv(report);
  out << harness::report_json(report);
  return kExitOk;
}

int cmd_model(const Config& c, std::ostream& out, std::ostream& err) {
  if (c.output.empty()) throw UsageError("model needs -o <manifest.json>");
  const chemnet::ChemNetModel model = load_model_from(c);
  chemnet::save_model(c.output, model);
  err << "wrote " << c.output << '\n';
  out << ordered_json{{"command", "model"}, {"output", c.output},
                      {"embedding_dim", model.embedding_dim()}}
             .dump(2)
      << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Config c;
  CLI::App app{"Frechet ChemNet Distance and related metrics for molecule sets", "molmetric"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  const auto common = [&](CLI::App* sub, bool model) {
    sub->add_option("--seed", c.seed, "random seed")->capture_default_str();
    sub->add_option("--eps", c.eps, "covariance regularization")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--threads", c.threads,
                    "worker threads (default: MOLMETRIC_THREADS, else all cores)")
        ->check(CLI::NonNegativeNumber);
    if (model) {
      auto* m = sub->add_option("--model", c.model_path, "model manifest (JSON)");
      sub->add_option("--seeded-model", c.seeded_model_value,
                      "use deterministic stand-in weights from this seed")
          ->excludes(m);
    }
  };
  const auto input = [&](CLI::App* sub, const char* name, const char* desc) {
    sub->add_option(name, c.inputs, desc)->required();
  };

  auto* fcd = app.add_subcommand("fcd", "FCD between two sets (B may be a stats file)");
  fcd->add_option("inputs", c.inputs, "A and B")->required()->expected(2);
  common(fcd, true);

  auto* ffd = app.add_subcommand("ffd", "Frechet fingerprint distance between two sets");
  ffd->add_option("inputs", c.inputs, "A and B")->required()->expected(2);
  common(ffd, false);

  auto* div = app.add_subcommand("diversity", "internal diversity of a set");
  input(div, "input", "molecule set");
  div->add_option("--subset", c.subset, "subset size")->capture_default_str();
  div->add_option("--repeats", c.repeats, "number of subsets (default 5)");
  common(div, false);

  auto* val = app.add_subcommand("validity", "fraction of valid SMILES");
  input(val, "input", "molecule set");
  common(val, false);

  auto* st = app.add_subcommand("stats", "save reference statistics of a set");
  input(st, "input", "molecule set");
  st->add_option("-o,--output", c.output, "stats manifest to write")->required();
  common(st, true);

  auto* sim = app.add_subcommand("simulate", "disturbed set versus random subset");
  sim->add_option("bias", c.bias, "druglike, logp, sa, modecollapse or target")
      ->required()
      ->check(CLI::IsMember({"druglike", "logp", "sa", "modecollapse", "target"}));
  input(sim, "corpus", "corpus CSV with descriptor columns");
  sim->add_option("-n", c.n, "set size")->capture_default_str();
  sim->add_option("--seeds", c.seeds, "number of seeds")->capture_default_str();
  sim->add_option("-o,--output", c.output, "write the first disturbed set here");
  common(sim, true);

  auto* conv = app.add_subcommand("converge", "FCD of subsamples against the full pool");
  input(conv, "pool", "molecule pool");
  conv->add_option("--sizes", c.sizes, "sample sizes")->delimiter(',');
  conv->add_option("--repeats", c.repeats, "repeats per size (default 5)");
  conv->add_option("--reference", c.reference, "reference stats (default: the pool)");
  conv->add_option("-o,--output", c.output, "convergence CSV");
  common(conv, true);

  auto* score = app.add_subcommand("score", "FCD of a generator's samples");
  score->add_option("inputs", c.inputs, "candidates and reference (set or stats)")
      ->required()
      ->expected(2);
  score->add_option("--sample-size", c.sample_size, "molecules per repeat")
      ->capture_default_str();
  score->add_option("--repeats", c.repeats, "repeats (default 10)");
  common(score, true);

  auto* base = app.add_subcommand("baseline", "random C/N/O strings");
  base->add_option("-n", c.n, "number of strings")->required();
  base->add_option("-o,--output", c.output, "write strings here instead of stdout");
  common(base, false);

  auto* rep = app.add_subcommand("report", "metric table for several sets");
  rep->add_option("inputs", c.inputs, "reference set followed by other sets")->required();
  rep->add_option("-o,--output", c.output, "directory for report.csv and report.json");
  rep->add_option("--reference", c.reference, "reference stats for FCD");
  rep->add_option("--subset", c.subset, "diversity subset size")->capture_default_str();
  rep->add_option("--repeats", c.repeats, "diversity repeats (default 5)");
  rep->add_option("--timestamp", c.timestamp, "fixed metadata timestamp");
  common(rep, true);

  auto* mdl = app.add_subcommand("model", "write model weights to disk");
  mdl->add_option("-o,--output", c.output, "manifest to write")->required();
  common(mdl, true);

  std::vector<std::string> argv_store = args;
  if (argv_store.empty()) argv_store.push_back("molmetric");
  std::vector<char*> argv;
  for (std::string& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    err << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    err << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  c.command = sub->get_name();
  if (sub->get_option_no_throw("--seeded-model") && sub->count("--seeded-model") > 0) {
    c.seeded_model = c.seeded_model_value;
  }
  if (c.threads > 0) set_num_threads(c.threads);

  try {
    for (const std::string& path : c.inputs) {
      std::error_code ec;
      if (!fs::is_regular_file(path, ec)) throw InputError("UnreadableFile: " + path);
    }
    if (c.command == "fcd") return cmd_fcd(c, out, err);
    if (c.command == "ffd") return cmd_ffd(c, out, err);
    if (c.command == "diversity") return cmd_diversity(c, out, err);
    if (c.command == "validity") return cmd_validity(c, out, err);
    if (c.command == "stats") return cmd_stats(c, out, err);
    if (c.command == "simulate") return cmd_simulate(c, out, err);
    if (c.command == "converge") return cmd_converge(c, out, err);
    if (c.command == "score") return cmd_score(c, out, err);
    if (c.command == "baseline") return cmd_baseline(c, out, err);
    if (c.command == "report") return cmd_report(c, out, err);
    if (c.command == "model") return cmd_model(c, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << sub->help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.error_class() == ErrorClass::kNumerical ? kExitNumerical : kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitUsage;
}

int run(int argc, char** argv) {
  return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace molmetric::cli
