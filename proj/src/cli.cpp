#include "fbmlab/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "fbmlab/asymptotics.hpp"
#include "fbmlab/constants.hpp"
#include "fbmlab/fbm.hpp"
#include "fbmlab/json_io.hpp"
#include "fbmlab/model.hpp"
#include "fbmlab/validation.hpp"

namespace fbmlab {

namespace {

using nlohmann::json;

// Thrown for bad flags, bad config documents and violated preconditions.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Fills options that were not given on the command line from a flat JSON
/// config document.
class ConfigBinder {
 public:
  explicit ConfigBinder(CLI::App* app) {
    app->add_option("--config", path_, "JSON config; command-line flags override it");
  }

  template <class T>
  CLI::Option* bind(CLI::Option* opt, std::string key, T& var) {
    fill_.push_back([opt, key = std::move(key), &var](const json& doc) {
      if (opt->count() == 0 && doc.contains(key)) var = doc.at(key).get<T>();
    });
    return opt;
  }

  void apply() const {
    json doc = json::object();
    if (!path_.empty()) {
      std::ifstream in(path_);
      if (!in) throw UsageError("cannot read config file " + path_);
      try {
        doc = json::parse(in);
      } catch (const json::exception& e) {
        throw UsageError("config file " + path_ + " is not valid JSON: " + e.what());
      }
      if (!doc.is_object()) throw UsageError("config file must hold a JSON object");
    }
    try {
      for (const auto& f : fill_) f(doc);
    } catch (const json::exception& e) {
      throw UsageError(std::string("config value has the wrong type: ") + e.what());
    }
  }

 private:
  std::string path_;
  std::vector<std::function<void(const json&)>> fill_;
};

struct ModelFlags {
  double hurst = 0.5;
  double drift = 0.0;
  double horizon = 1.0;

  void add(CLI::App* app, ConfigBinder& cfg) {
    cfg.bind(app->add_option("--H", hurst, "Hurst index in (0,1)"), "H", hurst);
    cfg.bind(app->add_option("--mu", drift, "drift"), "mu", drift);
    cfg.bind(app->add_option("--T", horizon, "horizon"), "T", horizon);
  }

  [[nodiscard]] ModelParams params() const {
    ModelParams p;
    p.hurst = hurst;
    p.drift = drift;
    p.horizon = horizon;
    return p;
  }
};

template <class Parsed, class Fn>
Parsed parse_enum(Fn parse, const std::string& text) {
  try {
    return parse(text);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

ModelParams checked_params(const ModelFlags& flags) {
  ModelParams p = flags.params();
  try {
    p.validate();
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  return p;
}

void print_json_line(std::ostream& out, const json& doc) { out << doc.dump() << '\n'; }

std::filesystem::path cache_path(const std::string& flag) {
  return flag.empty() ? default_cache_path() : std::filesystem::path(flag);
}

// Saves the cache if it gained entries; returns false on write failure.
bool save_if_grown(const ConstantsProvider& provider, std::size_t before,
                   const std::filesystem::path& file, std::ostream& err) {
  if (provider.entries().size() == before) return true;
  try {
    provider.save(file);
  } catch (const std::exception& e) {
    err << "error: cannot update constants cache: " << e.what() << '\n';
    return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

struct AsymptoticCommand {
  ModelFlags model;
  std::string functional = "drawdown";
  std::vector<double> u;
  std::string variant = "proof_derived";
  std::string cache;
  double pickands = 0.0;
  unsigned threads = 0;
  CLI::App* app = nullptr;
  std::unique_ptr<ConfigBinder> cfg;

  void add(CLI::App& parent) {
    app = parent.add_subcommand("asymptotic", "tail asymptotics of the drawdown or drawup");
    cfg = std::make_unique<ConfigBinder>(app);
    model.add(app, *cfg);
    cfg->bind(app->add_option("--functional", functional, "drawdown or drawup"), "functional",
              functional);
    cfg->bind(app->add_option("--u", u, "threshold (repeatable)"), "u", u);
    cfg->bind(app->add_option("--variant", variant, "statement or proof_derived"), "variant",
              variant);
    cfg->bind(app->add_option("--cache", cache, "constants cache file"), "cache", cache);
    cfg->bind(app->add_option("--pickands", pickands, "use this Pickands constant value"),
              "pickands", pickands);
    cfg->bind(app->add_option("--threads", threads, "worker threads (0 = all cores)"), "threads",
              threads);
  }

  int run(std::ostream& out, std::ostream& err) {
    cfg->apply();
    if (u.empty()) {
      err << "error: --u is required\n" << app->help();
      return kExitUsage;
    }
    const ModelParams params = checked_params(model);
    const Functional f = parse_enum<Functional>(parse_functional, functional);
    const DrawupVariant v = parse_enum<DrawupVariant>(parse_drawup_variant, variant);

    EstimationSettings settings;
    settings.threads = threads;
    ConstantsProvider provider(ConstantsProvider::Policy::simulate_if_missing, settings);
    const std::filesystem::path file = cache_path(cache);
    provider.load(file);
    if (pickands > 0.0) provider.supply(ConstantKind::pickands, params.hurst, std::nullopt, pickands);
    const std::size_t before = provider.entries().size();

    for (double uu : u) {
      try {
        print_json_line(out, envelope("asymptotic", to_json(asym_tail(f, uu, params, provider, v))));
      } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
      }
    }
    return save_if_grown(provider, before, file, err) ? kExitOk : kExitCacheWrite;
  }
};

// ---------------------------------------------------------------------------

struct SimulateCommand {
  ModelFlags model;
  std::string functional = "drawdown";
  std::vector<double> u;
  std::size_t paths = 10000;
  std::size_t steps = 1024;
  std::uint64_t seed = 1;
  std::string sampler = "automatic";
  std::string dump_paths;
  unsigned threads = 0;
  CLI::App* app = nullptr;
  std::unique_ptr<ConfigBinder> cfg;

  void add(CLI::App& parent) {
    app = parent.add_subcommand("simulate", "Monte Carlo tail probability on nested grids");
    cfg = std::make_unique<ConfigBinder>(app);
    model.add(app, *cfg);
    cfg->bind(app->add_option("--functional", functional, "drawdown or drawup"), "functional",
              functional);
    cfg->bind(app->add_option("--u", u, "threshold (repeatable)"), "u", u);
    cfg->bind(app->add_option("--paths", paths, "number of paths (>= 1000)"), "paths", paths);
    cfg->bind(app->add_option("--steps", steps, "coarse grid steps; the fine grid has twice as many"),
              "steps", steps);
    cfg->bind(app->add_option("--seed", seed, "base seed"), "seed", seed);
    cfg->bind(app->add_option("--sampler", sampler, "automatic, cholesky, circulant or brownian"),
              "sampler", sampler);
    cfg->bind(app->add_option("--dump-paths", dump_paths, "CSV of per-path functional values"),
              "dump_paths", dump_paths);
    cfg->bind(app->add_option("--threads", threads, "worker threads (0 = all cores)"), "threads",
              threads);
  }

  int run(std::ostream& out, std::ostream& err) {
    cfg->apply();
    if (u.empty()) {
      err << "error: --u is required\n" << app->help();
      return kExitUsage;
    }
    const ModelParams params = checked_params(model);
    const Functional f = parse_enum<Functional>(parse_functional, functional);
    SimulationOptions options;
    options.threads = threads;
    options.sampler = parse_enum<SamplerKind>(parse_sampler_kind, sampler);
    if (paths < 1000) throw UsageError("--paths must be at least 1000");
    if (steps == 0) throw UsageError("--steps must be positive");
    for (double uu : u) {
      if (std::isnan(uu)) throw UsageError("--u must be a number");
    }

    FunctionalSamples samples;
    try {
      samples = simulate_functionals(params, paths, steps, seed, options);
    } catch (const std::exception& e) {
      err << "error: sampler failure: " << e.what() << '\n';
      return kExitSampler;
    }
    for (double uu : u) {
      json doc = to_json(tail_from_samples(samples, f, uu));
      doc["seed"] = seed;
      doc["sampler"] = samples.sampler;
      print_json_line(out, envelope("mc_tail", std::move(doc)));
    }
    if (!dump_paths.empty()) write_file_atomically(dump_paths, functional_samples_csv(samples, f));
    return kExitOk;
  }
};

// ---------------------------------------------------------------------------

struct ConstantsCommand {
  std::string kind = "pickands";
  double hurst = 0.5;
  double nu = 1.0;
  std::vector<double> b;
  double eta = 1.0 / 256.0;
  std::size_t sims = 100000;
  std::uint64_t seed = 1;
  std::string cache;
  unsigned threads = 0;
  CLI::App* app = nullptr;
  std::unique_ptr<ConfigBinder> cfg;

  void add(CLI::App& parent) {
    app = parent.add_subcommand("constants", "simulate a Pickands or Piterbarg constant");
    cfg = std::make_unique<ConfigBinder>(app);
    cfg->bind(app->add_option("--kind", kind, "pickands or piterbarg"), "kind", kind);
    cfg->bind(app->add_option("--H", hurst, "Hurst index in (0,1]"), "H", hurst);
    cfg->bind(app->add_option("--nu", nu, "Piterbarg penalty (> 0)"), "nu", nu);
    cfg->bind(app->add_option("--b", b,
                              "truncation horizon(s): one for piterbarg (default 16), "
                              "a ladder of >= 3 for pickands (default 2 4 8)"),
              "b", b);
    cfg->bind(app->add_option("--eta", eta, "grid mesh"), "eta", eta);
    cfg->bind(app->add_option("--sims", sims, "number of simulated paths"), "sims", sims);
    cfg->bind(app->add_option("--seed", seed, "base seed"), "seed", seed);
    cfg->bind(app->add_option("--cache", cache, "cache file (default $FBMLAB_CACHE)"), "cache",
              cache);
    cfg->bind(app->add_option("--threads", threads, "worker threads (0 = all cores)"), "threads",
              threads);
  }

  int run(std::ostream& out, std::ostream& err) {
    cfg->apply();
    const ConstantKind k = parse_enum<ConstantKind>(parse_constant_kind, kind);
    EstimationSettings settings;
    settings.threads = threads;
    ConstantsProvider provider(ConstantsProvider::Policy::simulate_if_missing, settings);
    const std::filesystem::path file = cache_path(cache);
    provider.load(file);
    const std::size_t before = provider.entries().size();

    ConstantEstimate e;
    try {
      if (k == ConstantKind::pickands) {
        const std::vector<double> ladder = b.empty() ? std::vector<double>{2.0, 4.0, 8.0} : b;
        e = provider.simulated_pickands(hurst, ladder, eta, sims, seed);
      } else {
        if (b.size() > 1) throw UsageError("piterbarg takes a single --b");
        e = provider.simulated_piterbarg(hurst, nu, b.empty() ? 16.0 : b.front(), eta, sims, seed);
      }
    } catch (const DomainError& ex) {
      throw UsageError(ex.what());
    }
    if (!save_if_grown(provider, before, file, err)) return kExitCacheWrite;
    print_json_line(out, envelope("constant", to_json(e)));
    return kExitOk;
  }
};

// ---------------------------------------------------------------------------

struct ValidateCommand {
  std::string suite;
  std::string out_dir = "fbmlab_validation";
  std::vector<double> lemma_hurst{0.25, 0.4, 0.5, 0.75};
  std::vector<double> lemma_u = default_lemma_u_ladder();
  std::vector<double> lemma_delta = default_lemma_delta_ladder();
  std::vector<double> conv_hurst{0.5};
  std::vector<std::string> conv_functionals{"drawdown", "drawup"};
  std::vector<double> conv_u{1.5, 2.0, 2.5};
  double drift = 0.0;
  double horizon = 1.0;
  std::size_t paths = 100000;
  std::size_t steps = 1024;
  std::uint64_t seed = 1;
  std::string variant = "proof_derived";
  std::string cache;
  unsigned threads = 0;
  CLI::App* app = nullptr;
  std::unique_ptr<ConfigBinder> cfg;

  void add(CLI::App& parent) {
    app = parent.add_subcommand("validate", "lemma checks and Monte Carlo convergence tables");
    cfg = std::make_unique<ConfigBinder>(app);
    cfg->bind(app->add_option("--suite", suite, "lemmas, convergence or all"), "suite", suite);
    cfg->bind(app->add_option("--out", out_dir, "output directory"), "out", out_dir);
    cfg->bind(app->add_option("--lemma-H", lemma_hurst, "Hurst indices for lemma checks"),
              "lemma_H", lemma_hurst);
    cfg->bind(app->add_option("--lemma-u", lemma_u, "u ladder for lemma checks"), "lemma_u",
              lemma_u);
    cfg->bind(app->add_option("--lemma-delta", lemma_delta, "delta ladder (times T) for the "
                                                           "correlation check"),
              "lemma_delta", lemma_delta);
    cfg->bind(app->add_option("--convergence-H", conv_hurst, "Hurst indices for convergence"),
              "convergence_H", conv_hurst);
    cfg->bind(app->add_option("--convergence-functional", conv_functionals,
                              "functionals for convergence"),
              "convergence_functionals", conv_functionals);
    cfg->bind(app->add_option("--convergence-u", conv_u, "u ladder for convergence"),
              "convergence_u", conv_u);
    cfg->bind(app->add_option("--mu", drift, "drift"), "mu", drift);
    cfg->bind(app->add_option("--T", horizon, "horizon"), "T", horizon);
    cfg->bind(app->add_option("--paths", paths, "Monte Carlo paths"), "paths", paths);
    cfg->bind(app->add_option("--steps", steps, "coarse grid steps"), "steps", steps);
    cfg->bind(app->add_option("--seed", seed, "base seed"), "seed", seed);
    cfg->bind(app->add_option("--variant", variant, "drawup constant for H < 1/2"), "variant",
              variant);
    cfg->bind(app->add_option("--cache", cache, "constants cache file"), "cache", cache);
    cfg->bind(app->add_option("--threads", threads, "worker threads (0 = all cores)"), "threads",
              threads);
  }

  static std::string tag(double h) {
    std::ostringstream os;
    os << "H" << h;
    return os.str();
  }

  int run(std::ostream& out, std::ostream& err) {
    cfg->apply();
    if (suite != "lemmas" && suite != "convergence" && suite != "all") {
      err << "error: --suite must be lemmas, convergence or all (got '" << suite << "')\n"
          << app->help();
      return kExitUsage;
    }
    const DrawupVariant v = parse_enum<DrawupVariant>(parse_drawup_variant, variant);
    std::vector<Functional> functionals;
    for (const std::string& name : conv_functionals) {
      functionals.push_back(parse_enum<Functional>(parse_functional, name));
    }
    const std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

    json lemma_docs = json::array();
    json conv_docs = json::array();
    std::optional<std::string> first_failure;
    auto record = [&](const std::string& name, bool pass) {
      out << (pass ? "PASS " : "FAIL ") << name << '\n';
      if (!pass && !first_failure) first_failure = name;
    };

    if (suite == "lemmas" || suite == "all") {
      for (double h : lemma_hurst) {
        ModelParams p;
        p.hurst = h;
        p.drift = drift;
        p.horizon = horizon;
        std::vector<LemmaCheckReport> reports;
        try {
          reports.push_back(check_lemma1(p, lemma_u));
          reports.push_back(check_lemma2(p, lemma_u));
          reports.push_back(check_lemma3(h, horizon, lemma_delta));
        } catch (const DomainError& e) {
          throw UsageError(e.what());
        }
        for (const LemmaCheckReport& r : reports) {
          const std::string stem = std::string(to_string(r.lemma)) + "_" + tag(h);
          write_file_atomically(dir / (stem + ".csv"), lemma_csv(r));
          write_file_atomically(dir / (stem + ".dat"),
                                plot_data("delta", "max_rel_error", r.deltas, r.max_rel_error));
          lemma_docs.push_back(to_json(r));
          record(stem, r.pass);
        }
      }
    }

    if (suite == "convergence" || suite == "all") {
      EstimationSettings settings;
      settings.threads = threads;
      ConstantsProvider provider(ConstantsProvider::Policy::simulate_if_missing, settings);
      const std::filesystem::path file = cache_path(cache);
      provider.load(file);
      const std::size_t before = provider.entries().size();
      for (double h : conv_hurst) {
        ModelParams p;
        p.hurst = h;
        p.drift = drift;
        p.horizon = horizon;
        ConvergenceBudget budget;
        budget.n_paths = paths;
        budget.n_steps = steps;
        budget.seed = seed;
        budget.simulation.threads = threads;
        budget.variant = v;
        FunctionalSamples samples;
        try {
          for (Functional f : functionals) {
            for (double uu : conv_u) asym_tail(f, uu, p, provider, v);
          }
        } catch (const DomainError& e) {
          throw UsageError(e.what());
        }
        samples = simulate_functionals(p, paths, steps, seed, budget.simulation);
        for (Functional f : functionals) {
          const ConvergenceTable t = convergence_study(samples, f, conv_u, provider, v);
          const std::string stem = "convergence_" + std::string(to_string(f)) + "_" + tag(h);
          write_file_atomically(dir / (stem + ".csv"), convergence_csv(t));
          std::vector<double> us, ratios;
          for (const ConvergenceRow& row : t.rows) {
            us.push_back(row.u);
            ratios.push_back(row.ratio);
          }
          write_file_atomically(dir / (stem + ".dat"), plot_data("u", "ratio", us, ratios));
          conv_docs.push_back(to_json(t));
          record(stem, !t.trend || t.trend->monotone_toward_one);
        }
      }
      if (!save_if_grown(provider, before, file, err)) return kExitCacheWrite;
    }

    json report = {{"suite", suite},
                   {"lemma_checks", lemma_docs},
                   {"convergence", conv_docs},
                   {"pass", !first_failure.has_value()},
                   {"first_failure", first_failure ? json(*first_failure) : json(nullptr)}};
    write_file_atomically(dir / "report.json", envelope("validation", report).dump(2) + "\n");
    if (first_failure) {
      err << "validation failed: " << *first_failure << '\n';
      return kExitValidation;
    }
    return kExitOk;
  }
};

// ---------------------------------------------------------------------------

struct SampleCommand {
  ModelFlags model;
  std::size_t steps = 1024;
  std::uint64_t seed = 1;
  std::string sampler = "automatic";
  bool raw = false;
  std::string out_file;
  CLI::App* app = nullptr;
  std::unique_ptr<ConfigBinder> cfg;

  void add(CLI::App& parent) {
    app = parent.add_subcommand("sample", "one sampled path as CSV (t,value)");
    cfg = std::make_unique<ConfigBinder>(app);
    model.add(app, *cfg);
    cfg->bind(app->add_option("--steps", steps, "grid steps"), "steps", steps);
    cfg->bind(app->add_option("--seed", seed, "seed"), "seed", seed);
    cfg->bind(app->add_option("--sampler", sampler, "automatic, cholesky, circulant or brownian"),
              "sampler", sampler);
    app->add_flag("--raw", raw, "omit the trend -t^{2H}/2 + mu t");
    cfg->bind(app->add_option("--out", out_file, "output file (default stdout)"), "out",
              out_file);
  }

  int run(std::ostream& out, std::ostream& err) {
    cfg->apply();
    const ModelParams params = checked_params(model);
    const SamplerKind kind = parse_enum<SamplerKind>(parse_sampler_kind, sampler);
    if (steps == 0) throw UsageError("--steps must be positive");
    FbmPath path;
    try {
      path = make_sampler(GridSpec{steps, params.horizon}, params.hurst, kind)->sample(seed);
    } catch (const std::exception& e) {
      err << "error: sampler failure: " << e.what() << '\n';
      return kExitSampler;
    }
    if (!raw) path = apply_trend(path, params);
    std::ostringstream os;
    write_path_csv(os, path);
    if (out_file.empty()) {
      out << os.str();
    } else {
      write_file_atomically(out_file, os.str());
    }
    return kExitOk;
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("fBm drawdown/drawup tail asymptotics and Monte Carlo validation", "fbmlab");
  app.require_subcommand(1);
  AsymptoticCommand asymptotic;
  SimulateCommand simulate;
  ConstantsCommand constants;
  ValidateCommand validate;
  SampleCommand sample;
  asymptotic.add(app);
  simulate.add(app);
  constants.add(app);
  validate.add(app);
  sample.add(app);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    CLI::App* target = &app;
    for (CLI::App* sub : app.get_subcommands()) target = sub;
    out << target->help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    CLI::App* target = &app;
    for (CLI::App* sub : app.get_subcommands()) target = sub;
    err << target->help();
    return kExitUsage;
  }

  try {
    if (asymptotic.app->parsed()) return asymptotic.run(out, err);
    if (simulate.app->parsed()) return simulate.run(out, err);
    if (constants.app->parsed()) return constants.run(out, err);
    if (validate.app->parsed()) return validate.run(out, err);
    if (sample.app->parsed()) return sample.run(out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitUsage;
}

}  // namespace fbmlab
