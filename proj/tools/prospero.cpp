// prospero: command-line front end.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include "prospero/config.hpp"
#include "prospero/csv.hpp"
#include "prospero/error.hpp"
#include "prospero/experiment.hpp"
#include "prospero/log.hpp"
#include "prospero/parallel.hpp"
#include "prospero/protocol.hpp"
#include "prospero/random.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace prospero;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = "prospero-out";
  std::vector<std::string> overrides;
  std::string prior;
  std::string prior_cmd;
  std::optional<std::size_t> jobs;
  bool quiet = false;
  bool verbose = false;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--config", o.config_path, "YAML configuration file")->required();
  app->add_option("--seed", o.seed, "Master seed (overrides the config)");
  app->add_option("--out", o.out, "Output directory")->capture_default_str();
  app->add_option("--set", o.overrides, "Override a config value, key=value (repeatable)");
  app->add_option("--prior", o.prior, "Sequence prior")->check(CLI::IsMember({"uniform", "profile", "external"}));
  app->add_option("--prior-cmd", o.prior_cmd, "External prior command (else PROSPERO_PRIOR_CMD)");
  app->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app->add_flag("-q,--quiet", o.quiet, "Only print errors");
  app->add_flag("-v,--verbose", o.verbose, "Print per-round progress");
}

/// Loads the file and applies --set, --seed and --jobs. Throws ConfigError.
nlohmann::json resolve(const CommonOptions& o) {
  try {
    auto cfg = load_config_file(o.config_path);
    for (const auto& s : o.overrides) apply_override(cfg, s);
    if (o.seed) cfg["seed"] = *o.seed;
    if (o.jobs) cfg["jobs"] = *o.jobs;
    return cfg;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

PriorOptions prior_options(const CommonOptions& o) {
  PriorOptions p;
  p.kind = o.prior;
  p.command = o.prior_cmd;
  if (p.command.empty()) {
    if (const char* env = std::getenv("PROSPERO_PRIOR_CMD")) p.command = env;
  }
  return p;
}

/// Builds the experiment and its prior; every failure here is a config error
/// except an unreachable external prior.
Experiment prepare(const nlohmann::json& cfg, const CommonOptions& o) {
  Experiment e;
  try {
    e = build_experiment(cfg);
  } catch (const Error& err) {
    throw ConfigError(err.what());
  }
  try {
    attach_prior(e, prior_options(o));
  } catch (const Error& err) {
    if (err.kind() == ErrorKind::InvalidConfig) throw ConfigError(err.what());
    throw;
  }
  return e;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      out.push_back(parse_double_field(item, 0));
    } catch (const Error&) {
      throw ConfigError("--snr: '" + item + "' is not a number");
    }
  }
  return out;
}

std::string number_label(double v) { return format_double(v); }

void set_logging(const CommonOptions& o) {
  set_log_level(o.quiet ? LogLevel::Quiet : (o.verbose ? LogLevel::Info : LogLevel::Warn));
}

int cmd_run(const CommonOptions& o) {
  const auto cfg = resolve(o);
  Experiment e = prepare(cfg, o);
  const auto result = run_experiment(e, o.out);
  if (!o.quiet) {
    std::cout << "max fitness " << format_double(result.metrics.max_fitness) << ", " << result.oracle_calls
              << " oracle calls, outputs in " << o.out << "\n";
  }
  return kExitOk;
}

struct SweepJob {
  std::string label;
  nlohmann::json config;
  std::string dir;
  double max_fitness = 0.0;
};

void run_jobs(std::vector<SweepJob>& jobs, const CommonOptions& o, std::size_t threads) {
  // Validate every configuration before any campaign writes output.
  std::vector<Experiment> experiments;
  experiments.reserve(jobs.size());
  for (auto& j : jobs) {
    j.config["jobs"] = 1;
    experiments.push_back(prepare(j.config, o));
  }
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    const auto r = run_experiment(experiments[i], jobs[i].dir);
    jobs[i].max_fitness = r.metrics.max_fitness;
    log_info(jobs[i].label + ": max fitness " + format_double(jobs[i].max_fitness));
  });
}

std::vector<std::uint64_t> sweep_seeds(const nlohmann::json& cfg, const CommonOptions& o) {
  if (o.seed) return {*o.seed};
  std::vector<std::uint64_t> seeds;
  for (const auto& s : cfg.at("sweep").at("seeds")) {
    if (!s.is_number_integer() || s.get<long long>() < 0) throw ConfigError("sweep.seeds must be non-negative integers");
    seeds.push_back(s.get<std::uint64_t>());
  }
  if (seeds.empty()) throw ConfigError("sweep.seeds is empty");
  return seeds;
}

std::size_t sweep_threads(const nlohmann::json& cfg) { return cfg.at("jobs").get<std::size_t>(); }

int cmd_noise_sweep(const CommonOptions& o, const std::optional<std::string>& snr_text) {
  auto base = resolve(o);
  std::vector<double> snrs;
  if (snr_text) {
    snrs = parse_number_list(*snr_text);
  } else {
    for (const auto& v : base.at("sweep").at("snr_db")) snrs.push_back(v.get<double>());
  }
  if (snrs.empty()) throw ConfigError("SNR list is empty");
  const auto seeds = sweep_seeds(base, o);
  std::vector<SweepJob> jobs;
  for (const double snr : snrs) {
    for (const auto seed : seeds) {
      SweepJob j;
      j.label = "snr " + number_label(snr) + " seed " + std::to_string(seed);
      j.config = base;
      j.config["surrogate"]["kind"] = "noisy_oracle";
      j.config["surrogate"]["snr_db"] = snr;
      j.config["seed"] = seed;
      j.dir = (fs::path(o.out) / ("snr_" + number_label(snr)) / ("seed_" + std::to_string(seed))).string();
      jobs.push_back(std::move(j));
    }
  }
  run_jobs(jobs, o, sweep_threads(base));
  std::string csv = "snr,seed,max_fitness\n";
  std::size_t k = 0;
  for (const double snr : snrs) {
    for (const auto seed : seeds) csv += number_label(snr) + "," + std::to_string(seed) + "," + format_double(jobs[k++].max_fitness) + "\n";
  }
  write_text_file((fs::path(o.out) / "noise_sweep.csv").string(), csv);
  if (!o.quiet) std::cout << "wrote " << (fs::path(o.out) / "noise_sweep.csv").string() << "\n";
  return kExitOk;
}

int cmd_ablate(const CommonOptions& o) {
  auto base = resolve(o);
  const auto seeds = sweep_seeds(base, o);
  std::vector<SweepJob> jobs;
  for (const auto& v : ablation_variants()) {
    for (const auto seed : seeds) {
      SweepJob j;
      j.label = v.label + " seed " + std::to_string(seed);
      j.config = base;
      j.config["ablation"] = {{"use_smc_resampling", v.flags.use_smc_resampling},
                              {"use_targeted_masking", v.flags.use_targeted_masking},
                              {"use_raa_constraint", v.flags.use_raa_constraint}};
      j.config["seed"] = seed;
      j.dir = (fs::path(o.out) / v.label / ("seed_" + std::to_string(seed))).string();
      jobs.push_back(std::move(j));
    }
  }
  run_jobs(jobs, o, sweep_threads(base));
  std::string csv = "variant,seed,use_smc_resampling,use_targeted_masking,use_raa_constraint,max_fitness\n";
  std::size_t k = 0;
  const auto b = [](bool x) { return std::string(x ? "true" : "false"); };
  for (const auto& v : ablation_variants()) {
    for (const auto seed : seeds) {
      csv += v.label + "," + std::to_string(seed) + "," + b(v.flags.use_smc_resampling) + "," +
             b(v.flags.use_targeted_masking) + "," + b(v.flags.use_raa_constraint) + "," +
             format_double(jobs[k++].max_fitness) + "\n";
    }
  }
  write_text_file((fs::path(o.out) / "ablation.csv").string(), csv);
  if (!o.quiet) std::cout << "wrote " << (fs::path(o.out) / "ablation.csv").string() << "\n";
  return kExitOk;
}

int cmd_report(const std::string& dir, bool quiet) {
  const fs::path base(dir);
  nlohmann::json echo;
  try {
    echo = nlohmann::json::parse(read_text_file((base / "config.echo.json").string()));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config.echo.json: " + std::string(e.what()));
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const auto data = Dataset::from_csv_file((base / "dataset.csv").string());
  const auto result = reconstruct_campaign(data, echo.at("rounds_N").get<std::size_t>());
  write_text_file((base / "report.json").string(), result.report_json().dump(2) + "\n");
  if (!quiet) std::cout << "wrote " << (base / "report.json").string() << "\n";
  return kExitOk;
}

int cmd_protocol_check(const std::string& command, const std::string& tcp, std::size_t queries,
                       std::size_t length, std::uint64_t seed) {
  std::unique_ptr<ExternalPrior> prior;
  if (!tcp.empty()) {
    prior = ExternalPrior::connect(tcp);
  } else {
    std::string cmd = command;
    if (cmd.empty()) {
      if (const char* env = std::getenv("PROSPERO_PRIOR_CMD")) cmd = env;
    }
    if (cmd.empty()) throw ConfigError("protocol-check needs --prior-cmd, --tcp or PROSPERO_PRIOR_CMD");
    prior = ExternalPrior::spawn(cmd);
  }
  Rng rng = make_stream(seed, {0x70636b00ull});
  std::size_t failures = 0;
  for (std::size_t q = 0; q < queries; ++q) {
    std::vector<AminoAcid> res(length);
    for (auto& r : res) r = AminoAcid::from_index(uniform_int(rng, 0, kAlphabetSize - 1));
    std::vector<std::size_t> masked;
    for (std::size_t i = 0; i < length; ++i) {
      if (uniform01(rng) < 0.3) masked.push_back(i);
    }
    if (masked.empty()) masked.push_back(uniform_int(rng, 0, length - 1));
    const MaskedSequence ctx(Sequence(std::move(res)), masked);
    try {
      (void)prior->conditional_logprobs(ctx, masked[uniform_int(rng, 0, masked.size() - 1)]);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ProtocolError) throw;
      ++failures;
    }
  }
  const auto st = prior->stats();
  const nlohmann::json summary = {{"model", prior->model()},
                                  {"queries", st.queries},
                                  {"malformed", st.malformed},
                                  {"error_responses", st.error_responses}};
  std::cout << summary.dump() << "\n";
  return failures == 0 ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Surrogate-guided sequence design with constrained SMC"};
  app.require_subcommand(1);

  CommonOptions run_opts, sweep_opts, ablate_opts;
  auto* run = app.add_subcommand("run", "Run one campaign");
  add_common(run, run_opts);

  auto* sweep = app.add_subcommand("noise-sweep", "Campaigns with a noisy-oracle surrogate over SNR values and seeds");
  add_common(sweep, sweep_opts);
  std::optional<std::string> snr_text;
  sweep->add_option("--snr", snr_text, "Comma-separated SNR values in dB (default: sweep.snr_db)");

  auto* ablate = app.add_subcommand("ablate", "Full method and the four ablation variants over shared seeds");
  add_common(ablate, ablate_opts);

  auto* report = app.add_subcommand("report", "Regenerate report.json from a run directory");
  std::string report_dir;
  bool report_quiet = false;
  report->add_option("--out", report_dir, "Run output directory")->required();
  report->add_flag("-q,--quiet", report_quiet, "Only print errors");

  auto* check = app.add_subcommand("protocol-check", "Validate an external prior server with random queries");
  std::string check_cmd, check_tcp;
  std::size_t check_queries = 10000, check_length = 20;
  std::uint64_t check_seed = 0;
  check->add_option("--prior-cmd", check_cmd, "Server command (else PROSPERO_PRIOR_CMD)");
  check->add_option("--tcp", check_tcp, "host:port of a running server");
  check->add_option("--queries", check_queries, "Number of queries")->capture_default_str();
  check->add_option("--length", check_length, "Sequence length")->check(CLI::PositiveNumber)->capture_default_str();
  check->add_option("--seed", check_seed, "Query seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) {
      set_logging(run_opts);
      return cmd_run(run_opts);
    }
    if (*sweep) {
      set_logging(sweep_opts);
      return cmd_noise_sweep(sweep_opts, snr_text);
    }
    if (*ablate) {
      set_logging(ablate_opts);
      return cmd_ablate(ablate_opts);
    }
    if (*report) return cmd_report(report_dir, report_quiet);
    if (*check) return cmd_protocol_check(check_cmd, check_tcp, check_queries, check_length, check_seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
