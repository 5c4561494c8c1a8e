#include "prospero/experiment.hpp"

#include "prospero/config.hpp"
#include "prospero/csv.hpp"
#include "prospero/error.hpp"
#include "prospero/protocol.hpp"
#include "prospero/random.hpp"

#include <filesystem>

namespace prospero {

namespace {

[[noreturn]] void config_error(const std::string& message) { throw Error(ErrorKind::InvalidConfig, message); }

std::vector<Sequence> read_corpus(const std::string& path) {
  std::vector<Sequence> out;
  const std::string text = read_text_file(path);
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty() && line[0] != '#') out.push_back(parse_sequence(line));
    start = end + 1;
  }
  return out;
}

}  // namespace

std::shared_ptr<FitnessOracle> make_landscape(const nlohmann::json& spec) {
  const auto kind = spec.at("kind").get<std::string>();
  if (kind == "nk") {
    const auto k = spec.contains("k_interactions") ? spec.at("k_interactions") : spec.at("k");
    const auto length = spec.contains("length_L") ? spec.at("length_L") : spec.at("length");
    return std::make_shared<NkLandscape>(length.get<std::size_t>(), k.get<std::size_t>(),
                                         spec.at("seed").get<std::uint64_t>());
  }
  if (kind == "additive") {
    if (spec.contains("weights")) {
      const auto rows = spec.at("weights").get<std::vector<std::vector<double>>>();
      AdditiveLandscape::Weights w(static_cast<Eigen::Index>(rows.size()), kAlphabetSize);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != kAlphabetSize) config_error("additive weights need 20 columns");
        for (std::size_t c = 0; c < kAlphabetSize; ++c) w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
      }
      return std::make_shared<AdditiveLandscape>(std::move(w));
    }
    const auto length = spec.contains("length_L") ? spec.at("length_L") : spec.at("length");
    return std::make_shared<AdditiveLandscape>(
        AdditiveLandscape::random(length.get<std::size_t>(), spec.at("seed").get<std::uint64_t>()));
  }
  if (kind == "table") {
    const auto path = spec.at("csv").get<std::string>();
    if (path.empty()) config_error("landscape.csv is required for a table landscape");
    return std::make_shared<TableLandscape>(TableLandscape::from_csv(path));
  }
  config_error("landscape.kind must be nk, additive or table, got '" + kind + "'");
}

Experiment build_experiment(const nlohmann::json& config) {
  Experiment e;
  e.config = config;
  const auto& land = config.at("landscape");
  e.oracle = make_landscape(land);
  e.truth = make_landscape(land);
  const std::size_t length = e.oracle->sequence_length();
  const std::uint64_t seed = config.at("seed").get<std::uint64_t>();

  const auto& init = config.at("initial_dataset");
  const auto d0_csv = init.at("csv").get<std::string>();
  const auto wt_text = config.at("wild_type").get<std::string>();
  if (!wt_text.empty()) {
    e.wild_type = parse_sequence(wt_text);
  } else if (land.at("kind") == "table") {
    const auto& table = static_cast<const TableLandscape&>(*e.oracle).table();
    e.wild_type = table[table.best_index()].sequence;
  } else {
    e.wild_type = random_sequence(length, land.at("seed").get<std::uint64_t>());
  }
  if (e.wild_type.size() != length) {
    config_error("wild_type length " + std::to_string(e.wild_type.size()) + " != landscape length " +
                 std::to_string(length));
  }

  if (!d0_csv.empty()) {
    e.d0 = Dataset::from_csv_file(d0_csv);
    if (e.d0.sequence_length() != length) config_error("initial dataset length does not match the landscape");
  } else {
    e.d0 = seed_dataset(*e.truth, e.wild_type, init.at("size_M").get<std::size_t>(),
                        init.at("max_mutations").get<std::size_t>(), seed);
  }

  e.campaign = campaign_config(config, length);
  const auto& s = config.at("surrogate");
  const auto kind = s.at("kind").get<std::string>();
  if (kind == "mlp") {
    e.surrogate = mlp_surrogate_factory(e.campaign.surrogate);
  } else if (kind == "noisy_oracle") {
    const double snr = s.at("snr_db").get<double>();
    const std::size_t members = s.at("members_M").get<std::size_t>();
    if (members < 2) config_error("surrogate.members_M must be >= 2");
    const double variance = e.d0.fitness_variance();
    auto truth = e.truth;
    e.surrogate = [truth, snr, variance, members](const Dataset&, std::size_t, std::uint64_t round_seed) {
      return std::make_shared<const NoisyOracleEnsemble>(truth, NoisyOracleConfig{snr, variance, round_seed}, members);
    };
  } else {
    config_error("surrogate.kind must be mlp or noisy_oracle, got '" + kind + "'");
  }
  return e;
}

void attach_prior(Experiment& e, const PriorOptions& options) {
  const auto& p = e.config.at("prior");
  const std::string kind = options.kind.empty() ? p.at("kind").get<std::string>() : options.kind;
  e.config["prior"]["kind"] = kind;
  if (kind == "uniform") {
    e.prior = std::make_unique<UniformPrior>();
  } else if (kind == "profile") {
    const auto corpus_path = p.at("corpus").get<std::string>();
    const auto corpus = corpus_path.empty() ? e.d0.sequences() : read_corpus(corpus_path);
    e.prior = std::make_unique<ProfilePrior>(fit_profile_prior(corpus, p.at("pseudocount").get<double>()));
  } else if (kind == "external") {
    const std::string command = options.command.empty() ? p.at("command").get<std::string>() : options.command;
    const std::string tcp = p.at("tcp").get<std::string>();
    if (!command.empty()) {
      e.config["prior"]["command"] = command;
      e.prior = ExternalPrior::spawn(command);
    } else if (!tcp.empty()) {
      e.prior = ExternalPrior::connect(tcp);
    } else {
      config_error("external prior needs prior.command, prior.tcp, --prior-cmd or PROSPERO_PRIOR_CMD");
    }
  } else {
    config_error("prior.kind must be uniform, profile or external, got '" + kind + "'");
  }
}

CampaignResult run_experiment(Experiment& e, const std::string& dir) {
  if (!e.prior) attach_prior(e);
  nlohmann::json echo = e.config;
  echo["resolved"] = {{"landscape", e.oracle->describe()},
                      {"length_L", e.oracle->sequence_length()},
                      {"wild_type", e.wild_type.str()},
                      {"masking_n_min", e.campaign.masking.n_min},
                      {"masking_n_max", e.campaign.masking.n_max},
                      {"d0_size", e.d0.size()}};
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create '" + dir + "': " + ec.message());
  write_text_file((std::filesystem::path(dir) / "config.echo.json").string(), echo.dump(2) + "\n");
  CampaignResult result = run_campaign(e.campaign, *e.oracle, *e.prior, e.d0, e.surrogate);
  write_campaign_outputs(result, dir);
  return result;
}

}  // namespace prospero
