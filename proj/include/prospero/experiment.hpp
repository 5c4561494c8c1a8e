#pragma once

// Builds everything a campaign needs from a resolved configuration tree.

#include "prospero/campaign.hpp"
#include "prospero/landscape.hpp"
#include "prospero/prior.hpp"

#include <nlohmann/json.hpp>

#include <memory>
#include <string>

namespace prospero {

/// Rebuilds a landscape from its `landscape` config section or from a
/// describe() payload. Throws InvalidConfig, InvalidK, ParseError, IoError.
std::shared_ptr<FitnessOracle> make_landscape(const nlohmann::json& spec);

struct PriorOptions {
  std::string kind;      ///< overrides prior.kind when non-empty
  std::string command;   ///< overrides prior.command when non-empty
};

struct Experiment {
  nlohmann::json config;                        ///< resolved tree, echoed to config.echo.json
  std::shared_ptr<FitnessOracle> oracle;        ///< budgeted ground truth
  std::shared_ptr<const FitnessOracle> truth;   ///< uncounted copy for noisy-oracle surrogates
  Sequence wild_type;
  Dataset d0;
  std::unique_ptr<SequencePrior> prior;
  CampaignConfig campaign;
  SurrogateFactory surrogate;
};

/// Landscape, D0 and campaign settings; D0 mutants are drawn from
/// (initial-dataset seed, config seed). Throws InvalidConfig and friends.
/// The external prior is not started here; see attach_prior.
Experiment build_experiment(const nlohmann::json& config);

/// Creates the prior (spawning or connecting for the external kind).
/// Throws InvalidConfig for an unknown kind and ExternalPriorUnavailable.
void attach_prior(Experiment& e, const PriorOptions& options = {});

/// Runs the campaign and writes trace.jsonl, dataset.csv, report.json and
/// config.echo.json into `dir`.
CampaignResult run_experiment(Experiment& e, const std::string& dir);

}  // namespace prospero
