#pragma once

// The outer active-learning loop: fit surrogate, pick x_start, mask, complete
// by constrained SMC, spend up to K oracle queries, repeat for N rounds.

#include "prospero/dataset.hpp"
#include "prospero/landscape.hpp"
#include "prospero/masking.hpp"
#include "prospero/metrics.hpp"
#include "prospero/prior.hpp"
#include "prospero/smc.hpp"
#include "prospero/surrogate.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace prospero {

struct AblationFlags {
  bool use_smc_resampling = true;
  bool use_targeted_masking = true;
  bool use_raa_constraint = true;

  friend bool operator==(const AblationFlags&, const AblationFlags&) = default;
};

struct AblationVariant {
  std::string label;
  AblationFlags flags;
};

/// full, no_smc, random_mask, no_smc_random_mask, no_smc_random_mask_no_raa.
const std::vector<AblationVariant>& ablation_variants();

struct CampaignConfig {
  std::size_t rounds = 10;          ///< N
  std::size_t oracle_budget = 128;  ///< K per round
  MaskingConfig masking;            ///< masking.batch is also the SMC particle count
  SmcConfig smc;                    ///< particles/oracle_budget/seed are filled per round
  TrainingConfig surrogate;         ///< seed is filled per round
  AblationFlags ablation;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;

  void validate(std::size_t length) const;
};

/// Builds the round's surrogate from the current dataset.
using SurrogateFactory =
    std::function<std::shared_ptr<const Surrogate>(const Dataset& data, std::size_t round, std::uint64_t seed)>;

/// MLP ensemble trained with `cfg` (seed replaced per round).
SurrogateFactory mlp_surrogate_factory(TrainingConfig cfg);

struct CandidateRecord {
  Sequence sequence;
  double score = 0.0;  ///< surrogate UCB at selection time
  double fitness = 0.0;
  std::size_t step = 0;
  bool class_preserving = true;
};

struct RoundTrace {
  std::size_t round = 0;
  Sequence x_start;
  double x_start_fitness = 0.0;
  std::vector<std::vector<std::size_t>> mask_sets;  ///< 0-based internally
  std::vector<CandidateRecord> candidates;
  std::vector<StepTrace> smc_steps;
  std::size_t buffer_size = 0;
  std::size_t oracle_calls = 0;
  std::size_t constraint_violations = 0;
  std::size_t zero_mass_fallbacks = 0;
  std::size_t uniform_weight_fallbacks = 0;
  double best_so_far = 0.0;

  nlohmann::json to_json() const;
};

struct CampaignResult {
  Sequence initial_x_start;
  double initial_fitness = 0.0;
  std::vector<RoundTrace> rounds;
  Dataset dataset;  ///< D0 plus every evaluated candidate
  std::size_t d0_size = 0;
  std::size_t oracle_calls = 0;
  std::size_t constraint_violations = 0;
  MetricsReport metrics;
  bool metrics_from_d0 = false;  ///< no generated records; D0 used as the pool

  /// Records added after D0.
  Dataset generated() const;
  nlohmann::json report_json() const;
  std::string trace_jsonl() const;
};

/// Throws InvalidConfig, LengthMismatch, BudgetExceeded and propagated module errors.
CampaignResult run_campaign(const CampaignConfig& cfg, const FitnessOracle& oracle, const SequencePrior& prior,
                            const Dataset& d0, const SurrogateFactory& surrogate_factory);

/// True when every position of `x` has the charge class of `reference` there.
bool preserves_charge_classes(const Sequence& x, const Sequence& reference);

/// Rebuilds per-round x_start, budget, audit and metric fields from a saved
/// dataset (round column intact, insertion order preserved). Candidate
/// scores and SMC traces are not recoverable and are left empty.
CampaignResult reconstruct_campaign(const Dataset& all, std::size_t rounds);

/// Writes trace.jsonl, dataset.csv and report.json into `dir` (created if needed).
void write_campaign_outputs(const CampaignResult& result, const std::string& dir);

}  // namespace prospero
