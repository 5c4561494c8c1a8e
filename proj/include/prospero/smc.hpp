#pragma once

// Charge-constrained Sequential Monte Carlo over masked positions.
//
// Every particle unmasks one position per step in its permutation order,
// drawing from the prior restricted to the wild-type charge class. The
// particle is then rolled out to a full sequence, scored with the surrogate
// UCB, and weighted by score / perplexity of the unconstrained prior over
// its masked positions. The population is resampled multinomially each step.

#include "prospero/prior.hpp"
#include "prospero/sequence.hpp"
#include "prospero/surrogate.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace prospero {

struct SmcConfig {
  std::size_t particles = 256;      ///< B
  std::size_t oracle_budget = 128;  ///< K
  std::size_t n_keep = 10;
  double ucb_k = 0.1;
  bool use_resampling = true;
  bool use_raa_constraint = true;
  std::size_t jobs = 1;
  std::uint64_t seed = 0;

  /// Throws InvalidConfig.
  void validate() const;
};

/// Floor applied to surrogate scores before weighting.
inline constexpr double kScoreFloor = 1e-12;

struct Particle {
  MaskedSequence state;
  std::shared_ptr<const Permutation> order;
  double log_lik = 0.0;          ///< Unconstrained log P of the residues proposed so far.
  std::size_t mask_budget = 0;   ///< |I| of the sequence this particle descends from.
  std::size_t filled = 0;        ///< Positions already proposed.
  double score = 0.0;            ///< UCB of the most recent rollout.
  double rollout_log_lik = 0.0;  ///< log_lik of the most recent rollout.

  bool complete() const { return filled >= mask_budget; }
  std::size_t next_position() const { return order->order[order->boundary + filled]; }
};

Particle make_particle(const MaskedSequence& masked, const Sequence& wild_type);

struct RolloutResult {
  Sequence sequence;
  double log_lik = 0.0;
};

/// Proposes the particle's next position in place. Returns the draw.
ResidueDraw propose(Particle& particle, const Sequence& wild_type, const SequencePrior& prior,
                    Rng& rng, bool constrained = true, SamplingStats* stats = nullptr);

/// Completes a copy of `particle` by proposing its remaining positions in
/// order; the log-likelihood accumulates the unconstrained prior.
RolloutResult rollout(const Particle& particle, const Sequence& wild_type, const SequencePrior& prior,
                      Rng& rng, bool constrained = true, SamplingStats* stats = nullptr);

/// Rolls out every particle with its own stream derived from (seed, step, i).
std::vector<RolloutResult> rollout(std::span<const Particle> particles, std::size_t step,
                                   const Sequence& wild_type, const SequencePrior& prior,
                                   std::uint64_t seed, bool constrained = true,
                                   SamplingStats* stats = nullptr);

/// Normalized weights proportional to max(score, floor) * exp(loglik / budget)
/// (a zero budget contributes a factor of 1). When every weight underflows the
/// result is uniform and `fell_back` is set.
std::vector<double> smc_weights(std::span<const double> scores, std::span<const double> log_liks,
                                std::span<const std::size_t> mask_budgets, bool* fell_back = nullptr);

/// `count` categorical draws from normalized `weights`.
std::vector<std::size_t> resample_indices(std::span<const double> weights, std::size_t count, Rng& rng);

/// Multinomial resampling; clones carry every tracked field of their ancestor.
std::vector<Particle> resample(std::span<const Particle> particles, std::span<const double> weights, Rng& rng);

struct RolloutRecord {
  Sequence sequence;
  double score = 0.0;
  std::size_t step = 0;
};

struct StepTrace {
  std::size_t step = 0;
  double ess = 0.0;
  double top_score = 0.0;
  double weight_entropy = 0.0;
};

struct SmcResult {
  std::vector<RolloutRecord> candidates;  ///< At most K, unique, score descending.
  std::vector<Particle> final_population;
  std::vector<StepTrace> trace;
  std::size_t buffer_size = 0;
  std::size_t zero_mass_fallbacks = 0;
  std::size_t uniform_weight_fallbacks = 0;
};

/// Runs T = max |I| unmasking steps over the batch and returns the K best
/// unique rollouts from the last n_keep steps. Sequences for which `exclude`
/// returns true are skipped during the final selection.
/// Throws InvalidConfig when the batch size differs from cfg.particles.
SmcResult constrained_smc(std::span<const MaskedSequence> batch, const Sequence& wild_type,
                          const SequencePrior& prior, const Surrogate& surrogate, const SmcConfig& cfg,
                          const std::function<bool(const Sequence&)>& exclude = {});

}  // namespace prospero
