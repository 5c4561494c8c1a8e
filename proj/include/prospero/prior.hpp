#pragma once

// Generative prior over sequences: per-position conditionals given a partially
// masked context, the charge-restricted variant used for proposals, and the
// perplexity of the unconstrained model.

#include "prospero/random.hpp"
#include "prospero/sequence.hpp"

#include <Eigen/Core>

#include <array>
#include <atomic>
#include <memory>
#include <span>
#include <string>

namespace prospero {

using LogProbs = std::array<double, kAlphabetSize>;

/// log(sum(exp(values))); -inf for an all -inf input.
double logsumexp(std::span<const double> values);

class SequencePrior {
 public:
  virtual ~SequencePrior() = default;

  virtual std::string name() const = 0;

  /// Normalized log-probabilities over the 20 residues at masked position
  /// `pos`. Throws PositionNotMasked; External priors may throw
  /// ExternalPriorUnavailable or ProtocolError. Safe to call concurrently.
  LogProbs conditional_logprobs(const MaskedSequence& context, std::size_t pos) const;

 protected:
  virtual LogProbs compute_logprobs(const MaskedSequence& context, std::size_t pos) const = 0;
};

class UniformPrior final : public SequencePrior {
 public:
  std::string name() const override { return "uniform"; }

 protected:
  LogProbs compute_logprobs(const MaskedSequence&, std::size_t) const override;
};

/// Position-specific, context-free residue distribution.
class ProfilePrior final : public SequencePrior {
 public:
  using Table = Eigen::Matrix<double, Eigen::Dynamic, static_cast<int>(kAlphabetSize), Eigen::RowMajor>;

  /// Rows are probabilities; each must be non-negative and sum to 1 within 1e-6.
  /// Throws InvalidConfig.
  static ProfilePrior from_probabilities(const Table& probabilities);

  std::string name() const override { return "profile"; }
  std::size_t length() const { return static_cast<std::size_t>(log_probs_.rows()); }
  const Table& log_probabilities() const { return log_probs_; }

 protected:
  LogProbs compute_logprobs(const MaskedSequence& context, std::size_t pos) const override;

 private:
  Table log_probs_;
};

/// Laplace-smoothed per-position frequencies. Throws EmptyCorpus, MixedLengths.
ProfilePrior fit_profile_prior(std::span<const Sequence> corpus, double pseudocount = 1.0);

/// Counts proposals that hit a class with zero prior mass.
struct SamplingStats {
  std::atomic<std::size_t> zero_mass_fallbacks{0};
};

struct ResidueDraw {
  AminoAcid residue;
  double log_prob = 0.0;  ///< Under the unconstrained conditional.
};

/// `logprobs` renormalized over `cls` as probabilities (zero outside the
/// class); uniform over the class when it carries no mass.
std::array<double, kAlphabetSize> class_probabilities(const LogProbs& logprobs, ChargeClass cls);

/// Draws from `logprobs` renormalized over `cls`. If the class carries no
/// mass the draw is uniform over the class and `stats` (if given) records it.
ResidueDraw sample_in_class(const LogProbs& logprobs, ChargeClass cls, Rng& rng,
                            SamplingStats* stats = nullptr);

/// Draws from the full conditional.
ResidueDraw sample_unconstrained(const LogProbs& logprobs, Rng& rng);

/// Queries the prior at `pos` and draws within `cls`. Throws PositionNotMasked.
ResidueDraw constrained_sample(const SequencePrior& prior, const MaskedSequence& context,
                               std::size_t pos, ChargeClass cls, Rng& rng,
                               SamplingStats* stats = nullptr);

/// exp(-total_loglik / masked_count). Throws ZeroMaskCount.
double sequence_perplexity(double total_loglik, std::size_t masked_count);

/// exp(total_loglik / masked_count), the reciprocal of the perplexity.
/// Throws ZeroMaskCount.
double inverse_perplexity(double total_loglik, std::size_t masked_count);

}  // namespace prospero
