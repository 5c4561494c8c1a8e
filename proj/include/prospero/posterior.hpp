#pragma once

// Exact target distribution over completions of a small masked sequence:
// gamma(x) = f(x) * P_RAA(x) / Z, enumerated over every charge-admissible
// completion. Used as the reference the sampler is checked against.

#include "prospero/prior.hpp"
#include "prospero/sequence.hpp"

#include <functional>
#include <vector>

namespace prospero {

struct PosteriorEntry {
  Sequence sequence;
  double prior_prob = 0.0;    ///< P_RAA(x), product of class-renormalized conditionals.
  double unnormalized = 0.0;  ///< f(x) * P_RAA(x)
  double probability = 0.0;   ///< unnormalized / Z
};

struct Posterior {
  std::vector<PosteriorEntry> entries;  ///< Enumeration order (lexicographic in the unmasking order).
  double normalizer = 0.0;              ///< Z
};

/// Conditionals are evaluated along the unmasking permutation built from
/// `wild_type`. Branches with zero constrained probability are pruned.
/// Throws EnumerationTooLarge when the product of class sizes exceeds
/// `max_completions`.
Posterior brute_force_posterior(const std::function<double(const Sequence&)>& score,
                                const SequencePrior& prior, const MaskedSequence& masked,
                                const Sequence& wild_type, std::size_t max_completions = 1'000'000);

}  // namespace prospero
