#pragma once

// Choosing which residues of the starting sequence to mask: batched in-silico
// alanine scans ranked by UCB, and the random-position ablation.

#include "prospero/random.hpp"
#include "prospero/sequence.hpp"
#include "prospero/surrogate.hpp"

#include <cstdint>
#include <vector>

namespace prospero {

struct MaskingConfig {
  std::size_t batch = 256;  ///< B, the number of masked sequences returned.
  std::size_t scans = 16;   ///< S; B*S variants are scored.
  std::size_t n_min = 3;
  std::size_t n_max = 10;
  double ucb_k = 1.0;
  std::uint64_t seed = 0;

  /// 3..10 substitutions for L <= 120, 5..15 otherwise, capped at L.
  static std::pair<std::size_t, std::size_t> default_range(std::size_t length);

  /// Throws InvalidConfig (or PositionOutOfRange when n_max > length).
  void validate(std::size_t length) const;
};

/// Copy of `x_start` with alanine at every position in `positions`.
/// Throws PositionOutOfRange.
Sequence alanine_variant(const Sequence& x_start, std::span<const std::size_t> positions);

/// Generates batch*scans alanine variants (n ~ U{n_min..n_max} distinct
/// positions each), scores them with ucb(mu, sigma, ucb_k) and returns the top
/// `batch` as masked sequences. Equal scores keep generation order.
/// Throws LengthMismatch when the surrogate was trained on another length.
std::vector<MaskedSequence> targeted_masking(const Sequence& x_start, const Surrogate& surrogate,
                                             const MaskingConfig& cfg);

/// Same shape as targeted_masking with no scoring: the first `batch` draws.
std::vector<MaskedSequence> random_masking(const Sequence& x_start, const MaskingConfig& cfg);

/// The i-th random position set of the pool, sorted. Shared by both maskers.
std::vector<std::size_t> draw_mask_positions(std::size_t length, const MaskingConfig& cfg, std::size_t i);

}  // namespace prospero
