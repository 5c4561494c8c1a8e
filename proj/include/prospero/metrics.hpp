#pragma once

// Campaign summary metrics over the top-100 evaluated sequences.

#include "prospero/dataset.hpp"
#include "prospero/properties.hpp"
#include "prospero/sequence.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <span>
#include <vector>

namespace prospero {

inline constexpr std::size_t kTopCount = 100;

/// Indices of the `count` highest-fitness records, best first; equal fitness
/// keeps dataset order.
std::vector<std::size_t> top_indices(const Dataset& data, std::size_t count = kTopCount);

struct MetricsReport {
  double max_fitness = 0.0;
  double mean_top = 0.0;
  double median_top = 0.0;
  double novelty = 0.0;    ///< mean Hamming distance to x_start
  double diversity = 0.0;  ///< mean pairwise Hamming distance
  std::size_t top_count = 0;
  std::size_t novelty_total = 0;    ///< sum of distances to x_start
  std::size_t diversity_total = 0;  ///< sum over unordered pairs
  std::size_t pair_count = 0;
  bool truncated_top = false;         ///< fewer than 100 records available
  bool degenerate_diversity = false;  ///< fewer than 2 records
  std::optional<ValidityResult> validity;

  nlohmann::json to_json() const;
};

/// Throws EmptyDataset and LengthMismatch.
MetricsReport metrics_report(const Dataset& evaluated, const Sequence& x_start);

/// Novelty/diversity of an explicit set (no top-100 selection).
MetricsReport set_metrics(std::span<const Sequence> sequences, std::span<const double> fitness,
                          const Sequence& x_start);

}  // namespace prospero
