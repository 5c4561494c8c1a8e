#include "prospero/metrics.hpp"

#include "prospero/error.hpp"

#include <algorithm>
#include <numeric>

namespace prospero {

std::vector<std::size_t> top_indices(const Dataset& data, std::size_t count) {
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  const auto& recs = data.records();
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return recs[a].fitness > recs[b].fitness; });
  idx.resize(std::min(count, idx.size()));
  return idx;
}

MetricsReport set_metrics(std::span<const Sequence> sequences, std::span<const double> fitness,
                          const Sequence& x_start) {
  if (sequences.empty()) throw Error(ErrorKind::EmptyDataset, "metrics need at least one record");
  MetricsReport r;
  r.top_count = sequences.size();
  r.max_fitness = *std::max_element(fitness.begin(), fitness.end());
  r.mean_top = std::accumulate(fitness.begin(), fitness.end(), 0.0) / static_cast<double>(fitness.size());
  std::vector<double> sorted(fitness.begin(), fitness.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  r.median_top = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

  for (const auto& s : sequences) r.novelty_total += hamming(s, x_start);
  r.novelty = static_cast<double>(r.novelty_total) / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) r.diversity_total += hamming(sequences[i], sequences[j]);
  }
  r.pair_count = n * (n - 1) / 2;
  if (r.pair_count == 0) {
    r.degenerate_diversity = true;
  } else {
    r.diversity = static_cast<double>(r.diversity_total) / static_cast<double>(r.pair_count);
  }
  return r;
}

MetricsReport metrics_report(const Dataset& evaluated, const Sequence& x_start) {
  if (evaluated.empty()) throw Error(ErrorKind::EmptyDataset, "metrics need at least one record");
  const auto top = top_indices(evaluated, kTopCount);
  std::vector<Sequence> seqs;
  std::vector<double> fit;
  for (const auto i : top) {
    seqs.push_back(evaluated.records()[i].sequence);
    fit.push_back(evaluated.records()[i].fitness);
  }
  MetricsReport r = set_metrics(seqs, fit, x_start);
  r.truncated_top = evaluated.size() < kTopCount;
  return r;
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json j = {{"max_fitness", max_fitness},
                      {"mean_top100", mean_top},
                      {"median_top100", median_top},
                      {"novelty", novelty},
                      {"diversity", diversity},
                      {"top_count", top_count},
                      {"flags",
                       {{"truncated_top100", truncated_top}, {"degenerate_diversity", degenerate_diversity}}}};
  if (validity) {
    j["validity_percent"] = validity->percent;
    j["flags"]["empty_validity_set"] = validity->empty_candidates;
    j["flags"]["small_reference"] = validity->small_reference;
  }
  return j;
}

}  // namespace prospero
