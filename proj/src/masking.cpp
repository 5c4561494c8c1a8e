#include "prospero/masking.hpp"

#include "prospero/error.hpp"

#include <algorithm>
#include <numeric>

namespace prospero {

std::pair<std::size_t, std::size_t> MaskingConfig::default_range(std::size_t length) {
  std::pair<std::size_t, std::size_t> r = length <= 120 ? std::pair{3, 10} : std::pair{5, 15};
  r.second = std::min(r.second, length);
  r.first = std::min(r.first, r.second);
  return r;
}

void MaskingConfig::validate(std::size_t length) const {
  if (batch == 0) throw Error(ErrorKind::InvalidConfig, "masking batch must be >= 1");
  if (scans == 0) throw Error(ErrorKind::InvalidConfig, "masking scans must be >= 1");
  if (n_min < 1 || n_min > n_max) {
    throw Error(ErrorKind::InvalidConfig, "need 1 <= n_min <= n_max");
  }
  if (n_max > length) {
    throw Error(ErrorKind::PositionOutOfRange,
                "n_max " + std::to_string(n_max) + " exceeds length " + std::to_string(length));
  }
}

Sequence alanine_variant(const Sequence& x_start, std::span<const std::size_t> positions) {
  Sequence out = x_start;
  for (const auto p : positions) {
    if (p >= out.size()) {
      throw Error(ErrorKind::PositionOutOfRange, "position " + std::to_string(p + 1));
    }
    out[p] = AminoAcid::from_code('A');
  }
  return out;
}

std::vector<std::size_t> draw_mask_positions(std::size_t length, const MaskingConfig& cfg, std::size_t i) {
  Rng rng = make_stream(cfg.seed, {0x6d61736bull, i});
  const std::size_t n = uniform_int(rng, cfg.n_min, cfg.n_max);
  // Partial Fisher-Yates for a uniform n-subset.
  std::vector<std::size_t> sites(length);
  std::iota(sites.begin(), sites.end(), 0);
  for (std::size_t k = 0; k < n; ++k) std::swap(sites[k], sites[uniform_int(rng, k, length - 1)]);
  sites.resize(n);
  std::sort(sites.begin(), sites.end());
  return sites;
}

std::vector<MaskedSequence> targeted_masking(const Sequence& x_start, const Surrogate& surrogate,
                                             const MaskingConfig& cfg) {
  if (surrogate.sequence_length() != x_start.size()) {
    throw Error(ErrorKind::LengthMismatch, "EnsembleLengthMismatch: surrogate length " +
                                               std::to_string(surrogate.sequence_length()) +
                                               ", sequence length " + std::to_string(x_start.size()));
  }
  cfg.validate(x_start.size());
  const std::size_t pool = cfg.batch * cfg.scans;
  std::vector<std::vector<std::size_t>> positions(pool);
  std::vector<double> scores(pool);
  for (std::size_t i = 0; i < pool; ++i) {
    positions[i] = draw_mask_positions(x_start.size(), cfg, i);
    scores[i] = ucb(surrogate.predict(alanine_variant(x_start, positions[i])), cfg.ucb_k);
  }
  std::vector<std::size_t> rank(pool);
  std::iota(rank.begin(), rank.end(), 0);
  std::stable_sort(rank.begin(), rank.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<MaskedSequence> out;
  out.reserve(cfg.batch);
  for (std::size_t j = 0; j < cfg.batch; ++j) out.emplace_back(x_start, positions[rank[j]]);
  return out;
}

std::vector<MaskedSequence> random_masking(const Sequence& x_start, const MaskingConfig& cfg) {
  cfg.validate(x_start.size());
  std::vector<MaskedSequence> out;
  out.reserve(cfg.batch);
  for (std::size_t i = 0; i < cfg.batch; ++i) {
    out.emplace_back(x_start, draw_mask_positions(x_start.size(), cfg, i));
  }
  return out;
}

}  // namespace prospero
