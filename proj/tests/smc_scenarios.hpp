#pragma once

#include "prospero/posterior.hpp"
#include "prospero/prior.hpp"
#include "prospero/random.hpp"
#include "prospero/smc.hpp"

#include <cmath>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace testing {

/// Fitness table keyed by sequence text, drawn lazily and uniformly from
/// [lo, hi) with a per-sequence stream, so every query of the same sequence
/// returns the same value.
struct RandomTable {
  std::uint64_t seed;
  double lo, hi;
  double operator()(const prospero::Sequence& x) const {
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < x.size(); ++i) h = prospero::splitmix64(h ^ (x[i].index() + 32 * i));
    prospero::Rng rng(h);
    return lo + (hi - lo) * prospero::uniform01(rng);
  }
};

/// Empirical distribution of final-population sequences against the exact
/// posterior, as total variation over the enumerated completions.
inline double population_tv(const prospero::SmcResult& r, const prospero::Posterior& post) {
  std::map<std::string, double> empirical;
  for (const auto& p : r.final_population) empirical[p.state.complete().str()] += 1.0;
  const double n = static_cast<double>(r.final_population.size());
  double tv = 0.0, covered = 0.0;
  for (const auto& e : post.entries) {
    const auto it = empirical.find(e.sequence.str());
    const double q = it == empirical.end() ? 0.0 : it->second / n;
    covered += q;
    tv += std::abs(q - e.probability);
  }
  // Mass outside the enumerated support counts in full.
  tv += 1.0 - covered;
  return 0.5 * tv;
}

struct SmcScenario {
  prospero::Sequence wild_type;
  prospero::MaskedSequence masked;
  RandomTable table;
};

/// L = 8, one masked Neutral site, uniform prior, exact table surrogate.
/// Returns the TV after the single weight-resample step.
inline double single_step_tv(std::uint64_t seed, std::size_t particles) {
  using namespace prospero;
  Rng rng = make_stream(seed, {0x73733031});
  std::vector<AminoAcid> res(8);
  for (auto& a : res) a = AminoAcid::from_index(uniform_int(rng, 0, kAlphabetSize - 1));
  const std::size_t site = uniform_int(rng, 0, 7);
  res[site] = AminoAcid::from_code('G');
  const Sequence wt(std::move(res));
  const MaskedSequence masked(wt, {site});
  const RandomTable f{derive_seed(seed, {1}), 0.1, 1.0};
  const FunctionSurrogate surrogate(8, {f, f});
  UniformPrior prior;

  SmcConfig cfg;
  cfg.particles = particles;
  cfg.oracle_budget = 15;
  cfg.seed = seed;
  const std::vector<MaskedSequence> batch(particles, masked);
  const auto result = constrained_smc(batch, wt, prior, surrogate, cfg);
  const auto post = brute_force_posterior([&](const Sequence& x) { return ucb(surrogate.predict(x), cfg.ucb_k); },
                                          prior, masked, wt);
  return population_tv(result, post);
}

/// Prior confined to A, G, S, T at the masked sites.
inline prospero::ProfilePrior four_letter_prior(std::size_t length) {
  prospero::ProfilePrior::Table t = prospero::ProfilePrior::Table::Zero(static_cast<Eigen::Index>(length),
                                                                        prospero::kAlphabetSize);
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    for (const char c : {'A', 'G', 'S', 'T'}) t(i, static_cast<Eigen::Index>(prospero::AminoAcid::from_code(c).index())) = 0.25;
  }
  return prospero::ProfilePrior::from_probabilities(t);
}

/// L = 8, three masked Neutral sites, four-letter prior, mild table surrogate
/// with values in [0.5, 1.5). Returns the TV of the final population.
inline double multi_step_tv(std::uint64_t seed, std::size_t particles) {
  using namespace prospero;
  Rng rng = make_stream(seed, {0x6d733033});
  std::vector<AminoAcid> res(8);
  for (auto& a : res) a = AminoAcid::from_index(uniform_int(rng, 0, kAlphabetSize - 1));
  std::vector<std::size_t> sites = {0, 1, 2, 3, 4, 5, 6, 7};
  for (std::size_t k = 0; k < 3; ++k) std::swap(sites[k], sites[uniform_int(rng, k, 7)]);
  sites.resize(3);
  for (const auto s : sites) res[s] = AminoAcid::from_code('S');
  const Sequence wt(std::move(res));
  const MaskedSequence masked(wt, sites);
  const RandomTable f{derive_seed(seed, {2}), 0.5, 1.5};
  const FunctionSurrogate surrogate(8, {f, f});
  const auto prior = four_letter_prior(8);

  SmcConfig cfg;
  cfg.particles = particles;
  cfg.oracle_budget = 64;
  cfg.seed = seed;
  const std::vector<MaskedSequence> batch(particles, masked);
  const auto result = constrained_smc(batch, wt, prior, surrogate, cfg);
  const auto post = brute_force_posterior([&](const Sequence& x) { return ucb(surrogate.predict(x), cfg.ucb_k); },
                                          prior, masked, wt);
  return population_tv(result, post);
}

}  // namespace testing
