#include "prospero/smc.hpp"

#include "prospero/error.hpp"
#include "prospero/log.hpp"
#include "prospero/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <numeric>
#include <unordered_set>

namespace prospero {

namespace {
constexpr std::uint64_t kProposeTag = 0x70726f70ull;
constexpr std::uint64_t kRolloutTag = 0x726f6c6cull;
constexpr std::uint64_t kResampleTag = 0x72736d70ull;
}  // namespace

void SmcConfig::validate() const {
  if (particles < 2) throw Error(ErrorKind::InvalidConfig, "SMC needs at least 2 particles");
  if (oracle_budget < 1) throw Error(ErrorKind::InvalidConfig, "oracle budget must be >= 1");
  if (n_keep < 1) throw Error(ErrorKind::InvalidConfig, "n_keep must be >= 1");
  if (jobs < 1) throw Error(ErrorKind::InvalidConfig, "jobs must be >= 1");
}

Particle make_particle(const MaskedSequence& masked, const Sequence& wild_type) {
  Particle p;
  p.order = std::make_shared<const Permutation>(build_permutation(masked, wild_type));
  p.mask_budget = masked.masked_count();
  p.state = masked;
  return p;
}

ResidueDraw propose(Particle& particle, const Sequence& wild_type, const SequencePrior& prior,
                    Rng& rng, bool constrained, SamplingStats* stats) {
  const std::size_t pos = particle.next_position();
  const LogProbs lp = prior.conditional_logprobs(particle.state, pos);
  const ResidueDraw draw = constrained ? sample_in_class(lp, charge_class(wild_type[pos]), rng, stats)
                                       : sample_unconstrained(lp, rng);
  particle.state.fill(pos, draw.residue);
  particle.log_lik += draw.log_prob;
  ++particle.filled;
  return draw;
}

RolloutResult rollout(const Particle& particle, const Sequence& wild_type, const SequencePrior& prior,
                      Rng& rng, bool constrained, SamplingStats* stats) {
  Particle copy = particle;
  while (!copy.complete()) propose(copy, wild_type, prior, rng, constrained, stats);
  return {copy.state.complete(), copy.log_lik};
}

std::vector<RolloutResult> rollout(std::span<const Particle> particles, std::size_t step,
                                   const Sequence& wild_type, const SequencePrior& prior,
                                   std::uint64_t seed, bool constrained, SamplingStats* stats) {
  std::vector<RolloutResult> out;
  out.reserve(particles.size());
  for (std::size_t i = 0; i < particles.size(); ++i) {
    Rng rng = make_stream(seed, {kRolloutTag, step, i});
    out.push_back(rollout(particles[i], wild_type, prior, rng, constrained, stats));
  }
  return out;
}

std::vector<double> smc_weights(std::span<const double> scores, std::span<const double> log_liks,
                                std::span<const std::size_t> mask_budgets, bool* fell_back) {
  const std::size_t n = scores.size();
  std::vector<double> w(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double inv_ppl = mask_budgets[i] == 0 ? 1.0 : inverse_perplexity(log_liks[i], mask_budgets[i]);
    w[i] = std::max(scores[i], kScoreFloor) * inv_ppl;
    if (!std::isfinite(w[i])) w[i] = 0.0;
    total += w[i];
  }
  if (fell_back) *fell_back = false;
  if (!(total > 0.0) || !std::isfinite(total)) {
    if (fell_back) *fell_back = true;
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(n));
    return w;
  }
  for (auto& v : w) v /= total;
  return w;
}

std::vector<std::size_t> resample_indices(std::span<const double> weights, std::size_t count, Rng& rng) {
  // Cumulative table plus binary search per draw.
  std::vector<double> cdf(weights.size());
  std::partial_sum(weights.begin(), weights.end(), cdf.begin());
  const double total = cdf.empty() ? 0.0 : cdf.back();
  std::vector<std::size_t> idx(count);
  for (auto& k : idx) {
    const double u = uniform01(rng) * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) it = std::prev(cdf.end());
    // Skip zero-weight entries that share a cdf value with the hit.
    while (it != cdf.begin() && weights[static_cast<std::size_t>(it - cdf.begin())] <= 0.0) --it;
    k = static_cast<std::size_t>(it - cdf.begin());
  }
  return idx;
}

std::vector<Particle> resample(std::span<const Particle> particles, std::span<const double> weights, Rng& rng) {
  const auto idx = resample_indices(weights, particles.size(), rng);
  std::vector<Particle> out;
  out.reserve(particles.size());
  for (const auto k : idx) out.push_back(particles[k]);
  return out;
}

SmcResult constrained_smc(std::span<const MaskedSequence> batch, const Sequence& wild_type,
                          const SequencePrior& prior, const Surrogate& surrogate, const SmcConfig& cfg,
                          const std::function<bool(const Sequence&)>& exclude) {
  cfg.validate();
  if (batch.size() != cfg.particles) {
    throw Error(ErrorKind::InvalidConfig, "batch size " + std::to_string(batch.size()) +
                                              " != particle count " + std::to_string(cfg.particles));
  }
  SmcResult result;
  SamplingStats stats;
  const std::size_t n = batch.size();

  std::vector<Particle> particles;
  particles.reserve(n);
  std::size_t steps = 0;
  for (const auto& m : batch) {
    particles.push_back(make_particle(m, wild_type));
    steps = std::max(steps, particles.back().mask_budget);
  }

  std::vector<RolloutRecord> buffer;
  // Particles with nothing to fill are scored once up front.
  for (auto& p : particles) {
    if (p.mask_budget == 0) p.score = ucb(surrogate.predict(p.state.complete()), cfg.ucb_k);
  }
  if (steps == 0) {
    for (const auto& p : particles) buffer.push_back({p.state.complete(), p.score, 0});
  }

  std::vector<double> scores(n), lls(n);
  std::vector<std::size_t> budgets(n);
  std::vector<std::optional<RolloutRecord>> fresh(n);

  for (std::size_t t = 1; t <= steps; ++t) {
    parallel_for(n, cfg.jobs, [&](std::size_t i) {
      Particle& p = particles[i];
      fresh[i].reset();
      if (p.complete()) return;
      Rng rng = make_stream(cfg.seed, {kProposeTag, t, i});
      propose(p, wild_type, prior, rng, cfg.use_raa_constraint, &stats);
      Rng roll_rng = make_stream(cfg.seed, {kRolloutTag, t, i});
      RolloutResult r = rollout(p, wild_type, prior, roll_rng, cfg.use_raa_constraint, &stats);
      p.rollout_log_lik = r.log_lik;
      fresh[i] = RolloutRecord{std::move(r.sequence), 0.0, t};
    });
    // Scoring stays serial in particle order: noisy surrogates draw per query.
    for (std::size_t i = 0; i < n; ++i) {
      if (!fresh[i]) continue;
      particles[i].score = ucb(surrogate.predict(fresh[i]->sequence), cfg.ucb_k);
      fresh[i]->score = particles[i].score;
    }
    if (steps - t < cfg.n_keep) {
      for (auto& rec : fresh) {
        if (rec) buffer.push_back(std::move(*rec));
      }
    }

    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = particles[i].score;
      lls[i] = particles[i].rollout_log_lik;
      budgets[i] = particles[i].mask_budget;
    }
    bool fell_back = false;
    const auto w = smc_weights(scores, lls, budgets, &fell_back);
    if (fell_back) {
      ++result.uniform_weight_fallbacks;
      log_warn("AllZeroWeights at step " + std::to_string(t) + "; using uniform weights");
    }

    StepTrace tr{t, 0.0, -std::numeric_limits<double>::infinity(), 0.0};
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum_sq += w[i] * w[i];
      if (w[i] > 0.0) tr.weight_entropy -= w[i] * std::log(w[i]);
      tr.top_score = std::max(tr.top_score, scores[i]);
    }
    tr.ess = 1.0 / sum_sq;
    result.trace.push_back(tr);

    if (cfg.use_resampling) {
      Rng rng = make_stream(cfg.seed, {kResampleTag, t});
      particles = resample(particles, w, rng);
    }
  }

  result.buffer_size = buffer.size();
  result.zero_mass_fallbacks = stats.zero_mass_fallbacks.load();

  std::stable_sort(buffer.begin(), buffer.end(),
                   [](const RolloutRecord& a, const RolloutRecord& b) { return a.score > b.score; });
  std::unordered_set<Sequence, SequenceHash> seen;
  for (auto& rec : buffer) {
    if (result.candidates.size() >= cfg.oracle_budget) break;
    if (!seen.insert(rec.sequence).second) continue;
    if (exclude && exclude(rec.sequence)) continue;
    result.candidates.push_back(std::move(rec));
  }
  if (result.candidates.size() < cfg.oracle_budget) {
    log_warn("BufferSmallerThanK: " + std::to_string(result.candidates.size()) +
             " unique candidates for a budget of " + std::to_string(cfg.oracle_budget));
  }
  result.final_population = std::move(particles);
  return result;
}

}  // namespace prospero
