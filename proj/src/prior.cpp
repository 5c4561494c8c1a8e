#include "prospero/prior.hpp"

#include "prospero/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace prospero {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double logsumexp(std::span<const double> values) {
  double hi = kNegInf;
  for (const double v : values) hi = std::max(hi, v);
  if (hi == kNegInf) return kNegInf;
  double s = 0.0;
  for (const double v : values) s += std::exp(v - hi);
  return hi + std::log(s);
}

LogProbs SequencePrior::conditional_logprobs(const MaskedSequence& context, std::size_t pos) const {
  if (pos >= context.size() || !context.is_masked(pos)) {
    throw Error(ErrorKind::PositionNotMasked, "position " + std::to_string(pos + 1));
  }
  return compute_logprobs(context, pos);
}

LogProbs UniformPrior::compute_logprobs(const MaskedSequence&, std::size_t) const {
  LogProbs out;
  out.fill(-std::log(static_cast<double>(kAlphabetSize)));
  return out;
}

ProfilePrior ProfilePrior::from_probabilities(const Table& probabilities) {
  ProfilePrior p;
  p.log_probs_.resize(probabilities.rows(), probabilities.cols());
  for (Eigen::Index r = 0; r < probabilities.rows(); ++r) {
    const auto row = probabilities.row(r);
    if ((row.array() < 0.0).any() || !row.allFinite() || std::abs(row.sum() - 1.0) > 1e-6) {
      throw Error(ErrorKind::InvalidConfig,
                  "profile row " + std::to_string(r + 1) + " is not a probability vector");
    }
    for (Eigen::Index c = 0; c < row.size(); ++c) {
      p.log_probs_(r, c) = row(c) > 0.0 ? std::log(row(c)) : kNegInf;
    }
  }
  return p;
}

LogProbs ProfilePrior::compute_logprobs(const MaskedSequence& context, std::size_t pos) const {
  if (context.size() != length()) {
    throw Error(ErrorKind::LengthMismatch, "profile length " + std::to_string(length()) +
                                               ", context length " + std::to_string(context.size()));
  }
  LogProbs out;
  for (std::size_t c = 0; c < kAlphabetSize; ++c) {
    out[c] = log_probs_(static_cast<Eigen::Index>(pos), static_cast<Eigen::Index>(c));
  }
  return out;
}

ProfilePrior fit_profile_prior(std::span<const Sequence> corpus, double pseudocount) {
  if (corpus.empty()) throw Error(ErrorKind::EmptyCorpus, "profile prior needs sequences");
  if (!(pseudocount > 0.0)) throw Error(ErrorKind::InvalidConfig, "pseudocount must be positive");
  const std::size_t length = corpus.front().size();
  ProfilePrior::Table counts = ProfilePrior::Table::Constant(static_cast<Eigen::Index>(length),
                                                             kAlphabetSize, pseudocount);
  for (const auto& s : corpus) {
    if (s.size() != length) {
      throw Error(ErrorKind::MixedLengths,
                  "expected length " + std::to_string(length) + ", got " + std::to_string(s.size()));
    }
    for (std::size_t i = 0; i < length; ++i) {
      counts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s[i].index())) += 1.0;
    }
  }
  const double total = static_cast<double>(corpus.size()) + pseudocount * kAlphabetSize;
  return ProfilePrior::from_probabilities(counts / total);
}

std::array<double, kAlphabetSize> class_probabilities(const LogProbs& logprobs, ChargeClass cls) {
  const auto members = class_members(cls);
  std::array<double, kAlphabetSize> p{};
  double hi = kNegInf;
  for (const auto m : members) hi = std::max(hi, logprobs[m]);
  if (hi == kNegInf) {
    for (const auto m : members) p[m] = 1.0 / static_cast<double>(members.size());
    return p;
  }
  double total = 0.0;
  for (const auto m : members) total += p[m] = std::exp(logprobs[m] - hi);
  for (const auto m : members) p[m] /= total;
  return p;
}

ResidueDraw sample_in_class(const LogProbs& logprobs, ChargeClass cls, Rng& rng, SamplingStats* stats) {
  const auto members = class_members(cls);
  std::array<double, kAlphabetSize> w{};
  double hi = kNegInf;
  for (const auto m : members) hi = std::max(hi, logprobs[m]);
  if (hi == kNegInf) {
    if (stats) ++stats->zero_mass_fallbacks;
    const auto m = members[uniform_int(rng, 0, members.size() - 1)];
    return {AminoAcid::from_index(m), logprobs[m]};
  }
  for (std::size_t k = 0; k < members.size(); ++k) w[k] = std::exp(logprobs[members[k]] - hi);
  const auto k = sample_categorical(std::span(w.data(), members.size()), rng);
  return {AminoAcid::from_index(members[k]), logprobs[members[k]]};
}

ResidueDraw sample_unconstrained(const LogProbs& logprobs, Rng& rng) {
  std::array<double, kAlphabetSize> w{};
  double hi = kNegInf;
  for (const double v : logprobs) hi = std::max(hi, v);
  for (std::size_t c = 0; c < kAlphabetSize; ++c) w[c] = std::exp(logprobs[c] - hi);
  const auto c = sample_categorical(w, rng);
  return {AminoAcid::from_index(c), logprobs[c]};
}

ResidueDraw constrained_sample(const SequencePrior& prior, const MaskedSequence& context,
                               std::size_t pos, ChargeClass cls, Rng& rng, SamplingStats* stats) {
  return sample_in_class(prior.conditional_logprobs(context, pos), cls, rng, stats);
}

double sequence_perplexity(double total_loglik, std::size_t masked_count) {
  if (masked_count == 0) throw Error(ErrorKind::ZeroMaskCount, "perplexity over zero positions");
  return std::exp(-total_loglik / static_cast<double>(masked_count));
}

double inverse_perplexity(double total_loglik, std::size_t masked_count) {
  if (masked_count == 0) throw Error(ErrorKind::ZeroMaskCount, "perplexity over zero positions");
  return std::exp(total_loglik / static_cast<double>(masked_count));
}

}  // namespace prospero
