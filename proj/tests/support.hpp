#pragma once

#include "prospero/error.hpp"
#include "prospero/prior.hpp"
#include "prospero/random.hpp"
#include "prospero/sequence.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>

namespace testing {

using namespace prospero;

inline Sequence seq(const std::string& s) { return parse_sequence(s); }

inline ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a prospero::Error");
  return ErrorKind::IoError;
}

inline Sequence random_seq(Rng& rng, std::size_t n) {
  std::vector<AminoAcid> r(n);
  for (auto& a : r) a = AminoAcid::from_index(uniform_int(rng, 0, kAlphabetSize - 1));
  return Sequence(std::move(r));
}

/// Prior defined by a callback, for adversarial and hand-built cases.
class CallbackPrior final : public SequencePrior {
 public:
  using Fn = std::function<LogProbs(const MaskedSequence&, std::size_t)>;
  explicit CallbackPrior(Fn fn) : fn_(std::move(fn)) {}
  std::string name() const override { return "callback"; }

 protected:
  LogProbs compute_logprobs(const MaskedSequence& c, std::size_t pos) const override { return fn_(c, pos); }

 private:
  Fn fn_;
};

inline LogProbs log_of(const std::array<double, kAlphabetSize>& p) {
  LogProbs out{};
  for (std::size_t i = 0; i < kAlphabetSize; ++i) out[i] = std::log(p[i]);
  return out;
}

/// Total variation between two distributions given as aligned vectors.
inline double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

/// Upper chi-square quantile with `df` degrees of freedom (Wilson-Hilferty);
/// `z` is the matching standard normal quantile, 2.326 for alpha = 0.01.
inline double chi_square_critical(double df, double z = 2.326) {
  const double a = 2.0 / (9.0 * df);
  return df * std::pow(1.0 - a + z * std::sqrt(a), 3.0);
}

inline double chi_square(const std::vector<double>& observed, const std::vector<double>& expected) {
  double s = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    s += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
  }
  return s;
}

}  // namespace testing
