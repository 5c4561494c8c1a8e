#include "support.hpp"

#include <numeric>

using namespace testing;

namespace {
std::size_t idx(char c) { return AminoAcid::from_code(c).index(); }
}  // namespace

TEST_CASE("uniform prior") {
  UniformPrior u;
  const MaskedSequence ctx(seq("ACDEFG"), {2, 4});
  for (const auto pos : {2u, 4u}) {
    const auto lp = u.conditional_logprobs(ctx, pos);
    for (const double v : lp) CHECK(v == doctest::Approx(std::log(1.0 / 20.0)).epsilon(1e-15));
    CHECK(std::abs(logsumexp(lp)) < 1e-12);
  }
  CHECK(kind_of([&] { u.conditional_logprobs(ctx, 0); }) == ErrorKind::PositionNotMasked);
}

TEST_CASE("profile prior counts with pseudocount") {
  SUBCASE("two identical sequences") {
    const std::vector<Sequence> corpus = {seq("AA"), seq("AA")};
    const auto p = fit_profile_prior(corpus, 1.0);
    const MaskedSequence ctx(seq("AA"), {0, 1});
    // (2 + 1) / (2 + 20)
    CHECK(std::exp(p.conditional_logprobs(ctx, 0)[idx('A')]) == doctest::Approx(3.0 / 22.0).epsilon(1e-12));
    CHECK(std::exp(p.conditional_logprobs(ctx, 0)[idx('C')]) == doctest::Approx(1.0 / 22.0).epsilon(1e-12));
  }
  SUBCASE("conserved column") {
    Rng rng = make_stream(7, {});
    std::vector<Sequence> corpus;
    for (int i = 0; i < 37; ++i) {
      auto s = random_seq(rng, 5);
      s[2] = AminoAcid::from_code('G');
      corpus.push_back(s);
    }
    const auto p = fit_profile_prior(corpus, 1.0);
    const MaskedSequence ctx(corpus[0], {2});
    const auto lp = p.conditional_logprobs(ctx, 2);
    const double pg = std::exp(lp[idx('G')]);
    CHECK(pg == doctest::Approx(38.0 / 57.0).epsilon(1e-12));
    for (std::size_t c = 0; c < kAlphabetSize; ++c) {
      if (c != idx('G')) CHECK(lp[c] < lp[idx('G')]);
    }
  }
  SUBCASE("huge pseudocount flattens rows") {
    const std::vector<Sequence> corpus = {seq("WW"), seq("WY")};
    const auto p = fit_profile_prior(corpus, 1e6);
    const MaskedSequence ctx(seq("AA"), {0, 1});
    for (const double v : p.conditional_logprobs(ctx, 1)) CHECK(std::abs(std::exp(v) - 0.05) < 1e-3);
  }
  SUBCASE("single sequence mode") {
    const auto s = seq("MKTAYIAKQR");
    const std::vector<Sequence> corpus = {s};
    const auto p = fit_profile_prior(corpus, 1.0);
    std::vector<std::size_t> all(s.size());
    std::iota(all.begin(), all.end(), 0);
    const MaskedSequence ctx(s, all);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto lp = p.conditional_logprobs(ctx, i);
      CHECK(std::max_element(lp.begin(), lp.end()) - lp.begin() == static_cast<long>(s[i].index()));
    }
  }
  SUBCASE("errors") {
    CHECK(kind_of([] { fit_profile_prior(std::vector<Sequence>{}, 1.0); }) == ErrorKind::EmptyCorpus);
    const std::vector<Sequence> mixed = {seq("AA"), seq("AAA")};
    CHECK(kind_of([&] { fit_profile_prior(mixed, 1.0); }) == ErrorKind::MixedLengths);
  }
}

TEST_CASE("profile prior ignores context") {
  Rng rng = make_stream(8, {});
  std::vector<Sequence> corpus;
  for (int i = 0; i < 20; ++i) corpus.push_back(random_seq(rng, 6));
  const auto p = fit_profile_prior(corpus, 0.5);
  const MaskedSequence a(seq("AAAAAA"), {3});
  const MaskedSequence b(seq("WYWYWY"), {0, 3, 5});
  CHECK(p.conditional_logprobs(a, 3) == p.conditional_logprobs(b, 3));
}

TEST_CASE("conditionals stay normalized over random contexts") {
  Rng rng = make_stream(9, {});
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + uniform_int(rng, 0, 10);
    std::vector<Sequence> corpus;
    const std::size_t m = 1 + uniform_int(rng, 0, 30);
    for (std::size_t i = 0; i < m; ++i) corpus.push_back(random_seq(rng, n));
    const auto p = fit_profile_prior(corpus, 0.01 + uniform01(rng));
    const auto wt = random_seq(rng, n);
    const std::size_t pos = uniform_int(rng, 0, n - 1);
    const MaskedSequence ctx(wt, {pos});
    const auto lp = p.conditional_logprobs(ctx, pos);
    CHECK(std::abs(logsumexp(lp)) < 1e-6);
    for (const auto cls : {ChargeClass::Negative, ChargeClass::Positive, ChargeClass::Neutral}) {
      const auto q = class_probabilities(lp, cls);
      double in_class = 0.0, outside = 0.0;
      for (std::size_t c = 0; c < kAlphabetSize; ++c) {
        CHECK(q[c] >= 0.0);
        (charge_class(AminoAcid::from_index(c)) == cls ? in_class : outside) += q[c];
      }
      CHECK(std::abs(in_class - 1.0) < 1e-6);
      CHECK(outside == 0.0);
    }
  }
}

TEST_CASE("constrained sampling") {
  UniformPrior u;
  const auto wt = seq("AEKGA");
  const MaskedSequence ctx(wt, {1, 2, 3});

  SUBCASE("never leaves the class") {
    Rng rng = make_stream(10, {});
    for (const auto cls : {ChargeClass::Negative, ChargeClass::Positive, ChargeClass::Neutral}) {
      for (int t = 0; t < 10000; ++t) {
        const auto d = constrained_sample(u, ctx, 1, cls, rng);
        REQUIRE(charge_class(d.residue) == cls);
        CHECK(d.log_prob == doctest::Approx(std::log(0.05)));
      }
    }
  }
  SUBCASE("uniform prior gives 1/3 each over the positive class") {
    Rng rng = make_stream(11, {});
    const int n = 30000;
    std::array<int, kAlphabetSize> counts{};
    for (int t = 0; t < n; ++t) ++counts[constrained_sample(u, ctx, 2, ChargeClass::Positive, rng).residue.index()];
    const double sd = std::sqrt(n * (1.0 / 3.0) * (2.0 / 3.0));
    for (const char c : {'R', 'K', 'H'}) CHECK(std::abs(counts[idx(c)] - n / 3.0) < 3.0 * sd);
  }
  SUBCASE("zero class mass falls back to uniform and is counted") {
    // All mass on alanine: the negative class has none.
    CallbackPrior adversarial([](const MaskedSequence&, std::size_t) {
      LogProbs lp;
      lp.fill(-std::numeric_limits<double>::infinity());
      lp[0] = 0.0;
      return lp;
    });
    SamplingStats stats;
    Rng rng = make_stream(12, {});
    std::array<int, kAlphabetSize> counts{};
    const int n = 4000;
    for (int t = 0; t < n; ++t) {
      ++counts[constrained_sample(adversarial, ctx, 1, ChargeClass::Negative, rng, &stats).residue.index()];
    }
    CHECK(stats.zero_mass_fallbacks.load() == static_cast<std::size_t>(n));
    CHECK(counts[idx('D')] + counts[idx('E')] == n);
    const double sd = std::sqrt(n * 0.25);
    CHECK(std::abs(counts[idx('D')] - n / 2.0) < 3.0 * sd);
  }
  SUBCASE("renormalized frequencies follow the base conditional") {
    std::array<double, kAlphabetSize> base{};
    base.fill(0.01);
    base[idx('D')] = 0.6;
    base[idx('E')] = 0.22;
    CallbackPrior skewed([&](const MaskedSequence&, std::size_t) { return log_of(base); });
    Rng rng = make_stream(13, {});
    const int n = 20000;
    int d = 0;
    for (int t = 0; t < n; ++t) d += constrained_sample(skewed, ctx, 1, ChargeClass::Negative, rng).residue.code() == 'D';
    const double expect = 0.6 / 0.82;
    CHECK(std::abs(d - n * expect) < 3.0 * std::sqrt(n * expect * (1 - expect)));
  }
}

TEST_CASE("perplexity") {
  CHECK(sequence_perplexity(4 * std::log(1.0 / 20.0), 4) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(sequence_perplexity(0.0, 4) == 1.0);
  CHECK(sequence_perplexity(-2.0 * std::log(5.0), 2) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(kind_of([] { sequence_perplexity(0.0, 0); }) == ErrorKind::ZeroMaskCount);
  CHECK(kind_of([] { inverse_perplexity(0.0, 0); }) == ErrorKind::ZeroMaskCount);
  Rng rng = make_stream(14, {});
  for (int t = 0; t < 1000; ++t) {
    const std::size_t m = 1 + uniform_int(rng, 0, 20);
    const double ll = -30.0 * uniform01(rng) * static_cast<double>(m) / 5.0;
    CHECK(std::abs(sequence_perplexity(ll, m) * inverse_perplexity(ll, m) - 1.0) < 1e-9);
  }
}

TEST_CASE("profile from probabilities validates rows") {
  ProfilePrior::Table t = ProfilePrior::Table::Constant(2, kAlphabetSize, 0.05);
  CHECK_NOTHROW(ProfilePrior::from_probabilities(t));
  t(1, 3) = 0.5;
  CHECK(kind_of([&] { ProfilePrior::from_probabilities(t); }) == ErrorKind::InvalidConfig);
}
