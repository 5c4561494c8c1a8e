#include "support.hpp"

#include "prospero/landscape.hpp"

#include <filesystem>
#include <fstream>
#include <numeric>
#include <thread>

using namespace testing;

TEST_CASE("NK landscape") {
  SUBCASE("k = 0, L = 2") {
    const NkLandscape nk(2, 0, 3);
    const std::size_t a = AminoAcid::from_code('A').index();
    CHECK(nk.evaluate(seq("AA")) == (nk.contributions(0)[a] + nk.contributions(1)[a]) / 2.0);
    CHECK(nk.contributions(0).size() == 20);
  }
  SUBCASE("determinism") {
    const NkLandscape a(12, 3, 99), b(12, 3, 99), c(12, 3, 100);
    Rng rng = make_stream(1, {});
    int differs = 0;
    for (int t = 0; t < 100; ++t) {
      const auto x = random_seq(rng, 12);
      CHECK(a.evaluate(x) == b.evaluate(x));
      differs += a.evaluate(x) != c.evaluate(x);
    }
    CHECK(differs > 90);
  }
  SUBCASE("full epistasis") {
    const std::size_t length = 4;
    const NkLandscape nk(length, length - 1, 5);
    Rng rng = make_stream(2, {});
    const auto x = random_seq(rng, length);
    auto y = x;
    y[2] = AminoAcid::from_index((x[2].index() + 1) % kAlphabetSize);
    for (std::size_t site = 0; site < length; ++site) {
      CHECK(nk.neighbors(site).size() == length - 1);
      CHECK(nk.site_contribution(site, x) != nk.site_contribution(site, y));
    }
  }
  SUBCASE("structure") {
    const NkLandscape nk(30, 2, 7);
    Rng rng = make_stream(3, {});
    for (std::size_t i = 0; i < 30; ++i) {
      const auto& n = nk.neighbors(i);
      REQUIRE(n.size() == 2);
      CHECK(n[0] != i);
      CHECK(n[1] != i);
      CHECK(n[0] != n[1]);
      for (const double v : nk.contributions(i)) {
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
      }
    }
    for (int t = 0; t < 200; ++t) {
      const auto x = random_seq(rng, 30);
      // Independent lookup: site residue is the lowest digit, neighbors follow.
      double s = 0;
      for (std::size_t i = 0; i < 30; ++i) {
        const auto& n = nk.neighbors(i);
        s += nk.contributions(i)[x[i].index() + 20 * x[n[0]].index() + 400 * x[n[1]].index()];
      }
      CHECK(nk.evaluate(x) == doctest::Approx(s / 30.0).epsilon(1e-14));
    }
  }
  SUBCASE("errors") {
    CHECK(kind_of([] { NkLandscape(5, 5, 0); }) == ErrorKind::InvalidK);
    CHECK(kind_of([] { NkLandscape(50, 6, 0); }) == ErrorKind::InvalidK);
    const NkLandscape nk(5, 1, 0);
    CHECK(kind_of([&] { nk.evaluate(seq("AAAA")); }) == ErrorKind::LengthMismatch);
  }
}

TEST_CASE("k = 0 equals the additive landscape built from the same tables") {
  const NkLandscape nk(25, 0, 8);
  const auto add = AdditiveLandscape::from_nk(nk);
  const auto rnd = AdditiveLandscape::random(25, 8);
  Rng rng = make_stream(4, {});
  for (int t = 0; t < 1000; ++t) {
    const auto x = random_seq(rng, 25);
    CHECK(nk.evaluate(x) == add.evaluate(x));
    CHECK(rnd.evaluate(x) == add.evaluate(x));
  }
  CHECK(kind_of([] { AdditiveLandscape::from_nk(NkLandscape(5, 1, 0)); }) == ErrorKind::InvalidK);
}

TEST_CASE("additive optimum") {
  const auto f = AdditiveLandscape::random(8, 12);
  const auto best = f.optimum();
  Rng rng = make_stream(5, {});
  for (int t = 0; t < 2000; ++t) CHECK(f.value(random_seq(rng, 8)) <= f.value(best));
  // Brute force per site is exact for an additive landscape.
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t c = 0; c < kAlphabetSize; ++c) {
      auto y = best;
      y[i] = AminoAcid::from_index(c);
      CHECK(f.value(y) <= f.value(best));
    }
  }
  const auto ref = seq("KDAGERAC");
  const auto cbest = f.class_constrained_optimum(ref);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(charge_class(cbest[i]) == charge_class(ref[i]));
    for (const auto m : class_members(charge_class(ref[i]))) {
      auto y = cbest;
      y[i] = AminoAcid::from_index(m);
      CHECK(f.value(y) <= f.value(cbest));
    }
  }
  CHECK(f.value(cbest) <= f.value(best));
}

TEST_CASE("table landscape") {
  const auto dir = std::filesystem::temp_directory_path() / "prospero_table_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "t.csv").string();
  {
    std::ofstream(path) << "sequence,fitness\nAA,1.0\nAC,2.0\n";
  }
  const auto t = TableLandscape::from_csv(path);
  CHECK(t.evaluate(seq("AC")) == 2.0);
  CHECK(t.evaluate(seq("AA")) == 1.0);
  CHECK(kind_of([&] { t.evaluate(seq("AD")); }) == ErrorKind::UnknownSequence);
  CHECK(t.query_count() == 3);
  {
    std::ofstream(path) << "sequence,fitness\nAA,1.0\nAA,2.0\n";
  }
  CHECK(kind_of([&] { TableLandscape::from_csv(path); }) == ErrorKind::ParseError);
  {
    std::ofstream(path) << "seq,y\nAA,1.0\n";
  }
  CHECK(kind_of([&] { TableLandscape::from_csv(path); }) == ErrorKind::ParseError);
  {
    std::ofstream(path) << "sequence,fitness\nAA,1.0\nAAA,2.0\n";
  }
  CHECK(kind_of([&] { TableLandscape::from_csv(path); }) == ErrorKind::ParseError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("noise scale") {
  CHECK(noise_scale(0.0, 4.0) == 2.0);
  CHECK(std::abs(noise_scale(10.0, 1.0) - std::pow(10.0, -0.5)) < 1e-12);
  CHECK(noise_scale(300.0, 1.0) < 1e-14);
  CHECK(noise_scale(-20.0, 0.01) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(kind_of([] { noise_scale(0.0, -1.0); }) == ErrorKind::NegativeVariance);
}

TEST_CASE("noisy oracle") {
  SUBCASE("statistics away from the truncation") {
    AdditiveLandscape::Weights w = AdditiveLandscape::Weights::Constant(3, kAlphabetSize, 5.0);
    auto base = std::make_shared<AdditiveLandscape>(w);
    const NoisyOracle noisy(base, {0.0, 0.25, 17});  // sigma = 0.5
    CHECK(noisy.sigma() == 0.5);
    const int n = 100000;
    double s = 0, ss = 0;
    const auto x = seq("ACD");
    for (int i = 0; i < n; ++i) {
      const double y = noisy.evaluate(x);
      s += y;
      ss += y * y;
    }
    const double mean = s / n, var = ss / n - mean * mean;
    CHECK(std::abs(mean - 5.0) < 3.0 * 0.5 / std::sqrt(n));
    // Var of the sample variance of a normal is 2 sigma^4 / n.
    CHECK(std::abs(var - 0.25) < 3.0 * std::sqrt(2.0 * std::pow(0.25, 2) / n));
    CHECK(noisy.query_count() == static_cast<std::size_t>(n));
    CHECK(base->query_count() == static_cast<std::size_t>(n));
  }
  SUBCASE("truncation") {
    AdditiveLandscape::Weights w = AdditiveLandscape::Weights::Constant(2, kAlphabetSize, -3.0);
    auto base = std::make_shared<AdditiveLandscape>(w);
    const NoisyOracle noisy(base, {40.0, 1.0, 1});
    for (int i = 0; i < 100; ++i) CHECK(noisy.evaluate(seq("AA")) == 0.0);
  }
  SUBCASE("large SNR approaches the base") {
    auto base = std::make_shared<AdditiveLandscape>(AdditiveLandscape::random(6, 3));
    const NoisyOracle noisy(base, {200.0, 1.0, 1});
    Rng rng = make_stream(6, {});
    for (int i = 0; i < 100; ++i) {
      const auto x = random_seq(rng, 6);
      CHECK(noisy.evaluate(x) == doctest::Approx(base->value(x)).epsilon(1e-9));
    }
  }
  SUBCASE("noise depends on the query ordinal only") {
    auto base = std::make_shared<AdditiveLandscape>(AdditiveLandscape::random(6, 3));
    const NoisyOracle a(base, {0.0, 1.0, 9}), b(base, {0.0, 1.0, 9});
    const auto x = seq("ACDEFG");
    const double first = a.evaluate(x);
    CHECK(a.evaluate(x) != first);
    CHECK(b.evaluate(x) == first);
  }
  SUBCASE("ensemble members are independent") {
    auto truth = std::make_shared<AdditiveLandscape>(AdditiveLandscape::random(6, 3));
    const NoisyOracleEnsemble ens(truth, {0.0, 0.04, 5}, 3);
    CHECK(ens.member_count() == 3);
    const auto p = ens.predict(seq("ACDEFG"));
    CHECK(p.stddev > 0.0);
    CHECK(kind_of([&] { NoisyOracleEnsemble(truth, {0.0, 0.04, 5}, 0); }) == ErrorKind::InvalidConfig);
  }
}

TEST_CASE("query counting is atomic") {
  const NkLandscape nk(10, 2, 1);
  const auto x = random_sequence(10, 4);
  std::vector<std::thread> ts;
  for (int t = 0; t < 4; ++t) {
    ts.emplace_back([&] {
      for (int i = 0; i < 5000; ++i) nk.evaluate(x);
    });
  }
  for (auto& t : ts) t.join();
  CHECK(nk.query_count() == 20000);
}

TEST_CASE("initial dataset") {
  const NkLandscape nk(20, 1, 2);
  const auto wt = random_sequence(20, 2);
  SUBCASE("singleton") {
    const auto d = seed_dataset(nk, wt, 1, 3, 1);
    REQUIRE(d.size() == 1);
    CHECK(d[0].sequence == wt);
    CHECK(d[0].fitness == nk.evaluate(wt));
  }
  SUBCASE("distinct mutants within range") {
    const auto d = seed_dataset(nk, wt, 300, 3, 4);
    CHECK(d.size() == 300);
    CHECK(d[0].sequence == wt);
    for (std::size_t i = 1; i < d.size(); ++i) {
      const auto h = hamming(d[i].sequence, wt);
      CHECK(h >= 1);
      CHECK(h <= 3);
      CHECK(d[i].fitness == nk.evaluate(d[i].sequence));
    }
    CHECK(seed_dataset(nk, wt, 300, 3, 4).to_csv() == d.to_csv());
  }
  SUBCASE("variance computed two ways") {
    const auto d = seed_dataset(nk, wt, 500, 3, 5);
    const auto ys = d.fitness_values();
    // Two-pass and Welford's online update.
    double mean = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
    double two_pass = 0;
    for (const double y : ys) two_pass += (y - mean) * (y - mean);
    two_pass /= static_cast<double>(ys.size());
    double m = 0, m2 = 0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      const double delta = ys[i] - m;
      m += delta / static_cast<double>(i + 1);
      m2 += delta * (ys[i] - m);
    }
    CHECK(std::abs(d.fitness_variance() - two_pass) < 1e-12);
    CHECK(std::abs(d.fitness_variance() - m2 / static_cast<double>(ys.size())) < 1e-12);
  }
  SUBCASE("errors") {
    const NkLandscape tiny(2, 0, 1);
    // Only 2*19 + 19*19 = 399 mutants of a length-2 sequence exist.
    CHECK(kind_of([&] { seed_dataset(tiny, seq("AA"), 401, 2, 1); }) == ErrorKind::ExhaustedSpace);
    CHECK_NOTHROW(seed_dataset(tiny, seq("AA"), 400, 2, 1));
    CHECK(kind_of([&] { seed_dataset(nk, wt, 0, 3, 1); }) == ErrorKind::InvalidConfig);
  }
}

TEST_CASE("describe") {
  CHECK(NkLandscape(10, 2, 3).describe() == nlohmann::json{{"kind", "nk"}, {"length", 10}, {"k", 2}, {"seed", 3}});
  CHECK(AdditiveLandscape::random(4, 9).describe()["seed"] == 9);
  AdditiveLandscape::Weights w = AdditiveLandscape::Weights::Zero(2, kAlphabetSize);
  CHECK(AdditiveLandscape(w).describe()["weights"].size() == 2);
}
