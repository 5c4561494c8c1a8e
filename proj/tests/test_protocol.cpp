#include "support.hpp"

#include "prospero/protocol.hpp"
#include "prospero/smc.hpp"

#include <cstdlib>

using namespace testing;

namespace {

std::string mock(const std::string& args = "") { return std::string("exec ") + PROSPERO_MOCK_PRIOR + " " + args; }

/// Expected reply of the mock's peaked mode.
LogProbs peaked(const MaskedSequence& ctx, std::size_t pos) {
  LogProbs v;
  v.fill(0.0);
  v[(pos + ctx.masked_count()) % kAlphabetSize] = 2.0;
  const double z = std::log(std::exp(2.0) + 19.0);
  for (auto& x : v) x -= z;
  return v;
}

MaskedSequence random_context(Rng& rng, std::size_t length) {
  const auto x = random_seq(rng, length);
  std::vector<std::size_t> sites;
  for (std::size_t i = 0; i < length; ++i) {
    if (uniform01(rng) < 0.3) sites.push_back(i);
  }
  if (sites.empty()) sites.push_back(uniform_int(rng, 0, length - 1));
  return MaskedSequence(x, sites);
}

}  // namespace

TEST_CASE("request encoding") {
  const MaskedSequence ctx(seq("ACDE"), {1, 3});
  const auto r = logprobs_request(ctx, 3);
  CHECK(r["op"] == "logprobs");
  CHECK(r["tokens"] == nlohmann::json::array({0, -1, 2, -1}));
  CHECK(r["position"] == 4);
  const auto h = hello_request();
  CHECK(h["alphabet"] == "ACDEFGHIKLMNPQRSTVWY");
  CHECK(h["version"] == 1);
}

TEST_CASE("response validation") {
  std::vector<double> uniform(20, std::log(0.05));
  CHECK_FALSE(check_logprobs_response({{"op", "logprobs_ok"}, {"values", uniform}}));
  auto shifted = uniform;
  for (auto& v : shifted) v += 1e-3;
  CHECK(check_logprobs_response({{"op", "logprobs_ok"}, {"values", shifted}}));
  CHECK(check_logprobs_response({{"op", "logprobs_ok"}, {"values", std::vector<double>(19, std::log(1.0 / 19))}}));
  CHECK(check_logprobs_response({{"op", "logprobs_ok"}}));
  CHECK(check_logprobs_response({{"op", "hello_ok"}, {"values", uniform}}));
  CHECK(check_logprobs_response(nlohmann::json::array()));
  auto with_string = nlohmann::json{{"op", "logprobs_ok"}, {"values", uniform}};
  with_string["values"][3] = "x";
  CHECK(check_logprobs_response(with_string));
}

TEST_CASE("external prior over stdio") {
  auto prior = ExternalPrior::spawn(mock());
  CHECK(prior->model() == "mock-peaked");
  CHECK(prior->name() == "external:mock-peaked");
  Rng rng = make_stream(1, {});
  for (int t = 0; t < 300; ++t) {
    const auto ctx = random_context(rng, 15);
    const auto pos = ctx.mask_set()[uniform_int(rng, 0, ctx.masked_count() - 1)];
    const auto got = prior->conditional_logprobs(ctx, pos);
    const auto want = peaked(ctx, pos);
    for (std::size_t c = 0; c < kAlphabetSize; ++c) CHECK(got[c] == doctest::Approx(want[c]).epsilon(1e-12));
  }
  const auto st = prior->stats();
  CHECK(st.queries == 300);
  CHECK(st.malformed == 0);
  CHECK(kind_of([&] { prior->conditional_logprobs(MaskedSequence(seq("AC"), {0}), 1); }) ==
        ErrorKind::PositionNotMasked);
}

TEST_CASE("ten thousand queries without malformed replies") {
  auto prior = ExternalPrior::spawn(mock());
  Rng rng = make_stream(2, {});
  for (int t = 0; t < 10000; ++t) {
    const auto ctx = random_context(rng, 20);
    const auto lp = prior->conditional_logprobs(ctx, ctx.mask_set()[0]);
    REQUIRE(std::abs(logsumexp(lp)) < 1e-9);
  }
  CHECK(prior->stats().malformed == 0);
  CHECK(prior->stats().queries == 10000);
}

TEST_CASE("malformed replies raise and are counted") {
  const MaskedSequence ctx(seq("ACDEFG"), {2});
  SUBCASE("truncated JSON every third reply") {
    auto prior = ExternalPrior::spawn(mock("--mode malformed --every 3"));
    std::size_t thrown = 0;
    for (int t = 0; t < 30; ++t) {
      try {
        prior->conditional_logprobs(ctx, 2);
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ProtocolError);
        ++thrown;
      }
    }
    CHECK(thrown == 10);
    CHECK(prior->stats().malformed == 10);
  }
  SUBCASE("unnormalized") {
    auto prior = ExternalPrior::spawn(mock("--mode unnormalized"));
    CHECK(kind_of([&] { prior->conditional_logprobs(ctx, 2); }) == ErrorKind::ProtocolError);
    CHECK(prior->stats().malformed == 1);
  }
  SUBCASE("wrong length") {
    auto prior = ExternalPrior::spawn(mock("--mode short"));
    CHECK(kind_of([&] { prior->conditional_logprobs(ctx, 2); }) == ErrorKind::ProtocolError);
  }
  SUBCASE("error replies") {
    auto prior = ExternalPrior::spawn(mock("--mode error"));
    CHECK(kind_of([&] { prior->conditional_logprobs(ctx, 2); }) == ErrorKind::ProtocolError);
    CHECK(prior->stats().error_responses == 1);
    CHECK(prior->stats().malformed == 0);
  }
}

TEST_CASE("unavailable servers") {
  CHECK(kind_of([] { ExternalPrior::spawn(mock("--mode refuse")); }) == ErrorKind::ExternalPriorUnavailable);
  CHECK(kind_of([] { ExternalPrior::spawn("exit 3"); }) == ErrorKind::ExternalPriorUnavailable);
  CHECK(kind_of([] { ExternalPrior::spawn(""); }) == ErrorKind::ExternalPriorUnavailable);
  CHECK(kind_of([] { ExternalPrior::connect("127.0.0.1:1"); }) == ErrorKind::ExternalPriorUnavailable);
  CHECK(kind_of([] { ExternalPrior::connect("no-port"); }) == ErrorKind::ExternalPriorUnavailable);
  auto prior = ExternalPrior::spawn(mock("--mode exit"));
  CHECK(kind_of([&] { prior->conditional_logprobs(MaskedSequence(seq("AC"), {0}), 0); }) ==
        ErrorKind::ExternalPriorUnavailable);
}

TEST_CASE("external prior over TCP") {
  // The server prints its port on stdout; the channel reads that line.
  ChildProcessChannel server(mock("--tcp 0"));
  const auto first = server.read_line();
  REQUIRE(first.rfind("port ", 0) == 0);
  const std::string endpoint = "127.0.0.1:" + first.substr(5);
  Rng rng = make_stream(3, {});
  for (int conn = 0; conn < 2; ++conn) {
    auto prior = ExternalPrior::connect(endpoint);
    for (int t = 0; t < 200; ++t) {
      const auto ctx = random_context(rng, 12);
      const auto got = prior->conditional_logprobs(ctx, ctx.mask_set().back());
      const auto want = peaked(ctx, ctx.mask_set().back());
      for (std::size_t c = 0; c < kAlphabetSize; ++c) CHECK(got[c] == doctest::Approx(want[c]).epsilon(1e-12));
    }
  }
}

TEST_CASE("sampler runs on the external prior") {
  auto prior = ExternalPrior::spawn(mock());
  const auto wt = seq("KDAGERAC");
  const auto f = [](const Sequence& x) { return 1.0 + 0.1 * static_cast<double>(x[2].index()); };
  const FunctionSurrogate s(8, {f, f});
  SmcConfig cfg;
  cfg.particles = 16;
  cfg.oracle_budget = 5;
  cfg.jobs = 2;
  const std::vector<MaskedSequence> batch(16, MaskedSequence(wt, {1, 2, 5}));
  const auto r = constrained_smc(batch, wt, *prior, s, cfg);
  CHECK_FALSE(r.candidates.empty());
  for (const auto& c : r.candidates) {
    for (std::size_t i = 0; i < 8; ++i) CHECK(charge_class(c.sequence[i]) == charge_class(wt[i]));
  }
  CHECK(prior->stats().malformed == 0);
}
