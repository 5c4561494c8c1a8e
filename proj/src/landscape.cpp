#include "prospero/landscape.hpp"

#include "prospero/error.hpp"
#include "prospero/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace prospero {

namespace {

void check_length(const FitnessOracle& o, const Sequence& x) {
  if (x.size() != o.sequence_length()) {
    throw Error(ErrorKind::LengthMismatch, "oracle length " + std::to_string(o.sequence_length()) +
                                               ", query length " + std::to_string(x.size()));
  }
}

constexpr std::uint64_t kNeighborTag = 0x6e656967ull;
constexpr std::uint64_t kTableTag = 0x7461626cull;

}  // namespace

double FitnessOracle::evaluate(const Sequence& x) const {
  check_length(*this, x);
  const std::uint64_t ordinal = queries_.fetch_add(1);
  return compute(x, ordinal);
}

NkLandscape::NkLandscape(std::size_t length, std::size_t k, std::uint64_t seed)
    : length_(length), k_(k), seed_(seed) {
  if (length == 0 || k >= length) {
    throw Error(ErrorKind::InvalidK, "need 0 <= k < L, got k=" + std::to_string(k) +
                                         " L=" + std::to_string(length));
  }
  double entries = std::pow(static_cast<double>(kAlphabetSize), static_cast<double>(k + 1));
  if (entries > static_cast<double>(1u << 24)) {
    throw Error(ErrorKind::InvalidK, "k=" + std::to_string(k) + " gives tables that are too large");
  }
  const auto table_size = static_cast<std::size_t>(entries);
  neighbors_.resize(length);
  tables_.resize(length);
  for (std::size_t i = 0; i < length; ++i) {
    Rng nrng = make_stream(seed, {kNeighborTag, i});
    std::vector<std::size_t> others;
    for (std::size_t j = 0; j < length; ++j) {
      if (j != i) others.push_back(j);
    }
    for (std::size_t a = 0; a < k; ++a) std::swap(others[a], others[uniform_int(nrng, a, others.size() - 1)]);
    neighbors_[i].assign(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(k));

    Rng trng = make_stream(seed, {kTableTag, i});
    tables_[i].resize(table_size);
    for (auto& v : tables_[i]) v = uniform01(trng);
  }
}

double NkLandscape::site_contribution(std::size_t site, const Sequence& x) const {
  std::size_t idx = x[site].index();
  std::size_t stride = kAlphabetSize;
  for (const auto j : neighbors_[site]) {
    idx += stride * x[j].index();
    stride *= kAlphabetSize;
  }
  return tables_[site][idx];
}

double NkLandscape::compute(const Sequence& x, std::uint64_t) const {
  double s = 0.0;
  for (std::size_t i = 0; i < length_; ++i) s += site_contribution(i, x);
  return s / static_cast<double>(length_);
}

nlohmann::json NkLandscape::describe() const {
  return {{"kind", "nk"}, {"length", length_}, {"k", k_}, {"seed", seed_}};
}

AdditiveLandscape::AdditiveLandscape(Weights weights) : weights_(std::move(weights)) {
  if (weights_.rows() == 0) throw Error(ErrorKind::InvalidConfig, "additive landscape needs length >= 1");
}

AdditiveLandscape AdditiveLandscape::random(std::size_t length, std::uint64_t seed) {
  auto a = from_nk(NkLandscape(length, 0, seed));
  a.seed_ = seed;
  return a;
}

AdditiveLandscape AdditiveLandscape::from_nk(const NkLandscape& nk) {
  if (nk.k() != 0) throw Error(ErrorKind::InvalidK, "additive landscape requires k = 0");
  Weights w(static_cast<Eigen::Index>(nk.sequence_length()), kAlphabetSize);
  for (std::size_t i = 0; i < nk.sequence_length(); ++i) {
    for (std::size_t c = 0; c < kAlphabetSize; ++c) {
      w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = nk.contributions(i)[c];
    }
  }
  return AdditiveLandscape(std::move(w));
}

double AdditiveLandscape::value(const Sequence& x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += weights_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(x[i].index()));
  }
  return s / static_cast<double>(weights_.rows());
}

Sequence AdditiveLandscape::optimum() const {
  std::vector<AminoAcid> res(static_cast<std::size_t>(weights_.rows()));
  for (Eigen::Index i = 0; i < weights_.rows(); ++i) {
    Eigen::Index best = 0;
    weights_.row(i).maxCoeff(&best);
    res[static_cast<std::size_t>(i)] = AminoAcid::from_index(static_cast<std::size_t>(best));
  }
  return Sequence(std::move(res));
}

Sequence AdditiveLandscape::class_constrained_optimum(const Sequence& reference) const {
  check_length(*this, reference);
  Sequence out = reference;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto m : class_members(charge_class(reference[i]))) {
      const double v = weights_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m));
      if (v > best) {
        best = v;
        out[i] = AminoAcid::from_index(m);
      }
    }
  }
  return out;
}

nlohmann::json AdditiveLandscape::describe() const {
  if (seed_) return {{"kind", "additive"}, {"length", sequence_length()}, {"seed", *seed_}};
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < weights_.rows(); ++i) {
    rows.push_back(std::vector<double>(weights_.row(i).data(), weights_.row(i).data() + kAlphabetSize));
  }
  return {{"kind", "additive"}, {"length", sequence_length()}, {"weights", rows}};
}

TableLandscape::TableLandscape(Dataset table, std::string source)
    : table_(std::move(table)), source_(std::move(source)) {
  if (table_.empty()) throw Error(ErrorKind::ParseError, "table landscape has no rows");
}

TableLandscape TableLandscape::from_csv(const std::string& path) {
  return TableLandscape(Dataset::from_csv_file(path), path);
}

double TableLandscape::compute(const Sequence& x, std::uint64_t) const {
  const auto f = table_.fitness_of(x);
  if (!f) throw Error(ErrorKind::UnknownSequence, x.str());
  return *f;
}

nlohmann::json TableLandscape::describe() const {
  return {{"kind", "table"}, {"csv", source_}, {"rows", table_.size()}};
}

double noise_scale(double snr_db, double variance) {
  if (variance < 0.0) throw Error(ErrorKind::NegativeVariance, std::to_string(variance));
  return std::sqrt(variance * std::pow(10.0, -snr_db / 10.0));
}

NoisyOracle::NoisyOracle(std::shared_ptr<const FitnessOracle> base, NoisyOracleConfig cfg)
    : base_(std::move(base)), cfg_(cfg), sigma_(noise_scale(cfg.snr_db, cfg.base_variance)) {}

double NoisyOracle::compute(const Sequence& x, std::uint64_t ordinal) const {
  const double truth = base_->evaluate(x);
  Rng rng = make_stream(cfg_.seed, {0x6e6f6973ull, ordinal});
  const double noise = sigma_ > 0.0 ? std::normal_distribution<double>(0.0, sigma_)(rng) : 0.0;
  return std::max(0.0, truth + noise);
}

nlohmann::json NoisyOracle::describe() const {
  return {{"kind", "noisy"},
          {"base", base_->describe()},
          {"snr_db", cfg_.snr_db},
          {"base_variance", cfg_.base_variance},
          {"seed", cfg_.seed}};
}

NoisyOracleEnsemble::NoisyOracleEnsemble(std::shared_ptr<const FitnessOracle> truth, NoisyOracleConfig cfg,
                                         std::size_t members)
    : truth_(std::move(truth)) {
  if (members < 1) throw Error(ErrorKind::InvalidConfig, "noisy ensemble needs members");
  for (std::size_t m = 0; m < members; ++m) {
    NoisyOracleConfig c = cfg;
    c.seed = derive_seed(cfg.seed, {0x6d656d62ull, m});
    members_.push_back(std::make_unique<NoisyOracle>(truth_, c));
  }
}

void NoisyOracleEnsemble::member_outputs(const Sequence& x, std::span<double> out) const {
  for (std::size_t m = 0; m < members_.size(); ++m) out[m] = members_[m]->evaluate(x);
}

Sequence random_sequence(std::size_t length, std::uint64_t seed) {
  Rng rng = make_stream(seed, {0x77696c64ull});
  std::vector<AminoAcid> res(length);
  for (auto& r : res) r = AminoAcid::from_index(uniform_int(rng, 0, kAlphabetSize - 1));
  return Sequence(std::move(res));
}

Dataset seed_dataset(const FitnessOracle& oracle, const Sequence& x_start, std::size_t size,
                     std::size_t max_mutations, std::uint64_t seed) {
  if (size < 1) throw Error(ErrorKind::InvalidConfig, "initial dataset size must be >= 1");
  if (max_mutations < 1 || max_mutations > x_start.size()) {
    throw Error(ErrorKind::InvalidConfig, "max_mutations must be in [1, L]");
  }
  Dataset data;
  data.add(x_start, oracle.evaluate(x_start), 0);
  Rng rng = make_stream(seed, {0x64302d30ull});
  const std::size_t max_attempts = 100 * size + 1000;
  std::size_t attempts = 0;
  std::vector<std::size_t> sites(x_start.size());
  while (data.size() < size) {
    if (++attempts > max_attempts) {
      throw Error(ErrorKind::ExhaustedSpace, "found " + std::to_string(data.size()) + " of " +
                                                 std::to_string(size) + " distinct mutants");
    }
    Sequence mutant = x_start;
    const std::size_t m = uniform_int(rng, 1, max_mutations);
    std::iota(sites.begin(), sites.end(), 0);
    for (std::size_t a = 0; a < m; ++a) {
      std::swap(sites[a], sites[uniform_int(rng, a, sites.size() - 1)]);
      const std::size_t current = x_start[sites[a]].index();
      std::size_t r = uniform_int(rng, 0, kAlphabetSize - 2);
      if (r >= current) ++r;
      mutant[sites[a]] = AminoAcid::from_index(r);
    }
    if (data.contains(mutant)) continue;
    const double y = oracle.evaluate(mutant);
    data.add(std::move(mutant), y, 0);
  }
  return data;
}

}  // namespace prospero
