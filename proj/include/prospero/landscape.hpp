#pragma once

// Fitness oracles with query accounting: NK and additive synthetic
// landscapes, exact-lookup tables from CSV, and the SNR-scaled noisy
// wrapper used to stand in for a misspecified surrogate.

#include "prospero/dataset.hpp"
#include "prospero/sequence.hpp"
#include "prospero/surrogate.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace prospero {

class FitnessOracle {
 public:
  FitnessOracle() = default;
  FitnessOracle(const FitnessOracle& o) : queries_(o.queries_.load()) {}
  FitnessOracle& operator=(const FitnessOracle&) = delete;
  virtual ~FitnessOracle() = default;

  virtual std::size_t sequence_length() const = 0;

  /// Counted query. Throws LengthMismatch; table oracles throw UnknownSequence.
  double evaluate(const Sequence& x) const;

  /// Number of evaluate() calls so far.
  std::size_t query_count() const { return queries_.load(); }

  /// Description sufficient to rebuild the landscape.
  virtual nlohmann::json describe() const = 0;

 protected:
  /// `ordinal` is the 0-based index of this query.
  virtual double compute(const Sequence& x, std::uint64_t ordinal) const = 0;

 private:
  mutable std::atomic<std::uint64_t> queries_{0};
};

/// Each site contributes a value looked up from its own residue and those at
/// k other sites; fitness is the mean contribution, in [0, 1).
class NkLandscape final : public FitnessOracle {
 public:
  /// Throws InvalidK unless 0 <= k < length, or when the tables would exceed
  /// 2^24 entries per site.
  NkLandscape(std::size_t length, std::size_t k, std::uint64_t seed);

  std::size_t sequence_length() const override { return length_; }
  std::size_t k() const { return k_; }
  const std::vector<std::size_t>& neighbors(std::size_t site) const { return neighbors_[site]; }
  const std::vector<double>& contributions(std::size_t site) const { return tables_[site]; }

  double site_contribution(std::size_t site, const Sequence& x) const;
  nlohmann::json describe() const override;

 protected:
  double compute(const Sequence& x, std::uint64_t) const override;

 private:
  std::size_t length_, k_;
  std::uint64_t seed_;
  std::vector<std::vector<std::size_t>> neighbors_;
  std::vector<std::vector<double>> tables_;
};

/// Fitness is the mean over sites of weights(i, x[i]).
class AdditiveLandscape final : public FitnessOracle {
 public:
  using Weights = Eigen::Matrix<double, Eigen::Dynamic, static_cast<int>(kAlphabetSize), Eigen::RowMajor>;

  explicit AdditiveLandscape(Weights weights);
  /// Same tables as NkLandscape(length, 0, seed).
  static AdditiveLandscape random(std::size_t length, std::uint64_t seed);
  /// Throws InvalidK unless nk.k() == 0.
  static AdditiveLandscape from_nk(const NkLandscape& nk);

  std::size_t sequence_length() const override { return static_cast<std::size_t>(weights_.rows()); }
  const Weights& weights() const { return weights_; }

  /// Best sequence overall.
  Sequence optimum() const;
  /// Best sequence whose residue at every site shares the charge class of `reference`.
  Sequence class_constrained_optimum(const Sequence& reference) const;
  double value(const Sequence& x) const;

  nlohmann::json describe() const override;

 protected:
  double compute(const Sequence& x, std::uint64_t) const override { return value(x); }

 private:
  Weights weights_;
  std::optional<std::uint64_t> seed_;
};

/// Exact lookup; unknown sequences are an error.
class TableLandscape final : public FitnessOracle {
 public:
  explicit TableLandscape(Dataset table, std::string source = {});
  /// Header `sequence,fitness`. Throws ParseError (including duplicate keys).
  static TableLandscape from_csv(const std::string& path);

  std::size_t sequence_length() const override { return table_.sequence_length(); }
  const Dataset& table() const { return table_; }
  nlohmann::json describe() const override;

 protected:
  double compute(const Sequence& x, std::uint64_t) const override;

 private:
  Dataset table_;
  std::string source_;
};

struct NoisyOracleConfig {
  double snr_db = 0.0;
  double base_variance = 0.0;  ///< Var(D0)
  std::uint64_t seed = 0;
};

/// sqrt(variance * 10^(-snr_db / 10)). Throws NegativeVariance.
double noise_scale(double snr_db, double variance);

/// max(0, base(x) + N(0, sigma^2)), noise drawn from (seed, query ordinal).
/// The base is queried through its counted interface.
class NoisyOracle final : public FitnessOracle {
 public:
  NoisyOracle(std::shared_ptr<const FitnessOracle> base, NoisyOracleConfig cfg);

  std::size_t sequence_length() const override { return base_->sequence_length(); }
  double sigma() const { return sigma_; }
  nlohmann::json describe() const override;

 protected:
  double compute(const Sequence& x, std::uint64_t ordinal) const override;

 private:
  std::shared_ptr<const FitnessOracle> base_;
  NoisyOracleConfig cfg_;
  double sigma_;
};

/// Surrogate whose members are independent noisy copies of a ground-truth
/// oracle (member m uses seed derived from (cfg.seed, m)).
class NoisyOracleEnsemble final : public Surrogate {
 public:
  NoisyOracleEnsemble(std::shared_ptr<const FitnessOracle> truth, NoisyOracleConfig cfg, std::size_t members);

  std::size_t sequence_length() const override { return truth_->sequence_length(); }
  std::size_t member_count() const override { return members_.size(); }
  void member_outputs(const Sequence& x, std::span<double> out) const override;
  double sigma() const { return members_.front()->sigma(); }

 private:
  std::shared_ptr<const FitnessOracle> truth_;
  std::vector<std::unique_ptr<NoisyOracle>> members_;
};

/// `x_start` plus size-1 distinct mutants with 1..max_mutations substitutions,
/// each labelled by `oracle`. Throws ExhaustedSpace.
Dataset seed_dataset(const FitnessOracle& oracle, const Sequence& x_start, std::size_t size,
                     std::size_t max_mutations, std::uint64_t seed);

/// Uniformly random sequence of the given length.
Sequence random_sequence(std::size_t length, std::uint64_t seed);

}  // namespace prospero
