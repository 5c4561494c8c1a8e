#pragma once

// Ensemble surrogate: predictive mean and dispersion over member outputs,
// the UCB acquisition score, and a from-scratch one-hidden-layer regressor
// over one-hot features trained per member on a bootstrap resample.

#include "prospero/dataset.hpp"
#include "prospero/sequence.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace prospero {

struct Prediction {
  double mean = 0.0;
  double stddev = 0.0;
};

/// mu + k * sigma.
constexpr double ucb(double mean, double stddev, double k) { return mean + k * stddev; }
constexpr double ucb(Prediction p, double k) { return ucb(p.mean, p.stddev, k); }

/// Mean and population standard deviation of member outputs.
Prediction summarize_members(std::span<const double> outputs);

/// Anything that scores complete sequences with an ensemble of members.
class Surrogate {
 public:
  virtual ~Surrogate() = default;

  virtual std::size_t sequence_length() const = 0;
  virtual std::size_t member_count() const = 0;

  /// Writes one output per member into `out` (size member_count()).
  virtual void member_outputs(const Sequence& x, std::span<double> out) const = 0;

  /// Throws LengthMismatch.
  Prediction predict(const Sequence& x) const;
  std::vector<Prediction> predict(std::span<const Sequence> batch) const;
};

/// Surrogate whose members are plain functions; used for exact-table tests
/// and for plugging in known landscapes.
class FunctionSurrogate final : public Surrogate {
 public:
  using Member = std::function<double(const Sequence&)>;

  FunctionSurrogate(std::size_t length, std::vector<Member> members)
      : length_(length), members_(std::move(members)) {}

  std::size_t sequence_length() const override { return length_; }
  std::size_t member_count() const override { return members_.size(); }
  void member_outputs(const Sequence& x, std::span<double> out) const override;

 private:
  std::size_t length_;
  std::vector<Member> members_;
};

enum class Optimizer { Adam, GradientDescent };

struct TrainingConfig {
  double learning_rate = 1e-4;
  double l2_penalty = 1e-4;
  std::size_t batch_size = 256;
  std::size_t max_updates = 3000;
  double validation_fraction = 0.10;
  std::size_t patience = 10;
  std::size_t hidden_width = 64;
  std::size_t members = 3;
  Optimizer optimizer = Optimizer::Adam;
  std::uint64_t seed = 0;

  /// Throws InvalidConfig.
  void validate() const;
};

/// One-hot feature indices of a sequence: 20*i + index(x[i]).
std::vector<std::uint32_t> active_features(const Sequence& x);

/// One-hidden-layer rectified regressor over the flattened one-hot encoding.
/// Only L of the 20L inputs are non-zero, so the first layer is a gather-sum
/// of weight columns. Parameters live in one flat vector:
/// [W1 (hidden x input, column-major) | b1 | w2 | b2].
template <typename Scalar>
class OneHotMlp {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  OneHotMlp() = default;
  OneHotMlp(std::size_t length, std::size_t hidden)
      : input_(static_cast<Eigen::Index>(kAlphabetSize * length)),
        hidden_(static_cast<Eigen::Index>(hidden)),
        params_(Vector::Zero(input_ * hidden_ + 2 * hidden_ + 1)) {}

  Eigen::Index input_size() const { return input_; }
  Eigen::Index hidden_size() const { return hidden_; }
  Eigen::Index parameter_count() const { return params_.size(); }

  Vector& parameters() { return params_; }
  const Vector& parameters() const { return params_; }

  auto first_weights() { return Eigen::Map<Matrix>(params_.data(), hidden_, input_); }
  auto first_weights() const { return Eigen::Map<const Matrix>(params_.data(), hidden_, input_); }
  auto first_bias() { return params_.segment(input_ * hidden_, hidden_); }
  auto first_bias() const { return params_.segment(input_ * hidden_, hidden_); }
  auto second_weights() { return params_.segment(input_ * hidden_ + hidden_, hidden_); }
  auto second_weights() const { return params_.segment(input_ * hidden_ + hidden_, hidden_); }
  Scalar& second_bias() { return params_(params_.size() - 1); }
  Scalar second_bias() const { return params_(params_.size() - 1); }

  /// Weights ~ N(0, 1/fan_in) with fan_in = number of active inputs; biases zero.
  template <typename Rng>
  void initialize(std::size_t active_count, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double s1 = 1.0 / std::sqrt(static_cast<double>(active_count));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_));
    auto w1 = first_weights();
    for (Eigen::Index c = 0; c < w1.cols(); ++c)
      for (Eigen::Index r = 0; r < w1.rows(); ++r) w1(r, c) = Scalar(s1 * normal(rng));
    first_bias().setZero();
    auto w2 = second_weights();
    for (Eigen::Index r = 0; r < w2.size(); ++r) w2(r) = Scalar(s2 * normal(rng));
    second_bias() = Scalar(0);
  }

  Scalar forward(std::span<const std::uint32_t> active) const {
    Vector h = first_bias();
    const auto w1 = first_weights();
    for (const auto a : active) h += w1.col(a);
    return second_weights().dot(h.cwiseMax(Scalar(0))) + second_bias();
  }

  /// Mean squared error over the batch plus l2 * (|W1|^2 + |w2|^2). When
  /// `gradient` is non-null it receives d(loss)/d(parameters).
  Scalar loss(std::span<const std::vector<std::uint32_t>> features, std::span<const Scalar> targets,
              Scalar l2, Vector* gradient, std::span<const std::size_t> rows = {}) const {
    const std::size_t count = rows.empty() ? features.size() : rows.size();
    const auto n = static_cast<Scalar>(count);
    if (gradient) gradient->setZero(params_.size());
    const auto w1 = first_weights();
    const auto w2 = second_weights();
    Scalar sq = 0;
    Vector h(hidden_), r(hidden_), dh(hidden_);
    for (std::size_t jj = 0; jj < count; ++jj) {
      const std::size_t j = rows.empty() ? jj : rows[jj];
      h = first_bias();
      for (const auto a : features[j]) h += w1.col(a);
      r = h.cwiseMax(Scalar(0));
      const Scalar e = w2.dot(r) + second_bias() - targets[j];
      sq += e * e;
      if (!gradient) continue;
      const Scalar dy = Scalar(2) * e / n;
      Vector& g = *gradient;
      g.segment(input_ * hidden_ + hidden_, hidden_) += dy * r;
      g(params_.size() - 1) += dy;
      dh = (h.array() > Scalar(0)).select(dy * w2, Scalar(0));
      g.segment(input_ * hidden_, hidden_) += dh;
      Eigen::Map<Matrix> gw1(g.data(), hidden_, input_);
      for (const auto a : features[j]) gw1.col(a) += dh;
    }
    const Scalar penalty = l2 * (w1.squaredNorm() + w2.squaredNorm());
    if (gradient) {
      gradient->head(input_ * hidden_) += Scalar(2) * l2 * params_.head(input_ * hidden_);
      gradient->segment(input_ * hidden_ + hidden_, hidden_) += Scalar(2) * l2 * w2;
    }
    return sq / n + penalty;
  }

 private:
  Eigen::Index input_ = 0;
  Eigen::Index hidden_ = 0;
  Vector params_;
};

/// Trained ensemble of OneHotMlp members. Immutable after fit().
class MlpEnsemble final : public Surrogate {
 public:
  std::size_t sequence_length() const override { return length_; }
  std::size_t member_count() const override { return constant_ ? config_.members : members_.size(); }
  void member_outputs(const Sequence& x, std::span<double> out) const override;

  const TrainingConfig& config() const { return config_; }
  bool is_constant() const { return constant_; }
  const std::vector<OneHotMlp<double>>& members() const { return members_; }
  /// Epochs run by each member before stopping.
  const std::vector<std::size_t>& epochs_run() const { return epochs_; }

  nlohmann::json to_json() const;
  /// Throws ParseError for malformed or wrong-version checkpoints.
  static MlpEnsemble from_json(const nlohmann::json& j);

  friend MlpEnsemble fit(const Dataset& data, const TrainingConfig& cfg);

 private:
  std::size_t length_ = 0;
  TrainingConfig config_;
  double target_mean_ = 0.0;
  double target_scale_ = 1.0;
  bool constant_ = false;
  std::vector<OneHotMlp<double>> members_;
  std::vector<std::size_t> epochs_;
};

/// Trains config.members regressors, member m on its own bootstrap resample
/// with init seed cfg.seed + m. Targets are standardized internally.
/// Throws InsufficientData (< 10 records); all-equal targets yield a constant
/// predictor with zero dispersion and a warning.
MlpEnsemble fit(const Dataset& data, const TrainingConfig& cfg);

}  // namespace prospero
