#include "prospero/surrogate.hpp"

#include "prospero/error.hpp"
#include "prospero/log.hpp"
#include "prospero/random.hpp"

#include <algorithm>
#include <numeric>

namespace prospero {

Prediction summarize_members(std::span<const double> outputs) {
  if (outputs.empty()) return {};
  const double n = static_cast<double>(outputs.size());
  double mean = 0.0;
  for (const double v : outputs) mean += v;
  mean /= n;
  double ss = 0.0;
  for (const double v : outputs) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

Prediction Surrogate::predict(const Sequence& x) const {
  if (x.size() != sequence_length()) {
    throw Error(ErrorKind::LengthMismatch, "surrogate expects length " +
                                               std::to_string(sequence_length()) + ", got " +
                                               std::to_string(x.size()));
  }
  std::vector<double> outputs(member_count());
  member_outputs(x, outputs);
  return summarize_members(outputs);
}

std::vector<Prediction> Surrogate::predict(std::span<const Sequence> batch) const {
  std::vector<Prediction> out;
  out.reserve(batch.size());
  for (const auto& x : batch) out.push_back(predict(x));
  return out;
}

void FunctionSurrogate::member_outputs(const Sequence& x, std::span<double> out) const {
  for (std::size_t m = 0; m < members_.size(); ++m) out[m] = members_[m](x);
}

void TrainingConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidConfig, what); };
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (l2_penalty < 0.0) fail("l2_penalty must be non-negative");
  if (batch_size == 0) fail("batch_size must be positive");
  if (max_updates == 0) fail("max_updates must be positive");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) fail("validation_fraction must be in (0, 1)");
  if (patience == 0) fail("patience must be >= 1");
  if (hidden_width == 0) fail("hidden_width must be positive");
  if (members < 2) fail("an ensemble needs at least 2 members");
}

std::vector<std::uint32_t> active_features(const Sequence& x) {
  std::vector<std::uint32_t> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = static_cast<std::uint32_t>(kAlphabetSize * i + x[i].index());
  }
  return out;
}

void MlpEnsemble::member_outputs(const Sequence& x, std::span<double> out) const {
  if (constant_) {
    std::fill(out.begin(), out.end(), target_mean_);
    return;
  }
  const auto features = active_features(x);
  for (std::size_t m = 0; m < members_.size(); ++m) {
    out[m] = target_mean_ + target_scale_ * members_[m].forward(features);
  }
}

namespace {

using Vec = Eigen::VectorXd;

struct AdamState {
  Vec m, v;
  std::size_t t = 0;
};

void optimizer_step(const TrainingConfig& cfg, Vec& params, const Vec& grad, AdamState& state) {
  if (cfg.optimizer == Optimizer::GradientDescent) {
    params -= cfg.learning_rate * grad;
    return;
  }
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  if (state.m.size() != params.size()) {
    state.m = Vec::Zero(params.size());
    state.v = Vec::Zero(params.size());
  }
  ++state.t;
  state.m = beta1 * state.m + (1.0 - beta1) * grad;
  state.v = beta2 * state.v + (1.0 - beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  params.array() -= cfg.learning_rate * (state.m.array() / c1) /
                    ((state.v.array() / c2).sqrt() + eps);
}

struct MemberResult {
  OneHotMlp<double> model;
  std::size_t epochs = 0;
};

MemberResult train_member(std::size_t length, const TrainingConfig& cfg, std::size_t member,
                          std::span<const std::vector<std::uint32_t>> train_x,
                          std::span<const double> train_y,
                          std::span<const std::vector<std::uint32_t>> val_x,
                          std::span<const double> val_y) {
  Rng rng = make_stream(cfg.seed + member, {0x6d656d62ull});
  MemberResult result{OneHotMlp<double>(length, cfg.hidden_width), 0};
  auto& model = result.model;
  model.initialize(length, rng);

  // Bootstrap resample of the training split.
  std::vector<std::size_t> sample(train_x.size());
  for (auto& s : sample) s = uniform_int(rng, 0, train_x.size() - 1);

  AdamState state;
  Vec grad;
  Vec best = model.parameters();
  double best_val = model.loss(val_x, val_y, 0.0, nullptr);
  std::size_t since_best = 0;
  std::size_t updates = 0;

  while (updates < cfg.max_updates) {
    std::shuffle(sample.begin(), sample.end(), rng);
    for (std::size_t start = 0; start < sample.size() && updates < cfg.max_updates;
         start += cfg.batch_size) {
      const std::size_t end = std::min(sample.size(), start + cfg.batch_size);
      model.loss(train_x, train_y, cfg.l2_penalty, &grad,
                 std::span<const std::size_t>(sample).subspan(start, end - start));
      optimizer_step(cfg, model.parameters(), grad, state);
      ++updates;
    }
    ++result.epochs;
    const double val = model.loss(val_x, val_y, 0.0, nullptr);
    if (val < best_val) {
      best_val = val;
      best = model.parameters();
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  model.parameters() = best;
  return result;
}

}  // namespace

MlpEnsemble fit(const Dataset& data, const TrainingConfig& cfg) {
  cfg.validate();
  if (data.size() < 10) {
    throw Error(ErrorKind::InsufficientData, "need at least 10 records, have " + std::to_string(data.size()));
  }
  MlpEnsemble ens;
  ens.length_ = data.sequence_length();
  ens.config_ = cfg;

  const auto ys = data.fitness_values();
  const double mean = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
  double ss = 0.0;
  for (const double y : ys) ss += (y - mean) * (y - mean);
  const double scale = std::sqrt(ss / static_cast<double>(ys.size()));
  ens.target_mean_ = mean;
  if (!(scale > 0.0) || std::all_of(ys.begin(), ys.end(), [&](double y) { return y == ys.front(); })) {
    log_warn("DegenerateTargets: all fitness values equal; using a constant predictor");
    ens.constant_ = true;
    ens.target_mean_ = ys.front();
    ens.target_scale_ = 1.0;
    return ens;
  }
  ens.target_scale_ = scale;

  // Seed-shuffled copy; the last validation_fraction is held out.
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng = make_stream(cfg.seed, {0x73706c74ull});
  std::shuffle(order.begin(), order.end(), split_rng);
  const auto n_val = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(cfg.validation_fraction * static_cast<double>(data.size()))));
  const std::size_t n_train = data.size() - n_val;

  std::vector<std::vector<std::uint32_t>> train_x, val_x;
  std::vector<double> train_y, val_y;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& rec = data[order[i]];
    auto& xs = i < n_train ? train_x : val_x;
    auto& ts = i < n_train ? train_y : val_y;
    xs.push_back(active_features(rec.sequence));
    ts.push_back((rec.fitness - mean) / scale);
  }

  for (std::size_t m = 0; m < cfg.members; ++m) {
    auto r = train_member(ens.length_, cfg, m, train_x, train_y, val_x, val_y);
    ens.members_.push_back(std::move(r.model));
    ens.epochs_.push_back(r.epochs);
  }
  return ens;
}

namespace {

nlohmann::json config_to_json(const TrainingConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"l2_penalty", c.l2_penalty},
          {"batch_size", c.batch_size},
          {"max_updates", c.max_updates},
          {"validation_fraction", c.validation_fraction},
          {"patience", c.patience},
          {"hidden_width", c.hidden_width},
          {"members", c.members},
          {"optimizer", c.optimizer == Optimizer::Adam ? "adam" : "gd"},
          {"seed", c.seed}};
}

TrainingConfig config_from_json(const nlohmann::json& j) {
  TrainingConfig c;
  c.learning_rate = j.at("learning_rate").get<double>();
  c.l2_penalty = j.at("l2_penalty").get<double>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.max_updates = j.at("max_updates").get<std::size_t>();
  c.validation_fraction = j.at("validation_fraction").get<double>();
  c.patience = j.at("patience").get<std::size_t>();
  c.hidden_width = j.at("hidden_width").get<std::size_t>();
  c.members = j.at("members").get<std::size_t>();
  c.optimizer = j.at("optimizer").get<std::string>() == "adam" ? Optimizer::Adam : Optimizer::GradientDescent;
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

constexpr const char* kCheckpointFormat = "prospero-mlp-ensemble";
constexpr int kCheckpointVersion = 1;

}  // namespace

nlohmann::json MlpEnsemble::to_json() const {
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : members_) {
    const auto& p = m.parameters();
    members.push_back({{"hidden", m.hidden_size()},
                       {"params", std::vector<double>(p.data(), p.data() + p.size())}});
  }
  return {{"format", kCheckpointFormat},
          {"version", kCheckpointVersion},
          {"length", length_},
          {"config", config_to_json(config_)},
          {"target_mean", target_mean_},
          {"target_scale", target_scale_},
          {"constant", constant_},
          {"members", members}};
}

MlpEnsemble MlpEnsemble::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kCheckpointFormat ||
        j.at("version").get<int>() != kCheckpointVersion) {
      throw Error(ErrorKind::ParseError, "unsupported checkpoint format or version");
    }
    MlpEnsemble ens;
    ens.length_ = j.at("length").get<std::size_t>();
    ens.config_ = config_from_json(j.at("config"));
    ens.target_mean_ = j.at("target_mean").get<double>();
    ens.target_scale_ = j.at("target_scale").get<double>();
    ens.constant_ = j.at("constant").get<bool>();
    for (const auto& m : j.at("members")) {
      OneHotMlp<double> model(ens.length_, m.at("hidden").get<std::size_t>());
      const auto params = m.at("params").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(params.size()) != model.parameter_count()) {
        throw Error(ErrorKind::ParseError, "member parameter count mismatch");
      }
      model.parameters() = Eigen::Map<const Eigen::VectorXd>(params.data(), model.parameter_count());
      ens.members_.push_back(std::move(model));
      ens.epochs_.push_back(0);
    }
    return ens;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("checkpoint: ") + e.what());
  }
}

}  // namespace prospero
