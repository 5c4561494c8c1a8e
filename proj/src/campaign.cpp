#include "prospero/campaign.hpp"

#include "prospero/csv.hpp"
#include "prospero/error.hpp"
#include "prospero/log.hpp"
#include "prospero/random.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

namespace prospero {

namespace {

constexpr std::uint64_t kMaskSeedTag = 0x6d61736bull;
constexpr std::uint64_t kSmcSeedTag = 0x736d6373ull;
constexpr std::uint64_t kSurrogateSeedTag = 0x73757267ull;

nlohmann::json positions_1based(const std::vector<std::size_t>& positions) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto p : positions) out.push_back(p + 1);
  return out;
}

void finalize_metrics(CampaignResult& result, const Dataset& d0) {
  Dataset pool = result.generated();
  if (pool.empty()) {
    pool = d0;
    result.metrics_from_d0 = true;
  }
  result.metrics = metrics_report(pool, result.initial_x_start);
  std::vector<Sequence> top;
  for (const auto i : top_indices(pool)) top.push_back(pool[i].sequence);
  const auto reference = d0.sequences();
  if (d0.sequence_length() >= 2) result.metrics.validity = validity(top, reference);
}

}  // namespace

const std::vector<AblationVariant>& ablation_variants() {
  static const std::vector<AblationVariant> variants = {
      {"full", {true, true, true}},
      {"no_smc", {false, true, true}},
      {"random_mask", {true, false, true}},
      {"no_smc_random_mask", {false, false, true}},
      {"no_smc_random_mask_no_raa", {false, false, false}},
  };
  return variants;
}

void CampaignConfig::validate(std::size_t length) const {
  if (oracle_budget < 1) throw Error(ErrorKind::InvalidConfig, "oracle_budget_K must be >= 1");
  if (jobs < 1) throw Error(ErrorKind::InvalidConfig, "jobs must be >= 1");
  masking.validate(length);
  SmcConfig s = smc;
  s.particles = masking.batch;
  s.oracle_budget = oracle_budget;
  s.jobs = jobs;
  s.validate();
  if (rounds > 0) surrogate.validate();
}

SurrogateFactory mlp_surrogate_factory(TrainingConfig cfg) {
  return [cfg](const Dataset& data, std::size_t, std::uint64_t seed) -> std::shared_ptr<const Surrogate> {
    TrainingConfig c = cfg;
    c.seed = seed;
    return std::make_shared<MlpEnsemble>(fit(data, c));
  };
}

bool preserves_charge_classes(const Sequence& x, const Sequence& reference) {
  if (x.size() != reference.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (charge_class(x[i]) != charge_class(reference[i])) return false;
  }
  return true;
}

nlohmann::json RoundTrace::to_json() const {
  nlohmann::json masks = nlohmann::json::array();
  for (const auto& m : mask_sets) masks.push_back(positions_1based(m));
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : candidates) {
    cands.push_back({{"sequence", c.sequence.str()},
                     {"score", c.score},
                     {"fitness", c.fitness},
                     {"step", c.step},
                     {"class_preserving", c.class_preserving}});
  }
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : smc_steps) {
    steps.push_back({{"step", s.step}, {"ess", s.ess}, {"top_score", s.top_score}, {"weight_entropy", s.weight_entropy}});
  }
  return {{"round", round},
          {"x_start", x_start.str()},
          {"x_start_fitness", x_start_fitness},
          {"best_so_far", best_so_far},
          {"oracle_calls", oracle_calls},
          {"buffer_size", buffer_size},
          {"constraint_violations", constraint_violations},
          {"zero_mass_fallbacks", zero_mass_fallbacks},
          {"uniform_weight_fallbacks", uniform_weight_fallbacks},
          {"mask_sets", masks},
          {"smc_steps", steps},
          {"candidates", cands}};
}

Dataset CampaignResult::generated() const {
  Dataset g;
  for (const auto& r : dataset.records()) {
    if (r.round > 0) g.add(r.sequence, r.fitness, r.round);
  }
  return g;
}

nlohmann::json CampaignResult::report_json() const {
  nlohmann::json best = nlohmann::json::array();
  for (const auto& r : rounds) best.push_back(r.best_so_far);
  nlohmann::json j = metrics.to_json();
  j["flags"]["metrics_from_d0"] = metrics_from_d0;
  j["x_start"] = initial_x_start.str();
  j["x_start_fitness"] = initial_fitness;
  j["rounds"] = rounds.size();
  j["d0_size"] = d0_size;
  j["evaluated"] = dataset.size() - d0_size;
  j["oracle_calls"] = oracle_calls;
  j["constraint_violations"] = constraint_violations;
  j["best_so_far"] = best;
  return j;
}

std::string CampaignResult::trace_jsonl() const {
  std::string out;
  for (const auto& r : rounds) out += r.to_json().dump() + "\n";
  return out;
}

CampaignResult run_campaign(const CampaignConfig& cfg, const FitnessOracle& oracle, const SequencePrior& prior,
                            const Dataset& d0, const SurrogateFactory& surrogate_factory) {
  if (d0.empty()) throw Error(ErrorKind::EmptyDataset, "campaign needs a non-empty initial dataset");
  const std::size_t length = d0.sequence_length();
  if (oracle.sequence_length() != length) {
    throw Error(ErrorKind::LengthMismatch, "oracle length " + std::to_string(oracle.sequence_length()) +
                                               " vs dataset length " + std::to_string(length));
  }
  cfg.validate(length);

  CampaignResult result;
  result.dataset = d0;
  result.d0_size = d0.size();
  result.initial_x_start = d0[d0.best_index()].sequence;
  result.initial_fitness = d0[d0.best_index()].fitness;
  double best = result.initial_fitness;

  for (std::size_t n = 1; n <= cfg.rounds; ++n) {
    RoundTrace trace;
    trace.round = n;
    // Any oracle use during the round counts, not only candidate evaluation.
    const std::size_t before = oracle.query_count();
    const Dataset& data = result.dataset;
    const auto surrogate = surrogate_factory(data, n, derive_seed(cfg.seed, {kSurrogateSeedTag, n}));
    const auto start_idx = data.best_index();
    trace.x_start = data[start_idx].sequence;
    trace.x_start_fitness = data[start_idx].fitness;

    MaskingConfig mcfg = cfg.masking;
    mcfg.seed = derive_seed(cfg.seed, {kMaskSeedTag, n});
    const auto batch = cfg.ablation.use_targeted_masking ? targeted_masking(trace.x_start, *surrogate, mcfg)
                                                         : random_masking(trace.x_start, mcfg);
    for (const auto& m : batch) trace.mask_sets.push_back(m.mask_set());

    SmcConfig scfg = cfg.smc;
    scfg.particles = mcfg.batch;
    scfg.oracle_budget = cfg.oracle_budget;
    scfg.use_resampling = cfg.ablation.use_smc_resampling;
    scfg.use_raa_constraint = cfg.ablation.use_raa_constraint;
    scfg.jobs = cfg.jobs;
    scfg.seed = derive_seed(cfg.seed, {kSmcSeedTag, n});
    SmcResult smc = constrained_smc(batch, trace.x_start, prior, *surrogate, scfg,
                                    [&](const Sequence& s) { return data.contains(s); });
    trace.smc_steps = std::move(smc.trace);
    trace.buffer_size = smc.buffer_size;
    trace.zero_mass_fallbacks = smc.zero_mass_fallbacks;
    trace.uniform_weight_fallbacks = smc.uniform_weight_fallbacks;

    for (auto& rec : smc.candidates) {
      if (result.dataset.contains(rec.sequence)) continue;
      CandidateRecord c;
      c.sequence = std::move(rec.sequence);
      c.score = rec.score;
      c.step = rec.step;
      c.class_preserving = preserves_charge_classes(c.sequence, trace.x_start);
      c.fitness = oracle.evaluate(c.sequence);
      if (!c.class_preserving) ++trace.constraint_violations;
      result.dataset.add(c.sequence, c.fitness, static_cast<int>(n));
      best = std::max(best, c.fitness);
      trace.candidates.push_back(std::move(c));
    }
    trace.oracle_calls = oracle.query_count() - before;
    if (trace.oracle_calls > cfg.oracle_budget || trace.oracle_calls != trace.candidates.size()) {
      throw Error(ErrorKind::BudgetExceeded, "round " + std::to_string(n) + " used " +
                                                 std::to_string(trace.oracle_calls) + " oracle calls");
    }
    trace.best_so_far = best;
    result.oracle_calls += trace.oracle_calls;
    result.constraint_violations += trace.constraint_violations;
    log_info("round " + std::to_string(n) + ": " + std::to_string(trace.oracle_calls) +
             " evaluated, best so far " + format_double(best));
    result.rounds.push_back(std::move(trace));
  }

  finalize_metrics(result, d0);
  return result;
}

CampaignResult reconstruct_campaign(const Dataset& all, std::size_t rounds) {
  Dataset d0;
  for (const auto& r : all.records()) {
    if (r.round == 0) d0.add(r.sequence, r.fitness, 0);
  }
  if (d0.empty()) throw Error(ErrorKind::EmptyDataset, "saved dataset has no round-0 records");
  CampaignResult result;
  result.dataset = d0;
  result.d0_size = d0.size();
  result.initial_x_start = d0[d0.best_index()].sequence;
  result.initial_fitness = d0[d0.best_index()].fitness;
  double best = result.initial_fitness;
  for (std::size_t n = 1; n <= rounds; ++n) {
    RoundTrace trace;
    trace.round = n;
    trace.x_start = result.dataset[result.dataset.best_index()].sequence;
    trace.x_start_fitness = result.dataset[result.dataset.best_index()].fitness;
    for (const auto& r : all.records()) {
      if (r.round != static_cast<int>(n)) continue;
      CandidateRecord c;
      c.sequence = r.sequence;
      c.fitness = r.fitness;
      c.class_preserving = preserves_charge_classes(c.sequence, trace.x_start);
      if (!c.class_preserving) ++trace.constraint_violations;
      best = std::max(best, c.fitness);
      trace.candidates.push_back(std::move(c));
    }
    for (const auto& c : trace.candidates) result.dataset.add(c.sequence, c.fitness, static_cast<int>(n));
    trace.oracle_calls = trace.candidates.size();
    trace.best_so_far = best;
    result.oracle_calls += trace.oracle_calls;
    result.constraint_violations += trace.constraint_violations;
    result.rounds.push_back(std::move(trace));
  }
  if (result.dataset.size() != all.size()) {
    throw Error(ErrorKind::ParseError, "saved dataset has records beyond round " + std::to_string(rounds));
  }
  finalize_metrics(result, d0);
  return result;
}

void write_campaign_outputs(const CampaignResult& result, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create '" + dir + "': " + ec.message());
  const std::filesystem::path base(dir);
  write_text_file((base / "trace.jsonl").string(), result.trace_jsonl());
  write_text_file((base / "dataset.csv").string(), result.dataset.to_csv());
  write_text_file((base / "report.json").string(), result.report_json().dump(2) + "\n");
}

}  // namespace prospero
