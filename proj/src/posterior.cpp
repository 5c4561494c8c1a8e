#include "prospero/posterior.hpp"

#include "prospero/error.hpp"

#include <cmath>

namespace prospero {

namespace {

std::vector<std::pair<std::size_t, double>> class_conditional(const LogProbs& lp, ChargeClass cls) {
  const auto p = class_probabilities(lp, cls);
  std::vector<std::pair<std::size_t, double>> out;
  for (const auto m : class_members(cls)) {
    if (p[m] > 0.0) out.emplace_back(m, p[m]);
  }
  return out;
}

struct Enumerator {
  const std::function<double(const Sequence&)>& score;
  const SequencePrior& prior;
  const Sequence& wild_type;
  std::span<const std::size_t> order;
  Posterior& out;

  void visit(MaskedSequence& state, std::size_t depth, double prob) {
    if (depth == order.size()) {
      PosteriorEntry e;
      e.sequence = state.complete();
      e.prior_prob = prob;
      e.unnormalized = score(e.sequence) * prob;
      out.entries.push_back(std::move(e));
      return;
    }
    const std::size_t pos = order[depth];
    const auto cond = class_conditional(prior.conditional_logprobs(state, pos), charge_class(wild_type[pos]));
    for (const auto& [residue, p] : cond) {
      MaskedSequence next = state;
      next.fill(pos, AminoAcid::from_index(residue));
      visit(next, depth + 1, prob * p);
    }
  }
};

}  // namespace

Posterior brute_force_posterior(const std::function<double(const Sequence&)>& score,
                                const SequencePrior& prior, const MaskedSequence& masked,
                                const Sequence& wild_type, std::size_t max_completions) {
  const Permutation perm = build_permutation(masked, wild_type);
  double bound = 1.0;
  for (const auto pos : perm.masked_order()) {
    bound *= static_cast<double>(class_members(charge_class(wild_type[pos])).size());
  }
  if (bound > static_cast<double>(max_completions)) {
    throw Error(ErrorKind::EnumerationTooLarge,
                "up to " + std::to_string(static_cast<long long>(bound)) + " completions");
  }
  Posterior post;
  Enumerator en{score, prior, wild_type, perm.masked_order(), post};
  MaskedSequence state = masked;
  en.visit(state, 0, 1.0);
  for (const auto& e : post.entries) post.normalizer += e.unnormalized;
  if (!(post.normalizer > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "target has zero mass over the completion space");
  }
  for (auto& e : post.entries) e.probability = e.unnormalized / post.normalizer;
  return post;
}

}  // namespace prospero
