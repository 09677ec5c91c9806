#include "foldplan/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "foldplan/error.hpp"

namespace foldplan {

int step_bucket(int step) {
  if (step < 4) return 0;
  if (step < 8) return 1;
  if (step < 16) return 2;
  return 3;
}

int folded_bucket(int fully_folded_edges) {
  if (fully_folded_edges == 0) return 0;
  if (fully_folded_edges < 4) return 1;
  if (fully_folded_edges < 8) return 2;
  if (fully_folded_edges < 16) return 3;
  return 4;
}

ContextKey featurize_context(const PolicyContext& ctx) {
  const int folded = static_cast<int>(std::count(ctx.state.rho.begin(), ctx.state.rho.end(), 1.0));
  return {ctx.goal.category, step_bucket(ctx.state.step), folded_bucket(folded), ctx.state.b};
}

NGramPolicy::NGramPolicy(Vocabulary vocab, int order, double delta)
    : vocab_(std::move(vocab)), order_(order), delta_(delta) {
  if (order < 1) throw std::invalid_argument("n-gram order must be at least 1");
  if (!(delta > 0.0)) throw std::invalid_argument("smoothing constant must be positive");
}

NGramHistory NGramPolicy::history(const ContextKey& key, std::span<const Token> prefix) const {
  NGramHistory h{key, std::vector<Token>(static_cast<std::size_t>(order_ - 1), vocab_.bos())};
  const std::size_t keep = std::min(prefix.size(), h.tokens.size());
  std::copy(prefix.end() - static_cast<std::ptrdiff_t>(keep), prefix.end(),
            h.tokens.end() - static_cast<std::ptrdiff_t>(keep));
  return h;
}

void NGramPolicy::add_count(const NGramHistory& history, Token next, std::uint64_t count) {
  if (next < 0 || next >= vocab_.size()) throw std::invalid_argument("token outside the vocabulary");
  Row& row = table_[history];
  row.counts[next] += count;
  row.total += count;
}

double NGramPolicy::probability(const NGramHistory& history, Token next) const {
  const double denom_extra = delta_ * vocab_.size();
  const auto it = table_.find(history);
  if (it == table_.end()) return delta_ / denom_extra;
  const auto c = it->second.counts.find(next);
  const double count = c == it->second.counts.end() ? 0.0 : static_cast<double>(c->second);
  return (count + delta_) / (static_cast<double>(it->second.total) + denom_extra);
}

std::vector<double> NGramPolicy::distribution(const NGramHistory& history) const {
  const auto size = static_cast<std::size_t>(vocab_.size());
  const auto it = table_.find(history);
  const double total = it == table_.end() ? 0.0 : static_cast<double>(it->second.total);
  const double denom = total + delta_ * static_cast<double>(size);
  std::vector<double> probs(size, delta_ / denom);
  if (it != table_.end()) {
    for (const auto& [token, count] : it->second.counts) {
      probs[static_cast<std::size_t>(token)] = (static_cast<double>(count) + delta_) / denom;
    }
  }
  return probs;
}

std::vector<double> NGramPolicy::next_token_distribution(const PolicyContext& ctx,
                                                         std::span<const Token> prefix) const {
  return distribution(history(featurize_context(ctx), prefix));
}

NGramPolicy train_mle(std::span<const Demonstration> demonstrations, int order, double delta) {
  int max_vertices = 0;
  int max_edges = 0;
  std::size_t actions = 0;
  for (const auto& demo : demonstrations) {
    if (demo.states.size() < demo.actions.size()) {
      throw std::invalid_argument("demonstration has fewer states than actions");
    }
    max_vertices = std::max(max_vertices, demo.pattern.num_vertices());
    max_edges = std::max(max_edges, demo.pattern.num_edges());
    actions += demo.actions.size();
  }
  if (actions == 0) throw Error(ErrorKind::EmptyCorpus, "no expert actions to learn from");

  NGramPolicy policy(Vocabulary(max_vertices, max_edges), order, delta);
  for (const auto& demo : demonstrations) {
    for (std::size_t t = 0; t < demo.actions.size(); ++t) {
      const PolicyContext ctx{demo.goal, demo.pattern, demo.states[t]};
      const ContextKey key = featurize_context(ctx);
      const auto tokens = encode(demo.actions[t], policy.vocabulary());
      for (std::size_t k = 0; k < tokens.size(); ++k) {
        policy.add_count(policy.history(key, std::span(tokens).first(k)), tokens[k]);
      }
    }
  }
  return policy;
}

double log_prob(const Policy& policy, const PolicyContext& ctx, const FoldAction& action) {
  const auto tokens = encode(action, policy.vocabulary());
  double total = 0.0;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    const auto probs = policy.next_token_distribution(ctx, std::span(tokens).first(k));
    total += std::log(probs[static_cast<std::size_t>(tokens[k])]);
  }
  return total;
}

double mean_token_nll(const Policy& policy, std::span<const Demonstration> demonstrations) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& demo : demonstrations) {
    for (std::size_t t = 0; t < demo.actions.size(); ++t) {
      const PolicyContext ctx{demo.goal, demo.pattern, demo.states[t]};
      total -= log_prob(policy, ctx, demo.actions[t]);
      count += encode(demo.actions[t], policy.vocabulary()).size();
    }
  }
  if (count == 0) throw Error(ErrorKind::EmptyCorpus, "no tokens to score");
  return total / static_cast<double>(count);
}

std::vector<bool> grammar_mask(Slot slot, const Vocabulary& vocab, int num_edges, const std::set<int>& banned_edges) {
  std::vector<bool> mask(static_cast<std::size_t>(vocab.size()), false);
  const int edge_limit = std::min(num_edges, vocab.num_edges());
  bool any_edge = false;
  for (int e = 0; e < edge_limit; ++e) {
    if (!banned_edges.contains(e)) {
      any_edge = true;
      if (slot == Slot::Edge) mask[static_cast<std::size_t>(vocab.edge(e))] = true;
    }
  }
  switch (slot) {
    case Slot::Op:
      for (int i = 0; i < kNumOps; ++i) {
        const auto op = static_cast<OpCode>(i);
        if ((op == OpCode::Fold || op == OpCode::Unfold) && !any_edge) continue;
        mask[static_cast<std::size_t>(vocab.op(op))] = true;
      }
      break;
    case Slot::AngleBin:
      for (int b = 0; b < kAngleBins; ++b) mask[static_cast<std::size_t>(vocab.angle(b))] = true;
      break;
    case Slot::RhoBin:
      for (int b = 0; b < kRhoBins; ++b) mask[static_cast<std::size_t>(vocab.rho(b))] = true;
      break;
    case Slot::Quarter:
      for (int q = 0; q < 4; ++q) mask[static_cast<std::size_t>(vocab.angle(rotation_angle_bin(q)))] = true;
      break;
    case Slot::Edge:
    case Slot::End:
      break;
  }
  return mask;
}

std::vector<int> nucleus_set(std::span<const double> probs, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorKind::OutOfRange, "nucleus mass must be in (0, 1]");
  std::vector<int> order;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) order.push_back(static_cast<int>(i));
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return probs[static_cast<std::size_t>(a)] > probs[static_cast<std::size_t>(b)];
  });
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  double cumulative = 0.0;
  std::size_t keep = 0;
  while (keep < order.size()) {
    cumulative += probs[static_cast<std::size_t>(order[keep])];
    ++keep;
    if (cumulative >= p * total) break;
  }
  order.resize(keep);
  return order;
}

double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

std::vector<double> masked(std::vector<double> probs, const std::vector<bool>& mask) {
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!mask[i]) probs[i] = 0.0;
    total += probs[i];
  }
  if (!(total > 0.0)) throw std::logic_error("grammar mask removed every token");
  for (double& p : probs) p /= total;
  return probs;
}

template <typename Choose>
FoldAction decode_with(const Policy& policy, const PolicyContext& ctx, const std::set<int>& banned, Choose choose) {
  const Vocabulary& vocab = policy.vocabulary();
  std::vector<Token> prefix;
  for (Slot slot = Slot::Op; slot != Slot::End; slot = next_slot(prefix, vocab)) {
    const auto mask = grammar_mask(slot, vocab, ctx.pattern.num_edges(), banned);
    const auto probs = masked(policy.next_token_distribution(ctx, prefix), mask);
    prefix.push_back(choose(probs));
  }
  return decode(prefix, vocab);
}

}  // namespace

FoldAction nucleus_sample(const Policy& policy, const PolicyContext& ctx, double p, std::uint64_t seed,
                          const std::set<int>& banned_edges) {
  std::mt19937_64 rng(seed);
  return decode_with(policy, ctx, banned_edges, [&](const std::vector<double>& probs) {
    const auto nucleus = nucleus_set(probs, p);
    double mass = 0.0;
    for (int i : nucleus) mass += probs[static_cast<std::size_t>(i)];
    const double u = unit_uniform(rng()) * mass;
    double cumulative = 0.0;
    for (int i : nucleus) {
      cumulative += probs[static_cast<std::size_t>(i)];
      if (u < cumulative) return i;
    }
    return nucleus.back();
  });
}

FoldAction greedy_action(const Policy& policy, const PolicyContext& ctx, const std::set<int>& banned_edges) {
  return decode_with(policy, ctx, banned_edges, [](const std::vector<double>& probs) {
    return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
  });
}

}  // namespace foldplan
