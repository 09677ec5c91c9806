#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "foldplan/actions.hpp"
#include "foldplan/crease_pattern.hpp"
#include "foldplan/goal.hpp"

namespace foldplan {

/// Everything the proposal policy conditions on at one step.
struct PolicyContext {
  const GoalSpec& goal;
  const CanonicalPattern& pattern;
  const FoldState& state;
};

/// Finite summary of a context: goal category, step bucket
/// (0-3, 4-7, 8-15, 16+), bucket of fully folded edges (0, 1-3, 4-7, 8-15,
/// 16+) and the flip flag. The frame angle is deliberately absent.
struct ContextKey {
  std::string category;
  int step_bucket = 0;
  int folded_bucket = 0;
  bool flipped = false;

  auto operator<=>(const ContextKey&) const = default;
};

ContextKey featurize_context(const PolicyContext& ctx);

int step_bucket(int step);
int folded_bucket(int fully_folded_edges);

/// Autoregressive proposal model over the unified token space.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual const Vocabulary& vocabulary() const = 0;
  /// Proper distribution over every token in the vocabulary for the token
  /// that follows `prefix` within the current action.
  virtual std::vector<double> next_token_distribution(const PolicyContext& ctx,
                                                      std::span<const Token> prefix) const = 0;
};

/// Conditioning state of the count model: context key plus the previous
/// (order - 1) tokens of the action, BOS-padded.
struct NGramHistory {
  ContextKey key;
  std::vector<Token> tokens;

  auto operator<=>(const NGramHistory&) const = default;
};

/// Additively smoothed n-gram model over action tokens:
/// P(t | h) = (c(h, t) + delta) / (c(h) + delta * |vocab|).
class NGramPolicy final : public Policy {
 public:
  struct Row {
    std::map<Token, std::uint64_t> counts;
    std::uint64_t total = 0;
    bool operator==(const Row&) const = default;
  };

  explicit NGramPolicy(Vocabulary vocab, int order = 3, double delta = 0.1);

  const Vocabulary& vocabulary() const override { return vocab_; }
  std::vector<double> next_token_distribution(const PolicyContext& ctx,
                                              std::span<const Token> prefix) const override;

  int order() const { return order_; }
  double delta() const { return delta_; }
  const std::map<NGramHistory, Row>& table() const { return table_; }

  NGramHistory history(const ContextKey& key, std::span<const Token> prefix) const;
  void add_count(const NGramHistory& history, Token next, std::uint64_t count = 1);
  double probability(const NGramHistory& history, Token next) const;
  std::vector<double> distribution(const NGramHistory& history) const;

  bool operator==(const NGramPolicy& o) const {
    return vocab_ == o.vocab_ && order_ == o.order_ && delta_ == o.delta_ && table_ == o.table_;
  }

 private:
  Vocabulary vocab_;
  int order_;
  double delta_;
  std::map<NGramHistory, Row> table_;
};

/// One expert program: the states it visits and the actions taken.
struct Demonstration {
  GoalSpec goal;
  CanonicalPattern pattern;
  std::vector<FoldState> states;   // states[t] precedes actions[t]
  std::vector<FoldAction> actions;
};

/// Maximum-likelihood counts over all action tokens of the demonstrations.
/// The vocabulary spans the largest pattern in the corpus.
/// Throws Error{EmptyCorpus} when there is no action to count.
NGramPolicy train_mle(std::span<const Demonstration> demonstrations, int order = 3, double delta = 0.1);

/// Sum over token positions of log P(token | context, earlier tokens).
double log_prob(const Policy& policy, const PolicyContext& ctx, const FoldAction& action);

/// Mean per-token negative log-likelihood of the demonstrations.
double mean_token_nll(const Policy& policy, std::span<const Demonstration> demonstrations);

/// Tokens legal at `slot` for a pattern with `num_edges` edges once
/// `banned_edges` are excluded. FOLD and UNFOLD are illegal when no edge is.
std::vector<bool> grammar_mask(Slot slot, const Vocabulary& vocab, int num_edges, const std::set<int>& banned_edges);

/// Indices of the smallest probability-sorted prefix (ties by ascending
/// index) whose mass reaches p.
std::vector<int> nucleus_set(std::span<const double> probs, double p);

/// Grammar-masked nucleus sampling of one complete action.
FoldAction nucleus_sample(const Policy& policy, const PolicyContext& ctx, double p, std::uint64_t seed,
                          const std::set<int>& banned_edges = {});

/// Most likely grammatical action, token by token.
FoldAction greedy_action(const Policy& policy, const PolicyContext& ctx, const std::set<int>& banned_edges = {});

/// Uniform double in [0, 1) from 53 random bits; identical on every platform.
double unit_uniform(std::uint64_t bits);

/// SplitMix64 finalizer, used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace foldplan
