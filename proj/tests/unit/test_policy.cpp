#include <doctest.h>

#include <cmath>
#include <numeric>

#include "foldplan/dataset.hpp"
#include "foldplan/error.hpp"
#include "foldplan/policy.hpp"

using namespace foldplan;

namespace {

struct Fixture {
  CanonicalPattern pattern = canonicalize(fixture_gate());
  GoalSpec goal;
  FoldState state = FoldState::flat(pattern.pattern());
  Fixture() {
    goal.category = "crane";
    goal.target_alpha.assign(static_cast<std::size_t>(pattern.num_edges()), 0.0);
    goal.target_z = pattern.pattern().crease_types();
  }
  PolicyContext ctx() const { return {goal, pattern, state}; }
};

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("context features") {
  Fixture f;
  const ContextKey key = featurize_context(f.ctx());
  CHECK(key == ContextKey{"crane", 0, 0, false});
  CHECK(featurize_context(f.ctx()) == key);
  f.state.psi = 1.5;
  CHECK(featurize_context(f.ctx()) == key);
  f.state.b = true;
  CHECK(featurize_context(f.ctx()).flipped);

  CHECK(step_bucket(0) == 0);
  CHECK(step_bucket(3) == 0);
  CHECK(step_bucket(4) == 1);
  CHECK(step_bucket(8) == 2);
  CHECK(step_bucket(15) == 2);
  CHECK(step_bucket(16) == 3);
  CHECK(step_bucket(400) == 3);
}

TEST_CASE("additive smoothing") {
  const Vocabulary vocab(4, 6);
  NGramPolicy policy(vocab, 3, 0.1);
  const NGramHistory h = policy.history({"x", 0, 0, false}, {});
  policy.add_count(h, vocab.op(OpCode::Fold), 40);
  const double n = vocab.size();
  CHECK(policy.probability(h, vocab.op(OpCode::Fold)) == doctest::Approx((40 + 0.1) / (40 + 0.1 * n)).epsilon(1e-15));
  CHECK(policy.probability(h, vocab.op(OpCode::Done)) == doctest::Approx(0.1 / (40 + 0.1 * n)).epsilon(1e-15));
  CHECK(sum(policy.distribution(h)) == doctest::Approx(1.0).epsilon(1e-12));

  // Unseen history: uniform.
  Fixture f;
  const NGramPolicy empty(Vocabulary(f.pattern.num_vertices(), f.pattern.num_edges()));
  const double size = empty.vocabulary().size();
  CHECK(log_prob(empty, f.ctx(), FoldAction::done()) == doctest::Approx(-std::log(size)).epsilon(1e-12));
  // Additive over positions.
  CHECK(log_prob(empty, f.ctx(), FoldAction::fold(1, 2, 3)) == doctest::Approx(-4 * std::log(size)).epsilon(1e-12));
}

TEST_CASE("maximum likelihood counts and held-out likelihood") {
  CorpusConfig config;
  config.count = 15;
  config.per_step = 1;
  config.seed = 4;
  const Corpus corpus = generate_corpus(config);
  const auto train = demonstrations(corpus, false);
  const auto test = demonstrations(corpus, true);
  REQUIRE(train.size() + test.size() >= 100);
  const NGramPolicy policy = train_mle(train);

  // Every token occurrence is counted exactly once.
  std::uint64_t tokens = 0;
  for (const auto& d : train) {
    for (const auto& a : d.actions) tokens += encode(a, policy.vocabulary()).size();
  }
  std::uint64_t counted = 0;
  for (const auto& [history, row] : policy.table()) {
    std::uint64_t row_sum = 0;
    for (const auto& [tok, c] : row.counts) row_sum += c;
    CHECK(row_sum == row.total);
    counted += row.total;
    CHECK(sum(policy.distribution(history)) == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(counted == tokens);

  const NGramPolicy uniform(policy.vocabulary());
  CHECK(mean_token_nll(uniform, test) == doctest::Approx(std::log(double(policy.vocabulary().size()))).epsilon(1e-12));
  CHECK(mean_token_nll(policy, test) < mean_token_nll(uniform, test));

  CHECK_THROWS_AS(train_mle(std::vector<Demonstration>{}), Error);
}

TEST_CASE("distributions are proper at every position") {
  Fixture f;
  CorpusConfig config;
  config.families = {Family::Gate};
  config.count = 6;
  config.per_step = 1;
  const NGramPolicy policy = train_mle(demonstrations(generate_corpus(config), false));
  const Vocabulary& v = policy.vocabulary();
  for (const auto& prefix : std::vector<std::vector<Token>>{
           {}, {v.op(OpCode::Fold)}, {v.op(OpCode::Fold), v.edge(3)}, {v.op(OpCode::Fold), v.edge(3), v.angle(0)}}) {
    CHECK(sum(policy.next_token_distribution(f.ctx(), prefix)) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("nucleus set") {
  const std::vector<double> probs = {0.5, 0.3, 0.15, 0.05};
  CHECK(nucleus_set(probs, 0.9) == std::vector<int>{0, 1, 2});
  CHECK(nucleus_set(probs, 1.0).size() == 4);
  CHECK(nucleus_set(probs, 0.5) == std::vector<int>{0});
  CHECK(nucleus_set(std::vector<double>{0.25, 0.25, 0.25, 0.25}, 0.5) == std::vector<int>{0, 1});
  CHECK(nucleus_set(std::vector<double>{0.1, 0.6, 0.3}, 0.8) == std::vector<int>{1, 2});
  CHECK_THROWS_AS(nucleus_set(probs, 0.0), Error);
  CHECK_THROWS_AS(nucleus_set(probs, 1.5), Error);
}

TEST_CASE("grammar-masked sampling") {
  Fixture f;
  const NGramPolicy policy(Vocabulary(f.pattern.num_vertices(), f.pattern.num_edges()));
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const FoldAction a = nucleus_sample(policy, f.ctx(), 0.9, seed, {2, 3});
    CHECK(is_well_formed(a));
    if (a.edge) {
      CHECK(*a.edge < f.pattern.num_edges());
      CHECK(*a.edge != 2);
      CHECK(*a.edge != 3);
    }
    CHECK(nucleus_sample(policy, f.ctx(), 0.9, seed, {2, 3}) == a);
  }
  std::set<int> all;
  for (int e = 0; e < f.pattern.num_edges(); ++e) all.insert(e);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const FoldAction a = nucleus_sample(policy, f.ctx(), 1.0, seed, all);
    CHECK(a.op != OpCode::Fold);
    CHECK(a.op != OpCode::Unfold);
  }
  const auto mask = grammar_mask(Slot::Op, policy.vocabulary(), f.pattern.num_edges(), all);
  CHECK_FALSE(mask[static_cast<std::size_t>(policy.vocabulary().op(OpCode::Fold))]);
  CHECK(mask[static_cast<std::size_t>(policy.vocabulary().op(OpCode::Done))]);
  CHECK_FALSE(mask[static_cast<std::size_t>(policy.vocabulary().eos())]);
}

TEST_CASE("scores depend only on features and the canonical pattern") {
  CorpusConfig config;
  config.families = {Family::Gate, Family::BookFold};
  config.count = 8;
  config.per_step = 1;
  const NGramPolicy policy = train_mle(demonstrations(generate_corpus(config), false));
  Fixture a;
  a.goal.category = "gate";
  Fixture b;
  b.goal.category = "gate";
  b.state.psi = 2.0;
  b.goal.target_alpha.assign(b.goal.target_alpha.size(), 1.0);  // only the category reaches the policy
  for (const auto& act : {FoldAction::fold(3, 0, 7), FoldAction::done(), FoldAction::rotate(1)}) {
    CHECK(log_prob(policy, a.ctx(), act) == log_prob(policy, b.ctx(), act));
  }
}

TEST_CASE("seed helpers") {
  CHECK(unit_uniform(0) == 0.0);
  CHECK(unit_uniform(~0ULL) < 1.0);
  CHECK(mix_seed(1, 2) != mix_seed(2, 1));
  CHECK(mix_seed(1, 2) == mix_seed(1, 2));
}
