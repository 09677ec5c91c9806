#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <numbers>

#include "foldplan/dataset.hpp"
#include "foldplan/error.hpp"
#include "foldplan/io.hpp"
#include "foldplan/planner.hpp"
#include "test_support.hpp"

using namespace foldplan;

namespace {

constexpr double kPi = std::numbers::pi;
const WorldModel kZero;

// Mixture over whole actions; each token distribution is the mass of the
// actions consistent with the prefix, with a small uniform floor.
class ScriptedPolicy final : public Policy {
 public:
  ScriptedPolicy(Vocabulary vocab, std::vector<std::pair<FoldAction, double>> actions, double floor = 1e-6)
      : vocab_(std::move(vocab)), floor_(floor) {
    for (auto& [a, w] : actions) actions_.emplace_back(encode(a, vocab_), w);
  }
  const Vocabulary& vocabulary() const override { return vocab_; }
  std::vector<double> next_token_distribution(const PolicyContext&, std::span<const Token> prefix) const override {
    std::vector<double> p(static_cast<std::size_t>(vocab_.size()), floor_);
    for (const auto& [tokens, w] : actions_) {
      if (tokens.size() <= prefix.size() || !std::equal(prefix.begin(), prefix.end(), tokens.begin())) continue;
      p[static_cast<std::size_t>(tokens[prefix.size()])] += w;
    }
    double total = 0.0;
    for (double x : p) total += x;
    for (double& x : p) x /= total;
    return p;
  }

 private:
  Vocabulary vocab_;
  double floor_;
  std::vector<std::pair<std::vector<Token>, double>> actions_;
};

GoalSpec flat_goal(const CanonicalPattern& c, std::string category = "test") {
  GoalSpec g;
  g.category = std::move(category);
  g.target_alpha.assign(static_cast<std::size_t>(c.num_edges()), 0.0);
  g.target_z = c.pattern().crease_types();
  return g;
}

std::vector<int> creases(const CanonicalPattern& c) {
  std::vector<int> out;
  for (int e = 0; e < c.num_edges(); ++e) {
    if (!c.pattern().is_boundary(e)) out.push_back(e);
  }
  return out;
}

// Hidden unit 0 fires on the acted edge and pushes its angle negative; the
// mask is saturated on; the violation head is constant.
WorldModel acted_edge_model() {
  WorldModel m;
  auto& w = m.mutable_params();
  w[WorldModel::kW1 + 6 * kHiddenUnits + 0] = 3.0;  // input feature 6 (acted) -> unit 0
  w[WorldModel::kWd + 0 * 2 + 0] = -1.0;            // unit 0 -> delta alpha
  w[WorldModel::kBm] = 30.0;
  return m;
}

}  // namespace

TEST_CASE("goal distance") {
  const auto c = canonicalize(fixture_gate());
  const FoldState flat = FoldState::flat(c.pattern());
  GoalSpec g = flat_goal(c);
  CHECK(goal_distance(flat, g) == 0.0);

  CreasePattern one({{0, 0}, {1, 1}}, {{0, 1}}, {CreaseType::Mountain}, {false});
  FoldState s = FoldState::flat(one);
  s.alpha[0] = -kPi;
  s.rho[0] = 1.0;
  s.z[0] = CreaseType::Mountain;
  GoalSpec far{"x", {kPi}, {CreaseType::Mountain}};
  CHECK(goal_distance(s, far) == doctest::Approx(1.0));

  GoalSpec folded = g;
  folded.target_alpha.assign(folded.target_alpha.size(), kPi);
  CHECK(goal_distance(flat, folded) == doctest::Approx(0.5));
  CHECK_THROWS_AS(goal_distance(flat, GoalSpec{"x", {0.0}, {CreaseType::Valley}}), Error);
}

TEST_CASE("config validation") {
  PlannerConfig c;
  CHECK_NOTHROW(validate(c));
  c.K = 0;
  CHECK_THROWS_AS(validate(c), Error);
  c = {};
  c.p = 0.0;
  CHECK_THROWS_AS(validate(c), Error);
  c = {};
  c.epsilon = 0.0;
  CHECK_THROWS_AS(validate(c), Error);
  c = {};
  c.imagination_depth = 4;
  CHECK_THROWS_AS(validate(c), Error);
}

TEST_CASE("fused objective and ordering") {
  PlannerConfig cfg;
  cfg.lambda_goal = 2.0;
  cfg.lambda_cst = 0.5;
  CHECK(fused_score(-1.0, 0.25, 0.5, cfg) == doctest::Approx(-1.0 - 0.5 + 0.5 * std::log(1e-6 + 0.5)));
  CandidateScore a;
  a.action = FoldAction::fold(4, 0, 7);
  a.score = -1.0;
  CandidateScore b = a;
  b.action = FoldAction::fold(2, 0, 7);
  CHECK(better_candidate(b, a));  // tie: lower edge
  b.score = -1.5;
  CHECK(better_candidate(a, b));
  CandidateScore done;
  done.action = FoldAction::done();
  done.score = -1.0;
  CHECK(better_candidate(done, a));  // edge-less first on a tie
  // A common shift changes nothing.
  a.score += 7;
  b.score += 7;
  CHECK(better_candidate(a, b));
}

TEST_CASE("a lone valid candidate is selected") {
  const auto c = canonicalize(fixture_gate());
  const Vocabulary v(c.num_vertices(), c.num_edges());
  const int boundary = foldplan::testing::first_boundary(c);
  const int crease = creases(c).front();
  ScriptedPolicy policy(v, {{FoldAction::fold(boundary, 0, 7), 0.97}, {FoldAction::fold(crease, 0, 7), 0.03}}, 1e-9);
  PlannerConfig cfg;
  cfg.p = 1.0;
  cfg.K = 64;
  const auto r = plan_step(c, FoldState::flat(c.pattern()), flat_goal(c), policy, &kZero, cfg, 3);
  CHECK(r.action == FoldAction::fold(crease, 0, 7));
  const auto& cands = r.diagnostics.rounds.front().candidates;
  CHECK(cands.size() == 2);
}

TEST_CASE("goal progress breaks a likelihood tie") {
  const auto c = canonicalize(fixture_gate());
  const Vocabulary v(c.num_vertices(), c.num_edges());
  const auto cr = creases(c);
  REQUIRE(cr.size() == 2);
  const int low = cr[0];
  const int high = cr[1];
  GoalSpec goal = flat_goal(c);
  goal.target_alpha[static_cast<std::size_t>(high)] = dequantize_angle(0);  // only the higher edge should fold
  ScriptedPolicy policy(v, {{FoldAction::fold(low, 0, 7), 0.5}, {FoldAction::fold(high, 0, 7), 0.5}}, 1e-9);
  PlannerConfig cfg;
  cfg.K = 32;
  cfg.p = 1.0;
  const WorldModel wm = acted_edge_model();
  const auto r = plan_step(c, FoldState::flat(c.pattern()), goal, policy, &wm, cfg, 1);
  const auto& cands = r.diagnostics.rounds.front().candidates;
  REQUIRE(cands.size() == 2);
  CHECK(cands[0].log_prob == doctest::Approx(cands[1].log_prob).epsilon(1e-12));
  CHECK(cands[0].violation == cands[1].violation);
  CHECK(r.action == FoldAction::fold(high, 0, 7));

  // Without the goal and constraint terms the likelier proposal wins.
  ScriptedPolicy skewed(v, {{FoldAction::fold(low, 0, 7), 0.7}, {FoldAction::fold(high, 0, 7), 0.3}}, 1e-9);
  cfg.lambda_goal = 0.0;
  cfg.lambda_cst = 0.0;
  CHECK(plan_step(c, FoldState::flat(c.pattern()), goal, skewed, &wm, cfg, 1).action == FoldAction::fold(low, 0, 7));
}

TEST_CASE("re-sampling bans blamed edges") {
  const auto c = canonicalize(fixture_gate());
  const Vocabulary v(c.num_vertices(), c.num_edges());
  const int boundary = foldplan::testing::first_boundary(c);
  ScriptedPolicy policy(v, {{FoldAction::fold(boundary, 0, 7), 1.0}}, 1e-9);
  PlannerConfig cfg;
  cfg.max_resamples = 0;
  CHECK_THROWS_AS(plan_step(c, FoldState::flat(c.pattern()), flat_goal(c), policy, &kZero, cfg, 0), Error);

  cfg.max_resamples = 3;
  const auto r = plan_step(c, FoldState::flat(c.pattern()), flat_goal(c), policy, &kZero, cfg, 0);
  const auto& rounds = r.diagnostics.rounds;
  REQUIRE(rounds.size() >= 2);
  CHECK(rounds[0].candidates.size() == 1);
  CHECK(rounds[1].banned_edges.count(boundary) == 1);
  for (std::size_t k = 1; k < rounds.size(); ++k) {
    for (const auto& cand : rounds[k].candidates) CHECK(cand.action.edge != std::optional<int>(boundary));
    for (int e : rounds[k - 1].banned_edges) CHECK(rounds[k].banned_edges.count(e) == 1);
  }
  CHECK(r.diagnostics.kernel_calls <= cfg.K * (1 + cfg.max_resamples));
  CHECK(level0::step(c, FoldState::flat(c.pattern()), r.action).verdict.valid);
}

TEST_CASE("rollout termination") {
  const auto c = canonicalize(fixture_book());
  const Vocabulary v(c.num_vertices(), c.num_edges());
  SUBCASE("goal already met and DONE proposed") {
    ScriptedPolicy policy(v, {{FoldAction::done(), 1.0}});
    const auto t = rollout(c, FoldState::flat(c.pattern()), flat_goal(c), policy, &kZero, {});
    REQUIRE(t.steps.size() == 1);
    CHECK(t.steps[0].action == FoldAction::done());
    CHECK(t.termination == Termination::Done);
    CHECK(t.success);
    CHECK(t.final_goal_distance == 0.0);
  }
  SUBCASE("only boundary folds proposed") {
    ScriptedPolicy policy(v, {{FoldAction::fold(foldplan::testing::first_boundary(c), 0, 7), 1.0}}, 0.0);
    PlannerConfig cfg;
    cfg.max_resamples = 0;
    GoalSpec goal = flat_goal(c);
    goal.target_alpha[static_cast<std::size_t>(creases(c).front())] = dequantize_angle(0);
    const auto t = rollout(c, FoldState::flat(c.pattern()), goal, policy, &kZero, cfg);
    CHECK(t.steps.empty());
    CHECK(t.termination == Termination::NoValidAction);
    CHECK_FALSE(t.success);
  }
}

TEST_CASE("rollouts with a trained policy") {
  CorpusConfig cc;
  cc.families = {Family::BookFold, Family::Gate, Family::Radial};
  cc.count = 10;
  cc.per_step = 4;
  const Corpus corpus = generate_corpus(cc);
  const NGramPolicy policy = train_mle(demonstrations(corpus, false));
  const WorldModel wm = WorldModel::random(1);
  for (const auto& prog : corpus.programs) {
    if (!prog.test) continue;
    const auto& c = prog.program.pattern;
    PlannerConfig cfg;
    cfg.seed = 5;
    const Trajectory t = rollout(c, FoldState::flat(c.pattern()), prog.program.goal, policy, &wm, cfg);
    const Trajectory again = rollout(c, FoldState::flat(c.pattern()), prog.program.goal, policy, &wm, cfg);
    CHECK(dump_json(trajectory_to_json(t), FloatFormat::Shortest) ==
          dump_json(trajectory_to_json(again), FloatFormat::Shortest));
    FoldState s = t.initial_state;
    for (const auto& step : t.steps) {
      CHECK(step.verdict.valid);  // hard filter
      const auto k = level0::step(c, s, step.action);
      CHECK(bitwise_equal(k.state, step.state_after));  // executed through the kernel
      s = k.state;
    }
    CHECK(t.success == goal_reached(t.final_state(), prog.program.goal));
    CHECK(t.final_goal_distance == goal_distance(t.final_state(), prog.program.goal));

    PlannerConfig lm = cfg;
    lm.mode = PlannerMode::LmOnly;
    const Trajectory u = rollout(c, FoldState::flat(c.pattern()), prog.program.goal, policy, nullptr, lm);
    for (const auto& step : u.steps) CHECK(step.proposals_total == 1);
  }
  CHECK_THROWS_AS(plan_step(corpus.programs[0].program.pattern,
                            FoldState::flat(corpus.programs[0].program.pattern.pattern()),
                            corpus.programs[0].program.goal, policy, nullptr, PlannerConfig{}, 0),
                  std::invalid_argument);
}
