#include <doctest.h>

#include <numbers>

#include "foldplan/dataset.hpp"
#include "foldplan/error.hpp"
#include "foldplan/io.hpp"
#include "test_support.hpp"

using namespace foldplan;

TEST_CASE("CP files are byte-stable with nine decimals") {
  const auto p = canonicalize(fixture_gate()).pattern();
  const std::string text = serialize_cp(p);
  CHECK(text.find("0.250000000") != std::string::npos);
  CHECK(text.find("\"version\"") < text.find("\"vertices\""));
  CHECK(text.find("\"vertices\"") < text.find("\"edges\""));
  CHECK(text.find("\"edges\"") < text.find("\"crease_types\""));
  CHECK(text.find("\"crease_types\"") < text.find("\"boundary\""));
  CHECK(parse_cp(text) == p);
  CHECK(serialize_cp(parse_cp(text)) == text);
  CHECK_THROWS_AS(parse_cp("{\"version\": 1}"), Error);
  CHECK_THROWS_AS(parse_cp("not json"), Error);
}

TEST_CASE("the pattern reference ignores the category") {
  const auto a = canonicalize(fixture_book());
  const auto b = canonicalize(fixture_book().with_category("other"));
  CHECK(pattern_ref(a) == pattern_ref(b));
  CHECK(pattern_ref(a) != pattern_ref(canonicalize(fixture_gate())));
}

TEST_CASE("action schema") {
  const auto j = action_to_json(FoldAction::fold(3, 15, 7));
  CHECK(j.dump() == R"({"op":"FOLD","edge":3,"angle_bin":15,"rho_bin":7})");
  for (const auto& a : {FoldAction::fold(1, 2, 3), FoldAction::unfold(4), FoldAction::flip(), FoldAction::rotate(2),
                        FoldAction::done()}) {
    CHECK(action_from_json(json::parse(action_to_json(a).dump())) == a);
  }
  CHECK_THROWS_AS(action_from_json(json::parse(R"({"op":"FOLD","edge":3})")), Error);
  CHECK_THROWS_AS(action_from_json(json::parse(R"({"op":"DONE","edge":3})")), Error);
  CHECK_THROWS_AS(action_from_json(json::parse(R"({"op":"CRUMPLE"})")), Error);
  const std::vector<FoldAction> program = {FoldAction::fold(1, 0, 7), FoldAction::done()};
  CHECK(program_from_json(json::parse(program_to_json(program).dump())) == program);
}

TEST_CASE("state, verdict and goal round-trip") {
  const auto c = canonicalize(fixture_gate());
  const auto r = level0::step(c, FoldState::flat(c.pattern()), FoldAction::fold(testing::first_crease(c), 1, 5));
  REQUIRE(r.verdict.valid);
  CHECK(state_from_json(json::parse(dump_json(state_to_json(r.state), FloatFormat::Shortest))) == r.state);
  CHECK(verdict_from_json(json::parse(verdict_to_json(r.verdict).dump()), c.num_edges()) == r.verdict);
  const GoalSpec g = goal_from_state("gate", r.state);
  CHECK(goal_from_json(json::parse(dump_json(goal_to_json(g), FloatFormat::Shortest))) == g);
}

TEST_CASE("policy and checkpoint files round-trip") {
  CorpusConfig config;
  config.families = {Family::Gate, Family::Grid};
  config.count = 3;
  config.per_step = 2;
  const Corpus corpus = generate_corpus(config);
  const NGramPolicy policy = train_mle(demonstrations(corpus, false));
  CHECK(policy_from_json(json::parse(dump_json(policy_to_json(policy), FloatFormat::Shortest))) == policy);

  const WorldModel m = WorldModel::random(4);
  const auto text = dump_json(world_model_to_json(m), FloatFormat::Shortest);
  CHECK(world_model_from_json(json::parse(text)) == m);
  auto broken = json::parse(text);
  broken["W1"]["shape"] = {3, 3};
  CHECK_THROWS_AS(world_model_from_json(broken), Error);
}

TEST_CASE("planner config") {
  PlannerConfig c;
  c.K = 5;
  c.mode = PlannerMode::LmWm;
  c.aggregate = ViolationAggregate::Mean;
  CHECK(config_from_json(json::parse(config_to_json(c).dump())) == c);
  const auto partial = config_from_json(json::parse(R"({"K": 4})"));
  CHECK(partial.K == 4);
  CHECK(partial.p == PlannerConfig{}.p);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"kk": 4})")), Error);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"p": 2.0})")), Error);
}

TEST_CASE("trajectory files round-trip") {
  CorpusConfig config;
  config.families = {Family::BookFold};
  config.count = 2;
  config.per_step = 2;
  const Corpus corpus = generate_corpus(config);
  const NGramPolicy policy = train_mle(demonstrations(corpus, false));
  const auto& prog = corpus.programs.front().program;
  const WorldModel wm = WorldModel::random(0);
  const Trajectory t = rollout(prog.pattern, FoldState::flat(prog.pattern.pattern()), prog.goal, policy, &wm, {});
  const std::string text = dump_json(trajectory_to_json(t), FloatFormat::Shortest);
  const Trajectory back = trajectory_from_json(json::parse(text), prog.pattern.num_edges());
  CHECK(dump_json(trajectory_to_json(back), FloatFormat::Shortest) == text);
}
