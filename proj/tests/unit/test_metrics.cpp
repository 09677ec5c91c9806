#include <doctest.h>

#include <random>

#include "foldplan/error.hpp"
#include "foldplan/metrics.hpp"

using namespace foldplan;

namespace {

// Quadratic pair count; ties are worth one half.
double pairwise_auc(const std::vector<double>& s, const std::vector<bool>& y) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j]) continue;
      pairs += 1.0;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

}  // namespace

TEST_CASE("edge iou") {
  CHECK(edge_iou({1, 2, 3}, {2, 3, 4}) == doctest::Approx(0.5));
  CHECK(edge_iou({}, {}) == 1.0);
  CHECK(edge_iou({1}, {}) == 0.0);
  CHECK(edge_iou({1, 2}, {1, 2}) == 1.0);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::set<int> a, b;
    for (int e = 0; e < 12; ++e) {
      if (rng() % 2) a.insert(e);
      if (rng() % 3 == 0) b.insert(e);
    }
    CHECK(edge_iou(a, b) == edge_iou(b, a));
    CHECK(edge_iou(a, b) >= 0.0);
    CHECK(edge_iou(a, b) <= 1.0);
  }
}

TEST_CASE("category success rate") {
  const std::vector<std::pair<std::string, bool>> r = {{"a", true}, {"a", false}, {"b", true}};
  CHECK(cat_sr(r) == doctest::Approx(0.75));
  // Repeating one category's results does not change its weight.
  const std::vector<std::pair<std::string, bool>> doubled = {{"a", true}, {"a", false}, {"a", true},
                                                             {"a", false}, {"b", true}};
  CHECK(cat_sr(doubled) == doctest::Approx(0.75));
  CHECK_THROWS_AS(cat_sr(std::vector<std::pair<std::string, bool>>{}), Error);
}

TEST_CASE("f1 is the harmonic mean") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double p = u(rng);
    const double r = u(rng);
    CHECK(f1_score(p, r) == doctest::Approx(1.0 / (0.5 / p + 0.5 / r)).epsilon(1e-12));
  }
  CHECK(f1_score(0.0, 0.0) == 0.0);
}

TEST_CASE("step precision and recall") {
  const Vocabulary vocab(6, 8);
  const std::vector<FoldAction> ref = {FoldAction::fold(1, 2, 3), FoldAction::flip(), FoldAction::done()};
  const auto same = step_prf(ref, ref, vocab);
  CHECK(same.precision == 1.0);
  CHECK(same.recall == 1.0);
  CHECK(same.f1 == 1.0);

  const auto empty = step_prf({}, ref, vocab);
  CHECK(empty.precision == 0.0);
  CHECK(empty.recall == 0.0);
  CHECK(empty.f1 == 0.0);

  const std::vector<FoldAction> a = {FoldAction::fold(1, 2, 3)};
  const std::vector<FoldAction> b = {FoldAction::fold(1, 2, 4)};
  const auto three_of_four = step_prf(a, b, vocab);
  CHECK(three_of_four.precision == doctest::Approx(0.75));
  CHECK(three_of_four.recall == doctest::Approx(0.75));

  // A missing step counts against recall only.
  const std::vector<FoldAction> prefix = {FoldAction::fold(1, 2, 3)};
  const auto short_pred = step_prf(prefix, ref, vocab);
  CHECK(short_pred.precision == 1.0);
  CHECK(short_pred.recall == doctest::Approx(4.0 / 6.0));
}

TEST_CASE("roc auc matches pairwise counting") {
  CHECK(roc_auc(std::vector<double>{0.1, 0.9}, {false, true}) == 1.0);
  CHECK(roc_auc(std::vector<double>{0.9, 0.1}, {false, true}) == 0.0);
  CHECK(roc_auc(std::vector<double>{0.5, 0.5}, {false, true}) == 0.5);
  CHECK(roc_auc(std::vector<double>{0.5, 0.7}, {true, true}) == 0.5);
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 5 + rng() % 60;
    std::vector<double> s(n);
    std::vector<bool> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng() % 7);  // plenty of ties
      y[i] = rng() % 2;
    }
    y[0] = true;
    y[1] = false;
    CHECK(roc_auc(s, y) == doctest::Approx(pairwise_auc(s, y)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(roc_auc(std::vector<double>{0.1}, {true, false}), Error);
}

TEST_CASE("trajectory metrics") {
  const std::vector<TrajectorySummary> t = {
      {"a", 10, 9, true, 0.0},
      {"b", 6, 3, false, 1.0},
  };
  const auto m = trajectory_metrics(t);
  CHECK(m.step_valid == doctest::Approx(12.0 / 16.0));
  CHECK(m.traj_sr == doctest::Approx(0.5));
  CHECK(m.goal_dist == doctest::Approx(0.5));
  const auto none = trajectory_metrics(std::vector<TrajectorySummary>{});
  CHECK(none.traj_sr == 0.0);
}

TEST_CASE("evaluation report") {
  const Vocabulary vocab(6, 8);
  std::vector<EvalCase> cases(3);
  cases[0].category = "a";
  cases[0].predicted = {FoldAction::fold(1, 2, 3), FoldAction::done()};
  cases[0].reference = cases[0].predicted;
  cases[0].masks = {{{1}, {1}}};
  cases[0].summary = {"a", 2, 2, true, 0.0};
  cases[1].category = "a";
  cases[1].predicted = {FoldAction::fold(1, 2, 4), FoldAction::done()};
  cases[1].reference = {FoldAction::fold(1, 2, 3), FoldAction::done()};
  cases[1].masks = {{{1, 2}, {1}}};
  cases[1].summary = {"a", 4, 2, false, 1.0};
  cases[2].category = "b";
  cases[2].predicted = {FoldAction::done()};
  cases[2].reference = {FoldAction::flip(), FoldAction::done()};
  cases[2].summary = {"b", 1, 1, true, 0.0};

  const auto r = evaluate_cases(cases, vocab);
  // Tokens: a has 10 predicted, 10 reference, 9 matched; b has 1, 2, 0.
  CHECK(r.micro.precision == doctest::Approx(9.0 / 11.0));
  CHECK(r.micro.recall == doctest::Approx(9.0 / 12.0));
  CHECK(r.macro.precision == doctest::Approx((0.9 + 0.0) / 2.0));
  CHECK(r.edge_iou == doctest::Approx(0.75));
  CHECK(r.cat_sr == doctest::Approx(0.75));
  CHECK(r.traj_sr == doctest::Approx(2.0 / 3.0));
  CHECK(r.step_valid == doctest::Approx(5.0 / 7.0));
  CHECK(r.goal_dist == doctest::Approx(1.0 / 3.0));
  CHECK(r.per_category.at("a").count == 2);
  CHECK_THROWS_AS(evaluate_cases({}, vocab), Error);
}
