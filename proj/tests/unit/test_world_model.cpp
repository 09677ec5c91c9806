#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <algorithm>
#include <random>

#include "foldplan/dataset.hpp"
#include "foldplan/error.hpp"
#include "foldplan/world_model.hpp"
#include "test_support.hpp"
#include "wm_oracle.hpp"

using namespace foldplan;

namespace {

constexpr double kPi = std::numbers::pi;

using foldplan::testing::reference_loss;

const Corpus& small_corpus() {
  static const Corpus corpus = [] {
    CorpusConfig config;
    config.count = 4;
    config.per_step = 6;
    config.seed = 21;
    return generate_corpus(config);
  }();
  return corpus;
}

std::vector<Example> all_examples() {
  auto a = training_examples(small_corpus(), false);
  auto b = training_examples(small_corpus(), true);
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("parameter layout") {
  CHECK(WorldModel::kNumParams == 30 * 32 + 32 + 64 + 2 + 32 + 1 + 32 + 1);
  CHECK_THROWS_AS(WorldModel{std::vector<double>(10, 0.0)}, std::invalid_argument);
  std::vector<double> bad(WorldModel::kNumParams, 0.0);
  bad[5] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(WorldModel{bad}, std::invalid_argument);
}

TEST_CASE("features") {
  const auto c = canonicalize(fixture_diagonal());
  const int e = foldplan::testing::first_crease(c);
  const auto f = edge_features(c, FoldState::flat(c.pattern()), FoldAction::fold(e, 0, 7));
  REQUIRE(f.size() == static_cast<std::size_t>(c.num_edges() * kEdgeFeatures));
  for (double x : f) {
    CHECK(x >= -1.0);
    CHECK(x <= 1.0);
  }
  const double* row = &f[static_cast<std::size_t>(e * kEdgeFeatures)];
  CHECK(row[6] == 1.0);                  // acted
  CHECK(row[8] == 1.0);                  // FOLD
  CHECK(row[13] == doctest::Approx(dequantize_angle(0) / kPi));
  CHECK(row[14] == 1.0);
  const auto d = edge_features(c, FoldState::flat(c.pattern()), FoldAction::done());
  CHECK(d[static_cast<std::size_t>(e * kEdgeFeatures + 13)] == 0.0);
  CHECK(d[static_cast<std::size_t>(e * kEdgeFeatures + 12)] == 1.0);
}

TEST_CASE("zero model") {
  const auto c = canonicalize(fixture_gate());
  const FoldState s = FoldState::flat(c.pattern());
  const FoldAction a = FoldAction::fold(foldplan::testing::first_crease(c), 0, 7);
  const Prediction p = predict(WorldModel{}, c, s, a);
  for (int j = 0; j < c.num_edges(); ++j) {
    const auto k = static_cast<std::size_t>(j);
    CHECK(p.delta_alpha[k] == 0.0);
    CHECK(p.delta_rho[k] == 0.0);
    CHECK(p.mask[k] == 0.5);
    CHECK(p.violation[k] == 0.5);
  }
  FoldState expected = s;
  expected.step += 1;
  CHECK(imagine(WorldModel{}, c, s, a) == expected);
}

TEST_CASE("shared weights give identical rows identical outputs") {
  const WorldModel m = WorldModel::random(5, 0.5);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> inputs(3 * kModelInputs);
  for (auto& x : inputs) x = u(rng);
  std::copy(inputs.begin(), inputs.begin() + kModelInputs, inputs.begin() + 2 * kModelInputs);
  const Prediction p = m.forward(inputs);
  CHECK(p.delta_alpha[0] == p.delta_alpha[2]);
  CHECK(p.delta_rho[0] == p.delta_rho[2]);
  CHECK(p.mask[0] == p.mask[2]);
  CHECK(p.violation[0] == p.violation[2]);
}

TEST_CASE("predictions follow an edge relabeling") {
  // Rotating the sheet permutes canonical edge indices but leaves every
  // feature of an edge unchanged.
  const WorldModel m = WorldModel::random(8, 0.5);
  const CreasePattern base = fixture_blintz();
  const auto c1 = canonicalize(base);
  std::mt19937_64 rng(12);
  for (int t = 1; t < kDihedralOrder; ++t) {
    const auto c2 = canonicalize(dihedral_augment(base, t));
    std::vector<int> map(static_cast<std::size_t>(c1.num_edges()));  // c1 index -> c2 index
    for (std::size_t j = 0; j < map.size(); ++j) {
      map[static_cast<std::size_t>(c1.edge_permutation()[j])] = c2.edge_permutation()[j];
    }
    FoldState s1 = FoldState::flat(c1.pattern());
    const int e1 = foldplan::testing::first_crease(c1);
    s1 = level0::step(c1, s1, FoldAction::fold(e1, 0, 4)).state;
    FoldState s2 = s1;
    for (std::size_t j = 0; j < map.size(); ++j) {
      const auto k = static_cast<std::size_t>(map[j]);
      s2.alpha[k] = s1.alpha[j];
      s2.rho[k] = s1.rho[j];
      s2.z[k] = s1.z[j];
    }
    const int target = static_cast<int>(rng() % map.size());
    const Prediction p1 = predict(m, c1, s1, FoldAction::fold(target, 3, 6));
    const Prediction p2 = predict(m, c2, s2, FoldAction::fold(map[static_cast<std::size_t>(target)], 3, 6));
    for (std::size_t j = 0; j < map.size(); ++j) {
      const auto k = static_cast<std::size_t>(map[j]);
      CHECK(p1.delta_alpha[j] == doctest::Approx(p2.delta_alpha[k]).epsilon(1e-12));
      CHECK(p1.mask[j] == doctest::Approx(p2.mask[k]).epsilon(1e-12));
      CHECK(p1.violation[j] == doctest::Approx(p2.violation[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("imagined update") {
  const auto c = canonicalize(fixture_diagonal());
  const FoldState s = FoldState::flat(c.pattern());
  const auto n = static_cast<std::size_t>(c.num_edges());
  Prediction p{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 1.0),
               std::vector<double>(n, 0.0)};
  p.delta_alpha[2] = 0.5;
  CHECK(apply_prediction(s, p).alpha[2] == doctest::Approx(0.5 * kPi).epsilon(1e-15));

  // Any output stays in range.
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    const WorldModel m = WorldModel::random(rng(), 5.0);
    const FoldState out = imagine(m, c, s, foldplan::testing::tame_action(rng, c.num_edges()));
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(std::abs(out.alpha[j]) <= kPi);
      CHECK(out.rho[j] >= 0.0);
      CHECK(out.rho[j] <= 1.0);
      CHECK(out.z[j] == s.z[j]);
    }
    CHECK(out.step == s.step + 1);
  }
}

TEST_CASE("residual identity") {
  std::mt19937_64 rng(31);
  const auto c = canonicalize(make_grid(2));
  FoldState s = FoldState::flat(c.pattern());
  for (int i = 0; i < 200; ++i) {
    const WorldModel m = WorldModel::random(rng(), 1.0);
    const FoldAction a = foldplan::testing::tame_action(rng, c.num_edges());
    const Prediction p = predict(m, c, s, a);
    const ResidualUpdate r = residual_update(s, p);
    const FoldState img = imagine(m, c, s, a);
    for (int j = 0; j < c.num_edges(); ++j) {
      const auto k = static_cast<std::size_t>(j);
      const double alpha = s.alpha[k] + p.delta_alpha[k] * kPi * p.mask[k];
      const double rho = s.rho[k] + p.delta_rho[k] * p.mask[k];
      CHECK(std::abs(r.alpha[k] - alpha) <= 1e-12);
      CHECK(std::abs(r.rho[k] - rho) <= 1e-12);
      CHECK(img.alpha[k] == std::clamp(alpha, -kPi, kPi));
      CHECK(img.rho[k] == std::clamp(rho, 0.0, 1.0));
    }
    const auto next = level0::step(c, s, a);
    s = next.verdict.valid && next.state.step < 50 ? next.state : s;
  }
}

TEST_CASE("loss matches the reference definition") {
  const auto examples = all_examples();
  REQUIRE(examples.size() > 50);
  const WorldModel m = WorldModel::random(3, 0.5);
  const std::vector<Example> batch(examples.begin(), examples.begin() + 20);
  CHECK(loss(m, batch).loss == doctest::Approx(reference_loss(m, batch)).epsilon(1e-12));
  CHECK(loss_value(m, batch) == doctest::Approx(reference_loss(m, batch)).epsilon(1e-12));

  // Zero model on a transition with zero residual: only the two BCE terms.
  for (const auto& ex : examples) {
    if (!ex.invalid) continue;
    CHECK(loss_value(WorldModel{}, std::vector<Example>{ex}) == doctest::Approx(2 * std::log(2.0)).epsilon(1e-15));
    break;
  }

  std::vector<Example> doubled = batch;
  doubled.insert(doubled.end(), batch.begin(), batch.end());
  CHECK(std::abs(loss_value(m, doubled) - loss_value(m, batch)) <= 1e-12);
  CHECK_THROWS_AS(loss(m, std::vector<Example>{}), Error);
}

TEST_CASE("analytic gradient agrees with central differences") {
  const auto examples = all_examples();
  std::mt19937_64 rng(77);
  for (int b = 0; b < 5; ++b) {
    std::vector<Example> batch;
    for (int i = 0; i < 8; ++i) batch.push_back(examples[rng() % examples.size()]);
    const WorldModel m = WorldModel::random(rng(), 0.5);
    const auto grad = loss(m, batch).gradient;
    for (int k = 0; k < 20; ++k) {
      const std::size_t i = rng() % WorldModel::kNumParams;
      const double h = 1e-5;
      WorldModel plus = m;
      WorldModel minus = m;
      plus.mutable_params()[i] += h;
      minus.mutable_params()[i] -= h;
      const double numeric = (reference_loss(plus, batch) - reference_loss(minus, batch)) / (2 * h);
      const double rel = std::abs(grad[i] - numeric) / (std::abs(grad[i]) + 1e-8);
      CHECK_MESSAGE(rel <= 1e-4, "param " << i << " analytic " << grad[i] << " numeric " << numeric);
    }
  }
}

TEST_CASE("training") {
  const auto examples = training_examples(small_corpus(), false);
  TrainConfig config;
  config.epochs = 6;
  config.seed = 9;
  TrainReport r1;
  const WorldModel a = train(examples, config, &r1);
  const WorldModel b = train(examples, config);
  CHECK(a == b);
  REQUIRE(r1.epoch_loss.size() == 6);
  for (double l : r1.epoch_loss) CHECK(l <= r1.epoch_loss.front());
  CHECK(r1.epoch_loss.back() < loss_value(WorldModel::random(9), examples));
  CHECK_THROWS_AS(train(std::vector<Example>{}, config), Error);
}

TEST_CASE("held-out scores rank invalid-step edges") {
  const auto examples = training_examples(small_corpus(), true);
  const HeldOutScores s = evaluate_world_model(WorldModel{}, examples);
  CHECK(s.scores.size() == s.labels.size());
  CHECK(s.violation_auc == doctest::Approx(0.5));  // constant scores tie everywhere
}
