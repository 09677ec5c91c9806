#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "foldplan/actions.hpp"
#include "foldplan/crease_pattern.hpp"
#include "foldplan/transition.hpp"

namespace foldplan {

/// Per-edge input features:
///   0 alpha/pi, 1 rho, 2..4 one-hot z (M, V, U), 5 boundary flag,
///   6 acted edge, 7 in the 1-ring of the acted edge, 8..12 op one-hot,
///   13 target angle/pi, 14 target rho (both 0 unless the op is FOLD).
/// Op and target entries are broadcast to every edge.
inline constexpr int kEdgeFeatures = 15;
inline constexpr int kHiddenUnits = 32;
inline constexpr int kModelInputs = 2 * kEdgeFeatures;

/// Row-major N_e x kEdgeFeatures matrix.
std::vector<double> edge_features(const CanonicalPattern& pattern, const FoldState& state, const FoldAction& action);

/// Row-major N_e x kModelInputs matrix: own features followed by the mean
/// over the edge's 1-ring (zeros for an isolated edge).
std::vector<double> model_inputs(const CanonicalPattern& pattern, const FoldState& state, const FoldAction& action);

struct Prediction {
  std::vector<double> delta_alpha;  // in units of pi
  std::vector<double> delta_rho;
  std::vector<double> mask;
  std::vector<double> violation;
};

/// Per-edge residual model with mean-pooled 1-ring aggregation:
///   h = tanh(W1^T x + b1), [d_alpha, d_rho] = Wd^T h + bd,
///   mask = sigmoid(wm.h + bm), violation = sigmoid(wc.h + bc).
/// All parameters live in one flat vector in that order.
class WorldModel {
 public:
  static constexpr std::size_t kW1 = 0;
  static constexpr std::size_t kB1 = kW1 + kModelInputs * kHiddenUnits;
  static constexpr std::size_t kWd = kB1 + kHiddenUnits;
  static constexpr std::size_t kBd = kWd + kHiddenUnits * 2;
  static constexpr std::size_t kWm = kBd + 2;
  static constexpr std::size_t kBm = kWm + kHiddenUnits;
  static constexpr std::size_t kWc = kBm + 1;
  static constexpr std::size_t kBc = kWc + kHiddenUnits;
  static constexpr std::size_t kNumParams = kBc + 1;

  WorldModel() : params_(kNumParams, 0.0) {}
  explicit WorldModel(std::vector<double> params);

  /// Uniform(-scale, scale) initialization.
  static WorldModel random(std::uint64_t seed, double scale = 0.1);

  const std::vector<double>& params() const { return params_; }
  std::vector<double>& mutable_params() { return params_; }

  /// Heads for every row of a model-input matrix.
  Prediction forward(std::span<const double> inputs) const;

  bool operator==(const WorldModel&) const = default;

 private:
  std::vector<double> params_;
};

Prediction predict(const WorldModel& model, const CanonicalPattern& pattern, const FoldState& state,
                   const FoldAction& action);

/// s + delta * mask on the alpha (scaled by pi) and rho channels, before
/// clamping.
struct ResidualUpdate {
  std::vector<double> alpha;
  std::vector<double> rho;
};
ResidualUpdate residual_update(const FoldState& state, const Prediction& prediction);

/// Clamped residual update with z, psi and b copied and step incremented.
FoldState apply_prediction(const FoldState& state, const Prediction& prediction);

/// One-step imagined successor: the residual update clamped to the valid
/// ranges, with z, psi and b copied and step incremented.
FoldState imagine(const WorldModel& model, const CanonicalPattern& pattern, const FoldState& state,
                  const FoldAction& action);

/// Precomputed supervised example for one transition.
struct Example {
  int num_edges = 0;
  std::vector<double> inputs;        // N_e x kModelInputs
  std::vector<double> target_alpha;  // (alpha' - alpha) / pi
  std::vector<double> target_rho;    // rho' - rho
  std::vector<double> target_mask;   // kernel affected mask
  std::vector<double> target_violation;  // affected edges of an invalid step
  bool invalid = false;
};

Example make_example(const CanonicalPattern& pattern, const TransitionRecord& record);

struct LossResult {
  double loss = 0.0;
  std::vector<double> gradient;
};

/// Mean over examples of
///   MSE(delta * mask, target residual) over edges and both channels
///   + BCE(mask, affected mask) + BCE(violation, violation label),
/// each averaged over edges, with the analytic gradient.
/// Throws Error{EmptyBatch}.
LossResult loss(const WorldModel& model, std::span<const Example> batch);

/// Loss value only.
double loss_value(const WorldModel& model, std::span<const Example> batch);

struct TrainConfig {
  int epochs = 30;
  double learning_rate = 0.05;
  int batch_size = 32;
  std::uint64_t seed = 0;
  int max_restarts = 6;
};

struct TrainReport {
  std::vector<double> epoch_loss;  // mean minibatch loss per epoch
  double learning_rate = 0.0;      // rate actually used
  int restarts = 0;
};

/// Minibatch gradient descent with a fixed step. A first-batch line-search
/// check and a final "no epoch worse than the first" check each halve the
/// rate and restart from the same initialization when they fail.
/// Throws Error{EmptyDataset}.
WorldModel train(std::span<const Example> examples, const TrainConfig& config, TrainReport* report = nullptr);

struct HeldOutScores {
  double mse = 0.0;          // masked-residual MSE per edge and channel
  double violation_auc = 0.0;
  std::vector<double> scores;   // violation likelihood of every affected edge
  std::vector<bool> labels;     // edge belongs to an invalid step
};

/// Violation-head ranking over affected edges: positives are edges in the
/// kernel mask of invalid steps, negatives those of valid steps.
HeldOutScores evaluate_world_model(const WorldModel& model, std::span<const Example> examples);

}  // namespace foldplan
