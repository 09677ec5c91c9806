#include "foldplan/world_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include "foldplan/error.hpp"
#include "foldplan/metrics.hpp"
#include "foldplan/policy.hpp"

namespace foldplan {

namespace {

constexpr double kPi = std::numbers::pi;

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Binary cross-entropy written on the logit for stability.
double bce_logit(double logit, double target) {
  return std::max(logit, 0.0) - logit * target + std::log1p(std::exp(-std::abs(logit)));
}

// Hidden activations and heads for one edge.
struct EdgePass {
  double hidden[kHiddenUnits];
  double d_alpha, d_rho, mask_logit, violation_logit;
};

void edge_forward(const std::vector<double>& w, const double* x, EdgePass& out) {
  for (int k = 0; k < kHiddenUnits; ++k) {
    double acc = w[WorldModel::kB1 + k];
    for (int i = 0; i < kModelInputs; ++i) acc += x[i] * w[WorldModel::kW1 + i * kHiddenUnits + k];
    out.hidden[k] = std::tanh(acc);
  }
  double da = w[WorldModel::kBd];
  double dr = w[WorldModel::kBd + 1];
  double ml = w[WorldModel::kBm];
  double vl = w[WorldModel::kBc];
  for (int k = 0; k < kHiddenUnits; ++k) {
    const double h = out.hidden[k];
    da += h * w[WorldModel::kWd + k * 2];
    dr += h * w[WorldModel::kWd + k * 2 + 1];
    ml += h * w[WorldModel::kWm + k];
    vl += h * w[WorldModel::kWc + k];
  }
  out.d_alpha = da;
  out.d_rho = dr;
  out.mask_logit = ml;
  out.violation_logit = vl;
}

void check_state(const CanonicalPattern& pattern, const FoldState& state) {
  const auto n = static_cast<std::size_t>(pattern.num_edges());
  if (state.alpha.size() != n || state.rho.size() != n || state.z.size() != n) {
    throw std::invalid_argument("fold state does not belong to the pattern");
  }
}

}  // namespace

std::vector<double> edge_features(const CanonicalPattern& pattern, const FoldState& state, const FoldAction& action) {
  check_state(pattern, state);
  const int ne = pattern.num_edges();
  std::vector<double> f(static_cast<std::size_t>(ne) * kEdgeFeatures, 0.0);
  const bool targets_edge =
      (action.op == OpCode::Fold || action.op == OpCode::Unfold) && action.edge && *action.edge >= 0 && *action.edge < ne;
  std::vector<bool> ring(static_cast<std::size_t>(ne), false);
  if (targets_edge) {
    for (int r : pattern.topology().ring[static_cast<std::size_t>(*action.edge)]) ring[static_cast<std::size_t>(r)] = true;
  }
  double target_angle = 0.0;
  double target_rho = 0.0;
  if (action.op == OpCode::Fold && action.angle_bin && action.rho_bin) {
    if (*action.angle_bin >= 0 && *action.angle_bin < kAngleBins) target_angle = dequantize_angle(*action.angle_bin) / kPi;
    if (*action.rho_bin >= 0 && *action.rho_bin < kRhoBins) target_rho = dequantize_rho(*action.rho_bin);
  }
  for (int e = 0; e < ne; ++e) {
    const auto ei = static_cast<std::size_t>(e);
    double* row = &f[ei * kEdgeFeatures];
    row[0] = state.alpha[ei] / kPi;
    row[1] = state.rho[ei];
    row[2 + static_cast<int>(state.z[ei])] = 1.0;
    row[5] = pattern.pattern().is_boundary(e) ? 1.0 : 0.0;
    row[6] = targets_edge && *action.edge == e ? 1.0 : 0.0;
    row[7] = ring[ei] ? 1.0 : 0.0;
    row[8 + static_cast<int>(action.op)] = 1.0;
    row[13] = target_angle;
    row[14] = target_rho;
  }
  return f;
}

std::vector<double> model_inputs(const CanonicalPattern& pattern, const FoldState& state, const FoldAction& action) {
  const auto f = edge_features(pattern, state, action);
  const int ne = pattern.num_edges();
  std::vector<double> x(static_cast<std::size_t>(ne) * kModelInputs, 0.0);
  for (int e = 0; e < ne; ++e) {
    const auto ei = static_cast<std::size_t>(e);
    double* row = &x[ei * kModelInputs];
    std::copy_n(&f[ei * kEdgeFeatures], kEdgeFeatures, row);
    const auto& ring = pattern.topology().ring[ei];
    if (ring.empty()) continue;
    for (int r : ring) {
      const double* src = &f[static_cast<std::size_t>(r) * kEdgeFeatures];
      for (int i = 0; i < kEdgeFeatures; ++i) row[kEdgeFeatures + i] += src[i];
    }
    const double inv = 1.0 / static_cast<double>(ring.size());
    for (int i = 0; i < kEdgeFeatures; ++i) row[kEdgeFeatures + i] *= inv;
  }
  return x;
}

WorldModel::WorldModel(std::vector<double> params) : params_(std::move(params)) {
  if (params_.size() != kNumParams) throw std::invalid_argument("world model parameter count mismatch");
  for (double p : params_) {
    if (!std::isfinite(p)) throw std::invalid_argument("world model parameters must be finite");
  }
}

WorldModel WorldModel::random(std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::vector<double> p(kNumParams);
  for (double& v : p) v = (2.0 * unit_uniform(rng()) - 1.0) * scale;
  return WorldModel(std::move(p));
}

Prediction WorldModel::forward(std::span<const double> inputs) const {
  if (inputs.size() % kModelInputs != 0) throw std::invalid_argument("input rows must have kModelInputs columns");
  const std::size_t n = inputs.size() / kModelInputs;
  Prediction out{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  EdgePass pass{};
  for (std::size_t e = 0; e < n; ++e) {
    edge_forward(params_, &inputs[e * kModelInputs], pass);
    out.delta_alpha[e] = pass.d_alpha;
    out.delta_rho[e] = pass.d_rho;
    out.mask[e] = sigmoid(pass.mask_logit);
    out.violation[e] = sigmoid(pass.violation_logit);
  }
  return out;
}

Prediction predict(const WorldModel& model, const CanonicalPattern& pattern, const FoldState& state,
                   const FoldAction& action) {
  return model.forward(model_inputs(pattern, state, action));
}

ResidualUpdate residual_update(const FoldState& state, const Prediction& prediction) {
  const std::size_t n = state.alpha.size();
  ResidualUpdate out{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t j = 0; j < n; ++j) {
    out.alpha[j] = state.alpha[j] + prediction.delta_alpha[j] * kPi * prediction.mask[j];
    out.rho[j] = state.rho[j] + prediction.delta_rho[j] * prediction.mask[j];
  }
  return out;
}

FoldState apply_prediction(const FoldState& state, const Prediction& prediction) {
  const auto update = residual_update(state, prediction);
  FoldState next = state;
  for (std::size_t j = 0; j < update.alpha.size(); ++j) {
    next.alpha[j] = std::clamp(update.alpha[j], -kPi, kPi);
    next.rho[j] = std::clamp(update.rho[j], 0.0, 1.0);
  }
  next.step = state.step + 1;
  return next;
}

FoldState imagine(const WorldModel& model, const CanonicalPattern& pattern, const FoldState& state,
                  const FoldAction& action) {
  return apply_prediction(state, predict(model, pattern, state, action));
}

Example make_example(const CanonicalPattern& pattern, const TransitionRecord& record) {
  Example ex;
  ex.num_edges = pattern.num_edges();
  const auto n = static_cast<std::size_t>(ex.num_edges);
  check_state(pattern, record.state_after);
  if (record.verdict.affected_mask.size() != n) {
    throw Error(ErrorKind::LengthMismatch, "verdict mask does not match the pattern");
  }
  ex.inputs = model_inputs(pattern, record.state_before, record.action);
  ex.invalid = !record.verdict.valid;
  ex.target_alpha.resize(n);
  ex.target_rho.resize(n);
  ex.target_mask.resize(n);
  ex.target_violation.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    ex.target_alpha[j] = (record.state_after.alpha[j] - record.state_before.alpha[j]) / kPi;
    ex.target_rho[j] = record.state_after.rho[j] - record.state_before.rho[j];
    const bool affected = record.verdict.affected_mask[j];
    ex.target_mask[j] = affected ? 1.0 : 0.0;
    ex.target_violation[j] = affected && ex.invalid ? 1.0 : 0.0;
  }
  return ex;
}

namespace {

// Loss of one example; accumulates d(loss)/d(params) into grad when given.
double example_loss(const std::vector<double>& w, const Example& ex, double* grad) {
  const int n = ex.num_edges;
  if (n == 0) return 0.0;
  const double inv_n = 1.0 / n;
  double mse = 0.0;
  double bce_mask = 0.0;
  double bce_violation = 0.0;
  EdgePass pass{};
  for (int e = 0; e < n; ++e) {
    const auto ei = static_cast<std::size_t>(e);
    const double* x = &ex.inputs[ei * kModelInputs];
    edge_forward(w, x, pass);
    const double m = sigmoid(pass.mask_logit);
    const double c = sigmoid(pass.violation_logit);
    const double ra = pass.d_alpha * m - ex.target_alpha[ei];
    const double rr = pass.d_rho * m - ex.target_rho[ei];
    mse += 0.5 * (ra * ra + rr * rr);
    bce_mask += bce_logit(pass.mask_logit, ex.target_mask[ei]);
    bce_violation += bce_logit(pass.violation_logit, ex.target_violation[ei]);
    if (grad == nullptr) continue;

    // d/d(head outputs); MSE is averaged over 2 channels, hence no factor 2.
    const double g_da = ra * m * inv_n;
    const double g_dr = rr * m * inv_n;
    const double g_ml = m * (1.0 - m) * (ra * pass.d_alpha + rr * pass.d_rho) * inv_n +
                        (m - ex.target_mask[ei]) * inv_n;
    const double g_vl = (c - ex.target_violation[ei]) * inv_n;

    grad[WorldModel::kBd] += g_da;
    grad[WorldModel::kBd + 1] += g_dr;
    grad[WorldModel::kBm] += g_ml;
    grad[WorldModel::kBc] += g_vl;
    double g_pre[kHiddenUnits];
    for (int k = 0; k < kHiddenUnits; ++k) {
      const double h = pass.hidden[k];
      grad[WorldModel::kWd + k * 2] += h * g_da;
      grad[WorldModel::kWd + k * 2 + 1] += h * g_dr;
      grad[WorldModel::kWm + k] += h * g_ml;
      grad[WorldModel::kWc + k] += h * g_vl;
      const double g_h = w[WorldModel::kWd + k * 2] * g_da + w[WorldModel::kWd + k * 2 + 1] * g_dr +
                         w[WorldModel::kWm + k] * g_ml + w[WorldModel::kWc + k] * g_vl;
      g_pre[k] = g_h * (1.0 - h * h);
      grad[WorldModel::kB1 + k] += g_pre[k];
    }
    for (int i = 0; i < kModelInputs; ++i) {
      if (x[i] == 0.0) continue;
      double* row = &grad[WorldModel::kW1 + i * kHiddenUnits];
      for (int k = 0; k < kHiddenUnits; ++k) row[k] += x[i] * g_pre[k];
    }
  }
  return (mse + bce_mask + bce_violation) * inv_n;
}

}  // namespace

LossResult loss(const WorldModel& model, std::span<const Example> batch) {
  if (batch.empty()) throw Error(ErrorKind::EmptyBatch, "loss needs at least one example");
  LossResult out{0.0, std::vector<double>(WorldModel::kNumParams, 0.0)};
  for (const auto& ex : batch) out.loss += example_loss(model.params(), ex, out.gradient.data());
  const double inv = 1.0 / static_cast<double>(batch.size());
  out.loss *= inv;
  for (double& g : out.gradient) g *= inv;
  return out;
}

double loss_value(const WorldModel& model, std::span<const Example> batch) {
  if (batch.empty()) throw Error(ErrorKind::EmptyBatch, "loss needs at least one example");
  double total = 0.0;
  for (const auto& ex : batch) total += example_loss(model.params(), ex, nullptr);
  return total / static_cast<double>(batch.size());
}

namespace {

bool run_training(std::span<const Example> examples, const TrainConfig& config, double lr, WorldModel& model,
                  std::vector<double>& epoch_loss) {
  model = WorldModel::random(config.seed);
  epoch_loss.clear();
  std::mt19937_64 rng(mix_seed(config.seed, 1));
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  const auto batch_size = static_cast<std::size_t>(std::max(1, config.batch_size));
  std::vector<double> grad(WorldModel::kNumParams);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Fisher-Yates with our own uniform so the order is platform independent.
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(unit_uniform(rng()) * static_cast<double>(i));
      std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t stop = std::min(order.size(), start + batch_size);
      const double inv = 1.0 / static_cast<double>(stop - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t i = start; i < stop; ++i) batch_loss += example_loss(model.params(), examples[order[i]], grad.data());
      batch_loss *= inv;
      for (double& g : grad) g *= inv;
      auto& w = model.mutable_params();
      if (epoch == 0 && start == 0) {
        // Line-search sanity check: one step must not increase this batch's loss.
        std::vector<double> probe = w;
        for (std::size_t p = 0; p < WorldModel::kNumParams; ++p) probe[p] -= lr * grad[p];
        double after = 0.0;
        for (std::size_t i = start; i < stop; ++i) after += example_loss(probe, examples[order[i]], nullptr);
        if (!(after * inv <= batch_loss)) return false;
      }
      for (std::size_t p = 0; p < WorldModel::kNumParams; ++p) w[p] -= lr * grad[p];
      total += batch_loss;
      ++batches;
    }
    const double mean = total / static_cast<double>(batches);
    if (!std::isfinite(mean)) return false;
    epoch_loss.push_back(mean);
  }
  for (double l : epoch_loss) {
    if (l > epoch_loss.front()) return false;
  }
  return true;
}

}  // namespace

WorldModel train(std::span<const Example> examples, const TrainConfig& config, TrainReport* report) {
  if (examples.empty()) throw Error(ErrorKind::EmptyDataset, "no transitions to train on");
  if (config.epochs < 1) throw std::invalid_argument("epochs must be positive");
  double lr = config.learning_rate;
  WorldModel model;
  std::vector<double> epoch_loss;
  int restarts = 0;
  while (!run_training(examples, config, lr, model, epoch_loss) && restarts < config.max_restarts) {
    lr *= 0.5;
    ++restarts;
  }
  if (report != nullptr) *report = {epoch_loss, lr, restarts};
  return model;
}

HeldOutScores evaluate_world_model(const WorldModel& model, std::span<const Example> examples) {
  if (examples.empty()) throw Error(ErrorKind::EmptyDataset, "no transitions to evaluate");
  HeldOutScores out;
  double sq = 0.0;
  std::size_t terms = 0;
  for (const auto& ex : examples) {
    const auto pred = model.forward(ex.inputs);
    for (std::size_t j = 0; j < static_cast<std::size_t>(ex.num_edges); ++j) {
      const double ra = pred.delta_alpha[j] * pred.mask[j] - ex.target_alpha[j];
      const double rr = pred.delta_rho[j] * pred.mask[j] - ex.target_rho[j];
      sq += ra * ra + rr * rr;
      terms += 2;
      if (ex.target_mask[j] > 0.5) {
        out.scores.push_back(pred.violation[j]);
        out.labels.push_back(ex.invalid);
      }
    }
  }
  out.mse = terms == 0 ? 0.0 : sq / static_cast<double>(terms);
  out.violation_auc = roc_auc(out.scores, out.labels);
  return out;
}

}  // namespace foldplan
