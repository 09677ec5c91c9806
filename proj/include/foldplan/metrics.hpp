#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "foldplan/actions.hpp"

namespace foldplan {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// 2PR / (P + R), or 0 when P + R == 0.
double f1_score(double precision, double recall);

/// Token-multiset agreement of two action sequences aligned by step index,
/// micro-averaged over steps. Unaligned steps count as unmatched tokens.
/// Empty prediction gives precision 0 by convention.
PRF step_prf(std::span<const FoldAction> predicted, std::span<const FoldAction> reference, const Vocabulary& vocab);

/// |A n B| / |A u B|; two empty sets give 1.
double edge_iou(const std::set<int>& predicted, const std::set<int>& truth);

/// Per-category success fraction, averaged with equal weight per category.
/// Throws Error{EmptyResults}.
double cat_sr(std::span<const std::pair<std::string, bool>> results);

/// Area under the ROC curve (Mann-Whitney statistic, ties count half).
/// Returns 0.5 when either class is empty.
double roc_auc(std::span<const double> scores, const std::vector<bool>& labels);

/// What the trajectory-level metrics need from one rollout.
struct TrajectorySummary {
  std::string category;
  int proposals_total = 0;  // raw proposals before hard filtering
  int proposals_valid = 0;
  bool success = false;
  double final_goal_distance = 0.0;
};

struct TrajectoryMetrics {
  double step_valid = 0.0;
  double traj_sr = 0.0;
  double goal_dist = 0.0;
};

TrajectoryMetrics trajectory_metrics(std::span<const TrajectorySummary> trajectories);

struct CategoryReport {
  PRF prf;
  double edge_iou = 0.0;
  double success_rate = 0.0;
  TrajectoryMetrics trajectory;
  int count = 0;
};

struct EvalReport {
  PRF micro;   // over all aligned steps
  PRF macro;   // mean of per-category micro scores
  double edge_iou = 0.0;
  double cat_sr = 0.0;
  double step_valid = 0.0;
  double traj_sr = 0.0;
  double goal_dist = 0.0;
  std::map<std::string, CategoryReport> per_category;
};

/// One predicted trajectory paired with its reference program.
struct EvalCase {
  std::string category;
  std::vector<FoldAction> predicted;
  std::vector<FoldAction> reference;
  /// Per executed step, predicted and kernel affected-edge sets. Steps
  /// without a prediction are skipped.
  std::vector<std::pair<std::set<int>, std::set<int>>> masks;
  TrajectorySummary summary;
};

/// Throws Error{EmptyResults}.
EvalReport evaluate_cases(std::span<const EvalCase> cases, const Vocabulary& vocab);

}  // namespace foldplan
