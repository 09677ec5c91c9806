#include "foldplan/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "foldplan/error.hpp"

namespace foldplan {

double f1_score(double precision, double recall) {
  const double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

namespace {

struct Counts {
  long matched = 0;
  long predicted = 0;
  long reference = 0;
};

Counts token_counts(std::span<const FoldAction> predicted, std::span<const FoldAction> reference,
                    const Vocabulary& vocab) {
  Counts c;
  const std::size_t steps = std::max(predicted.size(), reference.size());
  for (std::size_t t = 0; t < steps; ++t) {
    std::vector<Token> p;
    std::vector<Token> r;
    if (t < predicted.size()) p = encode(predicted[t], vocab);
    if (t < reference.size()) r = encode(reference[t], vocab);
    c.predicted += static_cast<long>(p.size());
    c.reference += static_cast<long>(r.size());
    std::sort(p.begin(), p.end());
    std::sort(r.begin(), r.end());
    std::vector<Token> common;
    std::set_intersection(p.begin(), p.end(), r.begin(), r.end(), std::back_inserter(common));
    c.matched += static_cast<long>(common.size());
  }
  return c;
}

PRF prf_from(const Counts& c) {
  PRF out;
  out.precision = c.predicted > 0 ? static_cast<double>(c.matched) / static_cast<double>(c.predicted) : 0.0;
  out.recall = c.reference > 0 ? static_cast<double>(c.matched) / static_cast<double>(c.reference) : 0.0;
  out.f1 = f1_score(out.precision, out.recall);
  return out;
}

}  // namespace

PRF step_prf(std::span<const FoldAction> predicted, std::span<const FoldAction> reference, const Vocabulary& vocab) {
  return prf_from(token_counts(predicted, reference, vocab));
}

double edge_iou(const std::set<int>& predicted, const std::set<int>& truth) {
  if (predicted.empty() && truth.empty()) return 1.0;
  std::size_t inter = 0;
  for (int e : predicted) inter += truth.count(e);
  const std::size_t uni = predicted.size() + truth.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double cat_sr(std::span<const std::pair<std::string, bool>> results) {
  if (results.empty()) throw Error(ErrorKind::EmptyResults, "no results to average");
  std::map<std::string, std::pair<int, int>> per;  // successes, total
  for (const auto& [category, success] : results) {
    auto& slot = per[category];
    slot.first += success ? 1 : 0;
    slot.second += 1;
  }
  double sum = 0.0;
  for (const auto& [category, counts] : per) sum += static_cast<double>(counts.first) / counts.second;
  return sum / static_cast<double>(per.size());
}

double roc_auc(std::span<const double> scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) throw Error(ErrorKind::LengthMismatch, "scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Rank sum of positives with average ranks over ties.
  double rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) {
        rank_sum += avg_rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0) return 0.5;
  const double p = static_cast<double>(positives);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(negatives));
}

TrajectoryMetrics trajectory_metrics(std::span<const TrajectorySummary> trajectories) {
  TrajectoryMetrics out;
  if (trajectories.empty()) return out;
  long total = 0;
  long valid = 0;
  double successes = 0.0;
  double dist = 0.0;
  for (const auto& t : trajectories) {
    total += t.proposals_total;
    valid += t.proposals_valid;
    successes += t.success ? 1.0 : 0.0;
    dist += t.final_goal_distance;
  }
  const auto n = static_cast<double>(trajectories.size());
  out.step_valid = total > 0 ? static_cast<double>(valid) / static_cast<double>(total) : 0.0;
  out.traj_sr = successes / n;
  out.goal_dist = dist / n;
  return out;
}

EvalReport evaluate_cases(std::span<const EvalCase> cases, const Vocabulary& vocab) {
  if (cases.empty()) throw Error(ErrorKind::EmptyResults, "no trajectories to evaluate");
  EvalReport report;
  Counts all;
  std::map<std::string, Counts> counts;
  std::map<std::string, std::vector<double>> ious;
  std::map<std::string, std::vector<TrajectorySummary>> summaries;
  std::vector<double> all_ious;
  std::vector<TrajectorySummary> all_summaries;
  std::vector<std::pair<std::string, bool>> outcomes;

  for (const auto& c : cases) {
    const Counts k = token_counts(c.predicted, c.reference, vocab);
    all.matched += k.matched;
    all.predicted += k.predicted;
    all.reference += k.reference;
    auto& ck = counts[c.category];
    ck.matched += k.matched;
    ck.predicted += k.predicted;
    ck.reference += k.reference;
    for (const auto& [pred, truth] : c.masks) {
      const double iou = edge_iou(pred, truth);
      ious[c.category].push_back(iou);
      all_ious.push_back(iou);
    }
    summaries[c.category].push_back(c.summary);
    all_summaries.push_back(c.summary);
    outcomes.emplace_back(c.category, c.summary.success);
  }

  auto mean = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  report.micro = prf_from(all);
  for (const auto& [category, k] : counts) {
    CategoryReport cr;
    cr.prf = prf_from(k);
    cr.edge_iou = mean(ious[category]);
    cr.trajectory = trajectory_metrics(summaries[category]);
    cr.success_rate = cr.trajectory.traj_sr;
    cr.count = static_cast<int>(summaries[category].size());
    report.macro.precision += cr.prf.precision;
    report.macro.recall += cr.prf.recall;
    report.per_category.emplace(category, cr);
  }
  const auto ncat = static_cast<double>(report.per_category.size());
  report.macro.precision /= ncat;
  report.macro.recall /= ncat;
  report.macro.f1 = f1_score(report.macro.precision, report.macro.recall);
  report.edge_iou = mean(all_ious);
  report.cat_sr = cat_sr(outcomes);
  const auto tm = trajectory_metrics(all_summaries);
  report.step_valid = tm.step_valid;
  report.traj_sr = tm.traj_sr;
  report.goal_dist = tm.goal_dist;
  return report;
}

}  // namespace foldplan
