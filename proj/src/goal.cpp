#include "foldplan/goal.hpp"

#include <algorithm>
#include <cmath>

#include "foldplan/error.hpp"

namespace foldplan {

namespace {

void check_lengths(const FoldState& state, const GoalSpec& goal) {
  const std::size_t n = state.alpha.size();
  if (goal.target_alpha.size() != n || goal.target_z.size() != n || state.rho.size() != n || state.z.size() != n) {
    throw Error(ErrorKind::LengthMismatch, "goal and state disagree on the number of edges");
  }
}

// Slack for comparing quantized angles against the tolerance bound.
constexpr double kToleranceSlack = 1e-9;

}  // namespace

GoalSpec goal_from_state(std::string category, const FoldState& state) {
  GoalSpec goal;
  goal.category = std::move(category);
  goal.target_alpha = state.alpha;
  goal.target_z = state.z;
  return goal;
}

double goal_distance(const FoldState& state, const GoalSpec& goal) {
  check_lengths(state, goal);
  const std::size_t n = state.alpha.size();
  if (n == 0) return 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    total += std::abs(state.alpha[j] - goal.target_alpha[j]) / (2.0 * std::numbers::pi);
    if (state.z[j] != goal.target_z[j] && state.rho[j] > 0.0) total += 0.5;
  }
  return std::clamp(total / static_cast<double>(n), 0.0, 1.0);
}

bool goal_reached(const FoldState& state, const GoalSpec& goal) {
  check_lengths(state, goal);
  for (std::size_t j = 0; j < state.alpha.size(); ++j) {
    if (std::abs(state.alpha[j] - goal.target_alpha[j]) > goal.tolerance + kToleranceSlack) return false;
    if (state.rho[j] > 0.0 && state.z[j] != goal.target_z[j]) return false;
  }
  return true;
}

}  // namespace foldplan
