#pragma once

#include <numbers>
#include <string>
#include <vector>

#include "foldplan/crease_pattern.hpp"

namespace foldplan {

/// Concrete folding goal: a category label plus the target per-edge fold.
struct GoalSpec {
  std::string category;
  std::vector<double> target_alpha;
  std::vector<CreaseType> target_z;
  double tolerance = std::numbers::pi / 16;

  bool operator==(const GoalSpec&) const = default;
};

/// Goal built from a reached state (targets equal the state's alpha and z).
GoalSpec goal_from_state(std::string category, const FoldState& state);

/// U = (1/N_e) * sum_j [ |alpha_j - target_j| / 2pi + 0.5 * [z_j != target_z_j and rho_j > 0] ],
/// clamped to [0, 1]. Throws Error{LengthMismatch}.
double goal_distance(const FoldState& state, const GoalSpec& goal);

/// Every angle within tolerance and every folded crease carries its target type.
bool goal_reached(const FoldState& state, const GoalSpec& goal);

}  // namespace foldplan
