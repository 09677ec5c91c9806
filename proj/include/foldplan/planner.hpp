#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "foldplan/actions.hpp"
#include "foldplan/crease_pattern.hpp"
#include "foldplan/goal.hpp"
#include "foldplan/level0.hpp"
#include "foldplan/policy.hpp"
#include "foldplan/world_model.hpp"

namespace foldplan {

/// How the per-edge violation likelihoods are reduced to one number.
enum class ViolationAggregate : std::uint8_t { Max, Mean };

/// Which parts of the loop are active.
///   Full    sample, kernel-filter, score with the world model
///   LmWm    sample, score with the world model, no kernel filter
///   LmOnly  execute a single unfiltered policy sample
enum class PlannerMode : std::uint8_t { Full, LmWm, LmOnly };

std::string_view to_string(ViolationAggregate aggregate);
ViolationAggregate aggregate_from_string(std::string_view name);
std::string_view to_string(PlannerMode mode);
PlannerMode mode_from_string(std::string_view name);

struct PlannerConfig {
  int K = 8;
  double p = 0.9;
  double lambda_goal = 1.0;
  double lambda_cst = 1.0;
  double epsilon = 1e-6;
  double tau = -10.0;
  int M = 3;
  int max_resamples = 3;
  int max_steps = 64;
  std::uint64_t seed = 0;
  int imagination_depth = 1;  // 1..3; deeper levels follow the greedy policy
  ViolationAggregate aggregate = ViolationAggregate::Max;
  PlannerMode mode = PlannerMode::Full;

  bool operator==(const PlannerConfig&) const = default;
};

/// Throws Error{OutOfRange} naming the first bad field.
void validate(const PlannerConfig& config);

struct CandidateScore {
  FoldAction action;
  std::vector<Token> tokens;
  Verdict verdict;            // kernel verdict (also recorded when not filtering)
  double log_prob = 0.0;      // length-normalized
  double goal_distance = 0.0; // U_goal of the imagined successor
  double violation = 0.0;     // aggregated c-hat
  double score = 0.0;         // fused objective J
  bool scored = false;
};

struct PlanRound {
  std::set<int> banned_edges;
  int sampled = 0;  // before de-duplication
  std::vector<CandidateScore> candidates;
};

struct StepDiagnostics {
  std::vector<PlanRound> rounds;
  int kernel_calls = 0;
  int selected_round = -1;
  int selected_index = -1;
  bool below_threshold = false;  // best J stayed under tau after all rounds
};

struct PlanStepResult {
  FoldAction action;
  StepDiagnostics diagnostics;
  /// World-model mask of the selected action, thresholded at 0.5.
  std::optional<std::set<int>> predicted_mask;
};

/// Fused objective of one candidate.
double fused_score(double normalized_log_prob, double goal_distance, double violation, const PlannerConfig& config);

/// Orders candidates for selection: higher J first, then lower edge index
/// (edge-less actions first), then lexicographically smaller tokens.
bool better_candidate(const CandidateScore& a, const CandidateScore& b);

/// One MPC decision. `wm` may be null only in LmOnly mode.
/// Throws Error{NoValidAction} when no candidate survives every round.
PlanStepResult plan_step(const CanonicalPattern& pattern, const FoldState& state, const GoalSpec& goal,
                         const Policy& policy, const WorldModel* wm, const PlannerConfig& config,
                         std::uint64_t step_seed, const KernelConfig& kernel = {});

enum class Termination : std::uint8_t { Done, GoalReached, NoValidAction, MaxSteps };
std::string_view to_string(Termination termination);
Termination termination_from_string(std::string_view name);

struct TrajectoryStep {
  FoldAction action;
  Verdict verdict;
  FoldState state_after;  // always a kernel output
  double score = 0.0;
  int proposals_total = 0;
  int proposals_valid = 0;
  std::optional<std::set<int>> predicted_mask;
  std::vector<CandidateScore> candidates;  // final round of the step
};

struct Trajectory {
  std::string category;
  PlannerMode mode = PlannerMode::Full;
  FoldState initial_state;
  std::vector<TrajectoryStep> steps;
  Termination termination = Termination::MaxSteps;
  bool success = false;
  double final_goal_distance = 0.0;
  std::uint64_t seed = 0;

  const FoldState& final_state() const { return steps.empty() ? initial_state : steps.back().state_after; }
};

/// MPC loop: plan, execute through the kernel, stop on DONE, goal reached,
/// no valid action, or the step cap. Success is the goal test on the final
/// state.
Trajectory rollout(const CanonicalPattern& pattern, const FoldState& initial, const GoalSpec& goal,
                   const Policy& policy, const WorldModel* wm, const PlannerConfig& config,
                   const KernelConfig& kernel = {});

}  // namespace foldplan
