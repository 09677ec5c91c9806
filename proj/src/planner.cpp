#include "foldplan/planner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "foldplan/error.hpp"

namespace foldplan {

namespace {

constexpr std::string_view kAggregateNames[] = {"max", "mean"};
constexpr std::string_view kModeNames[] = {"full", "lm_wm", "lm_only"};
constexpr std::string_view kTerminationNames[] = {"DONE", "GOAL_REACHED", "NO_VALID_ACTION", "MAX_STEPS"};

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view name, const std::string_view (&names)[N], const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == name) return static_cast<Enum>(i);
  }
  throw Error(ErrorKind::SchemaViolation, std::string("unknown ") + what + " '" + std::string(name) + "'");
}

double aggregate(const std::vector<double>& values, ViolationAggregate how) {
  if (values.empty()) return 0.0;
  if (how == ViolationAggregate::Max) return *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::set<int> threshold_mask(const std::vector<double>& mask) {
  std::set<int> out;
  for (std::size_t j = 0; j < mask.size(); ++j) {
    if (mask[j] >= 0.5) out.insert(static_cast<int>(j));
  }
  return out;
}

// Top-M not-yet-banned edges with the highest c-hat, taking each edge's
// maximum over the scored candidates.
std::vector<int> edges_by_violation(const std::vector<std::vector<double>>& violations, const std::set<int>& banned,
                                    int m) {
  std::map<int, double> worst;
  for (const auto& v : violations) {
    for (std::size_t j = 0; j < v.size(); ++j) {
      const int e = static_cast<int>(j);
      if (banned.contains(e)) continue;
      auto [it, inserted] = worst.emplace(e, v[j]);
      if (!inserted) it->second = std::max(it->second, v[j]);
    }
  }
  std::vector<std::pair<int, double>> ranked(worst.begin(), worst.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<int> out;
  for (std::size_t i = 0; i < ranked.size() && static_cast<int>(out.size()) < m; ++i) out.push_back(ranked[i].first);
  return out;
}

// Without any c-hat, blame the edges the failed candidates acted on first
// and then those most often in their kernel masks.
std::vector<int> edges_by_kernel_mask(const std::vector<CandidateScore>& candidates, int num_edges,
                                      const std::set<int>& banned, int m) {
  std::map<int, std::pair<int, int>> blame;  // edge -> (acted count, mask count)
  for (const auto& c : candidates) {
    if (c.verdict.valid) continue;
    if (c.action.edge && *c.action.edge >= 0 && *c.action.edge < num_edges) blame[*c.action.edge].first += 1;
    for (std::size_t j = 0; j < c.verdict.affected_mask.size(); ++j) {
      if (c.verdict.affected_mask[j]) blame[static_cast<int>(j)].second += 1;
    }
  }
  std::vector<std::pair<int, std::pair<int, int>>> ranked;
  for (const auto& entry : blame) {
    if (!banned.contains(entry.first)) ranked.push_back(entry);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<int> out;
  for (std::size_t i = 0; i < ranked.size() && static_cast<int>(out.size()) < m; ++i) out.push_back(ranked[i].first);
  return out;
}

}  // namespace

std::string_view to_string(ViolationAggregate aggregate) { return kAggregateNames[static_cast<std::size_t>(aggregate)]; }
ViolationAggregate aggregate_from_string(std::string_view name) {
  return parse_enum<ViolationAggregate>(name, kAggregateNames, "violation aggregate");
}
std::string_view to_string(PlannerMode mode) { return kModeNames[static_cast<std::size_t>(mode)]; }
PlannerMode mode_from_string(std::string_view name) { return parse_enum<PlannerMode>(name, kModeNames, "planner mode"); }
std::string_view to_string(Termination termination) {
  return kTerminationNames[static_cast<std::size_t>(termination)];
}
Termination termination_from_string(std::string_view name) {
  return parse_enum<Termination>(name, kTerminationNames, "termination");
}

void validate(const PlannerConfig& c) {
  auto bad = [](const std::string& what) { throw Error(ErrorKind::OutOfRange, "planner config: " + what); };
  if (c.K < 1) bad("K must be at least 1");
  if (!(c.p > 0.0 && c.p <= 1.0)) bad("p must be in (0, 1]");
  if (!(c.lambda_goal >= 0.0) || !(c.lambda_cst >= 0.0)) bad("lambda weights must be nonnegative");
  if (!(c.epsilon > 0.0)) bad("epsilon must be positive");
  if (c.M < 0) bad("M must be nonnegative");
  if (c.max_resamples < 0) bad("max_resamples must be nonnegative");
  if (c.max_steps < 0) bad("max_steps must be nonnegative");
  if (c.imagination_depth < 1 || c.imagination_depth > 3) bad("imagination_depth must be in 1..3");
  if (!std::isfinite(c.tau)) bad("tau must be finite");
}

double fused_score(double normalized_log_prob, double goal_distance, double violation, const PlannerConfig& config) {
  return normalized_log_prob - config.lambda_goal * goal_distance +
         config.lambda_cst * std::log(config.epsilon + 1.0 - violation);
}

bool better_candidate(const CandidateScore& a, const CandidateScore& b) {
  if (a.score != b.score) return a.score > b.score;
  const int ea = a.action.edge.value_or(-1);
  const int eb = b.action.edge.value_or(-1);
  if (ea != eb) return ea < eb;
  return a.tokens < b.tokens;
}

PlanStepResult plan_step(const CanonicalPattern& pattern, const FoldState& state, const GoalSpec& goal,
                         const Policy& policy, const WorldModel* wm, const PlannerConfig& config,
                         std::uint64_t step_seed, const KernelConfig& kernel) {
  validate(config);
  const PolicyContext ctx{goal, pattern, state};
  const Vocabulary& vocab = policy.vocabulary();
  PlanStepResult result;
  StepDiagnostics& diag = result.diagnostics;

  if (config.mode == PlannerMode::LmOnly) {
    CandidateScore c;
    c.action = nucleus_sample(policy, ctx, config.p, mix_seed(step_seed, 0));
    c.tokens = encode(c.action, vocab);
    c.log_prob = log_prob(policy, ctx, c.action) / static_cast<double>(c.tokens.size());
    c.verdict = level0::step(pattern, state, c.action, kernel).verdict;
    c.score = c.log_prob;
    c.scored = true;
    diag.kernel_calls = 1;
    diag.rounds.push_back({{}, 1, {c}});
    diag.selected_round = 0;
    diag.selected_index = 0;
    result.action = c.action;
    return result;
  }
  if (wm == nullptr) throw std::invalid_argument("this planner mode needs a world model");
  const bool filter = config.mode == PlannerMode::Full;

  std::set<int> banned;
  std::optional<std::pair<int, int>> best;  // (round, index)
  std::map<std::pair<int, int>, std::set<int>> predicted_masks;
  auto candidate_at = [&](std::pair<int, int> at) -> const CandidateScore& {
    return diag.rounds[static_cast<std::size_t>(at.first)].candidates[static_cast<std::size_t>(at.second)];
  };

  for (int round = 0; round <= config.max_resamples; ++round) {
    PlanRound pr;
    pr.banned_edges = banned;
    std::set<std::vector<Token>> seen;
    for (int k = 0; k < config.K; ++k) {
      const auto seed = mix_seed(step_seed, static_cast<std::uint64_t>(round * config.K + k));
      FoldAction a = nucleus_sample(policy, ctx, config.p, seed, banned);
      ++pr.sampled;
      auto tokens = encode(a, vocab);
      if (!seen.insert(tokens).second) continue;
      CandidateScore c;
      c.action = std::move(a);
      c.tokens = std::move(tokens);
      pr.candidates.push_back(std::move(c));
    }

    std::vector<std::vector<double>> violations;
    std::optional<int> round_best;
    for (std::size_t i = 0; i < pr.candidates.size(); ++i) {
      CandidateScore& c = pr.candidates[i];
      const StepResult kernel_result = level0::step(pattern, state, c.action, kernel);
      ++diag.kernel_calls;
      c.verdict = kernel_result.verdict;
      if (filter && !c.verdict.valid) continue;

      c.log_prob = log_prob(policy, ctx, c.action) / static_cast<double>(c.tokens.size());
      const Prediction pred = predict(*wm, pattern, state, c.action);
      FoldState imagined = apply_prediction(state, pred);
      if (filter) {
        // Discrete channels come from the kernel; only alpha and rho are imagined.
        imagined.z = kernel_result.state.z;
        imagined.b = kernel_result.state.b;
        imagined.psi = kernel_result.state.psi;
      }
      for (int depth = 1; depth < config.imagination_depth; ++depth) {
        const PolicyContext next_ctx{goal, pattern, imagined};
        const FoldAction follow = greedy_action(policy, next_ctx);
        imagined = imagine(*wm, pattern, imagined, follow);
      }
      c.goal_distance = goal_distance(imagined, goal);
      c.violation = aggregate(pred.violation, config.aggregate);
      c.score = fused_score(c.log_prob, c.goal_distance, c.violation, config);
      c.scored = true;
      violations.push_back(pred.violation);
      const int idx = static_cast<int>(i);
      predicted_masks[{round, idx}] = threshold_mask(pred.mask);
      if (!round_best || better_candidate(c, pr.candidates[static_cast<std::size_t>(*round_best)])) round_best = idx;
    }
    diag.rounds.push_back(std::move(pr));
    const PlanRound& done = diag.rounds.back();

    if (round_best) {
      const std::pair<int, int> at{round, *round_best};
      if (!best || better_candidate(candidate_at(at), candidate_at(*best))) best = at;
      if (candidate_at(*best).score >= config.tau) break;
    }
    if (round == config.max_resamples) break;
    const auto blamed = violations.empty()
                            ? edges_by_kernel_mask(done.candidates, pattern.num_edges(), banned, config.M)
                            : edges_by_violation(violations, banned, config.M);
    banned.insert(blamed.begin(), blamed.end());
  }

  if (!best) {
    throw Error(ErrorKind::NoValidAction, "no valid candidate after " + std::to_string(config.max_resamples + 1) +
                                              " sampling rounds");
  }
  diag.selected_round = best->first;
  diag.selected_index = best->second;
  diag.below_threshold = candidate_at(*best).score < config.tau;
  result.action = candidate_at(*best).action;
  result.predicted_mask = predicted_masks.at(*best);
  return result;
}

Trajectory rollout(const CanonicalPattern& pattern, const FoldState& initial, const GoalSpec& goal,
                   const Policy& policy, const WorldModel* wm, const PlannerConfig& config,
                   const KernelConfig& kernel) {
  validate(config);
  Trajectory traj;
  traj.category = goal.category;
  traj.mode = config.mode;
  traj.initial_state = initial;
  traj.seed = config.seed;
  FoldState state = initial;
  traj.termination = Termination::MaxSteps;

  for (int t = 0; t < config.max_steps; ++t) {
    PlanStepResult plan;
    try {
      plan = plan_step(pattern, state, goal, policy, wm, config, mix_seed(config.seed, static_cast<std::uint64_t>(t)),
                       kernel);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoValidAction) throw;
      traj.termination = Termination::NoValidAction;
      break;
    }
    StepResult executed = level0::step(pattern, state, plan.action, kernel);

    TrajectoryStep step;
    step.action = plan.action;
    step.verdict = executed.verdict;
    step.state_after = executed.state;
    const auto& diag = plan.diagnostics;
    step.score = diag.rounds[static_cast<std::size_t>(diag.selected_round)]
                     .candidates[static_cast<std::size_t>(diag.selected_index)]
                     .score;
    for (const auto& round : diag.rounds) {
      for (const auto& c : round.candidates) {
        ++step.proposals_total;
        step.proposals_valid += c.verdict.valid ? 1 : 0;
      }
    }
    step.predicted_mask = plan.predicted_mask;
    step.candidates = diag.rounds.back().candidates;
    traj.steps.push_back(std::move(step));
    state = std::move(executed.state);

    if (plan.action.op == OpCode::Done && executed.verdict.valid) {
      traj.termination = Termination::Done;
      break;
    }
    if (goal_reached(state, goal)) {
      traj.termination = Termination::GoalReached;
      break;
    }
  }
  traj.success = goal_reached(state, goal);
  traj.final_goal_distance = goal_distance(state, goal);
  return traj;
}

}  // namespace foldplan
