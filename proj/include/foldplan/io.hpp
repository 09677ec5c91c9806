#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "foldplan/actions.hpp"
#include "foldplan/crease_pattern.hpp"
#include "foldplan/goal.hpp"
#include "foldplan/json_writer.hpp"
#include "foldplan/level0.hpp"
#include "foldplan/metrics.hpp"
#include "foldplan/planner.hpp"
#include "foldplan/policy.hpp"
#include "foldplan/transition.hpp"
#include "foldplan/world_model.hpp"

namespace foldplan {

using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

// All *_from_json functions throw Error{SchemaViolation} for missing or
// mistyped fields and keep the domain checks of the constructed types.

ordered_json cp_to_json(const CreasePattern& pattern);
CreasePattern cp_from_json(const json& j);
/// Byte-stable CP file text ("%.9f" floats, fields in fixed order).
std::string serialize_cp(const CreasePattern& pattern);
CreasePattern parse_cp(std::string_view text);
/// Content hash of the canonical CP file; the pattern reference used in records.
std::string pattern_ref(const CanonicalPattern& pattern);

ordered_json action_to_json(const FoldAction& action);
FoldAction action_from_json(const json& j);
ordered_json program_to_json(std::span<const FoldAction> actions);
std::vector<FoldAction> program_from_json(const json& j);

ordered_json state_to_json(const FoldState& state);
FoldState state_from_json(const json& j);

/// The affected mask is stored as a sorted list of edge indices.
ordered_json verdict_to_json(const Verdict& verdict);
Verdict verdict_from_json(const json& j, int num_edges);

ordered_json goal_to_json(const GoalSpec& goal);
GoalSpec goal_from_json(const json& j);

ordered_json record_to_json(const TransitionRecord& record);
TransitionRecord record_from_json(const json& j, int num_edges);

ordered_json policy_to_json(const NGramPolicy& policy);
NGramPolicy policy_from_json(const json& j);

ordered_json world_model_to_json(const WorldModel& model);
WorldModel world_model_from_json(const json& j);

/// Missing keys keep their defaults.
ordered_json config_to_json(const PlannerConfig& config);
PlannerConfig config_from_json(const json& j);

ordered_json trajectory_to_json(const Trajectory& trajectory);
Trajectory trajectory_from_json(const json& j, int num_edges);

ordered_json report_to_json(const EvalReport& report);

/// Throws Error{IOFailure}.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);
/// Throws Error{IOFailure} or Error{SchemaViolation} for malformed JSON.
json read_json_file(const std::filesystem::path& path);
json parse_json(std::string_view text);

}  // namespace foldplan
