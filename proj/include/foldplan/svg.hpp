#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "foldplan/crease_pattern.hpp"
#include "foldplan/planner.hpp"

namespace foldplan {

/// Crease pattern as SVG. Mountain creases are solid, valley creases dashed,
/// unassigned creases dotted and boundary edges bold. With a state, types
/// come from the state and creases with zero progress are drawn gray.
/// Output depends only on the inputs.
std::string render_svg(const CreasePattern& pattern, const FoldState* state = nullptr, std::string_view title = {});

/// One SVG per visited state, <stem>_000.svg for the initial state through
/// <stem>_<T>.svg. Returns the written paths. Throws Error{IOFailure}.
std::vector<std::filesystem::path> export_trajectory_svgs(const CreasePattern& pattern, const Trajectory& trajectory,
                                                          const std::filesystem::path& dir,
                                                          std::string_view stem = "step");

}  // namespace foldplan
