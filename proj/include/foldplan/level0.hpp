#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "foldplan/actions.hpp"
#include "foldplan/crease_pattern.hpp"

namespace foldplan {

enum class Reason : std::uint8_t {
  Ok,
  InvalidEdge,
  BoundaryEdge,
  TypeConflict,
  AngleOutOfRange,
  NonmonotoneProgress,
  KawasakiViolation,
  MaekawaViolation,
  DevelopabilityViolation,
  StepBudgetExceeded,
  MalformedAction,
};

std::string_view to_string(Reason reason);
Reason reason_from_string(std::string_view name);

struct Verdict {
  bool valid = true;
  Reason reason = Reason::Ok;
  std::vector<bool> affected_mask;
  /// Vertex responsible for a vertex-level violation.
  std::optional<int> vertex;

  bool operator==(const Verdict&) const = default;
};

struct KernelConfig {
  int step_budget = 64;
};

struct StepResult {
  FoldState state;
  Verdict verdict;
};

namespace level0 {

/// Applies `action` to `state` and verifies the local constraints.
///
/// Checks run in this order and the first failure is reported:
/// well-formedness, step budget, developability of the pattern, edge range,
/// boundary edge, bin range, crease-type sign, monotone progress, and then
/// Maekawa and Kawasaki at every interior endpoint the fold leaves fully
/// folded. An invalid verdict returns the input state unchanged.
///
/// Throws std::invalid_argument when the state's vectors do not match the
/// pattern.
StepResult step(const CanonicalPattern& pattern, const FoldState& state, const FoldAction& action,
                const KernelConfig& config = {});

/// |#M - #V| == 2 and an even count over the creases at `vertex`. Every
/// incident crease must be fully folded (Error{NotFullyFolded}).
bool check_maekawa(const CanonicalPattern& pattern, const FoldState& state, int vertex);

/// Alternating sums of the crease sector angles at `vertex` are each pi.
/// Throws Error{OddDegree} for an odd crease count.
bool check_kawasaki(const CanonicalPattern& pattern, int vertex);

/// Kawasaki condition on an explicit cyclic list of sector angles.
bool kawasaki_holds(std::span<const double> sectors);

/// Developability at every interior vertex, then Maekawa and Kawasaki at
/// every fully folded interior vertex, scanning vertices in index order.
Verdict verify_flat_state(const CanonicalPattern& pattern, const FoldState& state);

/// Every incident crease at the interior vertex has rho == 1.
bool fully_folded(const CanonicalPattern& pattern, const FoldState& state, int vertex);

}  // namespace level0

}  // namespace foldplan
