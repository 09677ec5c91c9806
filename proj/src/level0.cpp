#include "foldplan/level0.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "foldplan/error.hpp"

namespace foldplan {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

constexpr std::string_view kReasonNames[] = {
    "OK",
    "INVALID_EDGE",
    "BOUNDARY_EDGE",
    "TYPE_CONFLICT",
    "ANGLE_OUT_OF_RANGE",
    "NONMONOTONE_PROGRESS",
    "KAWASAKI_VIOLATION",
    "MAEKAWA_VIOLATION",
    "DEVELOPABILITY_VIOLATION",
    "STEP_BUDGET_EXCEEDED",
    "MALFORMED_ACTION",
};

Verdict ok(std::vector<bool> mask) { return {true, Reason::Ok, std::move(mask), std::nullopt}; }

Verdict fail(Reason reason, std::vector<bool> mask, std::optional<int> vertex = std::nullopt) {
  return {false, reason, std::move(mask), vertex};
}

std::vector<bool> ring_mask(const CanonicalPattern& pattern, int edge) {
  std::vector<bool> mask(static_cast<std::size_t>(pattern.num_edges()), false);
  mask[static_cast<std::size_t>(edge)] = true;
  for (int other : pattern.topology().ring[static_cast<std::size_t>(edge)]) mask[static_cast<std::size_t>(other)] = true;
  return mask;
}

std::vector<bool> vertex_mask(const CanonicalPattern& pattern, int vertex) {
  std::vector<bool> mask(static_cast<std::size_t>(pattern.num_edges()), false);
  for (int e : pattern.topology().incident[static_cast<std::size_t>(vertex)]) mask[static_cast<std::size_t>(e)] = true;
  return mask;
}

bool edge_op(OpCode op) { return op == OpCode::Fold || op == OpCode::Unfold; }

bool maekawa_counts_ok(const CanonicalPattern& pattern, const FoldState& state, int vertex) {
  const auto& creases = pattern.topology().creases[static_cast<std::size_t>(vertex)];
  int mountains = 0;
  int valleys = 0;
  for (int e : creases) {
    const CreaseType z = state.z[static_cast<std::size_t>(e)];
    if (z == CreaseType::Unassigned) continue;
    // Under the flip flag the printed labels swap; the count difference is
    // symmetric so only the bookkeeping changes.
    const bool mountain = (z == CreaseType::Mountain) != state.b;
    (mountain ? mountains : valleys) += 1;
  }
  return creases.size() % 2 == 0 && std::abs(mountains - valleys) == 2;
}

// Maekawa then Kawasaki at a fully folded interior vertex.
std::optional<Reason> flat_vertex_violation(const CanonicalPattern& pattern, const FoldState& state, int vertex) {
  if (!maekawa_counts_ok(pattern, state, vertex)) return Reason::MaekawaViolation;
  if (!level0::kawasaki_holds(pattern.topology().crease_sectors[static_cast<std::size_t>(vertex)])) {
    return Reason::KawasakiViolation;
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Reason reason) { return kReasonNames[static_cast<std::size_t>(reason)]; }

Reason reason_from_string(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kReasonNames); ++i) {
    if (kReasonNames[i] == name) return static_cast<Reason>(i);
  }
  throw Error(ErrorKind::SchemaViolation, "unknown verdict reason '" + std::string(name) + "'");
}

namespace level0 {

bool kawasaki_holds(std::span<const double> sectors) {
  if (sectors.size() % 2 != 0) return false;
  double even = 0.0;
  double odd = 0.0;
  for (std::size_t i = 0; i < sectors.size(); ++i) (i % 2 == 0 ? even : odd) += sectors[i];
  return std::abs(even - kPi) <= kAngleTolerance && std::abs(odd - kPi) <= kAngleTolerance;
}

bool fully_folded(const CanonicalPattern& pattern, const FoldState& state, int vertex) {
  const auto& creases = pattern.topology().creases[static_cast<std::size_t>(vertex)];
  if (creases.empty()) return false;
  for (int e : creases) {
    if (state.rho[static_cast<std::size_t>(e)] < 1.0) return false;
  }
  return true;
}

bool check_maekawa(const CanonicalPattern& pattern, const FoldState& state, int vertex) {
  if (vertex < 0 || vertex >= pattern.num_vertices()) throw Error(ErrorKind::OutOfRange, "vertex index out of range");
  for (int e : pattern.topology().creases[static_cast<std::size_t>(vertex)]) {
    if (state.rho[static_cast<std::size_t>(e)] < 1.0) {
      throw Error(ErrorKind::NotFullyFolded,
                  "crease " + std::to_string(e) + " at vertex " + std::to_string(vertex) + " is not fully folded");
    }
  }
  return maekawa_counts_ok(pattern, state, vertex);
}

bool check_kawasaki(const CanonicalPattern& pattern, int vertex) {
  if (vertex < 0 || vertex >= pattern.num_vertices()) throw Error(ErrorKind::OutOfRange, "vertex index out of range");
  const auto& creases = pattern.topology().creases[static_cast<std::size_t>(vertex)];
  if (creases.size() % 2 != 0) {
    throw Error(ErrorKind::OddDegree, "vertex " + std::to_string(vertex) + " has odd crease degree " +
                                          std::to_string(creases.size()));
  }
  if (creases.empty()) return true;
  return kawasaki_holds(pattern.topology().crease_sectors[static_cast<std::size_t>(vertex)]);
}

Verdict verify_flat_state(const CanonicalPattern& pattern, const FoldState& state) {
  const Topology& topo = pattern.topology();
  for (int v = 0; v < pattern.num_vertices(); ++v) {
    const auto vi = static_cast<std::size_t>(v);
    if (!topo.interior[vi]) continue;
    if (std::abs(topo.sheet_angle[vi] - kTwoPi) > kAngleTolerance) {
      return fail(Reason::DevelopabilityViolation, vertex_mask(pattern, v), v);
    }
    if (fully_folded(pattern, state, v)) {
      if (auto reason = flat_vertex_violation(pattern, state, v)) return fail(*reason, vertex_mask(pattern, v), v);
    }
  }
  return ok(std::vector<bool>(static_cast<std::size_t>(pattern.num_edges()), false));
}

StepResult step(const CanonicalPattern& pattern, const FoldState& state, const FoldAction& action,
                const KernelConfig& config) {
  const int ne = pattern.num_edges();
  const auto n = static_cast<std::size_t>(ne);
  if (state.alpha.size() != n || state.rho.size() != n || state.z.size() != n) {
    throw std::invalid_argument("fold state does not belong to the pattern");
  }
  const std::vector<bool> none(n, false);
  auto reject = [&](Verdict v) { return StepResult{state, std::move(v)}; };

  if (!is_well_formed(action) ||
      (action.op == OpCode::Rotate && (*action.rotate_quarter_turns < 0 || *action.rotate_quarter_turns > 3))) {
    return reject(fail(Reason::MalformedAction, none));
  }
  const bool has_edge = edge_op(action.op);
  const bool edge_in_range = has_edge && *action.edge >= 0 && *action.edge < ne;

  if (state.step >= config.step_budget) {
    return reject(fail(Reason::StepBudgetExceeded, edge_in_range ? ring_mask(pattern, *action.edge) : none));
  }
  if (const auto& v = pattern.topology().developability_violation) {
    return reject(fail(Reason::DevelopabilityViolation, vertex_mask(pattern, *v), *v));
  }

  FoldState next = state;
  next.step = state.step + 1;

  switch (action.op) {
    case OpCode::Fold:
    case OpCode::Unfold: {
      if (!edge_in_range) return reject(fail(Reason::InvalidEdge, none));
      const int e = *action.edge;
      const auto ei = static_cast<std::size_t>(e);
      std::vector<bool> mask = ring_mask(pattern, e);
      if (pattern.pattern().is_boundary(e)) return reject(fail(Reason::BoundaryEdge, std::move(mask)));

      if (action.op == OpCode::Unfold) {
        next.alpha[ei] = 0.0;
        next.rho[ei] = 0.0;
        next.z[ei] = pattern.pattern().crease_types()[ei];
        return {std::move(next), ok(std::move(mask))};
      }

      const int abin = *action.angle_bin;
      const int rbin = *action.rho_bin;
      if (abin < 0 || abin >= kAngleBins || rbin < 0 || rbin >= kRhoBins) {
        return reject(fail(Reason::AngleOutOfRange, std::move(mask)));
      }
      const double target = dequantize_angle(abin);
      const double target_rho = dequantize_rho(rbin);
      const int target_sign = target > 0.0 ? 1 : -1;

      CreaseType type = state.z[ei];
      if (type == CreaseType::Unassigned) {
        // An unassigned crease adopts the direction of its first fold.
        const bool mountain = (target_sign > 0) != state.b;
        type = mountain ? CreaseType::Mountain : CreaseType::Valley;
      } else if (target_sign != expected_sign(type, state.b)) {
        return reject(fail(Reason::TypeConflict, std::move(mask)));
      }
      if (target_rho < state.rho[ei]) return reject(fail(Reason::NonmonotoneProgress, std::move(mask)));

      next.alpha[ei] = expected_sign(type, state.b) * std::abs(target);
      next.rho[ei] = target_rho;
      next.z[ei] = type;

      const Edge& edge = pattern.pattern().edges()[ei];
      for (int v : {std::min(edge.a, edge.b), std::max(edge.a, edge.b)}) {
        if (!pattern.topology().interior[static_cast<std::size_t>(v)]) continue;
        if (!fully_folded(pattern, next, v)) continue;
        if (auto reason = flat_vertex_violation(pattern, next, v)) return reject(fail(*reason, std::move(mask), v));
      }
      return {std::move(next), ok(std::move(mask))};
    }
    case OpCode::Flip: {
      std::vector<bool> mask(n, false);
      next.b = !state.b;
      for (std::size_t j = 0; j < n; ++j) {
        if (next.alpha[j] != 0.0) next.alpha[j] = -next.alpha[j];
        mask[j] = state.rho[j] > 0.0;
      }
      return {std::move(next), ok(std::move(mask))};
    }
    case OpCode::Rotate: {
      double psi = std::fmod(state.psi + *action.rotate_quarter_turns * (kPi / 2), kTwoPi);
      if (psi < 0.0) psi += kTwoPi;
      next.psi = psi;
      return {std::move(next), ok(none)};
    }
    case OpCode::Done:
      return {std::move(next), ok(none)};
  }
  return reject(fail(Reason::MalformedAction, none));
}

}  // namespace level0

}  // namespace foldplan
