#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "foldplan/actions.hpp"
#include "foldplan/crease_pattern.hpp"
#include "foldplan/level0.hpp"

namespace foldplan {

enum class Provenance : std::uint8_t { Expert, Perturbed, Explored };

std::string_view to_string(Provenance provenance);
Provenance provenance_from_string(std::string_view name);

/// One kernel-labelled step. The pattern is referenced by the content hash
/// of its canonical CP file.
struct TransitionRecord {
  std::string pattern_ref;
  FoldState state_before;
  FoldAction action;
  FoldState state_after;
  Verdict verdict;
  Provenance provenance = Provenance::Expert;

  bool operator==(const TransitionRecord&) const = default;
};

}  // namespace foldplan
