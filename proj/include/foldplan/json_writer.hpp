#pragma once

#include <string>

#include "json.hpp"

namespace foldplan {

using ordered_json = nlohmann::ordered_json;

enum class FloatFormat {
  Fixed9,    // "%.9f", used by the crease-pattern file format
  Shortest,  // shortest round-trip representation
};

/// Byte-stable compact serialization. Keys keep insertion order; floats are
/// printed with the requested format and negative zero is written as zero.
std::string dump_json(const ordered_json& value, FloatFormat floats);

/// FNV-1a 64-bit digest rendered as 16 lowercase hex digits.
std::string content_hash(std::string_view bytes);

}  // namespace foldplan
