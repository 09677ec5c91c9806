#include "foldplan/json_writer.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>

#include "foldplan/error.hpp"

namespace foldplan {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidPattern: return "InvalidPattern";
    case ErrorKind::DegreeTooLow: return "DegreeTooLow";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::NotFullyFolded: return "NotFullyFolded";
    case ErrorKind::OddDegree: return "OddDegree";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::EmptyBatch: return "EmptyBatch";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::NoValidAction: return "NoValidAction";
    case ErrorKind::GenerationExhausted: return "GenerationExhausted";
    case ErrorKind::IOFailure: return "IOFailure";
    case ErrorKind::EmptyResults: return "EmptyResults";
  }
  return "Unknown";
}

namespace {

void write_float(std::string& out, double value, FloatFormat format) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument("cannot serialize a non-finite number");
  }
  if (value == 0.0) value = 0.0;  // drop the sign of negative zero
  if (format == FloatFormat::Fixed9) {
    std::array<char, 64> buf{};
    const int n = std::snprintf(buf.data(), buf.size(), "%.9f", value);
    std::string_view text(buf.data(), static_cast<std::size_t>(n));
    if (text == "-0.000000000") text.remove_prefix(1);
    out.append(text);
    return;
  }
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw std::runtime_error("float formatting failed");
  std::string_view text(buf.data(), static_cast<std::size_t>(end - buf.data()));
  out.append(text);
  // Keep floats recognizable as floats so integral values round-trip as doubles.
  if (text.find_first_of(".eEn") == std::string_view::npos) out.append(".0");
}

void write(std::string& out, const ordered_json& value, FloatFormat format) {
  switch (value.type()) {
    case ordered_json::value_t::object: {
      out.push_back('{');
      bool first = true;
      for (const auto& [key, item] : value.items()) {
        if (!first) out.push_back(',');
        first = false;
        out.append(ordered_json(key).dump());
        out.push_back(':');
        write(out, item, format);
      }
      out.push_back('}');
      break;
    }
    case ordered_json::value_t::array: {
      out.push_back('[');
      bool first = true;
      for (const auto& item : value) {
        if (!first) out.push_back(',');
        first = false;
        write(out, item, format);
      }
      out.push_back(']');
      break;
    }
    case ordered_json::value_t::number_float:
      write_float(out, value.get<double>(), format);
      break;
    default:
      out.append(value.dump());
      break;
  }
}

}  // namespace

std::string dump_json(const ordered_json& value, FloatFormat floats) {
  std::string out;
  write(out, value, floats);
  out.push_back('\n');
  return out;
}

std::string content_hash(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf.data(), 16);
}

}  // namespace foldplan
