#include "foldplan/actions.hpp"

#include <cmath>
#include <numbers>

#include "foldplan/error.hpp"

namespace foldplan {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kAngleWidth = 2.0 * kPi / kAngleBins;

[[noreturn]] void schema(const std::string& message) { throw Error(ErrorKind::SchemaViolation, message); }

int parse_index(std::string_view text, std::string_view prefix) {
  if (text.size() <= prefix.size() || text.substr(0, prefix.size()) != prefix) return -1;
  int value = 0;
  for (char c : text.substr(prefix.size())) {
    if (c < '0' || c > '9') return -1;
    value = value * 10 + (c - '0');
  }
  return value;
}

}  // namespace

std::string_view to_string(OpCode op) {
  switch (op) {
    case OpCode::Fold: return "FOLD";
    case OpCode::Unfold: return "UNFOLD";
    case OpCode::Flip: return "FLIP";
    case OpCode::Rotate: return "ROTATE";
    case OpCode::Done: return "DONE";
  }
  return "?";
}

OpCode op_from_string(std::string_view name) {
  for (int i = 0; i < kNumOps; ++i) {
    const auto op = static_cast<OpCode>(i);
    if (to_string(op) == name) return op;
  }
  schema("unknown op '" + std::string(name) + "'");
}

FoldAction FoldAction::fold(int edge, int angle_bin, int rho_bin) {
  FoldAction a;
  a.op = OpCode::Fold;
  a.edge = edge;
  a.angle_bin = angle_bin;
  a.rho_bin = rho_bin;
  return a;
}

FoldAction FoldAction::unfold(int edge) {
  FoldAction a;
  a.op = OpCode::Unfold;
  a.edge = edge;
  return a;
}

FoldAction FoldAction::flip() {
  FoldAction a;
  a.op = OpCode::Flip;
  return a;
}

FoldAction FoldAction::rotate(int quarter_turns) {
  FoldAction a;
  a.op = OpCode::Rotate;
  a.rotate_quarter_turns = quarter_turns;
  return a;
}

FoldAction FoldAction::done() { return FoldAction{}; }

bool is_well_formed(const FoldAction& a) {
  const bool e = a.edge.has_value();
  const bool ab = a.angle_bin.has_value();
  const bool rb = a.rho_bin.has_value();
  const bool q = a.rotate_quarter_turns.has_value();
  switch (a.op) {
    case OpCode::Fold: return e && ab && rb && !q;
    case OpCode::Unfold: return e && !ab && !rb && !q;
    case OpCode::Rotate: return !e && !ab && !rb && q;
    case OpCode::Flip:
    case OpCode::Done: return !e && !ab && !rb && !q;
  }
  return false;
}

std::string describe(const FoldAction& a) {
  std::string out(to_string(a.op));
  if (a.edge) out += " E" + std::to_string(*a.edge);
  if (a.angle_bin) out += " AB" + std::to_string(*a.angle_bin);
  if (a.rho_bin) out += " RB" + std::to_string(*a.rho_bin);
  if (a.rotate_quarter_turns) out += " Q" + std::to_string(*a.rotate_quarter_turns);
  return out;
}

int quantize_angle(double angle) {
  if (!(angle >= -kPi && angle <= kPi)) {
    throw Error(ErrorKind::OutOfRange, "angle " + std::to_string(angle) + " outside [-pi, pi]");
  }
  const int bin = static_cast<int>(std::floor((angle + kPi) / kAngleWidth));
  return std::min(bin, kAngleBins - 1);
}

double dequantize_angle(int bin) {
  if (bin < 0 || bin >= kAngleBins) throw Error(ErrorKind::OutOfRange, "angle bin " + std::to_string(bin));
  return -kPi + (bin + 0.5) * kAngleWidth;
}

int quantize_rho(double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw Error(ErrorKind::OutOfRange, "progress " + std::to_string(rho) + " outside [0, 1]");
  }
  const int bin = static_cast<int>(std::floor(rho * kRhoBins));
  return std::min(bin, kRhoBins - 1);
}

double dequantize_rho(int bin) {
  if (bin < 0 || bin >= kRhoBins) throw Error(ErrorKind::OutOfRange, "rho bin " + std::to_string(bin));
  return static_cast<double>(bin + 1) / kRhoBins;
}

int rotation_angle_bin(int quarter_turns) {
  if (quarter_turns < 0 || quarter_turns > 3) {
    throw Error(ErrorKind::OutOfRange, "quarter turns must be in 0..3");
  }
  // Angles wrapped into (-pi, pi]: 0, pi/2, pi, -pi/2.
  constexpr double angles[] = {0.0, kPi / 2, kPi, -kPi / 2};
  return quantize_angle(angles[quarter_turns]);
}

Vocabulary::Vocabulary(int num_vertices, int num_edges)
    : num_vertices_(num_vertices),
      num_edges_(num_edges),
      edge_base_(op_base_ + kNumOps),
      vertex_base_(edge_base_ + num_edges),
      angle_base_(vertex_base_ + num_vertices),
      rho_base_(angle_base_ + kAngleBins) {
  if (num_vertices < 0 || num_edges < 0) throw std::invalid_argument("negative vocabulary dimension");
}

Token Vocabulary::edge(int index) const {
  if (index < 0 || index >= num_edges_) throw Error(ErrorKind::OutOfRange, "edge " + std::to_string(index) + " has no token");
  return edge_base_ + index;
}

Token Vocabulary::vertex(int index) const {
  if (index < 0 || index >= num_vertices_) throw Error(ErrorKind::OutOfRange, "vertex " + std::to_string(index) + " has no token");
  return vertex_base_ + index;
}

Token Vocabulary::angle(int bin) const {
  if (bin < 0 || bin >= kAngleBins) throw Error(ErrorKind::OutOfRange, "angle bin " + std::to_string(bin) + " has no token");
  return angle_base_ + bin;
}

Token Vocabulary::rho(int bin) const {
  if (bin < 0 || bin >= kRhoBins) throw Error(ErrorKind::OutOfRange, "rho bin " + std::to_string(bin) + " has no token");
  return rho_base_ + bin;
}

TokenKind Vocabulary::kind(Token t) const {
  if (t < 0 || t >= size()) throw Error(ErrorKind::OutOfRange, "token id " + std::to_string(t));
  if (t < op_base_) return TokenKind::Control;
  if (t < edge_base_) return TokenKind::Op;
  if (t < vertex_base_) return TokenKind::Edge;
  if (t < angle_base_) return TokenKind::Vertex;
  if (t < rho_base_) return TokenKind::AngleBin;
  return TokenKind::RhoBin;
}

int Vocabulary::payload(Token t) const {
  switch (kind(t)) {
    case TokenKind::Control: return t;
    case TokenKind::Op: return t - op_base_;
    case TokenKind::Edge: return t - edge_base_;
    case TokenKind::Vertex: return t - vertex_base_;
    case TokenKind::AngleBin: return t - angle_base_;
    case TokenKind::RhoBin: return t - rho_base_;
  }
  return -1;
}

std::string Vocabulary::name(Token t) const {
  const int p = payload(t);
  switch (kind(t)) {
    case TokenKind::Control: return t == 0 ? "BOS" : t == 1 ? "EOS" : "SEP";
    case TokenKind::Op: return std::string(to_string(static_cast<OpCode>(p)));
    case TokenKind::Edge: return "E" + std::to_string(p);
    case TokenKind::Vertex: return "V" + std::to_string(p);
    case TokenKind::AngleBin: return "AB" + std::to_string(p);
    case TokenKind::RhoBin: return "RB" + std::to_string(p);
  }
  return "?";
}

Token Vocabulary::parse(std::string_view text) const {
  if (text == "BOS") return bos();
  if (text == "EOS") return eos();
  if (text == "SEP") return sep();
  for (int i = 0; i < kNumOps; ++i) {
    if (to_string(static_cast<OpCode>(i)) == text) return op(static_cast<OpCode>(i));
  }
  if (int i = parse_index(text, "AB"); i >= 0) return angle(i);
  if (int i = parse_index(text, "RB"); i >= 0) return rho(i);
  if (int i = parse_index(text, "E"); i >= 0) return edge(i);
  if (int i = parse_index(text, "V"); i >= 0) return vertex(i);
  schema("unknown token '" + std::string(text) + "'");
}

std::vector<Token> encode(const FoldAction& a, const Vocabulary& vocab) {
  if (!is_well_formed(a)) schema("action '" + describe(a) + "' lacks fields required by its op");
  std::vector<Token> out{vocab.op(a.op)};
  switch (a.op) {
    case OpCode::Fold:
      out.push_back(vocab.edge(*a.edge));
      out.push_back(vocab.angle(*a.angle_bin));
      out.push_back(vocab.rho(*a.rho_bin));
      break;
    case OpCode::Unfold:
      out.push_back(vocab.edge(*a.edge));
      break;
    case OpCode::Rotate:
      out.push_back(vocab.angle(rotation_angle_bin(*a.rotate_quarter_turns)));
      break;
    case OpCode::Flip:
    case OpCode::Done:
      break;
  }
  return out;
}

Slot next_slot(std::span<const Token> prefix, const Vocabulary& vocab) {
  if (prefix.empty()) return Slot::Op;
  if (vocab.kind(prefix[0]) != TokenKind::Op) schema("action must start with an op token");
  const auto op = static_cast<OpCode>(vocab.payload(prefix[0]));
  const std::size_t n = prefix.size();
  switch (op) {
    case OpCode::Fold:
      if (n == 1) return Slot::Edge;
      if (n == 2) return Slot::AngleBin;
      if (n == 3) return Slot::RhoBin;
      return Slot::End;
    case OpCode::Unfold: return n == 1 ? Slot::Edge : Slot::End;
    case OpCode::Rotate: return n == 1 ? Slot::Quarter : Slot::End;
    case OpCode::Flip:
    case OpCode::Done: return Slot::End;
  }
  return Slot::End;
}

FoldAction decode(std::span<const Token> tokens, const Vocabulary& vocab) {
  if (tokens.empty()) schema("empty token sequence");
  for (Token t : tokens) {
    if (t < 0 || t >= vocab.size()) schema("token id " + std::to_string(t) + " outside the vocabulary");
  }
  auto expect = [&](std::size_t i, TokenKind kind, const char* what) {
    if (i >= tokens.size() || vocab.kind(tokens[i]) != kind) schema(std::string("expected ") + what + " token");
    return vocab.payload(tokens[i]);
  };
  const auto op = static_cast<OpCode>(expect(0, TokenKind::Op, "op"));
  FoldAction a;
  a.op = op;
  std::size_t length = 1;
  switch (op) {
    case OpCode::Fold:
      a.edge = expect(1, TokenKind::Edge, "edge");
      a.angle_bin = expect(2, TokenKind::AngleBin, "angle bin");
      a.rho_bin = expect(3, TokenKind::RhoBin, "rho bin");
      length = 4;
      break;
    case OpCode::Unfold:
      a.edge = expect(1, TokenKind::Edge, "edge");
      length = 2;
      break;
    case OpCode::Rotate: {
      const int bin = expect(1, TokenKind::AngleBin, "rotation angle");
      for (int q = 0; q < 4; ++q) {
        if (rotation_angle_bin(q) == bin) a.rotate_quarter_turns = q;
      }
      if (!a.rotate_quarter_turns) schema("angle bin " + std::to_string(bin) + " is not a quarter turn");
      length = 2;
      break;
    }
    case OpCode::Flip:
    case OpCode::Done:
      break;
  }
  if (tokens.size() != length) schema("trailing tokens after a complete action");
  return a;
}

}  // namespace foldplan
