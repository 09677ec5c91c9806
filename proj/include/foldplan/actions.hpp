#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace foldplan {

enum class OpCode : std::uint8_t { Fold, Unfold, Flip, Rotate, Done };

inline constexpr int kNumOps = 5;
inline constexpr int kAngleBins = 16;
inline constexpr int kRhoBins = 8;

std::string_view to_string(OpCode op);
OpCode op_from_string(std::string_view name);

/// One structured folding operation. Which optional fields are present is
/// dictated by `op`:
///   FOLD   edge, angle_bin, rho_bin
///   UNFOLD edge
///   ROTATE rotate_quarter_turns
///   FLIP, DONE  nothing
struct FoldAction {
  OpCode op = OpCode::Done;
  std::optional<int> edge;
  std::optional<int> angle_bin;
  std::optional<int> rho_bin;
  std::optional<int> rotate_quarter_turns;

  static FoldAction fold(int edge, int angle_bin, int rho_bin);
  static FoldAction unfold(int edge);
  static FoldAction flip();
  static FoldAction rotate(int quarter_turns);
  static FoldAction done();

  bool operator==(const FoldAction&) const = default;
};

/// Exactly the fields required by the op are present.
bool is_well_formed(const FoldAction& action);

std::string describe(const FoldAction& action);

/// Uniform bins over [-pi, pi], half-open [lo, hi) with +pi in the last bin.
/// Throws Error{OutOfRange} outside [-pi, pi].
int quantize_angle(double angle);
/// Bin center.
double dequantize_angle(int bin);

/// Uniform bins over [0, 1], half-open with 1 in the last bin.
int quantize_rho(double rho);
/// Upper edge of the bin, so the last bin reconstructs a complete fold.
double dequantize_rho(int bin);

/// Angle bin that carries `quarter_turns` (0..3) in a ROTATE action.
int rotation_angle_bin(int quarter_turns);

using Token = int;

enum class TokenKind : std::uint8_t { Control, Op, Edge, Vertex, AngleBin, RhoBin };

/// Unified token space: control tokens, operations, graph elements and
/// quantized geometry. Ids are assigned in that order and depend only on
/// (num_vertices, num_edges).
class Vocabulary {
 public:
  Vocabulary(int num_vertices, int num_edges);

  int num_vertices() const { return num_vertices_; }
  int num_edges() const { return num_edges_; }
  int size() const { return rho_base_ + kRhoBins; }

  Token bos() const { return 0; }
  Token eos() const { return 1; }
  Token sep() const { return 2; }
  Token op(OpCode code) const { return op_base_ + static_cast<int>(code); }
  Token edge(int index) const;
  Token vertex(int index) const;
  Token angle(int bin) const;
  Token rho(int bin) const;

  TokenKind kind(Token token) const;
  /// Index within the token's sub-vocabulary (edge index, bin, op code...).
  int payload(Token token) const;

  std::string name(Token token) const;
  Token parse(std::string_view name) const;

  bool operator==(const Vocabulary&) const = default;

 private:
  static constexpr int op_base_ = 3;
  int num_vertices_;
  int num_edges_;
  int edge_base_;
  int vertex_base_;
  int angle_base_;
  int rho_base_;
};

/// Positional grammar: FOLD E AB RB | UNFOLD E | FLIP | ROTATE AB | DONE.
/// Throws Error{SchemaViolation} for malformed actions and Error{OutOfRange}
/// when a field has no token in `vocab`.
std::vector<Token> encode(const FoldAction& action, const Vocabulary& vocab);

/// Inverse of encode; throws Error{SchemaViolation} on ungrammatical input.
FoldAction decode(std::span<const Token> tokens, const Vocabulary& vocab);

/// What the grammar expects after `prefix`.
enum class Slot : std::uint8_t { Op, Edge, AngleBin, RhoBin, Quarter, End };

Slot next_slot(std::span<const Token> prefix, const Vocabulary& vocab);

}  // namespace foldplan
