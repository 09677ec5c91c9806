#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace foldplan {

enum class CreaseType : std::uint8_t { Mountain, Valley, Unassigned };

char to_char(CreaseType type);
CreaseType crease_type_from_char(char c);

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

struct Edge {
  int a = 0;
  int b = 0;
  bool operator==(const Edge&) const = default;
};

inline constexpr double kCoordinateTolerance = 1e-9;
inline constexpr double kAngleTolerance = 1e-6;

/// Static crease-pattern graph on the unit square.
///
/// Construction validates the structural invariants (coordinates inside the
/// square, well-formed and unique edges, straight-line planarity, at least
/// two vertices and one edge) and throws Error{InvalidPattern} naming the
/// first violation. Developability is a property checked by the kernel,
/// not a construction requirement, so that non-developable sheets can be
/// loaded and diagnosed.
///
/// Boundary-flagged edges trace the sheet outline. A boundary-flagged edge
/// that ends at a point strictly inside the square is a cut; the wedge
/// between two consecutive cut edges around such a point is missing paper.
class CreasePattern {
 public:
  CreasePattern(std::vector<Point> vertices, std::vector<Edge> edges,
                std::vector<CreaseType> crease_types, std::vector<bool> boundary,
                std::optional<std::string> category = std::nullopt);

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<CreaseType>& crease_types() const { return crease_types_; }
  const std::vector<bool>& boundary() const { return boundary_; }
  const std::optional<std::string>& category() const { return category_; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  bool is_boundary(int edge) const { return boundary_[static_cast<std::size_t>(edge)]; }

  CreasePattern with_category(std::optional<std::string> category) const;

  bool operator==(const CreasePattern&) const = default;

 private:
  std::vector<Point> vertices_;
  std::vector<Edge> edges_;
  std::vector<CreaseType> crease_types_;
  std::vector<bool> boundary_;
  std::optional<std::string> category_;
};

/// Dynamic per-edge fold state.
struct FoldState {
  std::vector<double> alpha;    // signed dihedral angle, [-pi, pi]
  std::vector<double> rho;      // progress ratio, [0, 1]
  std::vector<CreaseType> z;    // current crease type
  double psi = 0.0;             // global frame angle
  bool b = false;               // mountain/valley flip flag
  int step = 0;

  static FoldState flat(const CreasePattern& pattern);

  int num_edges() const { return static_cast<int>(alpha.size()); }
  bool operator==(const FoldState&) const = default;
};

/// Field-for-field equality that also distinguishes +0.0 from -0.0 and
/// compares doubles by bit pattern.
bool bitwise_equal(const FoldState& lhs, const FoldState& rhs);

/// Checks FoldState ranges and the sign/type invariant; returns the first
/// violation as a message, or nothing.
std::optional<std::string> check_state_invariants(const CreasePattern& pattern, const FoldState& state);

/// Sign a folded crease of this type must carry under the current flip flag.
int expected_sign(CreaseType type, bool flipped);

bool on_square_border(const Point& p);

/// Angular gaps (radians) between consecutive incident edge directions at
/// `vertex`, sorted counterclockwise starting from the smallest direction
/// angle in [0, 2pi). Boundary segments count as directions.
/// Throws Error{DegreeTooLow} with fewer than two incident directions.
std::vector<double> sector_angles(const CreasePattern& pattern, int vertex);

/// Cached adjacency derived from a pattern.
struct Topology {
  std::vector<std::vector<int>> incident;        // per vertex, edges sorted counterclockwise
  std::vector<std::vector<double>> directions;   // matching direction angles in [0, 2pi)
  std::vector<std::vector<int>> creases;         // per vertex, non-boundary incident edges (ccw)
  std::vector<std::vector<double>> crease_sectors;
  std::vector<bool> interior;                    // not on the square border
  std::vector<std::vector<int>> ring;            // per edge, edges sharing an endpoint (sorted)
  std::vector<double> sheet_angle;               // per interior vertex, paper angle around it (NaN on the border)
  std::optional<int> developability_violation;   // first interior vertex with sheet angle != 2pi

  static Topology build(const CreasePattern& pattern);
};

/// Pattern in canonical index space together with the relabelings that
/// produced it.
class CanonicalPattern {
 public:
  const CreasePattern& pattern() const { return pattern_; }
  const std::vector<int>& vertex_permutation() const { return vertex_permutation_; }
  const std::vector<int>& edge_permutation() const { return edge_permutation_; }
  const Topology& topology() const { return topology_; }

  int num_edges() const { return pattern_.num_edges(); }
  int num_vertices() const { return pattern_.num_vertices(); }

  bool operator==(const CanonicalPattern& other) const {
    return pattern_ == other.pattern_ && vertex_permutation_ == other.vertex_permutation_ &&
           edge_permutation_ == other.edge_permutation_;
  }

 private:
  friend CanonicalPattern canonicalize(const CreasePattern& pattern);
  CanonicalPattern(CreasePattern pattern, std::vector<int> vperm, std::vector<int> eperm);

  CreasePattern pattern_;
  std::vector<int> vertex_permutation_;
  std::vector<int> edge_permutation_;
  Topology topology_;
};

/// Reindexes vertices by (x, y) after snapping to a 1e-9 grid and edges by
/// their sorted endpoint pairs. Coordinates in the output are snapped.
CanonicalPattern canonicalize(const CreasePattern& pattern);

/// Number of elements of the square's dihedral group.
inline constexpr int kDihedralOrder = 8;

/// Applies element `transform_id` of the dihedral group about (0.5, 0.5).
/// Ids 0..3 rotate counterclockwise by id quarter turns; ids 4..7 first
/// reflect x -> 1 - x and then rotate by (id - 4) quarter turns.
CreasePattern dihedral_augment(const CreasePattern& pattern, int transform_id);

/// Id of the transform equal to applying `first` and then `second`.
int compose_transforms(int first, int second);

/// Relabels vertices: vertex i of `pattern` becomes vertex perm[i]. Edge
/// order is preserved.
CreasePattern permute_vertices(const CreasePattern& pattern, const std::vector<int>& perm);

/// Relabels edges: edge j of `pattern` becomes edge perm[j]; endpoints of
/// each edge may be swapped according to `flip`.
CreasePattern permute_edges(const CreasePattern& pattern, const std::vector<int>& perm,
                            const std::vector<bool>& flip = {});

}  // namespace foldplan
