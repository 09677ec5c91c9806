#include "foldplan/crease_pattern.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>
#include <stdexcept>
#include <utility>

#include "foldplan/error.hpp"

namespace foldplan {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kOrientEps = 1e-12;

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorKind::InvalidPattern, message);
}

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

int orientation(const Point& o, const Point& a, const Point& b) {
  const double c = cross(o, a, b);
  if (c > kOrientEps) return 1;
  if (c < -kOrientEps) return -1;
  return 0;
}

bool within_box(const Point& p, const Point& a, const Point& b) {
  return p.x >= std::min(a.x, b.x) - kCoordinateTolerance &&
         p.x <= std::max(a.x, b.x) + kCoordinateTolerance &&
         p.y >= std::min(a.y, b.y) - kCoordinateTolerance &&
         p.y <= std::max(a.y, b.y) + kCoordinateTolerance;
}

// Closed-segment intersection test (touching counts).
bool segments_meet(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  if (o1 == 0 && within_box(q1, p1, p2)) return true;
  if (o2 == 0 && within_box(q2, p1, p2)) return true;
  if (o3 == 0 && within_box(p1, q1, q2)) return true;
  if (o4 == 0 && within_box(p2, q1, q2)) return true;
  return false;
}

double direction_angle(const Point& from, const Point& to) {
  double theta = std::atan2(to.y - from.y, to.x - from.x);
  if (theta < 0.0) theta += kTwoPi;
  if (theta >= kTwoPi) theta -= kTwoPi;
  return theta;
}

long long snap(double v) { return std::llround(v / kCoordinateTolerance); }

std::vector<double> cyclic_gaps(const std::vector<double>& sorted_angles) {
  std::vector<double> gaps;
  const std::size_t n = sorted_angles.size();
  gaps.reserve(n);
  for (std::size_t i = 0; i + 1 < n; ++i) gaps.push_back(sorted_angles[i + 1] - sorted_angles[i]);
  if (n > 0) gaps.push_back(sorted_angles[0] + kTwoPi - sorted_angles[n - 1]);
  return gaps;
}

// Incident (edge, direction) pairs at a vertex, counterclockwise.
std::vector<std::pair<double, int>> incident_directions(const CreasePattern& pattern, int vertex) {
  std::vector<std::pair<double, int>> out;
  const auto& verts = pattern.vertices();
  for (int e = 0; e < pattern.num_edges(); ++e) {
    const Edge& edge = pattern.edges()[static_cast<std::size_t>(e)];
    if (edge.a == vertex) {
      out.emplace_back(direction_angle(verts[static_cast<std::size_t>(vertex)], verts[static_cast<std::size_t>(edge.b)]), e);
    } else if (edge.b == vertex) {
      out.emplace_back(direction_angle(verts[static_cast<std::size_t>(vertex)], verts[static_cast<std::size_t>(edge.a)]), e);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

using Mat2 = std::array<int, 4>;  // row-major

Mat2 mul(const Mat2& a, const Mat2& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
          a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

Mat2 transform_matrix(int id) {
  const Mat2 rot{0, -1, 1, 0};
  Mat2 m = id >= 4 ? Mat2{-1, 0, 0, 1} : Mat2{1, 0, 0, 1};
  for (int k = 0; k < id % 4; ++k) m = mul(rot, m);
  return m;
}

void check_transform_id(int id) {
  if (id < 0 || id >= kDihedralOrder) {
    throw Error(ErrorKind::OutOfRange, "dihedral transform id must be in 0..7, got " + std::to_string(id));
  }
}

}  // namespace

char to_char(CreaseType type) {
  switch (type) {
    case CreaseType::Mountain: return 'M';
    case CreaseType::Valley: return 'V';
    case CreaseType::Unassigned: return 'U';
  }
  return '?';
}

CreaseType crease_type_from_char(char c) {
  switch (c) {
    case 'M': return CreaseType::Mountain;
    case 'V': return CreaseType::Valley;
    case 'U': return CreaseType::Unassigned;
    default: break;
  }
  throw Error(ErrorKind::SchemaViolation, std::string("unknown crease type '") + c + "'");
}

bool on_square_border(const Point& p) {
  return p.x <= kCoordinateTolerance || p.x >= 1.0 - kCoordinateTolerance ||
         p.y <= kCoordinateTolerance || p.y >= 1.0 - kCoordinateTolerance;
}

CreasePattern::CreasePattern(std::vector<Point> vertices, std::vector<Edge> edges,
                             std::vector<CreaseType> crease_types, std::vector<bool> boundary,
                             std::optional<std::string> category)
    : vertices_(std::move(vertices)),
      edges_(std::move(edges)),
      crease_types_(std::move(crease_types)),
      boundary_(std::move(boundary)),
      category_(std::move(category)) {
  const int nv = num_vertices();
  const int ne = num_edges();
  if (nv < 2) invalid("pattern needs at least two vertices");
  if (ne < 1) invalid("pattern needs at least one edge");
  if (crease_types_.size() != edges_.size()) invalid("crease_types length differs from edge count");
  if (boundary_.size() != edges_.size()) invalid("boundary length differs from edge count");

  for (int i = 0; i < nv; ++i) {
    const Point& p = vertices_[static_cast<std::size_t>(i)];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x < -kCoordinateTolerance ||
        p.x > 1.0 + kCoordinateTolerance || p.y < -kCoordinateTolerance || p.y > 1.0 + kCoordinateTolerance) {
      invalid("vertex " + std::to_string(i) + " lies outside the unit square");
    }
  }
  {
    std::set<std::pair<long long, long long>> seen;
    for (int i = 0; i < nv; ++i) {
      const Point& p = vertices_[static_cast<std::size_t>(i)];
      if (!seen.emplace(snap(p.x), snap(p.y)).second) {
        invalid("vertex " + std::to_string(i) + " duplicates an earlier vertex");
      }
    }
  }
  {
    std::set<std::pair<int, int>> seen;
    for (int e = 0; e < ne; ++e) {
      const Edge& edge = edges_[static_cast<std::size_t>(e)];
      if (edge.a < 0 || edge.a >= nv || edge.b < 0 || edge.b >= nv) {
        invalid("edge " + std::to_string(e) + " references a vertex out of range");
      }
      if (edge.a == edge.b) invalid("edge " + std::to_string(e) + " is a self-loop");
      if (!seen.emplace(std::min(edge.a, edge.b), std::max(edge.a, edge.b)).second) {
        invalid("edge " + std::to_string(e) + " duplicates an earlier edge");
      }
    }
  }
  for (int i = 0; i < ne; ++i) {
    const Edge& ei = edges_[static_cast<std::size_t>(i)];
    const Point& p1 = vertices_[static_cast<std::size_t>(ei.a)];
    const Point& p2 = vertices_[static_cast<std::size_t>(ei.b)];
    for (int j = i + 1; j < ne; ++j) {
      const Edge& ej = edges_[static_cast<std::size_t>(j)];
      const Point& q1 = vertices_[static_cast<std::size_t>(ej.a)];
      const Point& q2 = vertices_[static_cast<std::size_t>(ej.b)];
      int shared = -1;
      if (ei.a == ej.a || ei.a == ej.b) shared = ei.a;
      if (ei.b == ej.a || ei.b == ej.b) shared = ei.b;
      bool crossing = false;
      if (shared >= 0) {
        const Point& s = vertices_[static_cast<std::size_t>(shared)];
        const Point& p = vertices_[static_cast<std::size_t>(ei.a == shared ? ei.b : ei.a)];
        const Point& q = vertices_[static_cast<std::size_t>(ej.a == shared ? ej.b : ej.a)];
        const double dot = (p.x - s.x) * (q.x - s.x) + (p.y - s.y) * (q.y - s.y);
        crossing = orientation(s, p, q) == 0 && dot > 0.0;
      } else {
        crossing = segments_meet(p1, p2, q1, q2);
      }
      if (crossing) {
        invalid("edges " + std::to_string(i) + " and " + std::to_string(j) + " intersect");
      }
    }
  }
}

CreasePattern CreasePattern::with_category(std::optional<std::string> category) const {
  CreasePattern copy = *this;
  copy.category_ = std::move(category);
  return copy;
}

FoldState FoldState::flat(const CreasePattern& pattern) {
  const auto n = static_cast<std::size_t>(pattern.num_edges());
  FoldState s;
  s.alpha.assign(n, 0.0);
  s.rho.assign(n, 0.0);
  s.z = pattern.crease_types();
  return s;
}

bool bitwise_equal(const FoldState& lhs, const FoldState& rhs) {
  auto same = [](const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
    }
    return true;
  };
  return same(lhs.alpha, rhs.alpha) && same(lhs.rho, rhs.rho) && lhs.z == rhs.z &&
         std::bit_cast<std::uint64_t>(lhs.psi) == std::bit_cast<std::uint64_t>(rhs.psi) && lhs.b == rhs.b &&
         lhs.step == rhs.step;
}

int expected_sign(CreaseType type, bool flipped) {
  const int base = type == CreaseType::Mountain ? 1 : -1;
  return flipped ? -base : base;
}

std::optional<std::string> check_state_invariants(const CreasePattern& pattern, const FoldState& state) {
  const auto n = static_cast<std::size_t>(pattern.num_edges());
  if (state.alpha.size() != n || state.rho.size() != n || state.z.size() != n) {
    return "state vectors do not match the pattern's edge count";
  }
  if (state.step < 0) return "negative step counter";
  for (std::size_t j = 0; j < n; ++j) {
    const double a = state.alpha[j];
    const double r = state.rho[j];
    const std::string where = " on edge " + std::to_string(j);
    if (!(a >= -std::numbers::pi && a <= std::numbers::pi)) return "alpha out of range" + where;
    if (!(r >= 0.0 && r <= 1.0)) return "rho out of range" + where;
    if ((r == 0.0) != (a == 0.0)) return "rho and alpha disagree about being flat" + where;
    if (r > 0.0) {
      if (state.z[j] == CreaseType::Unassigned) return "folded crease without a type" + where;
      const int sign = a > 0.0 ? 1 : -1;
      if (sign != expected_sign(state.z[j], state.b)) return "alpha sign contradicts crease type" + where;
    }
  }
  return std::nullopt;
}

std::vector<double> sector_angles(const CreasePattern& pattern, int vertex) {
  if (vertex < 0 || vertex >= pattern.num_vertices()) {
    throw Error(ErrorKind::OutOfRange, "vertex index " + std::to_string(vertex) + " out of range");
  }
  const auto dirs = incident_directions(pattern, vertex);
  if (dirs.size() < 2) {
    throw Error(ErrorKind::DegreeTooLow, "vertex " + std::to_string(vertex) + " has fewer than two incident directions");
  }
  std::vector<double> angles;
  angles.reserve(dirs.size());
  for (const auto& [theta, edge] : dirs) angles.push_back(theta);
  return cyclic_gaps(angles);
}

Topology Topology::build(const CreasePattern& pattern) {
  const auto nv = static_cast<std::size_t>(pattern.num_vertices());
  const auto ne = static_cast<std::size_t>(pattern.num_edges());
  Topology t;
  t.incident.resize(nv);
  t.directions.resize(nv);
  t.creases.resize(nv);
  t.crease_sectors.resize(nv);
  t.interior.resize(nv);
  t.sheet_angle.assign(nv, std::numeric_limits<double>::quiet_NaN());
  t.ring.resize(ne);

  for (std::size_t v = 0; v < nv; ++v) {
    const int vi = static_cast<int>(v);
    const auto dirs = incident_directions(pattern, vi);
    std::vector<double> crease_dirs;
    for (const auto& [theta, e] : dirs) {
      t.incident[v].push_back(e);
      t.directions[v].push_back(theta);
      if (!pattern.is_boundary(e)) {
        t.creases[v].push_back(e);
        crease_dirs.push_back(theta);
      }
    }
    t.crease_sectors[v] = cyclic_gaps(crease_dirs);
    t.interior[v] = !on_square_border(pattern.vertices()[v]);

    if (t.interior[v]) {
      const auto gaps = cyclic_gaps(t.directions[v]);
      const std::size_t n = gaps.size();
      double sheet = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const int left = t.incident[v][i];
        const int right = t.incident[v][(i + 1) % n];
        const bool missing = left != right && pattern.is_boundary(left) && pattern.is_boundary(right);
        if (!missing) sheet += gaps[i];
      }
      if (n == 0) sheet = 2.0 * std::numbers::pi;
      t.sheet_angle[v] = sheet;
      if (!t.developability_violation && std::abs(sheet - 2.0 * std::numbers::pi) > kAngleTolerance) {
        t.developability_violation = vi;
      }
    }
  }

  for (std::size_t e = 0; e < ne; ++e) {
    const Edge& edge = pattern.edges()[e];
    std::vector<int> ring;
    for (int v : {edge.a, edge.b}) {
      for (int other : t.incident[static_cast<std::size_t>(v)]) {
        if (other != static_cast<int>(e)) ring.push_back(other);
      }
    }
    std::sort(ring.begin(), ring.end());
    ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
    t.ring[e] = std::move(ring);
  }
  return t;
}

CanonicalPattern::CanonicalPattern(CreasePattern pattern, std::vector<int> vperm, std::vector<int> eperm)
    : pattern_(std::move(pattern)),
      vertex_permutation_(std::move(vperm)),
      edge_permutation_(std::move(eperm)),
      topology_(Topology::build(pattern_)) {}

CanonicalPattern canonicalize(const CreasePattern& pattern) {
  const auto nv = static_cast<std::size_t>(pattern.num_vertices());
  const auto ne = static_cast<std::size_t>(pattern.num_edges());
  const auto& verts = pattern.vertices();

  std::vector<std::pair<long long, long long>> keys(nv);
  for (std::size_t i = 0; i < nv; ++i) keys[i] = {snap(verts[i].x), snap(verts[i].y)};
  std::vector<int> order(nv);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int l, int r) {
    return keys[static_cast<std::size_t>(l)] < keys[static_cast<std::size_t>(r)];
  });

  std::vector<int> vperm(nv);
  std::vector<Point> new_vertices(nv);
  for (std::size_t rank = 0; rank < nv; ++rank) {
    const auto old = static_cast<std::size_t>(order[rank]);
    vperm[old] = static_cast<int>(rank);
    // Dividing the integer grid key by 1e9 yields the double nearest the
    // 9-decimal value, so printing and re-parsing is exact.
    new_vertices[rank] = {static_cast<double>(keys[old].first) / 1e9, static_cast<double>(keys[old].second) / 1e9};
  }

  std::vector<Edge> relabeled(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    const Edge& edge = pattern.edges()[e];
    const int a = vperm[static_cast<std::size_t>(edge.a)];
    const int b = vperm[static_cast<std::size_t>(edge.b)];
    relabeled[e] = {std::min(a, b), std::max(a, b)};
  }
  std::vector<int> eorder(ne);
  std::iota(eorder.begin(), eorder.end(), 0);
  std::sort(eorder.begin(), eorder.end(), [&](int l, int r) {
    const Edge& el = relabeled[static_cast<std::size_t>(l)];
    const Edge& er = relabeled[static_cast<std::size_t>(r)];
    return std::pair(el.a, el.b) < std::pair(er.a, er.b);
  });

  std::vector<int> eperm(ne);
  std::vector<Edge> new_edges(ne);
  std::vector<CreaseType> new_types(ne);
  std::vector<bool> new_boundary(ne);
  for (std::size_t rank = 0; rank < ne; ++rank) {
    const auto old = static_cast<std::size_t>(eorder[rank]);
    eperm[old] = static_cast<int>(rank);
    new_edges[rank] = relabeled[old];
    new_types[rank] = pattern.crease_types()[old];
    new_boundary[rank] = pattern.boundary()[old];
  }

  CreasePattern canonical(std::move(new_vertices), std::move(new_edges), std::move(new_types),
                          std::move(new_boundary), pattern.category());
  return CanonicalPattern(std::move(canonical), std::move(vperm), std::move(eperm));
}

CreasePattern dihedral_augment(const CreasePattern& pattern, int transform_id) {
  check_transform_id(transform_id);
  if (transform_id == 0) return pattern;
  std::vector<Point> verts = pattern.vertices();
  for (Point& p : verts) {
    if (transform_id >= 4) p.x = 1.0 - p.x;
    for (int k = 0; k < transform_id % 4; ++k) p = {1.0 - p.y, p.x};
  }
  return CreasePattern(std::move(verts), pattern.edges(), pattern.crease_types(), pattern.boundary(),
                       pattern.category());
}

int compose_transforms(int first, int second) {
  check_transform_id(first);
  check_transform_id(second);
  const Mat2 m = mul(transform_matrix(second), transform_matrix(first));
  for (int id = 0; id < kDihedralOrder; ++id) {
    if (transform_matrix(id) == m) return id;
  }
  throw std::logic_error("dihedral group table is not closed");
}

CreasePattern permute_vertices(const CreasePattern& pattern, const std::vector<int>& perm) {
  const auto nv = static_cast<std::size_t>(pattern.num_vertices());
  if (perm.size() != nv) throw std::invalid_argument("vertex permutation has the wrong length");
  std::vector<Point> verts(nv);
  for (std::size_t i = 0; i < nv; ++i) verts[static_cast<std::size_t>(perm[i])] = pattern.vertices()[i];
  std::vector<Edge> edges = pattern.edges();
  for (Edge& e : edges) e = {perm[static_cast<std::size_t>(e.a)], perm[static_cast<std::size_t>(e.b)]};
  return CreasePattern(std::move(verts), std::move(edges), pattern.crease_types(), pattern.boundary(),
                       pattern.category());
}

CreasePattern permute_edges(const CreasePattern& pattern, const std::vector<int>& perm,
                            const std::vector<bool>& flip) {
  const auto ne = static_cast<std::size_t>(pattern.num_edges());
  if (perm.size() != ne) throw std::invalid_argument("edge permutation has the wrong length");
  std::vector<Edge> edges(ne);
  std::vector<CreaseType> types(ne);
  std::vector<bool> boundary(ne);
  for (std::size_t j = 0; j < ne; ++j) {
    const auto target = static_cast<std::size_t>(perm[j]);
    Edge e = pattern.edges()[j];
    if (!flip.empty() && flip[j]) std::swap(e.a, e.b);
    edges[target] = e;
    types[target] = pattern.crease_types()[j];
    boundary[target] = pattern.boundary()[j];
  }
  return CreasePattern(pattern.vertices(), std::move(edges), std::move(types), std::move(boundary),
                       pattern.category());
}

}  // namespace foldplan
