#include "foldplan/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

#include "foldplan/error.hpp"
#include "foldplan/io.hpp"

namespace foldplan {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxAttempts = 10000;
constexpr int kMountainBin = 15;
constexpr int kValleyBin = 0;
constexpr int kHalfMountainBin = 11;
constexpr int kHalfValleyBin = 4;
constexpr int kFullRho = kRhoBins - 1;
constexpr int kHalfRho = 3;
// Border points closer than this make slivers; rejected by the generators.
constexpr double kMinBorderGap = 0.02;

constexpr std::string_view kFamilyNames[] = {"diagonal", "book", "gate", "blintz", "radial", "random", "grid"};
constexpr std::string_view kTierNames[] = {"SIMPLE", "INTERMEDIATE", "COMPLEX"};
constexpr std::string_view kProvenanceNames[] = {"EXPERT", "PERTURBED", "EXPLORED"};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return unit_uniform(engine_()); }
  int below(int n) { return std::min(n - 1, static_cast<int>(uniform() * n)); }
  bool coin() { return below(2) == 1; }

 private:
  std::mt19937_64 engine_;
};

CreaseType other(CreaseType t) { return t == CreaseType::Mountain ? CreaseType::Valley : CreaseType::Mountain; }

// Position along the square's perimeter, counterclockwise from (0, 0).
double perimeter_param(const Point& p) {
  if (p.y <= 0.0) return p.x;
  if (p.x >= 1.0) return 1.0 + p.y;
  if (p.y >= 1.0) return 2.0 + (1.0 - p.x);
  return 3.0 + (1.0 - p.y);
}

double snap_unit(double v) {
  if (std::abs(v) < 1e-12) return 0.0;
  if (std::abs(v - 1.0) < 1e-12) return 1.0;
  return std::clamp(v, 0.0, 1.0);
}

Point ray_to_border(Point c, double theta) {
  const double dx = std::cos(theta);
  const double dy = std::sin(theta);
  double t = std::numeric_limits<double>::infinity();
  if (dx > 1e-15) t = std::min(t, (1.0 - c.x) / dx);
  if (dx < -1e-15) t = std::min(t, -c.x / dx);
  if (dy > 1e-15) t = std::min(t, (1.0 - c.y) / dy);
  if (dy < -1e-15) t = std::min(t, -c.y / dy);
  return {snap_unit(c.x + t * dx), snap_unit(c.y + t * dy)};
}

// Smallest perimeter distance between any two distinct border points of a
// single-vertex construction.
double min_border_gap(Point center, const std::vector<double>& sectors, double offset) {
  std::vector<double> params = {0.0, 1.0, 2.0, 3.0};
  double theta = offset;
  for (double s : sectors) {
    params.push_back(perimeter_param(ray_to_border(center, theta * kPi / 180.0)));
    theta += s;
  }
  std::sort(params.begin(), params.end());
  double gap = 4.0 - params.back() + params.front();
  for (std::size_t i = 1; i < params.size(); ++i) {
    const double d = params[i] - params[i - 1];
    if (d > 1e-9) gap = std::min(gap, d);
  }
  return gap;
}

// Random composition of `total` into `parts` integers, each >= minimum.
std::vector<int> composition(Rng& rng, int total, int parts, int minimum) {
  const int free = total - parts * minimum;
  if (free < 0) throw std::invalid_argument("composition is infeasible");
  std::vector<int> cuts;
  for (int i = 0; i < parts - 1; ++i) cuts.push_back(rng.below(free + 1));
  std::sort(cuts.begin(), cuts.end());
  std::vector<int> out;
  int prev = 0;
  for (int c : cuts) {
    out.push_back(minimum + c - prev);
    prev = c;
  }
  out.push_back(minimum + free - prev);
  return out;
}

// Maekawa-valid assignment: d/2 + 1 of one type, d/2 - 1 of the other.
std::vector<CreaseType> maekawa_types(Rng& rng, int degree) {
  const CreaseType major = rng.coin() ? CreaseType::Mountain : CreaseType::Valley;
  std::vector<CreaseType> types(static_cast<std::size_t>(degree), major);
  std::vector<int> idx(static_cast<std::size_t>(degree));
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = degree - 1; i > 0; --i) std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(rng.below(i + 1))]);
  for (int i = 0; i < degree / 2 - 1; ++i) types[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] = other(major);
  return types;
}

std::vector<double> kawasaki_sectors(Rng& rng, int degree) {
  const int half = degree / 2;
  const auto even = composition(rng, 180, half, 25);
  const auto odd = composition(rng, 180, half, 25);
  std::vector<double> sectors;
  for (int i = 0; i < half; ++i) {
    sectors.push_back(even[static_cast<std::size_t>(i)]);
    sectors.push_back(odd[static_cast<std::size_t>(i)]);
  }
  return sectors;
}

CreasePattern radial_instance(Rng& rng, int degree, const std::vector<double>& fixed_sectors, Point center,
                              const std::string& category) {
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const auto sectors = fixed_sectors.empty() ? kawasaki_sectors(rng, degree) : fixed_sectors;
    const double offset = rng.below(360);
    if (min_border_gap(center, sectors, offset) < kMinBorderGap) continue;
    return make_single_vertex(center, sectors, offset, maekawa_types(rng, static_cast<int>(sectors.size())), category);
  }
  throw Error(ErrorKind::GenerationExhausted, "no radial layout after 10000 attempts");
}

// Rejection sampling: random sector angles on a 5 degree lattice and a
// random vertex position, kept when the alternating sums agree.
CreasePattern random_valid_instance(Rng& rng, int degree) {
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const auto units = composition(rng, 72, degree, 4);
    int even = 0;
    for (std::size_t i = 0; i < units.size(); i += 2) even += units[i];
    if (even != 36) continue;
    std::vector<double> sectors;
    for (int u : units) sectors.push_back(5.0 * u);
    const Point center{0.3 + 0.4 * rng.uniform(), 0.3 + 0.4 * rng.uniform()};
    const double offset = rng.below(72) * 5.0;
    if (min_border_gap(center, sectors, offset) < kMinBorderGap) continue;
    return make_single_vertex(center, sectors, offset, maekawa_types(rng, degree), "random");
  }
  throw Error(ErrorKind::GenerationExhausted, "rejection sampling exceeded 10000 attempts");
}

CreasePattern with_types(const CreasePattern& p, std::vector<CreaseType> types) {
  return CreasePattern(p.vertices(), p.edges(), std::move(types), p.boundary(), p.category());
}

// Fixture varied by a random symmetry and a random global crease direction.
CreasePattern vary_fixture(Rng& rng, const CreasePattern& base) {
  auto types = base.crease_types();
  if (rng.coin()) {
    for (std::size_t j = 0; j < types.size(); ++j) {
      if (!base.is_boundary(static_cast<int>(j)) && types[j] != CreaseType::Unassigned) types[j] = other(types[j]);
    }
  }
  return dihedral_augment(with_types(base, std::move(types)), rng.below(kDihedralOrder));
}

CreasePattern square_with_creases(std::vector<Point> border, std::vector<std::pair<Point, Point>> creases,
                                  CreaseType type, std::string category) {
  // Border points are listed counterclockwise; crease endpoints are border points.
  std::vector<Point> vertices = border;
  std::vector<Edge> edges;
  std::vector<CreaseType> types;
  std::vector<bool> boundary;
  const int n = static_cast<int>(border.size());
  for (int i = 0; i < n; ++i) {
    edges.push_back({i, (i + 1) % n});
    types.push_back(CreaseType::Unassigned);
    boundary.push_back(true);
  }
  auto index_of = [&](Point p) {
    const auto it = std::find(vertices.begin(), vertices.end(), p);
    if (it == vertices.end()) throw std::logic_error("crease endpoint is not a border point");
    return static_cast<int>(it - vertices.begin());
  };
  for (const auto& [a, b] : creases) {
    edges.push_back({index_of(a), index_of(b)});
    types.push_back(type);
    boundary.push_back(false);
  }
  return CreasePattern(std::move(vertices), std::move(edges), std::move(types), std::move(boundary),
                       std::move(category));
}

FoldAction expert_fold(int edge, CreaseType target, bool half) {
  const bool mountain = target == CreaseType::Mountain;
  const int bin = half ? (mountain ? kHalfMountainBin : kHalfValleyBin) : (mountain ? kMountainBin : kValleyBin);
  return FoldAction::fold(edge, bin, half ? kHalfRho : kFullRho);
}

int reflect(int value, int lo, int hi) {
  if (value < lo) value = 2 * lo - value;
  if (value > hi) value = 2 * hi - value;
  return std::clamp(value, lo, hi);
}

FoldAction random_action(Rng& rng, OpCode op, int num_edges) {
  switch (op) {
    case OpCode::Fold:
      return FoldAction::fold(rng.below(num_edges), rng.below(kAngleBins), rng.below(kRhoBins));
    case OpCode::Unfold:
      return FoldAction::unfold(rng.below(num_edges));
    case OpCode::Flip:
      return FoldAction::flip();
    case OpCode::Rotate:
      return FoldAction::rotate(rng.below(4));
    case OpCode::Done:
      return FoldAction::done();
  }
  return FoldAction::done();
}

FoldAction perturb(Rng& rng, const FoldAction& expert, int num_edges) {
  if (expert.op == OpCode::Fold) {
    FoldAction a = expert;
    switch (rng.below(5)) {
      case 0: {  // angle-bin shift by 1..2
        const int shift = (1 + rng.below(2)) * (rng.coin() ? 1 : -1);
        a.angle_bin = reflect(*a.angle_bin + shift, 0, kAngleBins - 1);
        return a;
      }
      case 1: {  // progress-bin shift by 1..3
        const int shift = (1 + rng.below(3)) * (rng.coin() ? 1 : -1);
        a.rho_bin = reflect(*a.rho_bin + shift, 0, kRhoBins - 1);
        return a;
      }
      case 2: {  // another edge, uniformly
        if (num_edges < 2) return a;
        const int pick = rng.below(num_edges - 1);
        a.edge = pick >= *a.edge ? pick + 1 : pick;
        return a;
      }
      case 3:  // sign flip
        a.angle_bin = kAngleBins - 1 - *a.angle_bin;
        return a;
      default:
        break;
    }
  }
  // Operation substitution.
  const int shift = 1 + rng.below(kNumOps - 1);
  const auto op = static_cast<OpCode>((static_cast<int>(expert.op) + shift) % kNumOps);
  return random_action(rng, op, num_edges);
}

}  // namespace

std::string_view to_string(Provenance provenance) { return kProvenanceNames[static_cast<std::size_t>(provenance)]; }
Provenance provenance_from_string(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kProvenanceNames); ++i) {
    if (kProvenanceNames[i] == name) return static_cast<Provenance>(i);
  }
  throw Error(ErrorKind::SchemaViolation, "unknown provenance '" + std::string(name) + "'");
}

std::string_view to_string(Family family) { return kFamilyNames[static_cast<std::size_t>(family)]; }
Family family_from_string(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kFamilyNames); ++i) {
    if (kFamilyNames[i] == name) return static_cast<Family>(i);
  }
  throw Error(ErrorKind::SchemaViolation, "unknown family '" + std::string(name) + "'");
}

std::string_view to_string(Tier tier) { return kTierNames[static_cast<std::size_t>(tier)]; }
Tier tier_from_string(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kTierNames); ++i) {
    if (kTierNames[i] == name) return static_cast<Tier>(i);
  }
  throw Error(ErrorKind::SchemaViolation, "unknown tier '" + std::string(name) + "'");
}

Tier tier_of(Family family) {
  switch (family) {
    case Family::Radial:
    case Family::RandomValid:
      return Tier::Intermediate;
    case Family::Grid:
      return Tier::Complex;
    default:
      return Tier::Simple;
  }
}

CreasePattern fixture_diagonal() {
  return square_with_creases({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{{0, 0}, {1, 1}}}, CreaseType::Valley, "diagonal");
}

CreasePattern fixture_book() {
  return square_with_creases({{0, 0}, {0.5, 0}, {1, 0}, {1, 1}, {0.5, 1}, {0, 1}}, {{{0.5, 0}, {0.5, 1}}},
                             CreaseType::Valley, "book");
}

CreasePattern fixture_gate() {
  return square_with_creases({{0, 0}, {0.25, 0}, {0.75, 0}, {1, 0}, {1, 1}, {0.75, 1}, {0.25, 1}, {0, 1}},
                             {{{0.25, 0}, {0.25, 1}}, {{0.75, 0}, {0.75, 1}}}, CreaseType::Valley, "gate");
}

CreasePattern fixture_blintz() {
  return square_with_creases({{0, 0}, {0.5, 0}, {1, 0}, {1, 0.5}, {1, 1}, {0.5, 1}, {0, 1}, {0, 0.5}},
                             {{{0.5, 0}, {1, 0.5}}, {{1, 0.5}, {0.5, 1}}, {{0.5, 1}, {0, 0.5}}, {{0, 0.5}, {0.5, 0}}},
                             CreaseType::Valley, "blintz");
}

CreasePattern fixture_notch() {
  // Two cut edges leave the centre at 265 and 275 degrees; the paper
  // between them is missing, so only 350 degrees surround the vertex.
  const Point c{0.5, 0.5};
  const Point cut_left = ray_to_border(c, 265.0 * kPi / 180.0);
  const Point cut_right = ray_to_border(c, 275.0 * kPi / 180.0);
  std::vector<Point> v = {c, {0, 0}, cut_left, cut_right, {1, 0}, {1, 0.5}, {1, 1}, {0.5, 1}, {0, 1}, {0, 0.5}};
  std::vector<Edge> e = {{1, 2}, {3, 4}, {4, 5}, {5, 6}, {6, 7}, {7, 8}, {8, 9}, {9, 1},  // outline
                         {0, 2}, {0, 3},                                                  // cuts
                         {0, 5}, {0, 7}, {0, 9}};                                         // creases
  std::vector<CreaseType> t(10, CreaseType::Unassigned);
  t.push_back(CreaseType::Mountain);
  t.push_back(CreaseType::Valley);
  t.push_back(CreaseType::Valley);
  std::vector<bool> b(10, true);
  b.insert(b.end(), 3, false);
  return CreasePattern(std::move(v), std::move(e), std::move(t), std::move(b), "notch");
}

CreasePattern make_grid(int k) {
  if (k < 1) throw Error(ErrorKind::OutOfRange, "grid size must be at least 1");
  std::vector<Point> vertices;
  auto id = [k](int i, int j) { return j * (k + 1) + i; };
  for (int j = 0; j <= k; ++j) {
    for (int i = 0; i <= k; ++i) vertices.push_back({static_cast<double>(i) / k, static_cast<double>(j) / k});
  }
  std::vector<Edge> edges;
  std::vector<CreaseType> types;
  std::vector<bool> boundary;
  for (int j = 0; j <= k; ++j) {  // horizontal segments: type alternates per line
    for (int i = 0; i < k; ++i) {
      edges.push_back({id(i, j), id(i + 1, j)});
      const bool border = j == 0 || j == k;
      boundary.push_back(border);
      types.push_back(border ? CreaseType::Unassigned : (j % 2 == 0 ? CreaseType::Valley : CreaseType::Mountain));
    }
  }
  for (int i = 0; i <= k; ++i) {  // vertical segments: type alternates per row
    for (int j = 0; j < k; ++j) {
      edges.push_back({id(i, j), id(i, j + 1)});
      const bool border = i == 0 || i == k;
      boundary.push_back(border);
      types.push_back(border ? CreaseType::Unassigned : ((i + j) % 2 == 0 ? CreaseType::Mountain : CreaseType::Valley));
    }
  }
  return CreasePattern(std::move(vertices), std::move(edges), std::move(types), std::move(boundary), "grid");
}

CreasePattern make_single_vertex(Point center, const std::vector<double>& sector_degrees, double offset_degrees,
                                 const std::vector<CreaseType>& types, std::optional<std::string> category) {
  if (sector_degrees.size() != types.size()) throw std::invalid_argument("one type per crease is required");
  struct BorderPoint {
    Point p;
    double s;
    int ray;  // -1 for a corner
  };
  std::vector<BorderPoint> border = {{{0, 0}, 0.0, -1}, {{1, 0}, 1.0, -1}, {{1, 1}, 2.0, -1}, {{0, 1}, 3.0, -1}};
  double theta = offset_degrees;
  for (std::size_t r = 0; r < sector_degrees.size(); ++r) {
    const Point p = ray_to_border(center, theta * kPi / 180.0);
    double s = perimeter_param(p);
    if (s >= 4.0 - 1e-12) s = 0.0;
    border.push_back({p, s, static_cast<int>(r)});
    theta += sector_degrees[r];
  }
  std::stable_sort(border.begin(), border.end(), [](const auto& a, const auto& b) { return a.s < b.s; });

  std::vector<Point> vertices = {center};
  std::vector<int> ray_vertex(sector_degrees.size(), -1);
  for (const auto& bp : border) {
    const bool same = vertices.size() > 1 && std::abs(vertices.back().x - bp.p.x) <= kCoordinateTolerance &&
                      std::abs(vertices.back().y - bp.p.y) <= kCoordinateTolerance;
    if (!same) vertices.push_back(bp.p);
    if (bp.ray >= 0) ray_vertex[static_cast<std::size_t>(bp.ray)] = static_cast<int>(vertices.size()) - 1;
  }
  std::vector<Edge> edges;
  std::vector<CreaseType> edge_types;
  std::vector<bool> boundary;
  const int m = static_cast<int>(vertices.size()) - 1;
  for (int i = 0; i < m; ++i) {
    edges.push_back({1 + i, 1 + (i + 1) % m});
    edge_types.push_back(CreaseType::Unassigned);
    boundary.push_back(true);
  }
  for (std::size_t r = 0; r < types.size(); ++r) {
    edges.push_back({0, ray_vertex[r]});
    edge_types.push_back(types[r]);
    boundary.push_back(false);
  }
  return CreasePattern(std::move(vertices), std::move(edges), std::move(edge_types), std::move(boundary),
                       std::move(category));
}

std::vector<CreasePattern> generate_patterns(Family family, const FamilyParams& params, int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<CreasePattern> out;
  for (int i = 0; i < count; ++i) {
    switch (family) {
      case Family::Diagonal:
        out.push_back(vary_fixture(rng, fixture_diagonal()));
        break;
      case Family::BookFold:
        out.push_back(vary_fixture(rng, fixture_book()));
        break;
      case Family::Gate:
        out.push_back(vary_fixture(rng, fixture_gate()));
        break;
      case Family::Blintz:
        out.push_back(vary_fixture(rng, fixture_blintz()));
        break;
      case Family::Radial:
        if (params.sector_degrees.empty() && (params.radial_degree < 4 || params.radial_degree % 2 != 0)) {
          throw Error(ErrorKind::OutOfRange, "radial degree must be even and at least 4");
        }
        out.push_back(radial_instance(rng, params.radial_degree, params.sector_degrees, {0.5, 0.5}, "radial"));
        break;
      case Family::RandomValid:
        if (params.random_degree < 4 || params.random_degree % 2 != 0) {
          throw Error(ErrorKind::OutOfRange, "random degree must be even and at least 4");
        }
        out.push_back(random_valid_instance(rng, params.random_degree));
        break;
      case Family::Grid:
        out.push_back(dihedral_augment(make_grid(params.grid_k), rng.below(kDihedralOrder)));
        break;
    }
  }
  return out;
}

ExpertProgram make_expert_program(const CreasePattern& full_pattern, std::string category, Tier tier,
                                  const std::vector<bool>& hidden) {
  const CanonicalPattern full = canonicalize(full_pattern);
  const int ne = full.num_edges();
  // `hidden` is indexed like the input pattern; move it to canonical order.
  std::vector<bool> hide(static_cast<std::size_t>(ne), false);
  for (std::size_t j = 0; j < hidden.size() && j < static_cast<std::size_t>(ne); ++j) {
    hide[static_cast<std::size_t>(full.edge_permutation()[j])] = hidden[j];
  }
  const auto& targets = full.pattern().crease_types();
  auto initial_types = targets;
  for (int e = 0; e < ne; ++e) {
    const auto ei = static_cast<std::size_t>(e);
    if (full.pattern().is_boundary(e)) continue;
    if (targets[ei] == CreaseType::Unassigned) throw Error(ErrorKind::InvalidPattern, "expert needs typed creases");
    if (hide[ei]) initial_types[ei] = CreaseType::Unassigned;
  }
  const auto& fp = full.pattern();
  ExpertProgram program{canonicalize(CreasePattern(fp.vertices(), fp.edges(), initial_types, fp.boundary(), category)),
                        {},
                        {},
                        category,
                        tier};

  std::vector<int> creases;
  for (int e = 0; e < ne; ++e) {
    if (!fp.is_boundary(e)) creases.push_back(e);
  }
  if (tier == Tier::Complex) {
    for (int e : creases) program.actions.push_back(expert_fold(e, targets[static_cast<std::size_t>(e)], true));
    program.actions.push_back(FoldAction::rotate(1));
  }
  for (int e : creases) program.actions.push_back(expert_fold(e, targets[static_cast<std::size_t>(e)], false));
  program.actions.push_back(FoldAction::done());

  FoldState state = FoldState::flat(program.pattern.pattern());
  for (const auto& a : program.actions) {
    auto result = level0::step(program.pattern, state, a);
    if (!result.verdict.valid) {
      throw Error(ErrorKind::InvalidPattern, "expert program rejected by the kernel: " +
                                                 std::string(to_string(result.verdict.reason)) + " at " + describe(a));
    }
    state = std::move(result.state);
  }
  program.goal = goal_from_state(program.category, state);
  return program;
}

std::vector<FoldState> replay(const ExpertProgram& program, const KernelConfig& kernel) {
  std::vector<FoldState> states = {FoldState::flat(program.pattern.pattern())};
  for (const auto& a : program.actions) {
    auto result = level0::step(program.pattern, states.back(), a, kernel);
    if (!result.verdict.valid) throw Error(ErrorKind::InvalidPattern, "expert step rejected: " + describe(a));
    states.push_back(std::move(result.state));
  }
  return states;
}

Demonstration to_demonstration(const ExpertProgram& program) {
  return {program.goal, program.pattern, replay(program), program.actions};
}

std::vector<TransitionRecord> perturb_expert(const ExpertProgram& program, int per_step, std::uint64_t seed) {
  if (per_step < 1) throw Error(ErrorKind::OutOfRange, "per_step must be at least 1");
  Rng rng(seed);
  const std::string ref = pattern_ref(program.pattern);
  const int ne = program.pattern.num_edges();
  std::vector<TransitionRecord> out;
  FoldState state = FoldState::flat(program.pattern.pattern());
  for (const auto& expert : program.actions) {
    auto result = level0::step(program.pattern, state, expert);
    out.push_back({ref, state, expert, result.state, result.verdict, Provenance::Expert});
    for (int k = 0; k < per_step; ++k) {
      const FoldAction a = perturb(rng, expert, ne);
      auto r = level0::step(program.pattern, state, a);
      out.push_back({ref, state, a, std::move(r.state), std::move(r.verdict), Provenance::Perturbed});
    }
    state = std::move(result.state);
  }
  return out;
}

Corpus generate_corpus(const CorpusConfig& config) {
  if (config.count < 1) throw Error(ErrorKind::OutOfRange, "count must be at least 1");
  if (config.families.empty()) throw Error(ErrorKind::OutOfRange, "no families requested");
  Corpus corpus{config, {}};
  std::map<std::string, std::vector<std::size_t>> by_category;
  for (Family family : config.families) {
    const auto fi = static_cast<std::uint64_t>(family);
    for (int i = 0; i < config.count; ++i) {
      const std::uint64_t seed = mix_seed(config.seed, fi * 1000003ULL + static_cast<std::uint64_t>(i));
      Rng rng(seed);
      FamilyParams params;
      params.grid_k = 2 + i % 3;
      params.radial_degree = 4 + 2 * (i % 2);
      params.random_degree = 4 + 2 * (i % 2);
      const CreasePattern pattern = generate_patterns(family, params, 1, mix_seed(seed, 1)).front();
      std::vector<bool> hidden(static_cast<std::size_t>(pattern.num_edges()), false);
      if (family == Family::Radial || family == Family::RandomValid) {
        for (int e = 0; e < pattern.num_edges(); ++e) {
          hidden[static_cast<std::size_t>(e)] = !pattern.is_boundary(e) && rng.uniform() < 0.25;
        }
      }
      const std::string category(to_string(family));
      CorpusProgram cp{category + "_" + std::to_string(1000 + i).substr(1),
                       make_expert_program(pattern, category, tier_of(family), hidden),
                       {},
                       false};
      cp.records = perturb_expert(cp.program, config.per_step, mix_seed(seed, 2));
      by_category[category].push_back(corpus.programs.size());
      corpus.programs.push_back(std::move(cp));
    }
  }
  // Stratified split: within each category, the programs with the smallest
  // seeded hashes form the test fraction.
  for (auto& [category, members] : by_category) {
    std::vector<std::pair<std::uint64_t, std::size_t>> keyed;
    for (std::size_t idx : members) keyed.emplace_back(mix_seed(config.seed ^ 0x5eedULL, idx), idx);
    std::sort(keyed.begin(), keyed.end());
    const auto n = static_cast<double>(members.size());
    const auto n_test =
        members.size() < 2 ? 0 : std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(config.test_fraction * n)));
    for (std::size_t k = 0; k < n_test; ++k) corpus.programs[keyed[k].second].test = true;
  }
  return corpus;
}

ordered_json program_to_json(const CorpusProgram& p) {
  ordered_json j;
  j["version"] = kFormatVersion;
  j["kind"] = "program";
  j["id"] = p.id;
  j["category"] = p.program.category;
  j["tier"] = std::string(to_string(p.program.tier));
  j["split"] = p.test ? "test" : "train";
  j["pattern_ref"] = pattern_ref(p.program.pattern);
  j["pattern"] = cp_to_json(p.program.pattern.pattern());
  j["goal"] = goal_to_json(p.program.goal);
  j["expert_actions"] = foldplan::program_to_json(std::span<const FoldAction>(p.program.actions));
  ordered_json records = ordered_json::array();
  for (const auto& r : p.records) records.push_back(record_to_json(r));
  j["records"] = std::move(records);
  return j;
}

CorpusProgram corpus_program_from_json(const nlohmann::json& j) {
  auto text = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_string()) throw Error(ErrorKind::SchemaViolation, std::string("missing '") + key + "'");
    return j[key].get<std::string>();
  };
  if (text("kind") != "program") throw Error(ErrorKind::SchemaViolation, "not a program file");
  const CreasePattern pattern = cp_from_json(j.at("pattern"));
  const CanonicalPattern canonical = canonicalize(pattern);
  if (!(canonical.pattern() == pattern)) throw Error(ErrorKind::SchemaViolation, "program pattern is not canonical");
  const std::string ref = pattern_ref(canonical);
  if (text("pattern_ref") != ref) throw Error(ErrorKind::SchemaViolation, "pattern reference does not match the pattern");

  CorpusProgram p{text("id"),
                  {canonical, goal_from_json(j.at("goal")), program_from_json(j.at("expert_actions")), text("category"),
                   tier_from_string(text("tier"))},
                  {},
                  text("split") == "test"};
  const int ne = canonical.num_edges();
  if (static_cast<int>(p.program.goal.target_alpha.size()) != ne) {
    throw Error(ErrorKind::SchemaViolation, "goal does not match the pattern");
  }
  for (const auto& rj : j.at("records")) {
    TransitionRecord r = record_from_json(rj, ne);
    if (r.pattern_ref != ref) throw Error(ErrorKind::SchemaViolation, "record refers to another pattern");
    if (!r.verdict.valid && !(r.state_after == r.state_before)) {
      throw Error(ErrorKind::SchemaViolation, "invalid transition changes the state");
    }
    p.records.push_back(std::move(r));
  }
  return p;
}

std::string serialize_program(const CorpusProgram& program) {
  return dump_json(program_to_json(program), FloatFormat::Shortest);
}

ordered_json corpus_manifest(const Corpus& corpus) {
  struct Tally {
    long programs = 0;
    long transitions = 0;
    long valid = 0;
  };
  std::map<std::string, Tally> by_tier;
  std::map<std::string, Tally> by_category;
  std::map<std::string, long> reasons;
  Tally total;
  ordered_json programs = ordered_json::array();
  for (const auto& p : corpus.programs) {
    long valid = 0;
    for (const auto& r : p.records) {
      valid += r.verdict.valid ? 1 : 0;
      reasons[std::string(to_string(r.verdict.reason))] += 1;
    }
    const auto n = static_cast<long>(p.records.size());
    for (Tally* t : {&by_tier[std::string(to_string(p.program.tier))], &by_category[p.program.category], &total}) {
      t->programs += 1;
      t->transitions += n;
      t->valid += valid;
    }
    ordered_json entry;
    entry["id"] = p.id;
    entry["file"] = "programs/" + p.id + ".json";
    entry["category"] = p.program.category;
    entry["tier"] = std::string(to_string(p.program.tier));
    entry["split"] = p.test ? "test" : "train";
    entry["pattern_ref"] = pattern_ref(p.program.pattern);
    entry["transitions"] = n;
    entry["hash"] = content_hash(serialize_program(p));
    programs.push_back(std::move(entry));
  }
  auto tally_json = [](const std::map<std::string, Tally>& m) {
    ordered_json out = ordered_json::object();
    for (const auto& [key, t] : m) {
      ordered_json tj;
      tj["programs"] = t.programs;
      tj["transitions"] = t.transitions;
      tj["valid"] = t.valid;
      tj["invalid"] = t.transitions - t.valid;
      out[key] = std::move(tj);
    }
    return out;
  };
  ordered_json j;
  j["version"] = kFormatVersion;
  j["kind"] = "corpus_manifest";
  j["seed"] = corpus.config.seed;
  j["count"] = corpus.config.count;
  j["per_step"] = corpus.config.per_step;
  j["test_fraction"] = corpus.config.test_fraction;
  ordered_json families = ordered_json::array();
  for (Family f : corpus.config.families) families.push_back(std::string(to_string(f)));
  j["families"] = std::move(families);
  j["num_programs"] = total.programs;
  j["num_transitions"] = total.transitions;
  j["valid_transitions"] = total.valid;
  j["invalid_transitions"] = total.transitions - total.valid;
  j["by_tier"] = tally_json(by_tier);
  j["by_category"] = tally_json(by_category);
  ordered_json rj = ordered_json::object();
  for (const auto& [reason, count] : reasons) rj[reason] = count;
  j["reasons"] = std::move(rj);
  j["programs"] = std::move(programs);
  return j;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  for (const auto& p : corpus.programs) write_text_file(dir / "programs" / (p.id + ".json"), serialize_program(p));
  write_text_file(dir / "manifest.json", dump_json(corpus_manifest(corpus), FloatFormat::Shortest));
}

Corpus load_corpus(const std::filesystem::path& dir) {
  const json manifest = read_json_file(dir / "manifest.json");
  Corpus corpus;
  try {
    corpus.config.seed = manifest.at("seed").get<std::uint64_t>();
    corpus.config.count = manifest.at("count").get<int>();
    corpus.config.per_step = manifest.at("per_step").get<int>();
    corpus.config.test_fraction = manifest.at("test_fraction").get<double>();
    corpus.config.families.clear();
    for (const auto& f : manifest.at("families")) corpus.config.families.push_back(family_from_string(f.get<std::string>()));
    for (const auto& entry : manifest.at("programs")) {
      const auto file = entry.at("file").get<std::string>();
      const std::string text = read_text_file(dir / file);
      if (content_hash(text) != entry.at("hash").get<std::string>()) {
        throw Error(ErrorKind::SchemaViolation, file + ": content hash does not match the manifest");
      }
      corpus.programs.push_back(corpus_program_from_json(parse_json(text)));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaViolation, std::string("corpus manifest: ") + e.what());
  }
  if (corpus.programs.empty()) throw Error(ErrorKind::EmptyDataset, "corpus has no programs");
  return corpus;
}

std::vector<Demonstration> demonstrations(const Corpus& corpus, bool test_split) {
  std::vector<Demonstration> out;
  for (const auto& p : corpus.programs) {
    if (p.test == test_split) out.push_back(to_demonstration(p.program));
  }
  return out;
}

std::vector<Example> training_examples(const Corpus& corpus, bool test_split) {
  std::vector<Example> out;
  for (const auto& p : corpus.programs) {
    if (p.test != test_split) continue;
    for (const auto& r : p.records) out.push_back(make_example(p.program.pattern, r));
  }
  return out;
}

FoldState fully_folded_state(const CanonicalPattern& pattern) {
  FoldState s = FoldState::flat(pattern.pattern());
  for (int e = 0; e < pattern.num_edges(); ++e) {
    const auto ei = static_cast<std::size_t>(e);
    if (pattern.pattern().is_boundary(e) || s.z[ei] == CreaseType::Unassigned) continue;
    s.alpha[ei] = dequantize_angle(s.z[ei] == CreaseType::Mountain ? kMountainBin : kValleyBin);
    s.rho[ei] = 1.0;
  }
  return s;
}

int interior_vertex(const CanonicalPattern& pattern) {
  for (int v = 0; v < pattern.num_vertices(); ++v) {
    if (pattern.topology().interior[static_cast<std::size_t>(v)]) return v;
  }
  throw Error(ErrorKind::InvalidPattern, "pattern has no interior vertex");
}

std::vector<VertexCase> valid_vertex_cases(int count, std::uint64_t seed) {
  std::vector<VertexCase> out;
  for (int i = 0; i < count; ++i) {
    FamilyParams params;
    params.radial_degree = 4 + 2 * (i % 3);
    auto patterns = generate_patterns(Family::Radial, params, 1, mix_seed(seed, static_cast<std::uint64_t>(i)));
    out.push_back({std::move(patterns.front()), Reason::Ok, "radial degree " + std::to_string(params.radial_degree)});
  }
  return out;
}

std::vector<VertexCase> invalid_vertex_cases(int count, std::uint64_t seed) {
  std::vector<VertexCase> out;
  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    const int degree = 4 + 2 * rng.below(3);
    for (int attempt = 0;; ++attempt) {
      if (attempt >= kMaxAttempts) throw Error(ErrorKind::GenerationExhausted, "no invalid vertex layout");
      auto sectors = kawasaki_sectors(rng, degree);
      auto types = maekawa_types(rng, degree);
      std::string description;
      Reason expected;
      if (i % 2 == 0) {
        // Move delta degrees from one sector to its neighbour: both
        // alternating sums move away from 180 by delta.
        const int delta = 2 + rng.below(9);
        const auto k = static_cast<std::size_t>(rng.below(degree));
        const auto next = (k + 1) % static_cast<std::size_t>(degree);
        if (sectors[next] - delta < 10) continue;
        sectors[k] += delta;
        sectors[next] -= delta;
        expected = Reason::KawasakiViolation;
        description = "kawasaki off by " + std::to_string(delta) + " degrees";
      } else {
        // Any count split other than d/2 +- 1.
        const int mountains = std::vector<int>{degree / 2, degree / 2 + 3 <= degree ? degree / 2 + 3 : degree,
                                               0}[static_cast<std::size_t>(rng.below(3))];
        for (int r = 0; r < degree; ++r) {
          types[static_cast<std::size_t>(r)] = r < mountains ? CreaseType::Mountain : CreaseType::Valley;
        }
        expected = Reason::MaekawaViolation;
        description = std::to_string(mountains) + " mountains of " + std::to_string(degree);
      }
      const double offset = rng.below(360);
      if (min_border_gap({0.5, 0.5}, sectors, offset) < kMinBorderGap) continue;
      out.push_back({make_single_vertex({0.5, 0.5}, sectors, offset, types, "invalid"), expected, description});
      break;
    }
  }
  return out;
}

}  // namespace foldplan
