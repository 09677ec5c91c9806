#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "foldplan/crease_pattern.hpp"
#include "foldplan/goal.hpp"
#include "foldplan/json_writer.hpp"
#include "foldplan/level0.hpp"
#include "foldplan/policy.hpp"
#include "foldplan/transition.hpp"
#include "foldplan/world_model.hpp"

namespace foldplan {

/// Pattern families. The first four are small hand-authored fixtures that
/// are varied by symmetry and crease direction; the rest are procedural.
enum class Family : std::uint8_t { Diagonal, BookFold, Gate, Blintz, Radial, RandomValid, Grid };
inline constexpr int kNumFamilies = 7;

/// Category label of a family ("diagonal", "book", "gate", "blintz",
/// "radial", "random", "grid").
std::string_view to_string(Family family);
Family family_from_string(std::string_view name);

enum class Tier : std::uint8_t { Simple, Intermediate, Complex };
std::string_view to_string(Tier tier);
Tier tier_from_string(std::string_view name);
Tier tier_of(Family family);

// Named fixtures.
CreasePattern fixture_diagonal();
CreasePattern fixture_book();
CreasePattern fixture_gate();
CreasePattern fixture_blintz();
/// Centre vertex with a 10 degree notch cut out of the sheet: 350 degrees
/// of paper around an interior vertex.
CreasePattern fixture_notch();

/// k x k grid of unit squares with a map-fold assignment (every interior
/// vertex is 3-1). 2k(k+1) edges.
CreasePattern make_grid(int k);

/// Single interior vertex at `center` with creases leaving at the given
/// consecutive sector angles (degrees, summing to 360) starting from
/// direction `offset_degrees`. Creases run to the square's border.
CreasePattern make_single_vertex(Point center, const std::vector<double>& sector_degrees, double offset_degrees,
                                 const std::vector<CreaseType>& types, std::optional<std::string> category = {});

struct FamilyParams {
  int grid_k = 3;
  int radial_degree = 4;                // even, >= 4
  std::vector<double> sector_degrees;   // explicit radial sectors, overrides the degree
  int random_degree = 4;                // even, >= 4
};

/// Deterministic per seed. Every pattern satisfies the CreasePattern
/// invariants and is developable. Throws Error{GenerationExhausted} when
/// rejection sampling needs more than 10,000 attempts.
std::vector<CreasePattern> generate_patterns(Family family, const FamilyParams& params, int count, std::uint64_t seed);

struct ExpertProgram {
  CanonicalPattern pattern;  // initial types may hide some creases as U
  GoalSpec goal;
  std::vector<FoldAction> actions;  // ends with DONE
  std::string category;
  Tier tier = Tier::Simple;
};

/// Folds every crease to its target in canonical index order (mountain to
/// angle bin 15, valley to bin 0, progress bin 7). The complex tier makes
/// two passes: half folds, a quarter turn, then full folds. Creases listed
/// in `hidden` start unassigned; their target is the pattern's type.
ExpertProgram make_expert_program(const CreasePattern& full_pattern, std::string category, Tier tier,
                                  const std::vector<bool>& hidden = {});

/// States visited by the program (size = actions + 1).
std::vector<FoldState> replay(const ExpertProgram& program, const KernelConfig& kernel = {});
Demonstration to_demonstration(const ExpertProgram& program);

/// For each expert step: the expert transition plus `per_step` kernel
/// labelled perturbations of it.
std::vector<TransitionRecord> perturb_expert(const ExpertProgram& program, int per_step, std::uint64_t seed);

struct CorpusConfig {
  std::vector<Family> families = {Family::Diagonal, Family::BookFold, Family::Gate,     Family::Blintz,
                                  Family::Radial,   Family::RandomValid, Family::Grid};
  int count = 30;  // programs per family
  int per_step = 12;
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
};

struct CorpusProgram {
  std::string id;
  ExpertProgram program;
  std::vector<TransitionRecord> records;
  bool test = false;
};

struct Corpus {
  CorpusConfig config;
  std::vector<CorpusProgram> programs;
};

Corpus generate_corpus(const CorpusConfig& config);

ordered_json program_to_json(const CorpusProgram& program);
CorpusProgram corpus_program_from_json(const nlohmann::json& j);
std::string serialize_program(const CorpusProgram& program);

/// Manifest listing counts per tier and category, verdict statistics, the
/// split and the content hash of every program file.
ordered_json corpus_manifest(const Corpus& corpus);

/// Writes programs/<id>.json and manifest.json. Throws Error{IOFailure}.
void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

/// Reads a corpus directory, checking hashes, pattern references and that
/// invalid transitions leave the state unchanged.
Corpus load_corpus(const std::filesystem::path& dir);

std::vector<Demonstration> demonstrations(const Corpus& corpus, bool test_split);
std::vector<Example> training_examples(const Corpus& corpus, bool test_split);

/// Interior vertex fixtures for the flat-foldability theorems.
struct VertexCase {
  CreasePattern pattern;
  Reason expected = Reason::Ok;
  std::string description;
};

/// Fully folded state of `pattern` with each crease at +-15pi/16 per type.
FoldState fully_folded_state(const CanonicalPattern& pattern);

/// Index of the single interior vertex of a single-vertex pattern.
int interior_vertex(const CanonicalPattern& pattern);

/// Radial vertices that satisfy both theorems.
std::vector<VertexCase> valid_vertex_cases(int count, std::uint64_t seed);

/// Alternating Kawasaki perturbations (2 to 10 degrees) and wrong Maekawa
/// counts, in equal numbers.
std::vector<VertexCase> invalid_vertex_cases(int count, std::uint64_t seed);

}  // namespace foldplan
