#include "foldplan/io.hpp"

#include <fstream>
#include <sstream>

#include "foldplan/error.hpp"

namespace foldplan {

namespace {

[[noreturn]] void schema(const std::string& message) { throw Error(ErrorKind::SchemaViolation, message); }

const json& field(const json& j, const char* key) {
  if (!j.is_object()) schema(std::string("expected an object holding '") + key + "'");
  const auto it = j.find(key);
  if (it == j.end()) schema(std::string("missing field '") + key + "'");
  return *it;
}

template <typename T>
T get(const json& j, const char* key) {
  const json& v = field(j, key);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    schema(std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return get<T>(j, key);
}

void check_version(const json& j) {
  if (get<int>(j, "version") != kFormatVersion) schema("unsupported format version");
}

std::vector<CreaseType> types_from_json(const json& j) {
  if (!j.is_array()) schema("crease types must be an array");
  std::vector<CreaseType> out;
  for (const auto& t : j) {
    if (!t.is_string() || t.get<std::string>().size() != 1) schema("crease type must be one of M, V, U");
    out.push_back(crease_type_from_char(t.get<std::string>()[0]));
  }
  return out;
}

ordered_json types_to_json(const std::vector<CreaseType>& types) {
  ordered_json out = ordered_json::array();
  for (CreaseType t : types) out.push_back(std::string(1, to_char(t)));
  return out;
}

ordered_json matrix(std::vector<int> shape, std::span<const double> data) {
  ordered_json m;
  m["shape"] = shape;
  m["data"] = std::vector<double>(data.begin(), data.end());
  return m;
}

void read_matrix(const json& j, const char* key, std::vector<int> shape, std::vector<double>& out) {
  const json& m = field(j, key);
  if (get<std::vector<int>>(m, "shape") != shape) schema(std::string("parameter '") + key + "' has the wrong shape");
  const auto data = get<std::vector<double>>(m, "data");
  std::size_t expected = 1;
  for (int s : shape) expected *= static_cast<std::size_t>(s);
  if (data.size() != expected) schema(std::string("parameter '") + key + "' has the wrong size");
  out.insert(out.end(), data.begin(), data.end());
}

ordered_json candidate_to_json(const CandidateScore& c) {
  ordered_json j;
  j["action"] = action_to_json(c.action);
  j["valid"] = c.verdict.valid;
  j["reason"] = std::string(to_string(c.verdict.reason));
  j["scored"] = c.scored;
  j["log_prob"] = c.log_prob;
  j["goal_distance"] = c.goal_distance;
  j["violation"] = c.violation;
  j["score"] = c.score;
  return j;
}

ordered_json prf_to_json(const PRF& p) {
  ordered_json j;
  j["precision"] = p.precision;
  j["recall"] = p.recall;
  j["f1"] = p.f1;
  return j;
}

}  // namespace

ordered_json cp_to_json(const CreasePattern& pattern) {
  ordered_json j;
  j["version"] = kFormatVersion;
  ordered_json vertices = ordered_json::array();
  for (const auto& p : pattern.vertices()) vertices.push_back({p.x, p.y});
  j["vertices"] = std::move(vertices);
  ordered_json edges = ordered_json::array();
  for (const auto& e : pattern.edges()) edges.push_back({e.a, e.b});
  j["edges"] = std::move(edges);
  j["crease_types"] = types_to_json(pattern.crease_types());
  j["boundary"] = pattern.boundary();
  if (pattern.category()) j["category"] = *pattern.category();
  return j;
}

CreasePattern cp_from_json(const json& j) {
  check_version(j);
  std::vector<Point> vertices;
  const json& vs = field(j, "vertices");
  if (!vs.is_array()) schema("vertices must be an array");
  for (const auto& v : vs) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) schema("vertex must be [x, y]");
    vertices.push_back({v[0].get<double>(), v[1].get<double>()});
  }
  std::vector<Edge> edges;
  const json& es = field(j, "edges");
  if (!es.is_array()) schema("edges must be an array");
  for (const auto& e : es) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
      schema("edge must be [i, j]");
    }
    edges.push_back({e[0].get<int>(), e[1].get<int>()});
  }
  auto types = types_from_json(field(j, "crease_types"));
  auto boundary = get<std::vector<bool>>(j, "boundary");
  std::optional<std::string> category;
  if (j.contains("category") && !j["category"].is_null()) category = get<std::string>(j, "category");
  return CreasePattern(std::move(vertices), std::move(edges), std::move(types), std::move(boundary),
                       std::move(category));
}

std::string serialize_cp(const CreasePattern& pattern) { return dump_json(cp_to_json(pattern), FloatFormat::Fixed9); }

CreasePattern parse_cp(std::string_view text) { return cp_from_json(parse_json(text)); }

std::string pattern_ref(const CanonicalPattern& pattern) {
  return content_hash(serialize_cp(pattern.pattern().with_category(std::nullopt)));
}

ordered_json action_to_json(const FoldAction& action) {
  if (!is_well_formed(action)) schema("cannot serialize a malformed action");
  ordered_json j;
  j["op"] = std::string(to_string(action.op));
  switch (action.op) {
    case OpCode::Fold:
      j["edge"] = *action.edge;
      j["angle_bin"] = *action.angle_bin;
      j["rho_bin"] = *action.rho_bin;
      break;
    case OpCode::Unfold:
      j["edge"] = *action.edge;
      break;
    case OpCode::Rotate:
      j["quarter_turns"] = *action.rotate_quarter_turns;
      break;
    case OpCode::Flip:
    case OpCode::Done:
      break;
  }
  return j;
}

FoldAction action_from_json(const json& j) {
  const auto op_name = get<std::string>(j, "op");
  OpCode op;
  try {
    op = op_from_string(op_name);
  } catch (const Error&) {
    schema("unknown op '" + op_name + "'");
  }
  if (!j.is_object()) schema("an action is an object");
  std::size_t fields = 1;
  switch (op) {
    case OpCode::Fold: fields = 4; break;
    case OpCode::Unfold:
    case OpCode::Rotate: fields = 2; break;
    case OpCode::Flip:
    case OpCode::Done: break;
  }
  if (j.size() != fields) schema("unexpected fields for " + op_name);
  switch (op) {
    case OpCode::Fold:
      return FoldAction::fold(get<int>(j, "edge"), get<int>(j, "angle_bin"), get<int>(j, "rho_bin"));
    case OpCode::Unfold:
      return FoldAction::unfold(get<int>(j, "edge"));
    case OpCode::Rotate:
      return FoldAction::rotate(get<int>(j, "quarter_turns"));
    case OpCode::Flip:
      return FoldAction::flip();
    case OpCode::Done:
      return FoldAction::done();
  }
  schema("unknown op");
}

ordered_json program_to_json(std::span<const FoldAction> actions) {
  ordered_json out = ordered_json::array();
  for (const auto& a : actions) out.push_back(action_to_json(a));
  return out;
}

std::vector<FoldAction> program_from_json(const json& j) {
  if (!j.is_array()) schema("a folding program is an array of actions");
  std::vector<FoldAction> out;
  for (const auto& a : j) out.push_back(action_from_json(a));
  return out;
}

ordered_json state_to_json(const FoldState& state) {
  ordered_json j;
  j["alpha"] = state.alpha;
  j["rho"] = state.rho;
  j["z"] = types_to_json(state.z);
  j["psi"] = state.psi;
  j["b"] = state.b;
  j["step"] = state.step;
  return j;
}

FoldState state_from_json(const json& j) {
  FoldState s;
  s.alpha = get<std::vector<double>>(j, "alpha");
  s.rho = get<std::vector<double>>(j, "rho");
  s.z = types_from_json(field(j, "z"));
  s.psi = get<double>(j, "psi");
  s.b = get<bool>(j, "b");
  s.step = get<int>(j, "step");
  if (s.rho.size() != s.alpha.size() || s.z.size() != s.alpha.size()) schema("state vectors differ in length");
  return s;
}

ordered_json verdict_to_json(const Verdict& verdict) {
  ordered_json j;
  j["valid"] = verdict.valid;
  j["reason"] = std::string(to_string(verdict.reason));
  std::vector<int> affected;
  for (std::size_t e = 0; e < verdict.affected_mask.size(); ++e) {
    if (verdict.affected_mask[e]) affected.push_back(static_cast<int>(e));
  }
  j["affected"] = affected;
  j["vertex"] = verdict.vertex ? ordered_json(*verdict.vertex) : ordered_json(nullptr);
  return j;
}

Verdict verdict_from_json(const json& j, int num_edges) {
  Verdict v;
  v.valid = get<bool>(j, "valid");
  v.reason = reason_from_string(get<std::string>(j, "reason"));
  v.affected_mask.assign(static_cast<std::size_t>(num_edges), false);
  for (int e : get<std::vector<int>>(j, "affected")) {
    if (e < 0 || e >= num_edges) schema("affected edge index out of range");
    v.affected_mask[static_cast<std::size_t>(e)] = true;
  }
  const json& vertex = field(j, "vertex");
  if (!vertex.is_null()) v.vertex = get<int>(j, "vertex");
  return v;
}

ordered_json goal_to_json(const GoalSpec& goal) {
  ordered_json j;
  j["category"] = goal.category;
  j["target_alpha"] = goal.target_alpha;
  j["target_z"] = types_to_json(goal.target_z);
  j["tolerance"] = goal.tolerance;
  return j;
}

GoalSpec goal_from_json(const json& j) {
  GoalSpec g;
  g.category = get<std::string>(j, "category");
  g.target_alpha = get<std::vector<double>>(j, "target_alpha");
  g.target_z = types_from_json(field(j, "target_z"));
  g.tolerance = get_or<double>(j, "tolerance", g.tolerance);
  if (g.target_z.size() != g.target_alpha.size()) schema("goal vectors differ in length");
  return g;
}

ordered_json record_to_json(const TransitionRecord& record) {
  ordered_json j;
  j["pattern_ref"] = record.pattern_ref;
  j["state_before"] = state_to_json(record.state_before);
  j["action"] = action_to_json(record.action);
  j["state_after"] = state_to_json(record.state_after);
  j["verdict"] = verdict_to_json(record.verdict);
  j["provenance"] = std::string(to_string(record.provenance));
  return j;
}

TransitionRecord record_from_json(const json& j, int num_edges) {
  TransitionRecord r;
  r.pattern_ref = get<std::string>(j, "pattern_ref");
  r.state_before = state_from_json(field(j, "state_before"));
  r.action = action_from_json(field(j, "action"));
  r.state_after = state_from_json(field(j, "state_after"));
  r.verdict = verdict_from_json(field(j, "verdict"), num_edges);
  r.provenance = provenance_from_string(get<std::string>(j, "provenance"));
  return r;
}

ordered_json policy_to_json(const NGramPolicy& policy) {
  ordered_json j;
  j["version"] = kFormatVersion;
  j["kind"] = "ngram";
  j["order"] = policy.order();
  j["delta"] = policy.delta();
  j["num_vertices"] = policy.vocabulary().num_vertices();
  j["num_edges"] = policy.vocabulary().num_edges();
  ordered_json table = ordered_json::array();
  for (const auto& [history, row] : policy.table()) {
    ordered_json entry;
    entry["category"] = history.key.category;
    entry["step_bucket"] = history.key.step_bucket;
    entry["folded_bucket"] = history.key.folded_bucket;
    entry["flipped"] = history.key.flipped;
    entry["history"] = history.tokens;
    ordered_json counts = ordered_json::array();
    for (const auto& [token, count] : row.counts) counts.push_back({token, count});
    entry["counts"] = std::move(counts);
    table.push_back(std::move(entry));
  }
  j["table"] = std::move(table);
  return j;
}

NGramPolicy policy_from_json(const json& j) {
  check_version(j);
  if (get<std::string>(j, "kind") != "ngram") schema("unsupported policy kind");
  NGramPolicy policy(Vocabulary(get<int>(j, "num_vertices"), get<int>(j, "num_edges")), get<int>(j, "order"),
                     get<double>(j, "delta"));
  const json& table = field(j, "table");
  if (!table.is_array()) schema("policy table must be an array");
  for (const auto& entry : table) {
    NGramHistory h;
    h.key.category = get<std::string>(entry, "category");
    h.key.step_bucket = get<int>(entry, "step_bucket");
    h.key.folded_bucket = get<int>(entry, "folded_bucket");
    h.key.flipped = get<bool>(entry, "flipped");
    h.tokens = get<std::vector<Token>>(entry, "history");
    if (static_cast<int>(h.tokens.size()) != policy.order() - 1) schema("history length does not match the order");
    for (const auto& pair : field(entry, "counts")) {
      if (!pair.is_array() || pair.size() != 2) schema("count entries are [token, count] pairs");
      try {
        policy.add_count(h, pair[0].get<Token>(), pair[1].get<std::uint64_t>());
      } catch (const std::invalid_argument& e) {
        schema(e.what());
      } catch (const json::exception&) {
        schema("count entries are [token, count] pairs");
      }
    }
  }
  return policy;
}

ordered_json world_model_to_json(const WorldModel& model) {
  const auto& p = model.params();
  auto slice = [&](std::size_t begin, std::size_t end) { return std::span<const double>(p).subspan(begin, end - begin); };
  ordered_json j;
  j["version"] = kFormatVersion;
  j["features"] = kEdgeFeatures;
  j["hidden"] = kHiddenUnits;
  j["W1"] = matrix({kModelInputs, kHiddenUnits}, slice(WorldModel::kW1, WorldModel::kB1));
  j["b1"] = matrix({kHiddenUnits}, slice(WorldModel::kB1, WorldModel::kWd));
  j["Wd"] = matrix({kHiddenUnits, 2}, slice(WorldModel::kWd, WorldModel::kBd));
  j["bd"] = matrix({2}, slice(WorldModel::kBd, WorldModel::kWm));
  j["wm"] = matrix({kHiddenUnits}, slice(WorldModel::kWm, WorldModel::kBm));
  j["bm"] = matrix({1}, slice(WorldModel::kBm, WorldModel::kWc));
  j["wc"] = matrix({kHiddenUnits}, slice(WorldModel::kWc, WorldModel::kBc));
  j["bc"] = matrix({1}, slice(WorldModel::kBc, WorldModel::kNumParams));
  return j;
}

WorldModel world_model_from_json(const json& j) {
  check_version(j);
  if (get<int>(j, "features") != kEdgeFeatures || get<int>(j, "hidden") != kHiddenUnits) {
    schema("checkpoint dimensions do not match this build");
  }
  std::vector<double> p;
  p.reserve(WorldModel::kNumParams);
  read_matrix(j, "W1", {kModelInputs, kHiddenUnits}, p);
  read_matrix(j, "b1", {kHiddenUnits}, p);
  read_matrix(j, "Wd", {kHiddenUnits, 2}, p);
  read_matrix(j, "bd", {2}, p);
  read_matrix(j, "wm", {kHiddenUnits}, p);
  read_matrix(j, "bm", {1}, p);
  read_matrix(j, "wc", {kHiddenUnits}, p);
  read_matrix(j, "bc", {1}, p);
  try {
    return WorldModel(std::move(p));
  } catch (const std::invalid_argument& e) {
    schema(e.what());
  }
}

ordered_json config_to_json(const PlannerConfig& c) {
  ordered_json j;
  j["K"] = c.K;
  j["p"] = c.p;
  j["lambda_goal"] = c.lambda_goal;
  j["lambda_cst"] = c.lambda_cst;
  j["epsilon"] = c.epsilon;
  j["tau"] = c.tau;
  j["M"] = c.M;
  j["max_resamples"] = c.max_resamples;
  j["max_steps"] = c.max_steps;
  j["seed"] = c.seed;
  j["imagination_depth"] = c.imagination_depth;
  j["aggregate"] = std::string(to_string(c.aggregate));
  j["mode"] = std::string(to_string(c.mode));
  return j;
}

PlannerConfig config_from_json(const json& j) {
  if (!j.is_object()) schema("planner config must be an object");
  static const std::set<std::string> known = {"K",         "p",    "lambda_goal",   "lambda_cst",        "epsilon",
                                              "tau",       "M",    "max_resamples", "max_steps",         "seed",
                                              "imagination_depth", "aggregate",     "mode"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) schema("unknown planner config field '" + key + "'");
  }
  PlannerConfig c;
  c.K = get_or<int>(j, "K", c.K);
  c.p = get_or<double>(j, "p", c.p);
  c.lambda_goal = get_or<double>(j, "lambda_goal", c.lambda_goal);
  c.lambda_cst = get_or<double>(j, "lambda_cst", c.lambda_cst);
  c.epsilon = get_or<double>(j, "epsilon", c.epsilon);
  c.tau = get_or<double>(j, "tau", c.tau);
  c.M = get_or<int>(j, "M", c.M);
  c.max_resamples = get_or<int>(j, "max_resamples", c.max_resamples);
  c.max_steps = get_or<int>(j, "max_steps", c.max_steps);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  c.imagination_depth = get_or<int>(j, "imagination_depth", c.imagination_depth);
  if (j.contains("aggregate")) c.aggregate = aggregate_from_string(get<std::string>(j, "aggregate"));
  if (j.contains("mode")) c.mode = mode_from_string(get<std::string>(j, "mode"));
  validate(c);
  return c;
}

ordered_json trajectory_to_json(const Trajectory& t) {
  ordered_json j;
  j["version"] = kFormatVersion;
  j["kind"] = "rollout";
  j["category"] = t.category;
  j["mode"] = std::string(to_string(t.mode));
  j["seed"] = t.seed;
  j["termination"] = std::string(to_string(t.termination));
  j["success"] = t.success;
  j["final_goal_distance"] = t.final_goal_distance;
  j["initial_state"] = state_to_json(t.initial_state);
  ordered_json steps = ordered_json::array();
  for (const auto& s : t.steps) {
    ordered_json sj;
    sj["action"] = action_to_json(s.action);
    sj["verdict"] = verdict_to_json(s.verdict);
    sj["state_source"] = "kernel";
    sj["state_after"] = state_to_json(s.state_after);
    sj["score"] = s.score;
    sj["proposals_total"] = s.proposals_total;
    sj["proposals_valid"] = s.proposals_valid;
    if (s.predicted_mask) {
      sj["predicted_mask"] = std::vector<int>(s.predicted_mask->begin(), s.predicted_mask->end());
    } else {
      sj["predicted_mask"] = nullptr;
    }
    ordered_json cands = ordered_json::array();
    for (const auto& c : s.candidates) cands.push_back(candidate_to_json(c));
    sj["candidates"] = std::move(cands);
    steps.push_back(std::move(sj));
  }
  j["steps"] = std::move(steps);
  return j;
}

Trajectory trajectory_from_json(const json& j, int num_edges) {
  check_version(j);
  Trajectory t;
  t.category = get<std::string>(j, "category");
  t.mode = mode_from_string(get<std::string>(j, "mode"));
  t.seed = get<std::uint64_t>(j, "seed");
  t.termination = termination_from_string(get<std::string>(j, "termination"));
  t.success = get<bool>(j, "success");
  t.final_goal_distance = get<double>(j, "final_goal_distance");
  t.initial_state = state_from_json(field(j, "initial_state"));
  for (const auto& sj : field(j, "steps")) {
    TrajectoryStep s;
    s.action = action_from_json(field(sj, "action"));
    s.verdict = verdict_from_json(field(sj, "verdict"), num_edges);
    s.state_after = state_from_json(field(sj, "state_after"));
    s.score = get<double>(sj, "score");
    s.proposals_total = get<int>(sj, "proposals_total");
    s.proposals_valid = get<int>(sj, "proposals_valid");
    const json& mask = field(sj, "predicted_mask");
    if (!mask.is_null()) {
      const auto edges = get<std::vector<int>>(sj, "predicted_mask");
      s.predicted_mask = std::set<int>(edges.begin(), edges.end());
    }
    for (const auto& cj : field(sj, "candidates")) {
      CandidateScore c;
      c.action = action_from_json(field(cj, "action"));
      c.tokens.clear();
      c.verdict.valid = get<bool>(cj, "valid");
      c.verdict.reason = reason_from_string(get<std::string>(cj, "reason"));
      c.scored = get<bool>(cj, "scored");
      c.log_prob = get<double>(cj, "log_prob");
      c.goal_distance = get<double>(cj, "goal_distance");
      c.violation = get<double>(cj, "violation");
      c.score = get<double>(cj, "score");
      s.candidates.push_back(std::move(c));
    }
    t.steps.push_back(std::move(s));
  }
  return t;
}

ordered_json report_to_json(const EvalReport& r) {
  ordered_json j;
  j["version"] = kFormatVersion;
  j["precision"] = r.micro.precision;
  j["recall"] = r.micro.recall;
  j["f1"] = r.micro.f1;
  j["macro"] = prf_to_json(r.macro);
  j["edge_iou"] = r.edge_iou;
  j["cat_sr"] = r.cat_sr;
  j["step_valid"] = r.step_valid;
  j["traj_sr"] = r.traj_sr;
  j["goal_dist"] = r.goal_dist;
  ordered_json per = ordered_json::object();
  for (const auto& [category, c] : r.per_category) {
    ordered_json cj;
    cj["count"] = c.count;
    cj["precision"] = c.prf.precision;
    cj["recall"] = c.prf.recall;
    cj["f1"] = c.prf.f1;
    cj["edge_iou"] = c.edge_iou;
    cj["success_rate"] = c.success_rate;
    cj["step_valid"] = c.trajectory.step_valid;
    cj["traj_sr"] = c.trajectory.traj_sr;
    cj["goal_dist"] = c.trajectory.goal_dist;
    per[category] = std::move(cj);
  }
  j["per_category"] = std::move(per);
  return j;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IOFailure, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::IOFailure, "cannot read '" + path.string() + "'");
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorKind::IOFailure, "cannot create '" + path.parent_path().string() + "': " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IOFailure, "cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorKind::IOFailure, "short write to '" + path.string() + "'");
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    schema(std::string("malformed JSON: ") + e.what());
  }
}

json read_json_file(const std::filesystem::path& path) {
  try {
    return parse_json(read_text_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::SchemaViolation) {
      throw Error(ErrorKind::SchemaViolation, path.string() + ": " + e.what());
    }
    throw;
  }
}

}  // namespace foldplan
