#include "foldplan/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <map>
#include <sstream>

#include "foldplan/dataset.hpp"
#include "foldplan/error.hpp"
#include "foldplan/io.hpp"
#include "foldplan/svg.hpp"

namespace foldplan {

namespace fs = std::filesystem;

namespace {

// Records what a run read and wrote; saved next to the outputs.
class RunManifest {
 public:
  RunManifest(std::string command, const std::vector<std::string>& args)
      : command_(std::move(command)), args_(args), start_(std::chrono::steady_clock::now()) {}

  void config(const std::string& key, ordered_json value) { config_[key] = std::move(value); }
  void seed(const std::string& key, std::uint64_t value) { seeds_[key] = value; }
  void input(const fs::path& path) { inputs_[path.string()] = hash_file(path); }
  void output(const fs::path& path) { outputs_[path.string()] = hash_file(path); }

  void write(const fs::path& path) const {
    ordered_json j;
    j["version"] = kFormatVersion;
    j["kind"] = "run_manifest";
    j["tool_version"] = std::string(kToolVersion);
    j["command"] = command_;
    j["args"] = args_;
    j["config"] = config_.is_null() ? ordered_json::object() : config_;
    j["seeds"] = seeds_.is_null() ? ordered_json::object() : seeds_;
    j["inputs"] = inputs_.is_null() ? ordered_json::object() : inputs_;
    j["outputs"] = outputs_.is_null() ? ordered_json::object() : outputs_;
    j["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write_text_file(path, dump_json(j, FloatFormat::Shortest));
  }

 private:
  static std::string hash_file(const fs::path& path) { return content_hash(read_text_file(path)); }

  std::string command_;
  std::vector<std::string> args_;
  ordered_json config_;
  ordered_json seeds_;
  ordered_json inputs_;
  ordered_json outputs_;
  std::chrono::steady_clock::time_point start_;
};

fs::path manifest_beside(const fs::path& output) {
  return output.parent_path() / (output.filename().string() + ".manifest.json");
}

// A pattern may come from a CP file or from a corpus program file.
CreasePattern load_pattern(const fs::path& path) {
  const json j = read_json_file(path);
  if (j.contains("kind") && j["kind"] == "program") return cp_from_json(j.at("pattern"));
  return cp_from_json(j);
}

GoalSpec load_goal(const fs::path& path) {
  const json j = read_json_file(path);
  if (j.contains("kind") && j["kind"] == "program") return goal_from_json(j.at("goal"));
  return goal_from_json(j);
}

// States in files are indexed like the pattern file; the kernel works in
// canonical order.
FoldState to_canonical(const CanonicalPattern& canonical, const FoldState& s) {
  FoldState out = s;
  const auto& perm = canonical.edge_permutation();
  for (std::size_t j = 0; j < perm.size(); ++j) {
    const auto c = static_cast<std::size_t>(perm[j]);
    out.alpha[c] = s.alpha[j];
    out.rho[c] = s.rho[j];
    out.z[c] = s.z[j];
  }
  return out;
}

int input_vertex(const CanonicalPattern& canonical, int vertex) {
  const auto& perm = canonical.vertex_permutation();
  const auto it = std::find(perm.begin(), perm.end(), vertex);
  return it == perm.end() ? vertex : static_cast<int>(it - perm.begin());
}

std::vector<Family> parse_families(const std::string& list) {
  std::vector<Family> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(family_from_string(item));
  }
  if (out.empty()) throw Error(ErrorKind::OutOfRange, "no families given");
  return out;
}

std::string families_help() {
  std::string s;
  for (int f = 0; f < kNumFamilies; ++f) s += (f ? "," : "") + std::string(to_string(static_cast<Family>(f)));
  return s;
}

// ---- subcommands ---------------------------------------------------------

struct GenDataArgs {
  std::string families = families_help();
  int count = 30;
  int per_step = 12;
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  std::string out;
};

int cmd_gen_data(const GenDataArgs& a, RunManifest& run, std::ostream& out) {
  CorpusConfig config;
  config.families = parse_families(a.families);
  config.count = a.count;
  config.per_step = a.per_step;
  config.seed = a.seed;
  config.test_fraction = a.test_fraction;
  if (!(a.test_fraction >= 0.0 && a.test_fraction < 1.0)) throw Error(ErrorKind::OutOfRange, "test fraction must be in [0,1)");
  const Corpus corpus = generate_corpus(config);
  const fs::path dir(a.out);
  write_corpus(corpus, dir);

  long transitions = 0;
  long valid = 0;
  for (const auto& p : corpus.programs) {
    for (const auto& r : p.records) {
      ++transitions;
      valid += r.verdict.valid ? 1 : 0;
    }
  }
  out << "programs " << corpus.programs.size() << "\ntransitions " << transitions << " (valid " << valid
      << ", invalid " << transitions - valid << ")\n";

  run.config("families", a.families);
  run.config("count", a.count);
  run.config("per_step", a.per_step);
  run.config("test_fraction", a.test_fraction);
  run.seed("seed", a.seed);
  run.output(dir / "manifest.json");
  run.write(dir / "run_manifest.json");
  return 0;
}

struct TrainPolicyArgs {
  std::string data;
  std::string out;
  int order = 3;
  double delta = 0.1;
};

int cmd_train_policy(const TrainPolicyArgs& a, RunManifest& run, std::ostream& out) {
  const Corpus corpus = load_corpus(a.data);
  const auto train_demos = demonstrations(corpus, false);
  const auto test_demos = demonstrations(corpus, true);
  const NGramPolicy policy = train_mle(train_demos, a.order, a.delta);
  const fs::path path(a.out);
  write_text_file(path, dump_json(policy_to_json(policy), FloatFormat::Shortest));

  out << "demonstrations " << train_demos.size() << "\n";
  out << "train_token_nll " << mean_token_nll(policy, train_demos) << "\n";
  if (!test_demos.empty()) out << "heldout_token_nll " << mean_token_nll(policy, test_demos) << "\n";

  run.config("order", a.order);
  run.config("delta", a.delta);
  run.input(fs::path(a.data) / "manifest.json");
  run.output(path);
  run.write(manifest_beside(path));
  return 0;
}

struct TrainWmArgs {
  std::string data;
  std::string out;
  TrainConfig train;
};

int cmd_train_wm(const TrainWmArgs& a, RunManifest& run, std::ostream& out) {
  const Corpus corpus = load_corpus(a.data);
  const auto examples = training_examples(corpus, false);
  TrainReport report;
  const WorldModel model = train(examples, a.train, &report);
  const fs::path path(a.out);
  write_text_file(path, dump_json(world_model_to_json(model), FloatFormat::Shortest));

  out << "examples " << examples.size() << "\nlearning_rate " << report.learning_rate << "\nrestarts "
      << report.restarts << "\n";
  for (std::size_t e = 0; e < report.epoch_loss.size(); ++e) out << "epoch " << e << " loss " << report.epoch_loss[e] << "\n";

  run.config("epochs", a.train.epochs);
  run.config("learning_rate", a.train.learning_rate);
  run.config("batch_size", a.train.batch_size);
  run.config("max_restarts", a.train.max_restarts);
  run.seed("seed", a.train.seed);
  run.input(fs::path(a.data) / "manifest.json");
  run.output(path);
  run.write(manifest_beside(path));
  return 0;
}

struct EvalWmArgs {
  std::string data;
  std::string wm;
  std::string out;
};

int cmd_eval_wm(const EvalWmArgs& a, RunManifest& run, std::ostream& out) {
  const Corpus corpus = load_corpus(a.data);
  const WorldModel model = world_model_from_json(read_json_file(a.wm));
  const auto examples = training_examples(corpus, true);
  if (examples.empty()) throw Error(ErrorKind::EmptyDataset, "corpus has no held-out transitions");
  const HeldOutScores scores = evaluate_world_model(model, examples);
  out << "heldout_examples " << examples.size() << "\nmse " << scores.mse << "\nviolation_auc " << scores.violation_auc
      << "\n";
  if (!a.out.empty()) {
    ordered_json j;
    j["heldout_examples"] = examples.size();
    j["mse"] = scores.mse;
    j["violation_auc"] = scores.violation_auc;
    const fs::path path(a.out);
    write_text_file(path, dump_json(j, FloatFormat::Shortest));
    run.input(fs::path(a.data) / "manifest.json");
    run.input(a.wm);
    run.output(path);
    run.write(manifest_beside(path));
  }
  return 0;
}

struct PlanArgs {
  std::string cp;
  std::string goal;
  std::string policy;
  std::string wm;
  std::string config;
  std::string mode;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string svg_dir;
};

int cmd_plan(const PlanArgs& a, RunManifest& run, std::ostream& out) {
  const CanonicalPattern pattern = canonicalize(load_pattern(a.cp));
  const GoalSpec goal = load_goal(a.goal);
  if (static_cast<int>(goal.target_alpha.size()) != pattern.num_edges()) {
    throw Error(ErrorKind::LengthMismatch, "goal does not match the pattern's edge count");
  }
  PlannerConfig config;
  if (!a.config.empty()) {
    config = config_from_json(read_json_file(a.config));
    run.input(a.config);
  }
  if (a.seed) config.seed = *a.seed;
  if (!a.mode.empty()) config.mode = mode_from_string(a.mode);
  validate(config);

  const NGramPolicy policy = policy_from_json(read_json_file(a.policy));
  if (policy.vocabulary().num_edges() < pattern.num_edges() ||
      policy.vocabulary().num_vertices() < pattern.num_vertices()) {
    throw Error(ErrorKind::OutOfRange, "pattern is larger than the policy vocabulary");
  }
  std::optional<WorldModel> wm;
  if (!a.wm.empty()) {
    wm = world_model_from_json(read_json_file(a.wm));
    run.input(a.wm);
  } else if (config.mode != PlannerMode::LmOnly) {
    throw Error(ErrorKind::OutOfRange, "--wm is required unless the mode is lm_only");
  }

  const Trajectory t =
      rollout(pattern, FoldState::flat(pattern.pattern()), goal, policy, wm ? &*wm : nullptr, config);

  ordered_json j = trajectory_to_json(t);
  j["pattern"] = cp_to_json(pattern.pattern());
  j["goal"] = goal_to_json(goal);
  j["config"] = config_to_json(config);
  const fs::path path(a.out);
  write_text_file(path, dump_json(j, FloatFormat::Shortest));

  out << "steps " << t.steps.size() << "\ntermination " << to_string(t.termination) << "\nsuccess "
      << (t.success ? "true" : "false") << "\nfinal_goal_distance " << t.final_goal_distance << "\n";

  run.config("planner", config_to_json(config));
  run.seed("seed", config.seed);
  run.input(a.cp);
  run.input(a.goal);
  run.input(a.policy);
  run.output(path);
  if (!a.svg_dir.empty()) {
    for (const auto& p : export_trajectory_svgs(pattern.pattern(), t, a.svg_dir)) run.output(p);
  }
  run.write(manifest_beside(path));
  return 0;
}

struct VerifyArgs {
  std::string cp;
  std::string state;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  const CanonicalPattern pattern = canonicalize(load_pattern(a.cp));
  // Without a state the pattern's own assignment is checked fully folded.
  const FoldState state = a.state.empty() ? fully_folded_state(pattern)
                                          : to_canonical(pattern, state_from_json(read_json_file(a.state)));
  if (state.num_edges() != pattern.num_edges()) throw Error(ErrorKind::LengthMismatch, "state does not match the pattern");
  if (auto problem = check_state_invariants(pattern.pattern(), state)) throw Error(ErrorKind::SchemaViolation, *problem);
  const Verdict v = level0::verify_flat_state(pattern, state);
  if (v.valid) {
    out << "OK\n";
    return 0;
  }
  out << to_string(v.reason);
  if (v.vertex) out << " vertex " << input_vertex(pattern, *v.vertex);
  out << "\n";
  return 1;
}

struct EvaluateArgs {
  std::string pred;
  std::string ref;
  std::string out;
};

std::vector<fs::path> json_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::IOFailure, "not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto& p = entry.path();
    const std::string name = p.filename().string();
    if (p.extension() == ".json" && name.find(".manifest.") == std::string::npos && name != "manifest.json" &&
        name != "run_manifest.json") {
      files.push_back(p);
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

int cmd_evaluate(const EvaluateArgs& a, RunManifest& run, std::ostream& out) {
  fs::path ref_dir(a.ref);
  if (fs::is_directory(ref_dir / "programs")) ref_dir /= "programs";
  std::map<std::string, fs::path> refs;
  for (const auto& p : json_files(ref_dir)) refs[p.stem().string()] = p;

  std::vector<EvalCase> cases;
  int max_vertices = 0;
  int max_edges = 0;
  for (const auto& pred_path : json_files(a.pred)) {
    const auto it = refs.find(pred_path.stem().string());
    if (it == refs.end()) throw Error(ErrorKind::IOFailure, "no reference program for " + pred_path.filename().string());
    const CorpusProgram ref = corpus_program_from_json(read_json_file(it->second));
    const int ne = ref.program.pattern.num_edges();
    const Trajectory t = trajectory_from_json(read_json_file(pred_path), ne);

    EvalCase c;
    c.category = ref.program.category;
    c.reference = ref.program.actions;
    c.summary.category = c.category;
    c.summary.success = t.success;
    c.summary.final_goal_distance = t.final_goal_distance;
    for (const auto& s : t.steps) {
      c.predicted.push_back(s.action);
      c.summary.proposals_total += s.proposals_total;
      c.summary.proposals_valid += s.proposals_valid;
      if (s.predicted_mask) {
        std::set<int> truth;
        for (int e = 0; e < ne; ++e) {
          if (s.verdict.affected_mask[static_cast<std::size_t>(e)]) truth.insert(e);
        }
        c.masks.emplace_back(*s.predicted_mask, std::move(truth));
      }
    }
    max_vertices = std::max(max_vertices, ref.program.pattern.num_vertices());
    max_edges = std::max(max_edges, ne);
    cases.push_back(std::move(c));
    run.input(pred_path);
    run.input(it->second);
  }
  const EvalReport report = evaluate_cases(cases, Vocabulary(max_vertices, max_edges));
  const fs::path path(a.out);
  write_text_file(path, dump_json(report_to_json(report), FloatFormat::Shortest));
  out << "cases " << cases.size() << "\nprecision " << report.micro.precision << "\nrecall " << report.micro.recall
      << "\nf1 " << report.micro.f1 << "\nedge_iou " << report.edge_iou << "\ncat_sr " << report.cat_sr
      << "\nstep_valid " << report.step_valid << "\ntraj_sr " << report.traj_sr << "\ngoal_dist " << report.goal_dist
      << "\n";
  run.output(path);
  run.write(manifest_beside(path));
  return 0;
}

struct ExportSvgArgs {
  std::string cp;
  std::string state;
  std::string trajectory;
  std::string out;
};

int cmd_export_svg(const ExportSvgArgs& a, RunManifest& run, std::ostream& out) {
  run.input(a.cp);
  if (!a.trajectory.empty()) {
    // Trajectory states are in canonical edge order.
    const CanonicalPattern pattern = canonicalize(load_pattern(a.cp));
    const Trajectory t = trajectory_from_json(read_json_file(a.trajectory), pattern.num_edges());
    const fs::path dir(a.out);
    const auto files = export_trajectory_svgs(pattern.pattern(), t, dir);
    for (const auto& p : files) run.output(p);
    run.input(a.trajectory);
    run.write(dir / "run_manifest.json");
    out << "wrote " << files.size() << " files\n";
    return 0;
  }
  const CreasePattern pattern = load_pattern(a.cp);
  std::optional<FoldState> state;
  if (!a.state.empty()) {
    state = state_from_json(read_json_file(a.state));
    if (state->num_edges() != pattern.num_edges()) throw Error(ErrorKind::LengthMismatch, "state does not match the pattern");
    run.input(a.state);
  }
  const fs::path path(a.out);
  write_text_file(path, render_svg(pattern, state ? &*state : nullptr, pattern.category().value_or("")));
  run.output(path);
  run.write(manifest_beside(path));
  out << "wrote 1 file\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Crease-pattern folding planner", "foldplan"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate an expert and perturbed transition corpus");
  gen_cmd->add_option("--families", gen.families, "Comma separated families: " + families_help())->capture_default_str();
  gen_cmd->add_option("--count", gen.count, "Programs per family")->capture_default_str()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--per-step", gen.per_step, "Perturbations per expert step")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  gen_cmd->add_option("--test-fraction", gen.test_fraction, "Held-out fraction per category")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();

  TrainPolicyArgs tp;
  auto* tp_cmd = app.add_subcommand("train-policy", "Fit the n-gram policy on the training split");
  tp_cmd->add_option("--data", tp.data, "Corpus directory")->required();
  tp_cmd->add_option("--out", tp.out, "Policy file")->required();
  tp_cmd->add_option("--order", tp.order, "N-gram order")->capture_default_str()->check(CLI::PositiveNumber);
  tp_cmd->add_option("--delta", tp.delta, "Additive smoothing")->capture_default_str();

  TrainWmArgs tw;
  auto* tw_cmd = app.add_subcommand("train-wm", "Train the world model on the training split");
  tw_cmd->add_option("--data", tw.data, "Corpus directory")->required();
  tw_cmd->add_option("--out", tw.out, "Checkpoint file")->required();
  tw_cmd->add_option("--epochs", tw.train.epochs, "Epochs")->capture_default_str()->check(CLI::PositiveNumber);
  tw_cmd->add_option("--lr", tw.train.learning_rate, "Learning rate")->capture_default_str();
  tw_cmd->add_option("--batch-size", tw.train.batch_size, "Minibatch size")->capture_default_str()->check(CLI::PositiveNumber);
  tw_cmd->add_option("--seed", tw.train.seed, "Initialization and shuffle seed")->capture_default_str();

  EvalWmArgs ew;
  auto* ew_cmd = app.add_subcommand("eval-wm", "Held-out MSE and violation AUC of a checkpoint");
  ew_cmd->add_option("--data", ew.data, "Corpus directory")->required();
  ew_cmd->add_option("--wm", ew.wm, "Checkpoint file")->required();
  ew_cmd->add_option("--out", ew.out, "Optional JSON report");

  PlanArgs pl;
  auto* pl_cmd = app.add_subcommand("plan", "Plan and execute a folding trajectory");
  pl_cmd->add_option("--cp", pl.cp, "CP file or corpus program file")->required();
  pl_cmd->add_option("--goal", pl.goal, "Goal file or corpus program file")->required();
  pl_cmd->add_option("--policy", pl.policy, "Policy file")->required();
  pl_cmd->add_option("--wm", pl.wm, "World model checkpoint");
  pl_cmd->add_option("--config", pl.config, "Planner config JSON");
  pl_cmd->add_option("--mode", pl.mode, "full, lm_wm or lm_only (overrides the config)");
  pl_cmd->add_option("--seed", pl.seed, "Seed (overrides the config)");
  pl_cmd->add_option("--out", pl.out, "Trajectory JSON")->required();
  pl_cmd->add_option("--svg-dir", pl.svg_dir, "Write one SVG per visited state");

  VerifyArgs vf;
  auto* vf_cmd = app.add_subcommand("verify", "Check a pattern (fully folded) or a given state");
  vf_cmd->add_option("--cp", vf.cp, "CP file")->required();
  vf_cmd->add_option("--state", vf.state, "State JSON indexed like the CP file");

  EvaluateArgs ev;
  auto* ev_cmd = app.add_subcommand("evaluate", "Score planned trajectories against reference programs");
  ev_cmd->add_option("--pred", ev.pred, "Directory of trajectory files named <program id>.json")->required();
  ev_cmd->add_option("--ref", ev.ref, "Corpus directory or directory of program files")->required();
  ev_cmd->add_option("--out", ev.out, "Report JSON")->required();

  ExportSvgArgs sv;
  auto* sv_cmd = app.add_subcommand("export-svg", "Render a pattern, a state or a whole trajectory");
  sv_cmd->add_option("--cp", sv.cp, "CP file or corpus program file")->required();
  auto* state_opt = sv_cmd->add_option("--state", sv.state, "State JSON indexed like the CP file");
  sv_cmd->add_option("--trajectory", sv.trajectory, "Trajectory JSON; --out is then a directory")->excludes(state_opt);
  sv_cmd->add_option("--out", sv.out, "Output file or directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    const auto subs = app.get_subcommands();
    err << "error: " << e.what() << "\n\n" << (subs.empty() ? app.help() : subs.front()->help());
    return 2;
  }

  const CLI::App* sub = app.get_subcommands().front();
  RunManifest run(sub->get_name(), args);
  try {
    if (sub == gen_cmd) return cmd_gen_data(gen, run, out);
    if (sub == tp_cmd) return cmd_train_policy(tp, run, out);
    if (sub == tw_cmd) return cmd_train_wm(tw, run, out);
    if (sub == ew_cmd) return cmd_eval_wm(ew, run, out);
    if (sub == pl_cmd) return cmd_plan(pl, run, out);
    if (sub == vf_cmd) return cmd_verify(vf, out);
    if (sub == ev_cmd) return cmd_evaluate(ev, run, out);
    if (sub == sv_cmd) return cmd_export_svg(sv, run, out);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace foldplan
