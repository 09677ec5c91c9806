#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "foldplan/cli.hpp"
#include "foldplan/dataset.hpp"
#include "foldplan/io.hpp"

using namespace foldplan;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("foldplan_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int count_of(const std::string& text, const std::string& needle) {
  int n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("verify") {
  const fs::path dir = scratch("verify");
  write_text_file(dir / "diagonal.json", serialize_cp(fixture_diagonal()));
  write_text_file(dir / "notch.json", serialize_cp(fixture_notch()));

  const Run ok = cli({"verify", "--cp", (dir / "diagonal.json").string()});
  CHECK(ok.code == 0);
  CHECK(ok.out == "OK\n");

  const Run bad = cli({"verify", "--cp", (dir / "notch.json").string()});
  CHECK(bad.code == 1);
  CHECK(bad.out == "DEVELOPABILITY_VIOLATION vertex 0\n");

  const Run missing = cli({"verify", "--cp", (dir / "nope.json").string()});
  CHECK(missing.code == 1);
  CHECK_FALSE(missing.err.empty());
  fs::remove_all(dir);
}

TEST_CASE("usage errors") {
  const Run r = cli({"verify", "--bogus", "1"});
  CHECK(r.code == 2);
  CHECK(r.err.find("error:") != std::string::npos);
  CHECK(r.err.find("--cp") != std::string::npos);
  CHECK(cli({}).code == 2);
  CHECK(cli({"--version"}).code == 0);
  CHECK(cli({"gen-data", "--help"}).code == 0);
  CHECK(cli({"plan", "--cp", "x"}).code == 2);
}

TEST_CASE("the installed binary reports exit codes") {
  const std::string bin = FOLDPLAN_CLI_PATH;
  CHECK(std::system((bin + " --version > /dev/null").c_str()) == 0);
  const int status = std::system((bin + " verify --nothing > /dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(status) == 2);
}

TEST_CASE("gen-data is reproducible") {
  const fs::path dir = scratch("gen");
  const std::vector<std::string> base = {"gen-data", "--families", "book,radial", "--count", "4", "--per-step",
                                         "3", "--seed", "5", "--out"};
  auto a = base;
  a.push_back((dir / "a").string());
  auto b = base;
  b.push_back((dir / "b").string());
  REQUIRE(cli(a).code == 0);
  REQUIRE(cli(b).code == 0);
  CHECK(read_text_file(dir / "a" / "manifest.json") == read_text_file(dir / "b" / "manifest.json"));
  CHECK(fs::exists(dir / "a" / "run_manifest.json"));
  const auto manifest = read_json_file(dir / "a" / "run_manifest.json");
  CHECK(manifest["command"] == "gen-data");
  CHECK(manifest["seeds"]["seed"] == 5);
  CHECK(cli({"gen-data", "--families", "crane", "--out", (dir / "c").string()}).code != 0);
  fs::remove_all(dir);
}

TEST_CASE("export-svg") {
  const fs::path dir = scratch("svg");
  write_text_file(dir / "diagonal.json", serialize_cp(fixture_diagonal()));
  const auto svg = [&](const std::string& name) {
    return cli({"export-svg", "--cp", (dir / "diagonal.json").string(), "--out", (dir / name).string()});
  };
  REQUIRE(svg("a.svg").code == 0);
  REQUIRE(svg("b.svg").code == 0);
  const std::string text = read_text_file(dir / "a.svg");
  CHECK(text == read_text_file(dir / "b.svg"));
  CHECK(count_of(text, "class=\"boundary\"") == 4);
  CHECK(count_of(text, "class=\"valley\"") == 1);
  CHECK(count_of(text, "<line") == 5);
  fs::remove_all(dir);
}

TEST_CASE("pipeline through the command line") {
  const fs::path dir = scratch("pipeline");
  const std::string data = (dir / "data").string();
  REQUIRE(cli({"gen-data", "--families", "diagonal,book", "--count", "5", "--per-step", "3", "--out", data}).code == 0);
  const Run tp = cli({"train-policy", "--data", data, "--out", (dir / "policy.json").string()});
  REQUIRE(tp.code == 0);
  CHECK(tp.out.find("heldout_token_nll") != std::string::npos);
  CHECK(fs::exists(dir / "policy.json.manifest.json"));
  REQUIRE(cli({"train-wm", "--data", data, "--out", (dir / "wm.json").string(), "--epochs", "2"}).code == 0);
  const Run ew = cli({"eval-wm", "--data", data, "--wm", (dir / "wm.json").string()});
  REQUIRE(ew.code == 0);
  CHECK(ew.out.find("violation_auc") != std::string::npos);

  const Corpus corpus = load_corpus(data);
  fs::create_directories(dir / "pred");
  int planned = 0;
  for (const auto& p : corpus.programs) {
    if (!p.test) continue;
    const std::string prog = (fs::path(data) / "programs" / (p.id + ".json")).string();
    const std::string out = (dir / "pred" / (p.id + ".json")).string();
    REQUIRE(cli({"plan", "--cp", prog, "--goal", prog, "--policy", (dir / "policy.json").string(), "--wm",
                 (dir / "wm.json").string(), "--out", out})
                .code == 0);
    ++planned;
  }
  CHECK(planned == 2);
  const Run ev = cli({"evaluate", "--pred", (dir / "pred").string(), "--ref", data, "--out",
                      (dir / "report.json").string()});
  REQUIRE(ev.code == 0);
  const auto report = read_json_file(dir / "report.json");
  CHECK(report.contains("traj_sr"));
  CHECK(report.contains("cat_sr"));

  // One frame per visited state.
  const auto first = fs::directory_iterator(dir / "pred")->path();
  const auto traj = read_json_file(first);
  const std::string frames = (dir / "frames").string();
  const std::string prog = (fs::path(data) / "programs" / first.filename()).string();
  REQUIRE(cli({"export-svg", "--cp", prog, "--trajectory", first.string(), "--out", frames}).code == 0);
  int files = 0;
  for (const auto& e : fs::directory_iterator(frames)) files += e.path().extension() == ".svg";
  CHECK(files == static_cast<int>(traj["steps"].size()) + 1);
  fs::remove_all(dir);
}
