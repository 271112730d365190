// End-to-end checks of the command-line contract: exit codes, the artifact
// set `train` leaves behind, and the report files `eval` writes. Every case
// spawns the real binary (path baked in at build time) against a small toy
// graph, so this suite is the executable form of the README's CLI section.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "split_files.hpp"
#include "tkge/toy.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cli_path() {
  if (const char* env = std::getenv("TKGE_CLI")) return env;
  return TKGE_CLI_PATH;
}

fs::path scratch_root() {
  static const fs::path root = [] {
    const fs::path path = fs::temp_directory_path() / "tkge-cli-tests";
    fs::remove_all(path);
    fs::create_directories(path);
    return path;
  }();
  return root;
}

// Toy splits shared by every case; a second, smaller graph provides the
// "wrong dataset" for the mismatch checks.
fs::path data_dir() {
  static const fs::path dir = [] {
    const auto dataset = tkge::kg::make_toy_dataset(20, 7);
    return split_files::write_splits(dataset, scratch_root() / "data");
  }();
  return dir;
}

fs::path other_data_dir() {
  static const fs::path dir = [] {
    const auto dataset = tkge::kg::make_toy_dataset(30, 7);
    return split_files::write_splits(dataset, scratch_root() / "data-other");
  }();
  return dir;
}

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

RunResult run(const std::string& args) {
  const fs::path log = scratch_root() / "run.log";
  const std::string command = "\"" + cli_path() + "\" " + args + " > \"" +
                              log.string() + "\" 2>&1";
  const int status = std::system(command.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream buffer;
  buffer << in.rdbuf();
  result.output = buffer.str();
  return result;
}

// One short training run whose artifacts several cases inspect.
const fs::path& trained_dir() {
  static const fs::path dir = [] {
    const fs::path out = scratch_root() / "trained";
    const auto result =
        run("train --data-dir \"" + data_dir().string() + "\" --out \"" +
            out.string() +
            "\" --model toruse --score l1 --dim 6 --margin 2 --lr 0.05 "
            "--epochs 4 --seed 11");
    REQUIRE(result.exit_code == 0);
    return out;
  }();
  return dir;
}

json parse_file(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  return json::parse(in);
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run("").exit_code == 2);
  CHECK(run("train").exit_code == 2);  // missing --data-dir
  CHECK(run("train --data-dir x --no-such-flag").exit_code == 2);
  CHECK(run("frobnicate").exit_code == 2);
  // Unsupported pairing is a flag-level mistake, not a data problem.
  const auto combo = run("train --data-dir \"" + data_dir().string() +
                         "\" --model toruse --score l2squared --dim 4");
  CHECK(combo.exit_code == 2);
}

TEST_CASE("help and version exit cleanly") {
  const auto help = run("--help");
  CHECK(help.exit_code == 0);
  CHECK(help.output.find("train") != std::string::npos);
  CHECK(help.output.find("bench") != std::string::npos);
  CHECK(run("--version").exit_code == 0);
}

TEST_CASE("missing inputs exit with 3") {
  CHECK(run("train --data-dir /no/such/dir --dim 4 --epochs 1").exit_code ==
        3);
  CHECK(run("eval --data-dir \"" + data_dir().string() +
            "\" --model-file /no/such/model.tkge")
            .exit_code == 3);
  CHECK(run("inspect --model-file /no/such/model.tkge").exit_code == 3);
}

TEST_CASE("unusable data exits with 4") {
  const fs::path garbage = scratch_root() / "garbage.tkge";
  std::ofstream(garbage) << "this is not a model file";
  CHECK(run("eval --data-dir \"" + data_dir().string() + "\" --model-file \"" +
            garbage.string() + "\"")
            .exit_code == 4);
  CHECK(run("inspect --model-file \"" + garbage.string() + "\"").exit_code ==
        4);
  // A real model paired with a dataset of a different shape.
  const auto mismatch =
      run("eval --data-dir \"" + other_data_dir().string() +
          "\" --model-file \"" + (trained_dir() / "model.tkge").string() +
          "\"");
  CHECK(mismatch.exit_code == 4);
  CHECK(mismatch.output.find("do not match") != std::string::npos);
}

TEST_CASE("train leaves the documented artifact set") {
  const fs::path& out = trained_dir();
  CHECK(fs::exists(out / "model.tkge"));
  CHECK(fs::exists(out / "vocab.json"));
  CHECK(fs::exists(out / "metrics.jsonl"));
  CHECK(fs::exists(out / "manifest.json"));

  const json manifest = parse_file(out / "manifest.json");
  CHECK(manifest.at("command") == "train");
  const json& config = manifest.at("configuration");
  CHECK(config.at("model") == "toruse");
  CHECK(config.at("score") == "l1");
  CHECK(config.at("dimension") == 6);
  CHECK(config.at("epochs") == 4);
  CHECK(config.at("seed") == 11);
  CHECK(manifest.at("dataset").at("entities") == 20);
  CHECK(manifest.at("dataset").at("checksums").contains("train.txt"));
  CHECK(manifest.at("artifacts").at("model") == "model.tkge");
  CHECK(manifest.at("artifacts").at("model_checksum").get<std::string>()
            .size() == 16);

  // One JSON object per epoch on the metrics stream.
  std::ifstream metrics(out / "metrics.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(metrics, line)) {
    const json stats = json::parse(line);
    CHECK(stats.at("epoch") == lines);
    CHECK(stats.at("loss").get<double>() >= 0.0);
    CHECK(stats.contains("violations"));
    CHECK(stats.contains("seconds"));
    ++lines;
  }
  CHECK(lines == 4);
}

TEST_CASE("eval writes both report files") {
  const fs::path base = scratch_root() / "report";
  const auto result =
      run("eval --data-dir \"" + data_dir().string() + "\" --model-file \"" +
          (trained_dir() / "model.tkge").string() + "\" --report \"" +
          base.string() + "\"");
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("MRR (filtered)") != std::string::npos);

  const json report = parse_file(base.string() + ".json");
  CHECK(report.at("num_predictions") == 2 * 28);  // toy(20) has 28 test triples
  CHECK(report.at("mrr_raw").get<double>() > 0.0);
  CHECK(report.at("hits_filtered").contains("10"));
  CHECK(!report.contains("per_relation_mrr_filtered"));

  std::ifstream text(base.string() + ".txt");
  std::stringstream buffer;
  buffer << text.rdbuf();
  CHECK(buffer.str().find("predictions") != std::string::npos);
}

TEST_CASE("eval --per-relation adds the breakdown") {
  const fs::path base = scratch_root() / "report-rel";
  const auto result =
      run("eval --data-dir \"" + data_dir().string() + "\" --model-file \"" +
          (trained_dir() / "model.tkge").string() + "\" --report \"" +
          base.string() + "\" --per-relation");
  CHECK(result.exit_code == 0);
  const json report = parse_file(base.string() + ".json");
  CHECK(report.contains("per_relation_mrr_filtered"));
}

TEST_CASE("inspect summarizes the model") {
  const auto result = run("inspect --model-file \"" +
                          (trained_dir() / "model.tkge").string() + "\"");
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("toruse") != std::string::npos);
  CHECK(result.output.find("dimension") != std::string::npos);
  CHECK(result.output.find("entities") != std::string::npos);
}

TEST_CASE("bench emits one CSV row per model, dimension and epoch") {
  const fs::path csv_path = scratch_root() / "bench.csv";
  const auto result = run("bench --data-dir \"" + data_dir().string() +
                          "\" --dims 4,8 --bench-epochs 2 --seed 3 --out \"" +
                          csv_path.string() + "\"");
  CHECK(result.exit_code == 0);
  std::ifstream csv(csv_path);
  std::string line;
  REQUIRE(std::getline(csv, line));
  CHECK(line == "model,score_kind,dim,epoch,seconds");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 2 * 2 * 2);  // two models x two dims x two epochs
}
