// Command-line front end: train, eval, bench and inspect subcommands on
// top of the C interface in tkge.h. Everything model-related happens in
// the shared library; this file is flag parsing, artifact plumbing and
// report/manifest writing.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <tkge.h>

namespace fs = std::filesystem;

namespace {

// Exit codes, one per failure class.
constexpr int kExitUsage = 2;     // bad flags or flag combinations
constexpr int kExitIo = 3;        // missing, unreadable or unwritable files
constexpr int kExitData = 4;      // malformed or mutually inconsistent inputs
constexpr int kExitInternal = 5;  // invalid library state; should not happen

struct DatasetDeleter {
  void operator()(tkge_dataset* p) const { tkge_dataset_free(p); }
};
struct ModelDeleter {
  void operator()(tkge_model* p) const { tkge_model_free(p); }
};
struct ReportDeleter {
  void operator()(tkge_report* p) const { tkge_report_free(p); }
};
using DatasetPtr = std::unique_ptr<tkge_dataset, DatasetDeleter>;
using ModelPtr = std::unique_ptr<tkge_model, ModelDeleter>;
using ReportPtr = std::unique_ptr<tkge_report, ReportDeleter>;

// Owned C string from the report serializers.
struct StringDeleter {
  void operator()(char* p) const { tkge_string_free(p); }
};
using StringPtr = std::unique_ptr<char, StringDeleter>;

// Library invalid-argument failures mean different things per command:
// under train they point at flag values, under eval at artifacts that do
// not belong together. The caller picks the exit code for that case.
int exit_code(tkge_status status, int invalid_argument_code) {
  switch (status) {
    case TKGE_OK:
      return 0;
    case TKGE_INVALID_ARGUMENT:
      return invalid_argument_code;
    case TKGE_IO_ERROR:
      return kExitIo;
    case TKGE_PARSE_ERROR:
    case TKGE_FORMAT_ERROR:
      return kExitData;
    case TKGE_STATE_ERROR:
    case TKGE_INTERNAL_ERROR:
      return kExitInternal;
  }
  return kExitInternal;
}

int fail(const std::string& action, tkge_status status,
         int invalid_argument_code) {
  std::cerr << "tkge: " << action << ": " << tkge_last_error() << '\n';
  return exit_code(status, invalid_argument_code);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (const char c : bytes) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::optional<std::string> slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::optional<std::string> file_checksum(const fs::path& path) {
  const auto bytes = slurp(path);
  if (!bytes) return std::nullopt;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(*bytes)));
  return std::string(buf);
}

std::string iso8601_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

tkge_model_kind parse_model_kind(const std::string& name) {
  return name == "transe" ? TKGE_MODEL_TRANSE : TKGE_MODEL_TORUSE;
}

tkge_score_kind parse_score_kind(const std::string& name) {
  if (name == "l2") return TKGE_SCORE_L2;
  if (name == "el2") return TKGE_SCORE_EL2;
  if (name == "l2sq") return TKGE_SCORE_L2SQ;
  return TKGE_SCORE_L1;
}

const char* model_kind_name(tkge_model_kind kind) {
  return kind == TKGE_MODEL_TRANSE ? "transe" : "toruse";
}

const char* score_kind_name(tkge_score_kind kind) {
  switch (kind) {
    case TKGE_SCORE_L1:
      return "l1";
    case TKGE_SCORE_L2:
      return "l2";
    case TKGE_SCORE_EL2:
      return "el2";
    case TKGE_SCORE_L2SQ:
      return "l2sq";
  }
  return "l1";
}

bool score_applies_to_model(tkge_model_kind model, tkge_score_kind score) {
  if (model == TKGE_MODEL_TORUSE) return score != TKGE_SCORE_L2SQ;
  return score == TKGE_SCORE_L1 || score == TKGE_SCORE_L2SQ;
}

int load_dataset(const std::string& data_dir, DatasetPtr& out) {
  const fs::path dir(data_dir);
  tkge_dataset* raw = nullptr;
  const tkge_status status = tkge_dataset_load(
      (dir / "train.txt").c_str(), (dir / "valid.txt").c_str(),
      (dir / "test.txt").c_str(), &raw);
  if (status != TKGE_OK) {
    return fail("loading dataset from " + data_dir, status, kExitData);
  }
  out.reset(raw);
  return 0;
}

/* ---------------- train ---------------- */

struct TrainFlags {
  std::string data_dir;
  std::string out_dir = "tkge-run";
  std::string model = "toruse";
  std::string score = "l1";
  std::uint32_t dimension = 10000;
  double margin = 2000.0;
  double learning_rate = 0.0005;
  std::uint32_t epochs = 500;
  std::uint32_t groups = 100;
  std::uint64_t seed = 0;
  bool filter_negatives = false;
  bool verbose = false;
};

struct EpochSink {
  std::ofstream* metrics = nullptr;
  bool verbose = false;
  std::uint32_t total_epochs = 0;
};

void stream_epoch(const tkge_epoch_stats* stats, void* user) {
  auto& sink = *static_cast<EpochSink*>(user);
  *sink.metrics << tkge_epoch_stats_json(stats) << '\n';
  sink.metrics->flush();
  if (sink.verbose) {
    std::fprintf(stderr, "epoch %llu/%u  loss %.6f  violations %llu  %.3fs\n",
                 static_cast<unsigned long long>(stats->epoch) + 1,
                 sink.total_epochs, stats->loss,
                 static_cast<unsigned long long>(stats->violations),
                 stats->seconds);
  }
}

int cmd_train(const TrainFlags& flags) {
  const tkge_model_kind model_kind = parse_model_kind(flags.model);
  const tkge_score_kind score_kind = parse_score_kind(flags.score);
  if (!score_applies_to_model(model_kind, score_kind)) {
    std::cerr << "tkge: --score " << flags.score << " does not apply to --model "
              << flags.model << " (toruse: l1/l2/el2, transe: l1/l2sq)\n";
    return kExitUsage;
  }

  DatasetPtr dataset;
  if (const int rc = load_dataset(flags.data_dir, dataset); rc != 0) return rc;

  tkge_train_config config = tkge_train_config_default();
  config.model_kind = model_kind;
  config.score_kind = score_kind;
  config.dimension = flags.dimension;
  config.margin = flags.margin;
  config.learning_rate = flags.learning_rate;
  config.epochs = flags.epochs;
  config.groups = flags.groups;
  config.seed = flags.seed;
  config.filter_negatives = flags.filter_negatives ? 1 : 0;

  const fs::path out_dir(flags.out_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "tkge: cannot create " << out_dir.string() << ": "
              << ec.message() << '\n';
    return kExitIo;
  }
  std::ofstream metrics(out_dir / "metrics.jsonl");
  if (!metrics) {
    std::cerr << "tkge: cannot write " << (out_dir / "metrics.jsonl").string()
              << '\n';
    return kExitIo;
  }

  EpochSink sink{&metrics, flags.verbose, flags.epochs};
  const auto started = std::chrono::steady_clock::now();
  tkge_model* raw_model = nullptr;
  const tkge_status trained =
      tkge_train(dataset.get(), &config, stream_epoch, &sink, &raw_model);
  if (trained != TKGE_OK) return fail("training", trained, kExitUsage);
  ModelPtr model(raw_model);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();

  const fs::path model_path = out_dir / "model.tkge";
  if (const auto st = tkge_model_save(model.get(), model_path.c_str());
      st != TKGE_OK) {
    return fail("writing " + model_path.string(), st, kExitData);
  }
  const fs::path vocab_path = out_dir / "vocab.json";
  if (const auto st =
          tkge_dataset_write_vocabulary(dataset.get(), vocab_path.c_str());
      st != TKGE_OK) {
    return fail("writing " + vocab_path.string(), st, kExitData);
  }
  metrics.close();

  // The manifest pins everything a rerun needs: resolved configuration,
  // input checksums and the produced artifacts. Rerunning train with the
  // configuration block reproduces model.tkge byte for byte; only the
  // wall-clock fields differ.
  nlohmann::ordered_json manifest;
  manifest["command"] = "train";
  manifest["library_version"] = tkge_version();
  manifest["created_utc"] = iso8601_utc_now();
  manifest["elapsed_seconds"] = elapsed;
  manifest["configuration"] = {
      {"model", flags.model},
      {"score", flags.score},
      {"dimension", flags.dimension},
      {"margin", flags.margin},
      {"learning_rate", flags.learning_rate},
      {"epochs", flags.epochs},
      {"groups", flags.groups},
      {"seed", flags.seed},
      {"filter_negatives", flags.filter_negatives},
  };
  nlohmann::ordered_json checksums;
  for (const char* name : {"train.txt", "valid.txt", "test.txt"}) {
    const auto sum = file_checksum(fs::path(flags.data_dir) / name);
    if (!sum) {
      std::cerr << "tkge: cannot checksum " << name << '\n';
      return kExitIo;
    }
    checksums[name] = *sum;
  }
  manifest["dataset"] = {
      {"directory", flags.data_dir},
      {"entities", tkge_dataset_num_entities(dataset.get())},
      {"relations", tkge_dataset_num_relations(dataset.get())},
      {"train_triples", tkge_dataset_num_train(dataset.get())},
      {"valid_triples", tkge_dataset_num_valid(dataset.get())},
      {"test_triples", tkge_dataset_num_test(dataset.get())},
      {"checksums", checksums},
  };
  const auto model_sum = file_checksum(model_path);
  if (!model_sum) {
    std::cerr << "tkge: cannot checksum " << model_path.string() << '\n';
    return kExitIo;
  }
  manifest["artifacts"] = {
      {"model", "model.tkge"},
      {"model_checksum", *model_sum},
      {"vocabulary", "vocab.json"},
      {"metrics", "metrics.jsonl"},
  };
  std::ofstream manifest_out(out_dir / "manifest.json");
  if (!manifest_out) {
    std::cerr << "tkge: cannot write "
              << (out_dir / "manifest.json").string() << '\n';
    return kExitIo;
  }
  manifest_out << manifest.dump(2) << '\n';

  std::cout << "trained " << flags.model << '/' << flags.score << " dim "
            << flags.dimension << " for " << flags.epochs << " epochs ("
            << tkge_dataset_num_train(dataset.get()) << " triples, "
            << tkge_dataset_num_entities(dataset.get()) << " entities)\n"
            << "wrote model.tkge, vocab.json, metrics.jsonl, manifest.json to "
            << out_dir.string() << '\n';
  return 0;
}

/* ---------------- eval ---------------- */

struct EvalFlags {
  std::string data_dir;
  std::string model_file;
  std::string report_base = "report";
  bool per_relation = false;
  std::size_t threads = 1;
};

int cmd_eval(const EvalFlags& flags) {
  DatasetPtr dataset;
  if (const int rc = load_dataset(flags.data_dir, dataset); rc != 0) return rc;

  tkge_model* raw_model = nullptr;
  if (const auto st = tkge_model_load(flags.model_file.c_str(), &raw_model);
      st != TKGE_OK) {
    return fail("loading " + flags.model_file, st, kExitData);
  }
  ModelPtr model(raw_model);

  tkge_report* raw_report = nullptr;
  if (const auto st = tkge_evaluate(model.get(), dataset.get(), nullptr, 0,
                                    flags.threads, &raw_report);
      st != TKGE_OK) {
    // A size mismatch means the model belongs to a different dataset.
    return fail("evaluating " + flags.model_file, st, kExitData);
  }
  ReportPtr report(raw_report);

  const int breakdown = flags.per_relation ? 1 : 0;
  char* raw_text = nullptr;
  if (const auto st = tkge_report_text(report.get(), dataset.get(), breakdown,
                                       &raw_text);
      st != TKGE_OK) {
    return fail("formatting report", st, kExitInternal);
  }
  StringPtr text(raw_text);
  char* raw_json = nullptr;
  if (const auto st = tkge_report_json(report.get(), dataset.get(), breakdown,
                                       &raw_json);
      st != TKGE_OK) {
    return fail("formatting report", st, kExitInternal);
  }
  StringPtr json(raw_json);

  std::cout << text.get();
  const fs::path json_path = flags.report_base + ".json";
  const fs::path text_path = flags.report_base + ".txt";
  std::ofstream json_out(json_path);
  std::ofstream text_out(text_path);
  if (!json_out || !text_out) {
    std::cerr << "tkge: cannot write " << json_path.string() << " / "
              << text_path.string() << '\n';
    return kExitIo;
  }
  json_out << json.get() << '\n';
  text_out << text.get();
  std::cout << "\nwrote " << json_path.string() << " and "
            << text_path.string() << '\n';
  return 0;
}

/* ---------------- bench ---------------- */

struct BenchFlags {
  std::string data_dir;
  std::vector<std::uint32_t> dims = {128, 1024, 8192};
  std::uint32_t epochs = 3;
  std::uint64_t seed = 0;
  std::string out = "-";
};

struct BenchSink {
  std::string* csv = nullptr;
  const char* model = nullptr;
  const char* score = nullptr;
  std::uint32_t dim = 0;
};

void append_bench_row(const tkge_epoch_stats* stats, void* user) {
  auto& sink = *static_cast<BenchSink*>(user);
  char row[160];
  std::snprintf(row, sizeof row, "%s,%s,%u,%llu,%.6f\n", sink.model,
                sink.score, sink.dim,
                static_cast<unsigned long long>(stats->epoch),
                stats->seconds);
  *sink.csv += row;
}

int cmd_bench(const BenchFlags& flags) {
  DatasetPtr dataset;
  if (const int rc = load_dataset(flags.data_dir, dataset); rc != 0) return rc;

  std::string csv = "model,score_kind,dim,epoch,seconds\n";
  for (const tkge_model_kind model_kind :
       {TKGE_MODEL_TORUSE, TKGE_MODEL_TRANSE}) {
    // L1 on both sides keeps the per-epoch comparison apples to apples.
    const tkge_score_kind score_kind = TKGE_SCORE_L1;
    for (const std::uint32_t dim : flags.dims) {
      tkge_train_config config = tkge_train_config_default();
      config.model_kind = model_kind;
      config.score_kind = score_kind;
      config.dimension = dim;
      // A margin no score can clear keeps every step updating, so each
      // epoch times the full work: sampling, gradients and (for the flat
      // baseline) the per-step renormalization.
      config.margin = 1e6;
      config.learning_rate = 0.001;
      config.epochs = flags.epochs;
      config.groups = static_cast<std::uint32_t>(
          std::min<std::size_t>(100, tkge_dataset_num_train(dataset.get())));
      config.seed = flags.seed;

      BenchSink sink{&csv, model_kind_name(model_kind),
                     score_kind_name(score_kind), dim};
      tkge_model* raw_model = nullptr;
      const auto st = tkge_train(dataset.get(), &config, append_bench_row,
                                 &sink, &raw_model);
      if (st != TKGE_OK) {
        return fail(std::string("timing ") + model_kind_name(model_kind) +
                        " at dim " + std::to_string(dim),
                    st, kExitUsage);
      }
      tkge_model_free(raw_model);
      std::cerr << "timed " << model_kind_name(model_kind) << " dim " << dim
                << '\n';
    }
  }

  if (flags.out == "-") {
    std::cout << csv;
    return 0;
  }
  std::ofstream out(flags.out);
  if (!out) {
    std::cerr << "tkge: cannot write " << flags.out << '\n';
    return kExitIo;
  }
  out << csv;
  std::cout << "wrote " << flags.out << '\n';
  return 0;
}

/* ---------------- inspect ---------------- */

struct InspectFlags {
  std::string model_file;
};

int cmd_inspect(const InspectFlags& flags) {
  tkge_model* raw_model = nullptr;
  if (const auto st = tkge_model_load(flags.model_file.c_str(), &raw_model);
      st != TKGE_OK) {
    return fail("loading " + flags.model_file, st, kExitData);
  }
  ModelPtr model(raw_model);

  const std::size_t dim = tkge_model_dimension(model.get());
  const std::size_t num_entities = tkge_model_num_entities(model.get());
  const std::size_t num_relations = tkge_model_num_relations(model.get());

  const auto scan_rows = [dim](const double* (*row_of)(const tkge_model*,
                                                       size_t),
                               const tkge_model* m, std::size_t count,
                               double& lo, double& hi) {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (std::size_t i = 0; i < count; ++i) {
      const double* row = row_of(m, i);
      for (std::size_t j = 0; j < dim; ++j) {
        lo = std::min(lo, row[j]);
        hi = std::max(hi, row[j]);
      }
    }
  };
  double entity_lo = 0, entity_hi = 0, relation_lo = 0, relation_hi = 0;
  scan_rows(tkge_model_entity_row, model.get(), num_entities, entity_lo,
            entity_hi);
  scan_rows(tkge_model_relation_row, model.get(), num_relations, relation_lo,
            relation_hi);

  const auto line = [](const char* label, const std::string& value) {
    std::printf("%-22s%s\n", label, value.c_str());
  };
  const auto range = [](double lo, double hi) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "[%.6f, %.6f]", lo, hi);
    return std::string(buf);
  };

  line("file", flags.model_file);
  const auto checksum = file_checksum(flags.model_file);
  line("checksum", checksum ? *checksum : "unavailable");
  std::error_code ec;
  const auto size = fs::file_size(flags.model_file, ec);
  line("size", ec ? "unavailable" : std::to_string(size) + " bytes");
  line("model", model_kind_name(tkge_model_get_kind(model.get())));
  line("score", score_kind_name(tkge_model_get_score_kind(model.get())));
  line("dimension", std::to_string(dim));
  line("entities", std::to_string(num_entities));
  line("relations", std::to_string(num_relations));
  line("parameters", std::to_string((num_entities + num_relations) * dim));
  line("entity coords", range(entity_lo, entity_hi));
  line("relation coords", range(relation_lo, relation_hi));

  if (tkge_model_get_kind(model.get()) == TKGE_MODEL_TRANSE) {
    double norm_lo = std::numeric_limits<double>::infinity();
    double norm_hi = -norm_lo;
    for (std::size_t e = 0; e < num_entities; ++e) {
      const double* row = tkge_model_entity_row(model.get(), e);
      double sq = 0.0;
      for (std::size_t j = 0; j < dim; ++j) sq += row[j] * row[j];
      const double norm = std::sqrt(sq);
      norm_lo = std::min(norm_lo, norm);
      norm_hi = std::max(norm_hi, norm);
    }
    line("entity row norms", range(norm_lo, norm_hi));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Knowledge-graph embeddings on the torus, with a flat translation "
      "baseline"};
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", tkge_version());
  app.set_config("--config", "",
                 "TOML-style config file; explicit flags take precedence");
  app.require_subcommand(1);

  TrainFlags train;
  auto* train_cmd =
      app.add_subcommand("train", "Train a model and write its artifacts");
  train_cmd->add_option("--data-dir", train.data_dir,
                        "directory with train.txt/valid.txt/test.txt")
      ->required();
  train_cmd->add_option("--out", train.out_dir,
                        "output directory for model.tkge, vocab.json, "
                        "metrics.jsonl and manifest.json");
  train_cmd->add_option("--model", train.model, "embedding space")
      ->check(CLI::IsMember({"toruse", "transe"}));
  train_cmd
      ->add_option("--score", train.score,
                   "scoring function (toruse: l1/l2/el2, transe: l1/l2sq)")
      ->check(CLI::IsMember({"l1", "l2", "el2", "l2sq"}));
  train_cmd->add_option("--dim", train.dimension, "embedding dimension")
      ->check(CLI::PositiveNumber);
  train_cmd
      ->add_option("--margin", train.margin,
                   "hinge margin (typical sweep: 100 to 2000)")
      ->check(CLI::PositiveNumber);
  train_cmd
      ->add_option("--lr", train.learning_rate,
                   "SGD learning rate (typical sweep: 0.0001 to 0.002)")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--epochs", train.epochs, "training epochs")
      ->check(CLI::PositiveNumber);
  train_cmd
      ->add_option("--groups", train.groups,
                   "triple groups per epoch; updates apply group by group")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", train.seed,
                        "master seed; fixes the run byte for byte");
  train_cmd->add_flag("--filter-negatives", train.filter_negatives,
                      "redraw sampled negatives that collide with a "
                      "training triple");
  train_cmd->add_flag("--verbose", train.verbose,
                      "log every epoch to stderr");

  EvalFlags eval;
  auto* eval_cmd = app.add_subcommand(
      "eval", "Rank the test triples with a trained model");
  eval_cmd->add_option("--data-dir", eval.data_dir,
                       "directory with train.txt/valid.txt/test.txt")
      ->required();
  eval_cmd->add_option("--model-file", eval.model_file, "trained model file")
      ->required();
  eval_cmd->add_option("--report", eval.report_base,
                       "report path base; writes <base>.json and <base>.txt");
  eval_cmd->add_flag("--per-relation", eval.per_relation,
                     "include the per-relation MRR breakdown");
  eval_cmd->add_option("--threads", eval.threads, "ranking worker threads")
      ->check(CLI::PositiveNumber);

  BenchFlags bench;
  auto* bench_cmd = app.add_subcommand(
      "bench", "Time training epochs across embedding dimensions");
  bench_cmd->add_option("--data-dir", bench.data_dir,
                        "directory with train.txt/valid.txt/test.txt")
      ->required();
  bench_cmd->add_option("--dims", bench.dims, "dimensions to time")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--bench-epochs", bench.epochs,
                        "timed epochs per model and dimension")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", bench.seed, "master seed");
  bench_cmd->add_option("--out", bench.out, "CSV path, or - for stdout");

  InspectFlags inspect;
  auto* inspect_cmd =
      app.add_subcommand("inspect", "Print model file metadata");
  inspect_cmd
      ->add_option("--model-file", inspect.model_file, "model file to inspect")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version exit cleanly; everything else is a usage error.
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (*train_cmd) return cmd_train(train);
  if (*eval_cmd) return cmd_eval(eval);
  if (*bench_cmd) return cmd_bench(bench);
  return cmd_inspect(inspect);
}
