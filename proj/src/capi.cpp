#include "tkge.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tkge/dataset.hpp"
#include "tkge/error.hpp"
#include "tkge/evaluator.hpp"
#include "tkge/model.hpp"
#include "tkge/trainer.hpp"

// C face of the library: thin translation between handles/status codes
// and the C++ types. No logic of its own beyond argument checking and
// exception-to-status mapping.

struct tkge_dataset {
  tkge::kg::Dataset impl;
};

struct tkge_model {
  tkge::EmbeddingModel impl;
};

struct tkge_report {
  tkge::RankReport impl;
};

namespace {

thread_local std::string g_last_error;

void set_error(std::string message) { g_last_error = std::move(message); }

// Runs `body`, translating exceptions into status codes and recording
// the message. `body` returns the status for the non-throwing path.
template <typename Fn>
tkge_status guarded(Fn&& body) noexcept {
  try {
    return body();
  } catch (const tkge::IoError& e) {
    set_error(e.what());
    return TKGE_IO_ERROR;
  } catch (const tkge::ParseError& e) {
    set_error(e.what());
    return TKGE_PARSE_ERROR;
  } catch (const tkge::FormatError& e) {
    set_error(e.what());
    return TKGE_FORMAT_ERROR;
  } catch (const tkge::StateError& e) {
    set_error(e.what());
    return TKGE_STATE_ERROR;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return TKGE_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    set_error(e.what());
    return TKGE_INTERNAL_ERROR;
  } catch (...) {
    set_error("unknown failure");
    return TKGE_INTERNAL_ERROR;
  }
}

tkge_status null_argument(const char* name) {
  set_error(std::string(name) + " must not be null");
  return TKGE_INVALID_ARGUMENT;
}

char* copy_to_c_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* tkge_version(void) { return "0.1.0"; }

const char* tkge_last_error(void) { return g_last_error.c_str(); }

/* -------- datasets -------- */

tkge_status tkge_dataset_load(const char* train_path, const char* valid_path,
                              const char* test_path, tkge_dataset** out) {
  if (train_path == nullptr) return null_argument("train_path");
  if (valid_path == nullptr) return null_argument("valid_path");
  if (test_path == nullptr) return null_argument("test_path");
  if (out == nullptr) return null_argument("out");
  return guarded([&] {
    *out = new tkge_dataset{
        tkge::kg::load_dataset(train_path, valid_path, test_path)};
    return TKGE_OK;
  });
}

void tkge_dataset_free(tkge_dataset* dataset) { delete dataset; }

size_t tkge_dataset_num_entities(const tkge_dataset* dataset) {
  return dataset == nullptr ? 0 : dataset->impl.num_entities();
}

size_t tkge_dataset_num_relations(const tkge_dataset* dataset) {
  return dataset == nullptr ? 0 : dataset->impl.num_relations();
}

size_t tkge_dataset_num_train(const tkge_dataset* dataset) {
  return dataset == nullptr ? 0 : dataset->impl.train().size();
}

size_t tkge_dataset_num_valid(const tkge_dataset* dataset) {
  return dataset == nullptr ? 0 : dataset->impl.valid().size();
}

size_t tkge_dataset_num_test(const tkge_dataset* dataset) {
  return dataset == nullptr ? 0 : dataset->impl.test().size();
}

tkge_status tkge_dataset_write_vocabulary(const tkge_dataset* dataset,
                                          const char* path) {
  if (dataset == nullptr) return null_argument("dataset");
  if (path == nullptr) return null_argument("path");
  return guarded([&] {
    tkge::save_vocabulary_json(dataset->impl.vocabulary(), path);
    return TKGE_OK;
  });
}

/* -------- training -------- */

tkge_train_config tkge_train_config_default(void) {
  const tkge::TrainConfig defaults;
  tkge_train_config config;
  config.model_kind = static_cast<tkge_model_kind>(defaults.model_kind);
  config.score_kind = static_cast<tkge_score_kind>(defaults.score_kind);
  config.dimension = static_cast<uint32_t>(defaults.dimension);
  config.margin = defaults.margin;
  config.learning_rate = defaults.learning_rate;
  config.epochs = static_cast<uint32_t>(defaults.epochs);
  config.groups = static_cast<uint32_t>(defaults.groups_per_epoch);
  config.seed = defaults.seed;
  config.filter_negatives = defaults.filter_negatives ? 1 : 0;
  return config;
}

tkge_status tkge_train(const tkge_dataset* dataset,
                       const tkge_train_config* config,
                       tkge_epoch_callback callback, void* user,
                       tkge_model** out) {
  if (dataset == nullptr) return null_argument("dataset");
  if (config == nullptr) return null_argument("config");
  if (out == nullptr) return null_argument("out");
  return guarded([&] {
    if (config->model_kind != TKGE_MODEL_TORUSE &&
        config->model_kind != TKGE_MODEL_TRANSE) {
      throw std::invalid_argument("unknown model kind");
    }
    if (config->score_kind < TKGE_SCORE_L1 ||
        config->score_kind > TKGE_SCORE_L2SQ) {
      throw std::invalid_argument("unknown score kind");
    }
    tkge::TrainConfig cxx;
    cxx.model_kind = static_cast<tkge::ModelKind>(config->model_kind);
    cxx.score_kind = static_cast<tkge::ScoreKind>(config->score_kind);
    cxx.dimension = config->dimension;
    cxx.margin = config->margin;
    cxx.learning_rate = config->learning_rate;
    cxx.epochs = config->epochs;
    cxx.groups_per_epoch = config->groups;
    cxx.seed = config->seed;
    cxx.filter_negatives = config->filter_negatives != 0;

    tkge::EpochCallback on_epoch;
    if (callback != nullptr) {
      on_epoch = [callback, user](const tkge::EpochStats& stats) {
        const tkge_epoch_stats c_stats{stats.epoch, stats.loss,
                                       stats.violations, stats.seconds};
        callback(&c_stats, user);
      };
    }
    auto [model, stats] = tkge::train(dataset->impl, cxx, on_epoch);
    (void)stats;  // streamed through the callback
    *out = new tkge_model{std::move(model)};
    return TKGE_OK;
  });
}

const char* tkge_epoch_stats_json(const tkge_epoch_stats* stats) {
  thread_local std::string line;
  if (stats == nullptr) {
    set_error("stats must not be null");
    return "";
  }
  tkge::EpochStats cxx;
  cxx.epoch = stats->epoch;
  cxx.loss = stats->loss;
  cxx.violations = stats->violations;
  cxx.seconds = stats->seconds;
  line = tkge::epoch_stats_json_line(cxx);
  return line.c_str();
}

/* -------- models -------- */

tkge_status tkge_model_save(const tkge_model* model, const char* path) {
  if (model == nullptr) return null_argument("model");
  if (path == nullptr) return null_argument("path");
  return guarded([&] {
    model->impl.save(path);
    return TKGE_OK;
  });
}

tkge_status tkge_model_load(const char* path, tkge_model** out) {
  if (path == nullptr) return null_argument("path");
  if (out == nullptr) return null_argument("out");
  return guarded([&] {
    *out = new tkge_model{tkge::EmbeddingModel::load(path)};
    return TKGE_OK;
  });
}

void tkge_model_free(tkge_model* model) { delete model; }

tkge_model_kind tkge_model_get_kind(const tkge_model* model) {
  return model == nullptr
             ? TKGE_MODEL_TORUSE
             : static_cast<tkge_model_kind>(model->impl.model_kind());
}

tkge_score_kind tkge_model_get_score_kind(const tkge_model* model) {
  return model == nullptr
             ? TKGE_SCORE_L1
             : static_cast<tkge_score_kind>(model->impl.score_kind());
}

size_t tkge_model_dimension(const tkge_model* model) {
  return model == nullptr ? 0 : model->impl.dimension();
}

size_t tkge_model_num_entities(const tkge_model* model) {
  return model == nullptr ? 0 : model->impl.num_entities();
}

size_t tkge_model_num_relations(const tkge_model* model) {
  return model == nullptr ? 0 : model->impl.num_relations();
}

const double* tkge_model_entity_row(const tkge_model* model, size_t id) {
  if (model == nullptr || id >= model->impl.num_entities()) return nullptr;
  return model->impl.entity(static_cast<tkge::kg::EntityId>(id)).data();
}

const double* tkge_model_relation_row(const tkge_model* model, size_t id) {
  if (model == nullptr || id >= model->impl.num_relations()) return nullptr;
  return model->impl.relation(static_cast<tkge::kg::RelationId>(id)).data();
}

/* -------- evaluation -------- */

tkge_status tkge_evaluate(const tkge_model* model, const tkge_dataset* dataset,
                          const int* hits_cutoffs, size_t num_cutoffs,
                          size_t num_threads, tkge_report** out) {
  if (model == nullptr) return null_argument("model");
  if (dataset == nullptr) return null_argument("dataset");
  if (out == nullptr) return null_argument("out");
  if (hits_cutoffs == nullptr && num_cutoffs != 0) {
    return null_argument("hits_cutoffs");
  }
  return guarded([&] {
    const std::span<const int> cutoffs =
        num_cutoffs == 0 ? tkge::default_hits_cutoffs()
                         : std::span<const int>(hits_cutoffs, num_cutoffs);
    *out = new tkge_report{tkge::evaluate(model->impl, dataset->impl, cutoffs,
                                          num_threads == 0 ? 1 : num_threads)};
    return TKGE_OK;
  });
}

void tkge_report_free(tkge_report* report) { delete report; }

double tkge_report_mrr_raw(const tkge_report* report) {
  return report == nullptr ? 0.0 : report->impl.mrr_raw;
}

double tkge_report_mrr_filtered(const tkge_report* report) {
  return report == nullptr ? 0.0 : report->impl.mrr_filtered;
}

size_t tkge_report_num_predictions(const tkge_report* report) {
  return report == nullptr ? 0 : report->impl.num_predictions;
}

tkge_status tkge_report_hits(const tkge_report* report, int cutoff,
                             double* out) {
  if (report == nullptr) return null_argument("report");
  if (out == nullptr) return null_argument("out");
  const auto it = report->impl.hits_filtered.find(cutoff);
  if (it == report->impl.hits_filtered.end()) {
    set_error("HITS@" + std::to_string(cutoff) +
              " was not requested at evaluation time");
    return TKGE_INVALID_ARGUMENT;
  }
  *out = it->second;
  return TKGE_OK;
}

namespace {

tkge_status serialize_report(const tkge_report* report,
                             const tkge_dataset* dataset,
                             int include_per_relation, char** out,
                             std::string (*serialize)(
                                 const tkge::RankReport&,
                                 const tkge::kg::Vocabulary&)) {
  if (report == nullptr) return null_argument("report");
  if (dataset == nullptr) return null_argument("dataset");
  if (out == nullptr) return null_argument("out");
  return guarded([&] {
    tkge::RankReport copy = report->impl;
    if (include_per_relation == 0) copy.per_relation_mrr_filtered.clear();
    *out = copy_to_c_string(serialize(copy, dataset->impl.vocabulary()));
    return TKGE_OK;
  });
}

}  // namespace

tkge_status tkge_report_json(const tkge_report* report,
                             const tkge_dataset* dataset,
                             int include_per_relation, char** out) {
  return serialize_report(report, dataset, include_per_relation, out,
                          tkge::report_to_json);
}

tkge_status tkge_report_text(const tkge_report* report,
                             const tkge_dataset* dataset,
                             int include_per_relation, char** out) {
  return serialize_report(report, dataset, include_per_relation, out,
                          tkge::report_to_text);
}

void tkge_string_free(char* text) { std::free(text); }

}  // extern "C"
