#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "tkge/dataset.hpp"
#include "tkge/model.hpp"

// Margin-loss SGD: per epoch, shuffle the training triples, walk them in
// contiguous groups, pair each with one bern-sampled negative and apply a
// single gradient step. Fully deterministic for a fixed seed.

namespace tkge {

struct TrainConfig {
  ModelKind model_kind = ModelKind::TorusE;
  ScoreKind score_kind = ScoreKind::L1;
  std::size_t dimension = 50;
  double margin = 2.0;
  double learning_rate = 0.01;
  std::size_t epochs = 100;
  std::size_t groups_per_epoch = 100;
  std::uint64_t seed = 0;
  // When set, negatives that collide with a training triple are redrawn
  // (best effort, bounded retries). Off by default: the sampled set of
  // corruptions excludes only the original triple.
  bool filter_negatives = false;

  // Throws std::invalid_argument on nonsense (non-positive margin or
  // learning rate, zero epochs/groups/dimension, more groups than
  // training triples, score kind unsupported by the model kind).
  void validate(std::size_t num_train_triples) const;
};

struct EpochStats {
  std::size_t epoch = 0;      // 0-based
  double loss = 0.0;          // sum of hinge terms over the epoch
  std::size_t violations = 0; // steps with a positive hinge
  double seconds = 0.0;       // wall clock for the epoch
};

// One EpochStats as a single-line JSON object (epoch, loss, violations,
// seconds) for the metrics stream.
std::string epoch_stats_json_line(const EpochStats& stats);

// max(0, margin + f(pos) - f(neg)).
double hinge_loss(const EmbeddingModel& model, const kg::Triple& pos,
                  const kg::Triple& neg, double margin);

// One SGD step on the hinge term. Gradients for every involved row are
// taken from the pre-update tables and accumulated when rows coincide
// (the relation always; entities whenever positive and negative share
// one). Torus rows are re-canonicalized after the update; the translation
// baseline renormalizes its entity table after every updating step.
// Returns the pre-update hinge (0 means the tables were not touched).
double sgd_step(EmbeddingModel& model, const kg::Triple& pos,
                const kg::Triple& neg, double margin, double learning_rate);

// Group partition: offsets of `groups` contiguous slices of [0, count),
// sizes differing by at most one; result has groups + 1 entries.
std::vector<std::size_t> group_bounds(std::size_t count, std::size_t groups);

// One bern negative for the positive, optionally redrawn (up to a small
// bound) while it collides with a training triple.
kg::Triple draw_negative(const kg::Dataset& dataset, const kg::Triple& positive,
                         const kg::BernStats& stats, bool filter, Rng& rng);

using EpochCallback = std::function<void(const EpochStats&)>;

// Full training run: init from the config seed, then epochs of
// shuffle/group/step. The callback, when set, fires once per finished
// epoch in order.
std::pair<EmbeddingModel, std::vector<EpochStats>> train(
    const kg::Dataset& dataset, const TrainConfig& config,
    const EpochCallback& on_epoch = {});

}  // namespace tkge
