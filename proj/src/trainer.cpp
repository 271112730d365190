#include "tkge/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "tkge/torus.hpp"

namespace tkge {

namespace {

// Sub-seed tags for the independent random streams of one run.
constexpr std::uint64_t kTagInit = 1;
constexpr std::uint64_t kTagShuffle = 2;
constexpr std::uint64_t kTagNegative = 3;

constexpr int kMaxFilterAttempts = 100;

// d(score)/d(difference_i) for the flat translation scores.
double flat_gradient(ScoreKind kind, double d) {
  if (kind == ScoreKind::L1) {
    if (d > 0.0) return 1.0;
    if (d < 0.0) return -1.0;
    return 0.0;
  }
  return 2.0 * d;  // squared L2
}

}  // namespace

void TrainConfig::validate(std::size_t num_train_triples) const {
  if (margin <= 0.0) {
    throw std::invalid_argument("margin must be positive");
  }
  if (learning_rate <= 0.0) {
    throw std::invalid_argument("learning rate must be positive");
  }
  if (dimension == 0) {
    throw std::invalid_argument("dimension must be at least 1");
  }
  if (epochs == 0) {
    throw std::invalid_argument("epochs must be at least 1");
  }
  if (groups_per_epoch == 0) {
    throw std::invalid_argument("groups per epoch must be at least 1");
  }
  if (groups_per_epoch > num_train_triples) {
    throw std::invalid_argument(
        "more groups than training triples (" +
        std::to_string(groups_per_epoch) + " > " +
        std::to_string(num_train_triples) + ")");
  }
  if (!score_kind_valid_for(model_kind, score_kind)) {
    throw std::invalid_argument(std::string("score kind ") +
                                to_string(score_kind) + " not valid for " +
                                to_string(model_kind));
  }
}

std::string epoch_stats_json_line(const EpochStats& stats) {
  nlohmann::json doc;
  doc["epoch"] = stats.epoch;
  doc["loss"] = stats.loss;
  doc["violations"] = stats.violations;
  doc["seconds"] = stats.seconds;
  return doc.dump();
}

double hinge_loss(const EmbeddingModel& model, const kg::Triple& pos,
                  const kg::Triple& neg, double margin) {
  return std::max(0.0,
                  margin + model.score_triple(pos) - model.score_triple(neg));
}

double sgd_step(EmbeddingModel& model, const kg::Triple& pos,
                const kg::Triple& neg, double margin, double learning_rate) {
  const std::size_t n = model.dimension();
  const bool on_torus = model.model_kind() == ModelKind::TorusE;

  // Difference vectors from the pre-update tables: wrapped for the torus,
  // raw for the flat baseline.
  const auto difference = [&](const kg::Triple& triple,
                              std::vector<double>& out) {
    const auto h = model.entity(triple.head);
    const auto r = model.relation(triple.relation);
    const auto t = model.entity(triple.tail);
    if (on_torus) {
      torus::triple_delta(h, r, t, out);
    } else {
      for (std::size_t i = 0; i < n; ++i) out[i] = h[i] + r[i] - t[i];
    }
  };
  const auto score_of = [&](std::span<const double> diff) {
    if (on_torus) {
      return torus::score_from_delta(
          static_cast<torus::ScoreKind>(model.score_kind()), diff);
    }
    double acc = 0.0;
    if (model.score_kind() == ScoreKind::L1) {
      for (const double d : diff) acc += std::abs(d);
    } else {
      for (const double d : diff) acc += d * d;
    }
    return acc;
  };

  std::vector<double> diff_pos(n), diff_neg(n);
  difference(pos, diff_pos);
  difference(neg, diff_neg);
  const double hinge = margin + score_of(diff_pos) - score_of(diff_neg);
  if (hinge <= 0.0) return 0.0;

  std::vector<double> grad_pos(n), grad_neg(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (on_torus) {
      const auto kind = static_cast<torus::ScoreKind>(model.score_kind());
      grad_pos[i] = torus::delta_gradient(kind, diff_pos[i]);
      grad_neg[i] = torus::delta_gradient(kind, diff_neg[i]);
    } else {
      grad_pos[i] = flat_gradient(model.score_kind(), diff_pos[i]);
      grad_neg[i] = flat_gradient(model.score_kind(), diff_neg[i]);
    }
  }

  // d(hinge)/d(row), with coinciding rows accumulated before any write so
  // every contribution sees the pre-update tables. Signs: the difference
  // enters head and relation rows positively, the tail row negatively;
  // the negative triple's score enters the hinge with a minus.
  struct RowGrad {
    kg::EntityId id;
    double sign;
    const std::vector<double>* grad;
  };
  const RowGrad entity_parts[4] = {
      {pos.head, +1.0, &grad_pos},
      {pos.tail, -1.0, &grad_pos},
      {neg.head, -1.0, &grad_neg},
      {neg.tail, +1.0, &grad_neg},
  };
  kg::EntityId seen[4];
  std::size_t num_seen = 0;
  std::vector<double> accum(n);
  for (std::size_t p = 0; p < 4; ++p) {
    const kg::EntityId id = entity_parts[p].id;
    if (std::find(seen, seen + num_seen, id) != seen + num_seen) continue;
    seen[num_seen++] = id;
    std::fill(accum.begin(), accum.end(), 0.0);
    for (std::size_t q = p; q < 4; ++q) {
      if (entity_parts[q].id != id) continue;
      const auto& g = *entity_parts[q].grad;
      for (std::size_t i = 0; i < n; ++i) {
        accum[i] += entity_parts[q].sign * g[i];
      }
    }
    auto row = model.entity_mut(id);
    for (std::size_t i = 0; i < n; ++i) {
      row[i] -= learning_rate * accum[i];
      if (on_torus) row[i] = torus::frac(row[i]);
    }
  }

  auto rel = model.relation_mut(pos.relation);
  for (std::size_t i = 0; i < n; ++i) {
    rel[i] -= learning_rate * (grad_pos[i] - grad_neg[i]);
    if (on_torus) rel[i] = torus::frac(rel[i]);
  }

  if (!on_torus) model.normalize_entities();
  return hinge;
}

std::vector<std::size_t> group_bounds(std::size_t count, std::size_t groups) {
  if (groups == 0 || groups > count) {
    throw std::invalid_argument("group count must be in [1, item count]");
  }
  const std::size_t base = count / groups;
  const std::size_t extra = count % groups;
  std::vector<std::size_t> bounds(groups + 1, 0);
  for (std::size_t g = 0; g < groups; ++g) {
    bounds[g + 1] = bounds[g] + base + (g < extra ? 1 : 0);
  }
  return bounds;
}

kg::Triple draw_negative(const kg::Dataset& dataset,
                         const kg::Triple& positive, const kg::BernStats& stats,
                         bool filter, Rng& rng) {
  kg::Triple neg =
      kg::sample_negative(positive, stats, dataset.num_entities(), rng);
  if (!filter) return neg;
  for (int attempt = 0;
       attempt < kMaxFilterAttempts && dataset.contains_train(neg); ++attempt) {
    neg = kg::sample_negative(positive, stats, dataset.num_entities(), rng);
  }
  return neg;
}

std::pair<EmbeddingModel, std::vector<EpochStats>> train(
    const kg::Dataset& dataset, const TrainConfig& config,
    const EpochCallback& on_epoch) {
  config.validate(dataset.train().size());

  Rng init_rng(derive_seed(config.seed, kTagInit));
  EmbeddingModel model = EmbeddingModel::init(
      config.model_kind, dataset.num_entities(), dataset.num_relations(),
      config.dimension, config.score_kind, init_rng);

  const kg::BernStats stats = kg::bern_stats(dataset);
  const std::vector<std::size_t> bounds =
      group_bounds(dataset.train().size(), config.groups_per_epoch);

  std::vector<EpochStats> history;
  history.reserve(config.epochs);
  std::vector<std::size_t> order(dataset.train().size());

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();

    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_seed(config.seed, kTagShuffle, epoch));
    shuffle_rng.shuffle(order);
    Rng negative_rng(derive_seed(config.seed, kTagNegative, epoch));

    EpochStats stats_row;
    stats_row.epoch = epoch;
    for (std::size_t g = 0; g < config.groups_per_epoch; ++g) {
      for (std::size_t slot = bounds[g]; slot < bounds[g + 1]; ++slot) {
        const kg::Triple& pos = dataset.train()[order[slot]];
        const kg::Triple neg = draw_negative(
            dataset, pos, stats, config.filter_negatives, negative_rng);
        const double hinge = sgd_step(model, pos, neg, config.margin,
                                      config.learning_rate);
        if (hinge > 0.0) {
          stats_row.loss += hinge;
          ++stats_row.violations;
        }
      }
    }

    stats_row.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      started)
            .count();
    history.push_back(stats_row);
    if (on_epoch) on_epoch(stats_row);
  }
  return {std::move(model), std::move(history)};
}

}  // namespace tkge
