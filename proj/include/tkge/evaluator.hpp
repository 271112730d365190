#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tkge/dataset.hpp"
#include "tkge/model.hpp"

// Link prediction: for every test triple, rank the true head (and tail)
// among all entity substitutions, raw and with known-true competitors
// filtered out, then aggregate MRR, HITS@n and a per-relation breakdown.

namespace tkge {

struct RankResult {
  kg::Triple triple;
  ReplacedPosition position = ReplacedPosition::Head;
  std::size_t raw_rank = 0;       // 1-based
  std::size_t filtered_rank = 0;  // always <= raw_rank
};

struct RankReport {
  double mrr_raw = 0.0;
  double mrr_filtered = 0.0;
  std::map<int, double> hits_filtered;             // cutoff -> fraction
  std::map<kg::RelationId, double> per_relation_mrr_filtered;
  std::size_t num_predictions = 0;
};

// Optimistic competition rank of the target: 1 + the number of unmasked
// non-target entities with a strictly better (smaller) score, so exact
// ties never hurt the target. The mask lists competitor ids to ignore,
// sorted ascending and without the target (throws std::invalid_argument
// otherwise).
std::size_t rank_entity(std::span<const double> scores, kg::EntityId target,
                        std::span<const kg::EntityId> sorted_mask);

// Two predictions per test triple (head and tail replacement). The filter
// mask for a prediction is every entity whose substitution forms a triple
// in the union of splits, minus the target itself. Prediction work may be
// spread over threads; aggregation always runs in test order, so the
// report is identical for any thread count. When out_results is given it
// receives one RankResult per prediction, in that same order.
RankReport evaluate(const EmbeddingModel& model, const kg::Dataset& dataset,
                    std::span<const int> hits_cutoffs,
                    std::size_t num_threads = 1,
                    std::vector<RankResult>* out_results = nullptr);

// {1, 3, 10}
std::span<const int> default_hits_cutoffs();

std::string report_to_json(const RankReport& report,
                           const kg::Vocabulary& vocab);
std::string report_to_text(const RankReport& report,
                           const kg::Vocabulary& vocab);

}  // namespace tkge
