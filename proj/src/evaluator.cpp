#include "tkge/evaluator.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "tkge/error.hpp"

namespace tkge {

std::size_t rank_entity(std::span<const double> scores, kg::EntityId target,
                        std::span<const kg::EntityId> sorted_mask) {
  if (target < 0 || static_cast<std::size_t>(target) >= scores.size()) {
    throw std::invalid_argument("rank target outside the score vector");
  }
  if (!std::is_sorted(sorted_mask.begin(), sorted_mask.end())) {
    throw std::invalid_argument("rank mask must be sorted ascending");
  }
  if (std::binary_search(sorted_mask.begin(), sorted_mask.end(), target)) {
    throw std::invalid_argument("rank target must not be masked");
  }
  const double target_score = scores[static_cast<std::size_t>(target)];
  std::size_t better = 0;
  for (std::size_t e = 0; e < scores.size(); ++e) {
    if (static_cast<kg::EntityId>(e) == target) continue;
    if (scores[e] >= target_score) continue;
    if (std::binary_search(sorted_mask.begin(), sorted_mask.end(),
                           static_cast<kg::EntityId>(e))) {
      continue;
    }
    ++better;
  }
  return better + 1;
}

std::span<const int> default_hits_cutoffs() {
  static const int cutoffs[3] = {1, 3, 10};
  return cutoffs;
}

namespace {

RankResult rank_prediction(const EmbeddingModel& model,
                           const kg::Dataset& dataset, const kg::Triple& triple,
                           ReplacedPosition position,
                           std::vector<double>& scores,
                           std::vector<kg::EntityId>& mask) {
  model.score_all_replacements(triple, position, scores);
  const kg::EntityId target =
      position == ReplacedPosition::Head ? triple.head : triple.tail;
  const std::span<const kg::EntityId> known =
      position == ReplacedPosition::Head
          ? dataset.heads_for(triple.relation, triple.tail)
          : dataset.tails_for(triple.head, triple.relation);
  mask.clear();
  for (const kg::EntityId e : known) {
    if (e != target) mask.push_back(e);
  }
  RankResult result;
  result.triple = triple;
  result.position = position;
  result.raw_rank = rank_entity(scores, target, {});
  result.filtered_rank = rank_entity(scores, target, mask);
  return result;
}

}  // namespace

RankReport evaluate(const EmbeddingModel& model, const kg::Dataset& dataset,
                    std::span<const int> hits_cutoffs, std::size_t num_threads,
                    std::vector<RankResult>* out_results) {
  if (model.num_entities() != dataset.num_entities() ||
      model.num_relations() != dataset.num_relations()) {
    throw std::invalid_argument(
        "model tables do not match the dataset vocabulary");
  }
  if (dataset.test().empty()) {
    throw StateError("no test triples to evaluate");
  }
  for (const int cutoff : hits_cutoffs) {
    if (cutoff < 1) {
      throw std::invalid_argument("hits cutoffs must be at least 1");
    }
  }

  const std::size_t num_predictions = 2 * dataset.test().size();
  std::vector<RankResult> results(num_predictions);

  const auto worker = [&](std::size_t begin, std::size_t end) {
    std::vector<double> scores(model.num_entities());
    std::vector<kg::EntityId> mask;
    for (std::size_t p = begin; p < end; ++p) {
      const kg::Triple& triple = dataset.test()[p / 2];
      const ReplacedPosition position =
          p % 2 == 0 ? ReplacedPosition::Head : ReplacedPosition::Tail;
      results[p] = rank_prediction(model, dataset, triple, position, scores,
                                   mask);
    }
  };

  const std::size_t threads =
      std::clamp<std::size_t>(num_threads, 1, num_predictions);
  if (threads == 1) {
    worker(0, num_predictions);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t k = 0; k < threads; ++k) {
      const std::size_t begin = num_predictions * k / threads;
      const std::size_t end = num_predictions * (k + 1) / threads;
      pool.emplace_back(worker, begin, end);
    }
    for (std::thread& t : pool) t.join();
  }

  // Deterministic aggregation: one pass in prediction order.
  RankReport report;
  report.num_predictions = num_predictions;
  std::map<int, std::size_t> hit_counts;
  for (const int cutoff : hits_cutoffs) hit_counts[cutoff] = 0;
  std::map<kg::RelationId, std::pair<double, std::size_t>> relation_sums;
  for (const RankResult& r : results) {
    report.mrr_raw += 1.0 / static_cast<double>(r.raw_rank);
    report.mrr_filtered += 1.0 / static_cast<double>(r.filtered_rank);
    for (auto& [cutoff, count] : hit_counts) {
      if (r.filtered_rank <= static_cast<std::size_t>(cutoff)) ++count;
    }
    auto& [sum, count] = relation_sums[r.triple.relation];
    sum += 1.0 / static_cast<double>(r.filtered_rank);
    ++count;
  }
  const auto denom = static_cast<double>(num_predictions);
  report.mrr_raw /= denom;
  report.mrr_filtered /= denom;
  for (const auto& [cutoff, count] : hit_counts) {
    report.hits_filtered[cutoff] =
        static_cast<double>(count) / denom;
  }
  for (const auto& [relation, entry] : relation_sums) {
    report.per_relation_mrr_filtered[relation] =
        entry.first / static_cast<double>(entry.second);
  }
  if (out_results != nullptr) *out_results = std::move(results);
  return report;
}

std::string report_to_json(const RankReport& report,
                           const kg::Vocabulary& vocab) {
  nlohmann::ordered_json doc;
  doc["num_predictions"] = report.num_predictions;
  doc["mrr_raw"] = report.mrr_raw;
  doc["mrr_filtered"] = report.mrr_filtered;
  nlohmann::ordered_json hits;
  for (const auto& [cutoff, value] : report.hits_filtered) {
    hits[std::to_string(cutoff)] = value;
  }
  doc["hits_filtered"] = std::move(hits);
  // An empty breakdown means it was suppressed; leave the key out.
  if (!report.per_relation_mrr_filtered.empty()) {
    nlohmann::ordered_json per_relation;
    for (const auto& [relation, value] : report.per_relation_mrr_filtered) {
      per_relation[vocab.relation_name(relation)] = value;
    }
    doc["per_relation_mrr_filtered"] = std::move(per_relation);
  }
  return doc.dump(2);
}

std::string report_to_text(const RankReport& report,
                           const kg::Vocabulary& vocab) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(6);
  const auto line = [&](const std::string& label, double value) {
    out << std::left << std::setw(24) << label << std::right << std::setw(10)
        << value << '\n';
  };
  out << std::left << std::setw(24) << "predictions" << std::right
      << std::setw(10) << report.num_predictions << '\n';
  line("MRR (raw)", report.mrr_raw);
  line("MRR (filtered)", report.mrr_filtered);
  for (const auto& [cutoff, value] : report.hits_filtered) {
    line("HITS@" + std::to_string(cutoff) + " (filtered)", value);
  }
  if (!report.per_relation_mrr_filtered.empty()) {
    out << "\nfiltered MRR by relation\n";
    for (const auto& [relation, value] : report.per_relation_mrr_filtered) {
      line("  " + vocab.relation_name(relation), value);
    }
  }
  return out.str();
}

}  // namespace tkge
