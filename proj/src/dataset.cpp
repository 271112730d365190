#include "tkge/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "tkge/error.hpp"

namespace tkge::kg {

namespace {

// Id-packing widths for the 64-bit membership keys.
constexpr int kEntityBits = 24;
constexpr int kRelationBits = 16;
constexpr std::size_t kMaxEntities = std::size_t{1} << kEntityBits;
constexpr std::size_t kMaxRelations = std::size_t{1} << kRelationBits;

std::uint64_t pack_hr(EntityId head, RelationId relation) {
  return (static_cast<std::uint64_t>(head) << kRelationBits) |
         static_cast<std::uint64_t>(relation);
}

std::uint64_t pack_rt(RelationId relation, EntityId tail) {
  return (static_cast<std::uint64_t>(relation) << kEntityBits) |
         static_cast<std::uint64_t>(tail);
}

}  // namespace

EntityId Vocabulary::intern_entity(std::string_view name) {
  const auto it = entity_ids_.find(std::string(name));
  if (it != entity_ids_.end()) return it->second;
  const auto id = static_cast<EntityId>(entity_names_.size());
  entity_names_.emplace_back(name);
  entity_ids_.emplace(entity_names_.back(), id);
  return id;
}

RelationId Vocabulary::intern_relation(std::string_view name) {
  const auto it = relation_ids_.find(std::string(name));
  if (it != relation_ids_.end()) return it->second;
  const auto id = static_cast<RelationId>(relation_names_.size());
  relation_names_.emplace_back(name);
  relation_ids_.emplace(relation_names_.back(), id);
  return id;
}

std::optional<EntityId> Vocabulary::entity_id(std::string_view name) const {
  const auto it = entity_ids_.find(std::string(name));
  if (it == entity_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationId> Vocabulary::relation_id(std::string_view name) const {
  const auto it = relation_ids_.find(std::string(name));
  if (it == relation_ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::entity_name(EntityId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= entity_names_.size()) {
    throw std::invalid_argument("entity id out of range: " +
                                std::to_string(id));
  }
  return entity_names_[static_cast<std::size_t>(id)];
}

const std::string& Vocabulary::relation_name(RelationId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= relation_names_.size()) {
    throw std::invalid_argument("relation id out of range: " +
                                std::to_string(id));
  }
  return relation_names_[static_cast<std::size_t>(id)];
}

Dataset::Dataset(Vocabulary vocab, std::vector<Triple> train,
                 std::vector<Triple> valid, std::vector<Triple> test)
    : vocab_(std::move(vocab)),
      train_(std::move(train)),
      valid_(std::move(valid)),
      test_(std::move(test)) {
  if (vocab_.num_entities() >= kMaxEntities ||
      vocab_.num_relations() >= kMaxRelations) {
    throw FormatError("vocabulary too large for the 64-bit triple index");
  }
  const auto num_e = static_cast<EntityId>(vocab_.num_entities());
  const auto num_r = static_cast<RelationId>(vocab_.num_relations());
  const auto index_split = [&](const std::vector<Triple>& split,
                               bool is_train) {
    for (const Triple& t : split) {
      if (t.head < 0 || t.head >= num_e || t.tail < 0 || t.tail >= num_e ||
          t.relation < 0 || t.relation >= num_r) {
        throw std::invalid_argument("triple id outside vocabulary bounds");
      }
      if (is_train) train_keys_.insert(pack(t));
      tails_by_hr_[pack_hr(t.head, t.relation)].push_back(t.tail);
      heads_by_rt_[pack_rt(t.relation, t.tail)].push_back(t.head);
    }
  };
  index_split(train_, true);
  index_split(valid_, false);
  index_split(test_, false);
  const auto sort_unique = [](std::vector<EntityId>& ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  };
  for (auto& [key, ids] : tails_by_hr_) sort_unique(ids);
  for (auto& [key, ids] : heads_by_rt_) sort_unique(ids);
}

std::uint64_t Dataset::pack(const Triple& t) const {
  return (static_cast<std::uint64_t>(t.head) << (kEntityBits + kRelationBits)) |
         (static_cast<std::uint64_t>(t.relation) << kEntityBits) |
         static_cast<std::uint64_t>(t.tail);
}

bool Dataset::contains(const Triple& t) const {
  const auto span = tails_for(t.head, t.relation);
  return std::binary_search(span.begin(), span.end(), t.tail);
}

bool Dataset::contains_train(const Triple& t) const {
  return train_keys_.contains(pack(t));
}

std::span<const EntityId> Dataset::tails_for(EntityId head,
                                             RelationId relation) const {
  const auto it = tails_by_hr_.find(pack_hr(head, relation));
  if (it == tails_by_hr_.end()) return {};
  return it->second;
}

std::span<const EntityId> Dataset::heads_for(RelationId relation,
                                             EntityId tail) const {
  const auto it = heads_by_rt_.find(pack_rt(relation, tail));
  if (it == heads_by_rt_.end()) return {};
  return it->second;
}

namespace {

std::vector<Triple> load_split(const std::filesystem::path& path,
                               Vocabulary& vocab) {
  std::ifstream file(path);
  if (!file) {
    throw IoError("cannot open " + path.string());
  }
  std::vector<Triple> triples;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(file, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t first = line.find('\t');
    const std::size_t second =
        first == std::string::npos ? std::string::npos
                                   : line.find('\t', first + 1);
    if (second == std::string::npos ||
        line.find('\t', second + 1) != std::string::npos) {
      throw ParseError(path.string() + ": expected 3 tab-separated fields",
                       line_number);
    }
    const std::string_view view(line);
    triples.push_back(Triple{
        vocab.intern_entity(view.substr(0, first)),
        vocab.intern_relation(view.substr(first + 1, second - first - 1)),
        vocab.intern_entity(view.substr(second + 1)),
    });
  }
  if (triples.empty()) {
    throw FormatError("empty split: " + path.string());
  }
  return triples;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& train_path,
                     const std::filesystem::path& valid_path,
                     const std::filesystem::path& test_path) {
  Vocabulary vocab;
  std::vector<Triple> train = load_split(train_path, vocab);
  std::vector<Triple> valid = load_split(valid_path, vocab);
  std::vector<Triple> test = load_split(test_path, vocab);
  return Dataset(std::move(vocab), std::move(train), std::move(valid),
                 std::move(test));
}

BernStats bern_stats(const Dataset& dataset) {
  const std::size_t num_relations = dataset.num_relations();
  std::vector<std::unordered_set<std::uint64_t>> pairs(num_relations);
  std::vector<std::unordered_set<EntityId>> heads(num_relations);
  std::vector<std::unordered_set<EntityId>> tails(num_relations);
  for (const Triple& t : dataset.train()) {
    const auto r = static_cast<std::size_t>(t.relation);
    pairs[r].insert((static_cast<std::uint64_t>(t.head) << 32) |
                    static_cast<std::uint64_t>(t.tail));
    heads[r].insert(t.head);
    tails[r].insert(t.tail);
  }
  BernStats stats;
  stats.tph.resize(num_relations, 0.0);
  stats.hpt.resize(num_relations, 0.0);
  for (std::size_t r = 0; r < num_relations; ++r) {
    if (pairs[r].empty()) continue;
    const auto distinct = static_cast<double>(pairs[r].size());
    stats.tph[r] = distinct / static_cast<double>(heads[r].size());
    stats.hpt[r] = distinct / static_cast<double>(tails[r].size());
  }
  return stats;
}

double head_replace_probability(const BernStats& stats, RelationId relation) {
  const auto r = static_cast<std::size_t>(relation);
  const double total = stats.tph[r] + stats.hpt[r];
  if (total <= 0.0) return 0.5;
  return stats.tph[r] / total;
}

Triple sample_negative(const Triple& positive, const BernStats& stats,
                       std::size_t num_entities, Rng& rng) {
  if (num_entities < 2) {
    throw StateError("need at least 2 entities to corrupt a triple");
  }
  const bool replace_head =
      rng.uniform_unit() < head_replace_probability(stats, positive.relation);
  const EntityId original = replace_head ? positive.head : positive.tail;
  // Draw from |E|-1 slots and skip over the original's index.
  auto draw = static_cast<EntityId>(rng.uniform_index(num_entities - 1));
  if (draw >= original) ++draw;
  Triple corrupted = positive;
  (replace_head ? corrupted.head : corrupted.tail) = draw;
  return corrupted;
}

}  // namespace tkge::kg
