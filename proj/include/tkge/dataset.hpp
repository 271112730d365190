#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tkge/rng.hpp"

// Triple storage: vocabularies over entity/relation names, the three
// dataset splits, membership indexes for filtered evaluation, and
// Bernoulli ("bern") negative sampling.

namespace tkge::kg {

using EntityId = std::int32_t;
using RelationId = std::int32_t;

struct Triple {
  EntityId head;
  RelationId relation;
  EntityId tail;

  friend bool operator==(const Triple&, const Triple&) = default;
};

// Dense string<->id maps. Ids are assigned in first-appearance order and
// run 0..count-1.
class Vocabulary {
 public:
  EntityId intern_entity(std::string_view name);
  RelationId intern_relation(std::string_view name);

  std::optional<EntityId> entity_id(std::string_view name) const;
  std::optional<RelationId> relation_id(std::string_view name) const;

  // Throw std::invalid_argument on an out-of-range id.
  const std::string& entity_name(EntityId id) const;
  const std::string& relation_name(RelationId id) const;

  std::size_t num_entities() const noexcept { return entity_names_.size(); }
  std::size_t num_relations() const noexcept { return relation_names_.size(); }

  const std::vector<std::string>& entity_names() const noexcept {
    return entity_names_;
  }
  const std::vector<std::string>& relation_names() const noexcept {
    return relation_names_;
  }

 private:
  std::vector<std::string> entity_names_;
  std::vector<std::string> relation_names_;
  std::unordered_map<std::string, EntityId> entity_ids_;
  std::unordered_map<std::string, RelationId> relation_ids_;
};

// The three splits plus membership indexes. Immutable after construction
// and safe to share across threads. Splits are stored verbatim
// (duplicates kept); the true-set indexes cover the union of all three
// splits, which is what filtered ranking masks against.
class Dataset {
 public:
  Dataset(Vocabulary vocab, std::vector<Triple> train,
          std::vector<Triple> valid, std::vector<Triple> test);

  const Vocabulary& vocabulary() const noexcept { return vocab_; }
  const std::vector<Triple>& train() const noexcept { return train_; }
  const std::vector<Triple>& valid() const noexcept { return valid_; }
  const std::vector<Triple>& test() const noexcept { return test_; }

  std::size_t num_entities() const noexcept { return vocab_.num_entities(); }
  std::size_t num_relations() const noexcept { return vocab_.num_relations(); }

  // Membership in the union of train/valid/test.
  bool contains(const Triple& t) const;
  // Membership in the training split only.
  bool contains_train(const Triple& t) const;

  // All tails t' with (head, relation, t') in the union, sorted ascending;
  // empty span if none. heads_for is the mirror for (h', relation, tail).
  std::span<const EntityId> tails_for(EntityId head, RelationId relation) const;
  std::span<const EntityId> heads_for(RelationId relation, EntityId tail) const;

 private:
  std::uint64_t pack(const Triple& t) const;

  Vocabulary vocab_;
  std::vector<Triple> train_;
  std::vector<Triple> valid_;
  std::vector<Triple> test_;
  std::unordered_set<std::uint64_t> train_keys_;
  std::unordered_map<std::uint64_t, std::vector<EntityId>> tails_by_hr_;
  std::unordered_map<std::uint64_t, std::vector<EntityId>> heads_by_rt_;
};

// Load the standard three-file layout: one triple per line, fields
// tab-separated in the order head, relation, tail. The vocabulary covers
// all three splits. Throws IoError for an unreadable file, ParseError
// (with line number) for a malformed line, FormatError for an empty split.
Dataset load_dataset(const std::filesystem::path& train_path,
                     const std::filesystem::path& valid_path,
                     const std::filesystem::path& test_path);

// Per-relation head/tail multiplicity over the training split:
// tph = #distinct (h,t) pairs / #distinct heads, hpt the mirror over
// tails. Relations absent from training hold 0 in both slots.
struct BernStats {
  std::vector<double> tph;
  std::vector<double> hpt;
};

BernStats bern_stats(const Dataset& dataset);

// tph/(tph+hpt), the probability of corrupting the head rather than the
// tail; 0.5 when the relation never occurred in training.
double head_replace_probability(const BernStats& stats, RelationId relation);

// Draw one corrupted triple: pick the side by head_replace_probability,
// then a replacement entity uniformly from all entities except the
// original, so the result always differs from the input. Consumes exactly
// two rng draws. Throws StateError with fewer than 2 entities.
Triple sample_negative(const Triple& positive, const BernStats& stats,
                       std::size_t num_entities, Rng& rng);

}  // namespace tkge::kg
