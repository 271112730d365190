#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tkge/dataset.hpp"
#include "tkge/rng.hpp"
#include "tkge/torus.hpp"

// Dense embedding tables and triple scoring for the two model families:
// torus embeddings scored by the wrapped kernels, and the translation
// baseline in flat space with its per-step sphere normalization.

namespace tkge {

enum class ModelKind : std::uint8_t { TorusE = 0, TransE = 1 };

// Score kinds across both families. TorusE accepts L1/L2/EL2 (the
// normalized wrapped kernels); TransE accepts L1/L2Squared (||h+r-t||_1
// or ||h+r-t||_2^2). Enumerator values are the on-disk encoding.
enum class ScoreKind : std::uint8_t { L1 = 0, L2 = 1, EL2 = 2, L2Squared = 3 };

enum class ReplacedPosition { Head, Tail };

bool score_kind_valid_for(ModelKind model, ScoreKind score);
const char* to_string(ModelKind kind);
const char* to_string(ScoreKind kind);

class EmbeddingModel {
 public:
  // Fresh tables. TorusE coordinates are i.i.d. uniform on [0,1); TransE
  // rows are i.i.d. uniform on [-6/sqrt(n), 6/sqrt(n)] with entity rows
  // then normalized to unit length. Draw order: entity table row-major,
  // then relation table row-major. Throws std::invalid_argument for
  // n = 0, |E| = 0, or a score kind the model family does not support.
  static EmbeddingModel init(ModelKind model_kind, std::size_t num_entities,
                             std::size_t num_relations, std::size_t dimension,
                             ScoreKind score_kind, Rng& rng);

  ModelKind model_kind() const noexcept { return model_kind_; }
  ScoreKind score_kind() const noexcept { return score_kind_; }
  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t num_entities() const noexcept { return num_entities_; }
  std::size_t num_relations() const noexcept { return num_relations_; }

  std::span<const double> entity(kg::EntityId id) const;
  std::span<const double> relation(kg::RelationId id) const;
  std::span<double> entity_mut(kg::EntityId id);
  std::span<double> relation_mut(kg::RelationId id);

  // Lower is more plausible; zero iff the translation principle holds.
  double score_triple(const kg::Triple& triple) const;

  // Score with every entity substituted at the given position; out must
  // have length |E|. Entry e is bit-identical to score_triple on the
  // substituted triple.
  void score_all_replacements(const kg::Triple& triple,
                              ReplacedPosition position,
                              std::span<double> out) const;
  std::vector<double> score_all_replacements(const kg::Triple& triple,
                                             ReplacedPosition position) const;

  // Rescale every entity row to unit Euclidean norm (relations are left
  // alone). Throws StateError on a torus model, which needs no
  // regularization, and on a zero-norm row.
  void normalize_entities();

  // Binary table format, written little-endian regardless of host:
  // "TKGE" magic, format version u16, model kind u8, score kind u8,
  // n u32, |E| u32, |R| u32, then the entity and relation tables
  // row-major as IEEE-754 f64. Byte-identical for identical tables.
  void save(const std::filesystem::path& path) const;
  static EmbeddingModel load(const std::filesystem::path& path);

 private:
  EmbeddingModel(ModelKind model_kind, ScoreKind score_kind,
                 std::size_t num_entities, std::size_t num_relations,
                 std::size_t dimension);

  double score_rows(std::span<const double> h, std::span<const double> r,
                    std::span<const double> t) const;

  ModelKind model_kind_;
  ScoreKind score_kind_;
  std::size_t num_entities_;
  std::size_t num_relations_;
  std::size_t dimension_;
  std::vector<double> entities_;   // |E| x n row-major
  std::vector<double> relations_;  // |R| x n row-major
};

// Companion vocabulary file: {"entities": [...], "relations": [...]},
// names in id order.
void save_vocabulary_json(const kg::Vocabulary& vocab,
                          const std::filesystem::path& path);
kg::Vocabulary load_vocabulary_json(const std::filesystem::path& path);

}  // namespace tkge
