#include "tkge/model.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "tkge/error.hpp"

namespace tkge {

namespace {

constexpr char kMagic[4] = {'T', 'K', 'G', 'E'};
constexpr std::uint16_t kFormatVersion = 1;
constexpr std::size_t kHeaderBytes = 20;

torus::ScoreKind torus_kind(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::L1:
      return torus::ScoreKind::L1;
    case ScoreKind::L2:
      return torus::ScoreKind::L2;
    case ScoreKind::EL2:
      return torus::ScoreKind::EL2;
    case ScoreKind::L2Squared:
      break;
  }
  throw StateError("no wrapped kernel for this score kind");
}

void write_bytes(std::ostream& out, const unsigned char* data,
                 std::size_t count) {
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(count));
}

void write_u16(std::ostream& out, std::uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>(v >> 8)};
  write_bytes(out, b, 2);
}

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  write_bytes(out, b, 4);
}

void write_f64_table(std::ostream& out, std::span<const double> values) {
  constexpr std::size_t kChunk = 4096;
  std::array<unsigned char, kChunk * 8> buf;
  std::size_t done = 0;
  while (done < values.size()) {
    const std::size_t count = std::min(kChunk, values.size() - done);
    for (std::size_t j = 0; j < count; ++j) {
      const auto bits = std::bit_cast<std::uint64_t>(values[done + j]);
      for (int i = 0; i < 8; ++i) {
        buf[j * 8 + static_cast<std::size_t>(i)] =
            static_cast<unsigned char>(bits >> (8 * i));
      }
    }
    write_bytes(out, buf.data(), count * 8);
    done += count;
  }
}

void read_exact(std::istream& in, unsigned char* data, std::size_t count,
                const std::filesystem::path& path) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count));
  if (static_cast<std::size_t>(in.gcount()) != count) {
    throw FormatError("truncated model file: " + path.string());
  }
}

std::uint16_t load_u16(const unsigned char* b) {
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t load_u32(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void read_f64_table(std::istream& in, std::span<double> values,
                    const std::filesystem::path& path) {
  constexpr std::size_t kChunk = 4096;
  std::array<unsigned char, kChunk * 8> buf;
  std::size_t done = 0;
  while (done < values.size()) {
    const std::size_t count = std::min(kChunk, values.size() - done);
    read_exact(in, buf.data(), count * 8, path);
    for (std::size_t j = 0; j < count; ++j) {
      std::uint64_t bits = 0;
      for (int i = 0; i < 8; ++i) {
        bits |= static_cast<std::uint64_t>(buf[j * 8 +
                                               static_cast<std::size_t>(i)])
                << (8 * i);
      }
      values[done + j] = std::bit_cast<double>(bits);
    }
    done += count;
  }
}

}  // namespace

bool score_kind_valid_for(ModelKind model, ScoreKind score) {
  if (model == ModelKind::TorusE) {
    return score == ScoreKind::L1 || score == ScoreKind::L2 ||
           score == ScoreKind::EL2;
  }
  return score == ScoreKind::L1 || score == ScoreKind::L2Squared;
}

const char* to_string(ModelKind kind) {
  return kind == ModelKind::TorusE ? "toruse" : "transe";
}

const char* to_string(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::L1:
      return "l1";
    case ScoreKind::L2:
      return "l2";
    case ScoreKind::EL2:
      return "el2";
    case ScoreKind::L2Squared:
      return "l2sq";
  }
  return "?";
}

EmbeddingModel::EmbeddingModel(ModelKind model_kind, ScoreKind score_kind,
                               std::size_t num_entities,
                               std::size_t num_relations,
                               std::size_t dimension)
    : model_kind_(model_kind),
      score_kind_(score_kind),
      num_entities_(num_entities),
      num_relations_(num_relations),
      dimension_(dimension),
      entities_(num_entities * dimension),
      relations_(num_relations * dimension) {}

EmbeddingModel EmbeddingModel::init(ModelKind model_kind,
                                    std::size_t num_entities,
                                    std::size_t num_relations,
                                    std::size_t dimension,
                                    ScoreKind score_kind, Rng& rng) {
  if (dimension == 0) {
    throw std::invalid_argument("embedding dimension must be at least 1");
  }
  if (num_entities == 0) {
    throw std::invalid_argument("need at least one entity");
  }
  if (!score_kind_valid_for(model_kind, score_kind)) {
    throw std::invalid_argument(std::string("score kind ") +
                                to_string(score_kind) + " not valid for " +
                                to_string(model_kind));
  }
  EmbeddingModel m(model_kind, score_kind, num_entities, num_relations,
                   dimension);
  if (model_kind == ModelKind::TorusE) {
    for (double& x : m.entities_) x = rng.uniform_unit();
    for (double& x : m.relations_) x = rng.uniform_unit();
  } else {
    const double bound = 6.0 / std::sqrt(static_cast<double>(dimension));
    for (double& x : m.entities_) x = rng.uniform_real(-bound, bound);
    for (double& x : m.relations_) x = rng.uniform_real(-bound, bound);
    m.normalize_entities();
  }
  return m;
}

std::span<const double> EmbeddingModel::entity(kg::EntityId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= num_entities_) {
    throw std::invalid_argument("entity id out of range: " +
                                std::to_string(id));
  }
  return {entities_.data() + static_cast<std::size_t>(id) * dimension_,
          dimension_};
}

std::span<const double> EmbeddingModel::relation(kg::RelationId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= num_relations_) {
    throw std::invalid_argument("relation id out of range: " +
                                std::to_string(id));
  }
  return {relations_.data() + static_cast<std::size_t>(id) * dimension_,
          dimension_};
}

std::span<double> EmbeddingModel::entity_mut(kg::EntityId id) {
  const auto view = entity(id);
  return {entities_.data() + (view.data() - entities_.data()), dimension_};
}

std::span<double> EmbeddingModel::relation_mut(kg::RelationId id) {
  const auto view = relation(id);
  return {relations_.data() + (view.data() - relations_.data()), dimension_};
}

double EmbeddingModel::score_rows(std::span<const double> h,
                                  std::span<const double> r,
                                  std::span<const double> t) const {
  if (model_kind_ == ModelKind::TorusE) {
    return torus::score_span(torus_kind(score_kind_), h, r, t);
  }
  double acc = 0.0;
  if (score_kind_ == ScoreKind::L1) {
    for (std::size_t i = 0; i < h.size(); ++i) {
      acc += std::abs(h[i] + r[i] - t[i]);
    }
  } else {
    for (std::size_t i = 0; i < h.size(); ++i) {
      const double d = h[i] + r[i] - t[i];
      acc += d * d;
    }
  }
  return acc;
}

double EmbeddingModel::score_triple(const kg::Triple& triple) const {
  return score_rows(entity(triple.head), relation(triple.relation),
                    entity(triple.tail));
}

void EmbeddingModel::score_all_replacements(const kg::Triple& triple,
                                            ReplacedPosition position,
                                            std::span<double> out) const {
  if (out.size() != num_entities_) {
    throw std::invalid_argument("output span must have one slot per entity");
  }
  const auto r = relation(triple.relation);
  const double* table = entities_.data();
  if (position == ReplacedPosition::Head) {
    const auto t = entity(triple.tail);
    for (std::size_t e = 0; e < num_entities_; ++e) {
      out[e] = score_rows({table + e * dimension_, dimension_}, r, t);
    }
  } else {
    const auto h = entity(triple.head);
    for (std::size_t e = 0; e < num_entities_; ++e) {
      out[e] = score_rows(h, r, {table + e * dimension_, dimension_});
    }
  }
}

std::vector<double> EmbeddingModel::score_all_replacements(
    const kg::Triple& triple, ReplacedPosition position) const {
  std::vector<double> out(num_entities_);
  score_all_replacements(triple, position, out);
  return out;
}

void EmbeddingModel::normalize_entities() {
  if (model_kind_ != ModelKind::TransE) {
    throw StateError("sphere normalization applies only to the translation "
                     "baseline; torus embeddings need no regularization");
  }
  for (std::size_t e = 0; e < num_entities_; ++e) {
    double* row = entities_.data() + e * dimension_;
    double sq = 0.0;
    for (std::size_t i = 0; i < dimension_; ++i) sq += row[i] * row[i];
    if (sq <= 0.0) {
      throw StateError("cannot normalize zero-norm entity row " +
                       std::to_string(e));
    }
    // Divide rather than multiply by the reciprocal: correctly rounded
    // per coordinate, so (3,4) lands exactly on (0.6, 0.8).
    const double norm = std::sqrt(sq);
    for (std::size_t i = 0; i < dimension_; ++i) row[i] /= norm;
  }
}

void EmbeddingModel::save(const std::filesystem::path& path) const {
  if (dimension_ > std::numeric_limits<std::uint32_t>::max() ||
      num_entities_ > std::numeric_limits<std::uint32_t>::max() ||
      num_relations_ > std::numeric_limits<std::uint32_t>::max()) {
    throw FormatError("table dimensions exceed the format's 32-bit fields");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out.write(kMagic, 4);
  write_u16(out, kFormatVersion);
  const unsigned char kinds[2] = {static_cast<unsigned char>(model_kind_),
                                  static_cast<unsigned char>(score_kind_)};
  write_bytes(out, kinds, 2);
  write_u32(out, static_cast<std::uint32_t>(dimension_));
  write_u32(out, static_cast<std::uint32_t>(num_entities_));
  write_u32(out, static_cast<std::uint32_t>(num_relations_));
  write_f64_table(out, entities_);
  write_f64_table(out, relations_);
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

EmbeddingModel EmbeddingModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  unsigned char header[kHeaderBytes];
  read_exact(in, header, kHeaderBytes, path);
  if (std::memcmp(header, kMagic, 4) != 0) {
    throw FormatError("not a model file (bad magic): " + path.string());
  }
  const std::uint16_t version = load_u16(header + 4);
  if (version != kFormatVersion) {
    throw FormatError("unsupported model format version " +
                      std::to_string(version));
  }
  if (header[6] > 1) {
    throw FormatError("unknown model kind byte " + std::to_string(header[6]));
  }
  if (header[7] > 3) {
    throw FormatError("unknown score kind byte " + std::to_string(header[7]));
  }
  const auto model_kind = static_cast<ModelKind>(header[6]);
  const auto score_kind = static_cast<ScoreKind>(header[7]);
  if (!score_kind_valid_for(model_kind, score_kind)) {
    throw FormatError(std::string("score kind ") + to_string(score_kind) +
                      " not valid for " + to_string(model_kind));
  }
  const std::uint32_t dimension = load_u32(header + 8);
  const std::uint32_t num_entities = load_u32(header + 12);
  const std::uint32_t num_relations = load_u32(header + 16);
  if (dimension == 0 || num_entities == 0) {
    throw FormatError("model file declares empty tables: " + path.string());
  }
  const std::uint64_t rows =
      std::uint64_t{num_entities} + std::uint64_t{num_relations};
  if (rows > (std::uint64_t{1} << 37) / dimension) {
    throw FormatError("model file declares implausibly large tables: " +
                      path.string());
  }

  EmbeddingModel m(model_kind, score_kind, num_entities, num_relations,
                   dimension);
  read_f64_table(in, m.entities_, path);
  read_f64_table(in, m.relations_, path);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("trailing bytes after embedding tables: " +
                      path.string());
  }

  const auto check = [&](const std::vector<double>& table) {
    for (const double x : table) {
      if (!std::isfinite(x)) {
        throw FormatError("non-finite embedding value: " + path.string());
      }
      if (model_kind == ModelKind::TorusE && !(x >= 0.0 && x < 1.0)) {
        throw FormatError("torus coordinate outside [0,1): " + path.string());
      }
    }
  };
  check(m.entities_);
  check(m.relations_);
  return m;
}

void save_vocabulary_json(const kg::Vocabulary& vocab,
                          const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["entities"] = vocab.entity_names();
  doc["relations"] = vocab.relation_names();
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << doc.dump(2) << '\n';
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

kg::Vocabulary load_vocabulary_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("entities") ||
      !doc["entities"].is_array() || !doc.contains("relations") ||
      !doc["relations"].is_array()) {
    throw FormatError(
        "vocabulary file must hold entity and relation name arrays: " +
        path.string());
  }
  kg::Vocabulary vocab;
  for (const auto& name : doc["entities"]) {
    if (!name.is_string()) {
      throw FormatError("entity names must be strings: " + path.string());
    }
    const std::size_t before = vocab.num_entities();
    vocab.intern_entity(name.get<std::string>());
    if (vocab.num_entities() == before) {
      throw FormatError("duplicate entity name '" + name.get<std::string>() +
                        "': " + path.string());
    }
  }
  for (const auto& name : doc["relations"]) {
    if (!name.is_string()) {
      throw FormatError("relation names must be strings: " + path.string());
    }
    const std::size_t before = vocab.num_relations();
    vocab.intern_relation(name.get<std::string>());
    if (vocab.num_relations() == before) {
      throw FormatError("duplicate relation name '" + name.get<std::string>() +
                        "': " + path.string());
    }
  }
  return vocab;
}

}  // namespace tkge
