#include "tkge/toy.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

namespace tkge::kg {

Dataset make_toy_dataset(std::size_t num_entities, std::uint64_t seed) {
  if (num_entities < 4) {
    throw std::invalid_argument("toy dataset needs at least 4 entities");
  }
  Rng rng(seed);

  Vocabulary vocab;
  std::string name;
  for (std::size_t i = 0; i < num_entities; ++i) {
    name = "e" + std::to_string(i);
    vocab.intern_entity(name);
  }
  const RelationId r1 = vocab.intern_relation("r1");
  const RelationId r2 = vocab.intern_relation("r2");
  const RelationId r3 = vocab.intern_relation("r3");

  // r1: each entity points at 3 distinct others.
  constexpr std::size_t kOutDegree = 3;
  std::vector<std::vector<EntityId>> out1(num_entities);
  std::vector<std::vector<EntityId>> in1(num_entities);
  for (std::size_t a = 0; a < num_entities; ++a) {
    auto& targets = out1[a];
    while (targets.size() < kOutDegree) {
      const auto b = static_cast<EntityId>(rng.uniform_index(num_entities - 1));
      const auto fixed = b >= static_cast<EntityId>(a) ? b + 1 : b;
      if (std::find(targets.begin(), targets.end(), fixed) == targets.end()) {
        targets.push_back(fixed);
        in1[static_cast<std::size_t>(fixed)].push_back(
            static_cast<EntityId>(a));
      }
    }
  }

  std::vector<Triple> all;
  for (std::size_t a = 0; a < num_entities; ++a) {
    for (const EntityId b : out1[a]) {
      all.push_back({static_cast<EntityId>(a), r1, b});
      all.push_back({b, r2, static_cast<EntityId>(a)});
    }
  }
  // r3 = r1 then r2: (a,r1,b) and (b,r2,c) give (a,r3,c); with r2 the
  // inverse of r1, c ranges over the other r1-sources of b.
  std::set<std::pair<EntityId, EntityId>> composed;
  for (std::size_t a = 0; a < num_entities; ++a) {
    for (const EntityId b : out1[a]) {
      for (const EntityId c : in1[static_cast<std::size_t>(b)]) {
        if (c == static_cast<EntityId>(a)) continue;
        composed.insert({static_cast<EntityId>(a), c});
      }
    }
  }
  for (const auto& [a, c] : composed) all.push_back({a, r3, c});

  rng.shuffle(all);
  const std::size_t tenth = all.size() / 10;
  const std::size_t train_size = all.size() - 2 * tenth;
  std::vector<Triple> train(all.begin(), all.begin() + train_size);
  std::vector<Triple> valid(all.begin() + train_size,
                            all.begin() + train_size + tenth);
  std::vector<Triple> test(all.begin() + train_size + tenth, all.end());
  return Dataset(std::move(vocab), std::move(train), std::move(valid),
                 std::move(test));
}

}  // namespace tkge::kg
