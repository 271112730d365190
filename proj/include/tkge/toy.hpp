#pragma once

#include <cstdint>

#include "tkge/dataset.hpp"

namespace tkge::kg {

// Deterministic synthetic KG for desk-scale experiments and benchmarks.
// Three relations with exact structure:
//   r1  random edges, out-degree ~3 per entity
//   r2  the inverse of every r1 edge
//   r3  the composition r1 then r2 (skipping self-loops)
// so a model that captures inversion and composition can solve it. The
// deduplicated triples are shuffled and split 80/10/10.
Dataset make_toy_dataset(std::size_t num_entities, std::uint64_t seed);

}  // namespace tkge::kg
