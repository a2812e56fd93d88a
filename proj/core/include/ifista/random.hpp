#pragma once

#include "ifista/types.hpp"

#include <cstdint>
#include <random>

namespace ifista {

using Rng = std::mt19937_64;

/// Independent random streams derived from one user seed.
enum class Stream : std::uint64_t {
    problem_data = 1,
    prox_direction = 2,
    gradient_error = 3,
    noise = 4,
    lemma_instances = 5,
    prox_battery = 6,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for (stream, index) under `seed`. Distinct triples give unrelated
/// generators, so per-iteration draws do not depend on call order.
std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index = 0) noexcept;

Rng make_rng(std::uint64_t seed, Stream stream, std::uint64_t index = 0);

/// Uniformly distributed point on the unit sphere of R^n.
Vector random_unit(Index n, Rng& rng);

Vector random_gaussian(Index n, Rng& rng);

Vector random_uniform(Index n, double lo, double hi, Rng& rng);

}  // namespace ifista
