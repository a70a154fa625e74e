#pragma once

#include <cstdint>

#include "gpiter/dataset.hpp"
#include "gpiter/hyperparameters.hpp"

namespace gpiter {

// Synthetic regression data drawn from the model itself: standard normal
// inputs, a random-feature prior function at the given hyperparameters, and
// Gaussian observation noise. Deterministic per seed.
Dataset make_synthetic_dataset(int n, int input_dim, const Hyperparameters& hp,
                               std::uint64_t seed, int rff_pairs = 2048);

}  // namespace gpiter
