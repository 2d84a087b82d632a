#pragma once

#include <cstdint>
#include <string>

#include "scnet/model.hpp"
#include "scnet/train.hpp"

namespace scnet {

struct LoadedCheckpoint {
  Model model;
  AdamState adam;
  std::uint64_t rng_seed = 0;
};

// Versioned little-endian container holding the model config (as JSON), every
// named parameter tensor, the optimizer moments, and the training rng seed.
// Loading rebuilds the model from the stored config and restores all values
// bit-exactly; the stored source order disambiguates output slicing.
void save_checkpoint(const std::string& path, const Model& model, const AdamState& adam,
                     std::uint64_t rng_seed);
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace scnet
