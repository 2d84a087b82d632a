#pragma once

#include <string>

#include "scnet/model.hpp"
#include "scnet/train.hpp"

namespace scnet {

struct AppConfig {
  ModelConfig model;
  TrainConfig train;
};

// JSON schema (all keys optional, defaults apply; unknown keys are errors):
// {
//   "model": {
//     "stft": {"fft_size": 4096, "hop": 1024},
//     "bands": {"proportions": [0.175, 0.392, 0.433], "strides": [1, 4, 16]},
//     "channel_ladder": [32, 64, 128],
//     "conv_module_counts": [3, 2, 1],
//     "norm_groups": 4,
//     "dual_path": {"n_layers": 6, "hidden_odd": 128, "hidden_even": 256},
//     "sources": ["drums", "bass", "other", "vocals"]
//   },
//   "train": {"segment_seconds": 11.0, "segment_hop_seconds": 1.0, "lr": 5e-4,
//             "batch_size": 1, "steps": 200, "seed": 0, "scale_min": 0.25,
//             "scale_max": 1.25, "remix": true}
// }
// The separator width and norm groups are tied to the ladder top and the
// model-level norm_groups; in_channels stays at 4 (stereo re/im pairs).
std::string model_config_to_json_text(const ModelConfig& cfg);
ModelConfig model_config_from_json_text(const std::string& text);

std::string app_config_to_json_text(const AppConfig& cfg);
AppConfig app_config_from_json_text(const std::string& text);

// File-level wrappers; both validate the parsed configs as a whole.
AppConfig load_app_config(const std::string& path);
void save_app_config(const std::string& path, const AppConfig& cfg);

}  // namespace scnet
