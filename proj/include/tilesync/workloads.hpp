#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tilesync/scenario.hpp"

namespace tilesync {

// Two dependent GeMMs: XW1 = X * W1 (producer), XW12 = XW1 * W2 (consumer).
struct MlpParams {
  Count batch = 1024;
  Count hidden = 12288;
  Dim3 producer_grid{4, 48, 1};
  Dim3 consumer_grid{4, 96, 1};
  Count occupancy = 2;
  Count num_sms = 80;
};

// Grids derived from GeMM shapes: producer [B, H/2] with split-k, consumer [B, H].
MlpParams mlp_from_shape(Count batch, Count hidden, Count tile_m, Count tile_n, Count split_k,
                         Count occupancy, Count num_sms = 80);

// Batch presets with grids and occupancy as measured on a V100 (80 SMs).
// Occupancy 3 for batch <= 128 and 2 above.
MlpParams mlp_preset(const std::string& batch);
std::vector<std::string> mlp_preset_names();

Scenario mlp_scenario(const MlpParams& p, const SyncPolicy& policy, Mode mode,
                      const Options& options = {}, const CostModel& cost = {});

// GeMM1 computes XQKV (three column slices XQ/XK/XV); the dot-product stage
// reads column i of each slice; GeMM2 reads rows of XDot.
struct AttentionParams {
  Count batch = 1;
  Count hidden = 12288;
  Count tile_y = 128;
  Dim3 gemm1_grid{1, 6, 1};
  Dim3 dot_grid{1, 2, 1};
  Dim3 gemm2_grid{1, 3, 1};
  Count occupancy = 1;
  Count num_sms = 4;
};

// stride = column tiles of XQKV / 3 = H / (8 * tile_y)
Count attention_stride(Count hidden, Count tile_y);

AttentionParams attention_preset(const std::string& name);
std::vector<std::string> attention_preset_names();

// `second` synchronizes the dot product with GeMM2 (TileSync or RowSync);
// GeMM1 -> dot product always uses StridedSync.
Scenario attention_scenario(const AttentionParams& p, const SyncPolicy& second, Mode mode,
                            const Options& options = {}, const CostModel& cost = {});

// Two identical implicit-GeMM Conv2D kernels with a KxK filter.
struct ConvPairParams {
  Count channels = 128;
  Count batch = 16;
  Dim3 grid{196, 1, 1};
  Count filter = 3;
  Count occupancy = 2;
  Count num_sms = 80;
};

ConvPairParams conv_preset(const std::string& batch);
std::vector<std::string> conv_preset_names();

Scenario conv_pair_scenario(const ConvPairParams& p, const SyncPolicy& policy, Mode mode,
                            const Options& options = {}, const CostModel& cost = {});

// Two 3x2-tile GeMMs on 4 SMs with occupancy 1 and two k-steps each.
Scenario fig2_scenario(const SyncPolicy& policy, Mode mode, const Options& options = {},
                       const CostModel& cost = {});

struct PresetInfo {
  std::string name;
  std::string family;  // fig2, mlp, attn, conv128
  std::string default_policy;
  std::vector<std::string> policies;
  std::string description;
};

std::vector<PresetInfo> list_presets();
const PresetInfo& preset_info(const std::string& name);

// Policy names: tile, row, strided, conv2dtile. Empty selects the preset's
// default. Throws ConfigError for unknown presets or inapplicable policies.
Scenario preset_scenario(const std::string& name, const std::string& policy, Mode mode,
                         const Options& options = {}, const CostModel& cost = {});

}  // namespace tilesync
