#include "tilesync/workloads.hpp"

#include <algorithm>

namespace tilesync {

namespace {

Count ceil_div(Count a, Count b) { return (a + b - 1) / b; }

Stage make_stage(std::string id, Dim3 grid, Count occupancy, Count k_steps,
                 TileOrder order = RowMajor{}) {
  return Stage{KernelSpec{std::move(id), grid, occupancy, k_steps}, order, 0};
}

struct MlpRow {
  const char* name;
  Dim3 producer;
  Dim3 consumer;
  Count occupancy;
  const char* policy;
};

// Grids and waves per batch size from the V100 MLP measurements.
constexpr MlpRow kMlpRows[] = {
    {"1-64", {1, 24, 3}, {1, 48, 1}, 3, "tile"},
    {"128", {1, 48, 2}, {1, 96, 1}, 3, "tile"},
    {"256", {1, 96, 2}, {1, 96, 1}, 2, "tile"},
    {"512", {2, 48, 2}, {2, 96, 1}, 2, "row"},
    {"1024", {4, 48, 1}, {4, 96, 1}, 2, "row"},
    {"2048", {8, 48, 1}, {8, 96, 1}, 2, "row"},
};

struct ConvRow {
  Count batch;
  Dim3 grid;
  const char* policy;
};

// 128-channel 3x3 Conv2D pairs. B=1 and B=4 store the totals implied by
// their waves column (39 and 98 TBs) as grid.x times a second dimension.
constexpr ConvRow kConvRows[] = {
    {1, {13, 3, 1}, "conv2dtile"}, {4, {49, 2, 1}, "conv2dtile"},  {8, {98, 1, 1}, "row"},
    {12, {147, 1, 1}, "row"}, {16, {196, 1, 1}, "row"}, {20, {245, 1, 1}, "row"},
    {24, {294, 1, 1}, "row"}, {28, {343, 1, 1}, "row"}, {32, {392, 1, 1}, "row"},
};

constexpr Count kAttnBatches[] = {256, 512, 1024, 2048};

SyncPolicy parse_policy(const std::string& name, const PresetInfo& info) {
  const std::string chosen = name.empty() ? info.default_policy : name;
  if (std::find(info.policies.begin(), info.policies.end(), chosen) == info.policies.end())
    throw ConfigError("policy '" + chosen + "' is not applicable to preset '" + info.name + "'");
  if (chosen == "tile") return TileSync{};
  if (chosen == "row") return RowSync{};
  if (chosen == "conv2dtile") return Conv2DTileSync{9};
  // strided: the attention chain's second hop stays TileSync
  return TileSync{};
}

}  // namespace

MlpParams mlp_from_shape(Count batch, Count hidden, Count tile_m, Count tile_n, Count split_k,
                         Count occupancy, Count num_sms) {
  if (batch < 1 || hidden < 1 || tile_m < 1 || tile_n < 1 || split_k < 1)
    throw ConfigError("MLP shape parameters must be >= 1");
  MlpParams p;
  p.batch = batch;
  p.hidden = hidden;
  p.producer_grid = {ceil_div(batch, tile_m), ceil_div(4 * hidden / 8, tile_n), split_k};
  p.consumer_grid = {ceil_div(batch, tile_m), ceil_div(hidden, tile_n), 1};
  p.occupancy = occupancy;
  p.num_sms = num_sms;
  return p;
}

MlpParams mlp_preset(const std::string& batch) {
  for (const auto& r : kMlpRows) {
    if (batch != r.name) continue;
    MlpParams p;
    p.batch = batch == "1-64" ? 64 : std::stoll(batch);
    p.producer_grid = r.producer;
    p.consumer_grid = r.consumer;
    p.occupancy = r.occupancy;
    return p;
  }
  throw ConfigError("unknown MLP preset 'mlp:" + batch + "'");
}

std::vector<std::string> mlp_preset_names() {
  std::vector<std::string> v;
  for (const auto& r : kMlpRows) v.push_back(std::string("mlp:") + r.name);
  return v;
}

Scenario mlp_scenario(const MlpParams& p, const SyncPolicy& policy, Mode mode,
                      const Options& options, const CostModel& cost) {
  Scenario s;
  s.name = "mlp:B" + std::to_string(p.batch);
  s.gpu = {p.num_sms};
  const Dim3 pg = p.producer_grid;
  // producer K = H spans twice its N = H/2; split-k divides it among z slices
  const Count producer_k = std::max<Count>(1, 2 * pg.y / pg.z);
  s.stages.push_back(make_stage("gemm1", pg, p.occupancy, producer_k));
  s.stages.push_back(make_stage("gemm2", p.consumer_grid, p.occupancy, pg.y));
  s.deps.push_back({0, 1, Operand::A, policy});
  s.cost = cost;
  s.mode = mode;
  s.options = options;
  validate(s);
  return s;
}

Count attention_stride(Count hidden, Count tile_y) {
  if (hidden < 1 || tile_y < 1 || hidden % (8 * tile_y) != 0)
    throw ConfigError("hidden must be a multiple of 8 * tile_y");
  return hidden / (8 * tile_y);
}

AttentionParams attention_preset(const std::string& name) {
  AttentionParams p;
  if (name == "toy") return p;
  for (Count b : kAttnBatches) {
    if (name != std::to_string(b)) continue;
    const Count stride = attention_stride(p.hidden, p.tile_y);
    const Count rows = b / 128;
    p.batch = b;
    p.gemm1_grid = {rows, 3 * stride, 1};
    p.dot_grid = {rows, stride, 1};
    p.gemm2_grid = {rows, p.hidden / 256, 1};
    p.occupancy = 2;
    p.num_sms = 80;
    return p;
  }
  throw ConfigError("unknown attention preset 'attn:" + name + "'");
}

std::vector<std::string> attention_preset_names() {
  std::vector<std::string> v{"attn:toy"};
  for (Count b : kAttnBatches) v.push_back("attn:" + std::to_string(b));
  return v;
}

Scenario attention_scenario(const AttentionParams& p, const SyncPolicy& second, Mode mode,
                            const Options& options, const CostModel& cost) {
  if (p.gemm1_grid.y % 3 != 0)
    throw ConfigError("GeMM1 grid.y must be divisible by 3 (XQ, XK, XV slices)");
  const Count stride = p.gemm1_grid.y / 3;
  Scenario s;
  s.name = "attn:B" + std::to_string(p.batch);
  s.gpu = {p.num_sms};
  const Count gemm1_k = (8 * p.gemm1_grid.y) % 3 == 0 ? 8 * p.gemm1_grid.y / 3 : p.gemm1_grid.y;
  s.stages.push_back(
      make_stage("gemm1", p.gemm1_grid, p.occupancy, gemm1_k, StridedRowMajor{stride}));
  s.stages.push_back(make_stage("dot", p.dot_grid, p.occupancy, 1));
  s.stages.push_back(make_stage("gemm2", p.gemm2_grid, p.occupancy, p.dot_grid.y));
  s.deps.push_back({0, 1, Operand::A, StridedSync{stride}});
  s.deps.push_back({1, 2, Operand::A, second});
  s.cost = cost;
  s.mode = mode;
  s.options = options;
  validate(s);
  return s;
}

ConvPairParams conv_preset(const std::string& batch) {
  for (const auto& r : kConvRows) {
    if (batch != std::to_string(r.batch)) continue;
    ConvPairParams p;
    p.batch = r.batch;
    p.grid = r.grid;
    return p;
  }
  throw ConfigError("unknown conv preset 'conv128:" + batch + "'");
}

std::vector<std::string> conv_preset_names() {
  std::vector<std::string> v;
  for (const auto& r : kConvRows) v.push_back("conv128:" + std::to_string(r.batch));
  return v;
}

Scenario conv_pair_scenario(const ConvPairParams& p, const SyncPolicy& policy, Mode mode,
                            const Options& options, const CostModel& cost) {
  if (p.grid.total() < 1 || p.filter < 1) throw ConfigError("conv parameters must be >= 1");
  const Count kk = p.filter * p.filter;
  Scenario s;
  s.name = "conv" + std::to_string(p.channels) + ":B" + std::to_string(p.batch);
  s.gpu = {p.num_sms};
  // implicit GeMM: the k dimension of the consumer covers each input
  // column tile K*K times
  s.stages.push_back(make_stage("conv1", p.grid, p.occupancy, p.grid.y * kk));
  s.stages.push_back(make_stage("conv2", p.grid, p.occupancy, p.grid.y * kk));
  SyncPolicy pol = policy;
  if (auto* c = std::get_if<Conv2DTileSync>(&pol)) c->kk = kk;
  s.deps.push_back({0, 1, Operand::A, pol});
  s.cost = cost;
  s.mode = mode;
  s.options = options;
  validate(s);
  return s;
}

Scenario fig2_scenario(const SyncPolicy& policy, Mode mode, const Options& options,
                       const CostModel& cost) {
  Scenario s;
  s.name = "fig2";
  s.gpu = {4};
  s.stages.push_back(make_stage("producer", {3, 2, 1}, 1, 2));
  s.stages.push_back(make_stage("consumer", {3, 2, 1}, 1, 2));
  s.deps.push_back({0, 1, Operand::A, policy});
  s.cost = cost;
  s.mode = mode;
  s.options = options;
  validate(s);
  return s;
}

std::vector<PresetInfo> list_presets() {
  std::vector<PresetInfo> v;
  v.push_back({"fig2", "fig2", "row", {"tile", "row"},
               "two 3x2-tile GeMMs on 4 SMs, occupancy 1"});
  for (const auto& r : kMlpRows)
    v.push_back({std::string("mlp:") + r.name, "mlp", r.policy, {"tile", "row"},
                 "GPT-3 MLP GeMM pair, batch " + std::string(r.name) + ", grids " +
                     to_string(r.producer) + " / " + to_string(r.consumer) + ", occupancy " +
                     std::to_string(r.occupancy)});
  for (const auto& n : attention_preset_names()) {
    const auto p = attention_preset(n.substr(5));
    v.push_back({n, "attn", "strided", {"strided", "tile", "row"},
                 "self-attention GeMM1 -> dot -> GeMM2, grids " + to_string(p.gemm1_grid) +
                     " / " + to_string(p.dot_grid) + " / " + to_string(p.gemm2_grid)});
  }
  for (const auto& r : kConvRows)
    v.push_back({"conv128:" + std::to_string(r.batch), "conv128", r.policy,
                 {"conv2dtile", "row"},
                 "two 128-channel 3x3 Conv2Ds, batch " + std::to_string(r.batch) + ", grid " +
                     to_string(r.grid)});
  return v;
}

const PresetInfo& preset_info(const std::string& name) {
  static const std::vector<PresetInfo> presets = list_presets();
  for (const auto& p : presets)
    if (p.name == name) return p;
  throw ConfigError("unknown preset '" + name + "'");
}

Scenario preset_scenario(const std::string& name, const std::string& policy, Mode mode,
                         const Options& options, const CostModel& cost) {
  const PresetInfo& info = preset_info(name);
  const SyncPolicy pol = parse_policy(policy, info);
  Scenario s;
  if (info.family == "fig2") {
    s = fig2_scenario(pol, mode, options, cost);
  } else if (info.family == "mlp") {
    s = mlp_scenario(mlp_preset(name.substr(4)), pol, mode, options, cost);
  } else if (info.family == "attn") {
    s = attention_scenario(attention_preset(name.substr(5)), pol, mode, options, cost);
  } else {
    s = conv_pair_scenario(conv_preset(name.substr(8)), pol, mode, options, cost);
  }
  s.name = name;
  return s;
}

}  // namespace tilesync
