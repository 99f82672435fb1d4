#pragma once

#include <string>
#include <vector>

#include "tilesync/scenario.hpp"
#include "tilesync/sim_engine.hpp"

namespace tilesync {

// Stable CSV schema shared by run, compare --csv and sweep.
inline constexpr const char* kCsvHeader =
    "preset,mode,policy,stage,grid_x,grid_y,grid_z,occupancy,waves_frac,waves_ceil,"
    "utilization_pct,makespan,total_wait,deadlock";

// Label such as "row", "tile+W" (wait kernel auto) or "tile+WR" (also
// reordered loads).
std::string policy_label(const Scenario& s);

struct RunRow {
  std::string preset;
  Mode mode = Mode::FineGrained;
  std::string policy;
  Metrics metrics;
};

RunRow run_scenario(const Scenario& s);

// One line per stage followed by the combined "all" line.
std::vector<std::string> csv_lines(const RunRow& row);
std::string csv_combined_line(const RunRow& row);
std::string render_run_text(const RunRow& row);

struct ComparisonRow {
  std::string preset;
  std::string policy;
  std::vector<Dim3> grids;
  std::vector<Rational> stage_waves;
  Count stream_waves = 0;
  Rational fine_waves;
  Count stream_generations = 0;
  Count fine_generations = 0;
  Time stream_makespan = 0;
  Time fine_makespan = 0;
  bool fine_deadlock = false;

  Rational generation_ratio() const { return Rational(stream_generations, fine_generations); }
  double makespan_ratio() const {
    return fine_makespan ? static_cast<double>(stream_makespan) / fine_makespan : 0.0;
  }
};

ComparisonRow compare_preset(const std::string& preset, const std::string& policy,
                             const Options& fine_options, const CostModel& cost);
ComparisonRow compare_scenario(const Scenario& base);

// Suites: table5 (MLP), table7 (conv128), all.
std::vector<std::string> suite_presets(const std::string& suite);

std::string render_comparison_text(const std::vector<ComparisonRow>& rows);
std::string render_comparison_csv(const std::vector<ComparisonRow>& rows);

struct SweepConfig {
  std::vector<std::string> presets;
  std::vector<std::string> policies;  // "" means the preset default
  std::vector<Mode> modes{Mode::FineGrained};
  std::vector<bool> reorder_loads{false};
  std::vector<WaitKernel> wait_kernel{WaitKernel::On};
  CostModel cost;
  unsigned threads = 0;  // 0: TILESYNC_SIM_THREADS or hardware concurrency
};

// Cartesian product in config order, one combined row per run. Throws
// ConfigError when any axis is empty.
std::vector<RunRow> sweep(const SweepConfig& cfg);

unsigned sweep_threads(unsigned requested);

}  // namespace tilesync
