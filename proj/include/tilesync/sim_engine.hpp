#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "tilesync/scenario.hpp"

namespace tilesync {

enum class EventKind { Scheduled, WaitBegin, WaitEnd, Post, Finished };

std::string to_string(EventKind k);
EventKind event_kind_from_string(const std::string& s);

// One trace record. `sem`/`value` carry the semaphore index and the expected
// value (waits) or the post-increment value (posts); `dep` is the index of
// the dependency involved. Unused fields stay at -1.
struct Event {
  Time time = 0;
  Count tb = 0;
  std::size_t stage = 0;
  EventKind kind = EventKind::Scheduled;
  TileCoord tile;
  Count k_step = -1;
  int dep = -1;
  Count sem = -1;
  Count value = -1;

  friend bool operator==(const Event&, const Event&) = default;
};

struct SimTrace {
  Mode mode = Mode::FineGrained;
  std::vector<Event> events;

  friend bool operator==(const SimTrace&, const SimTrace&) = default;
};

struct StageMetrics {
  std::string id;
  Dim3 grid;
  Count occupancy = 1;
  Rational waves_frac;
  Count waves_ceil = 0;
  Rational utilization;  // percent
  Count generations = 0;  // simulated wave generations spanned by this stage
  Time makespan = 0;      // finish time of the stage's last TB
  Time total_wait = 0;

  friend bool operator==(const StageMetrics&, const StageMetrics&) = default;
};

struct Metrics {
  std::vector<StageMetrics> stages;
  // StreamSync: waves_ceil is the sum of per-stage ceilings.
  // FineGrained: waves_ceil is the ceiling of the summed fractional waves.
  Rational waves_frac;
  Count waves_ceil = 0;
  Rational utilization;
  Count generations = 0;
  std::vector<Count> tbs_per_generation;
  Time makespan = 0;  // stall time when deadlocked
  Time total_wait = 0;
  bool deadlock = false;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

struct SimResult {
  SimTrace trace;
  Metrics metrics;
  std::vector<SemaphoreArray> semaphores;  // final values, one array per dependency
};

// True when both kernels fit in one combined wave, so every producer TB is
// guaranteed a slot and the wait kernel can be skipped.
bool avoid_wait_kernel(const KernelSpec& producer, const KernelSpec& consumer,
                       const GpuConfig& gpu);

// Producer stages that must have started before `stage` may be dispatched.
std::vector<std::size_t> wait_kernel_gate(const Scenario& scenario, std::size_t stage);

// Duration of one k-step that spent `wait_time` blocked on its dependent
// operand. With reordering the independent operand's load overlaps the wait.
Time reorder_loads_effect(const CostModel& cost, Time wait_time, bool reorder_loads);

struct EngineState {
  bool queue_empty = true;
  Count unfinished = 0;
  Count resident = 0;
  Count resident_blocked = 0;
  bool grant_possible = false;
};

bool detect_deadlock(const EngineState& state);

SimResult simulate(const Scenario& scenario);

// Per-dependency semaphore totals implied by the policy: every producer tile
// slice posts once to its target.
std::vector<std::vector<Count>> expected_semaphore_totals(const Scenario& scenario);

}  // namespace tilesync
