#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tilesync/gpu_model.hpp"
#include "tilesync/sync_policy.hpp"

namespace tilesync {

using Time = std::int64_t;

// Abstract time units. A k-step costs two operand loads plus one compute;
// sync_overhead is charged per wait check and per post.
struct CostModel {
  Time load_cost = 1;
  Time compute_cost = 1;
  Time sync_overhead = 0;
  Time epilogue_cost = 0;

  friend bool operator==(const CostModel&, const CostModel&) = default;
};

void validate(const CostModel& cost);

struct KernelSpec {
  std::string id;
  Dim3 grid;
  Count occupancy = 1;
  Count k_steps = 1;
};

struct Stage {
  KernelSpec kernel;
  TileOrder order = RowMajor{};
  // Higher priority streams are dispatched first.
  int priority = 0;
};

enum class Operand { A, B };

struct Dependency {
  std::size_t producer = 0;
  std::size_t consumer = 0;
  Operand operand = Operand::A;
  SyncPolicy policy = TileSync{};
};

enum class Mode { StreamSync, FineGrained };
enum class WaitKernel { On, Off, Auto };

struct Options {
  WaitKernel wait_kernel = WaitKernel::On;
  bool reorder_loads = false;
  // Launch consumer stages ahead of their producers (reverse invocation
  // order). Models the runtime picking the consumer kernel first.
  bool adversarial_order = false;
};

struct Scenario {
  std::string name;
  GpuConfig gpu;
  std::vector<Stage> stages;  // invocation order
  std::vector<Dependency> deps;
  CostModel cost;
  Mode mode = Mode::FineGrained;
  Options options;
};

std::string to_string(Mode m);
std::string to_string(WaitKernel w);
std::string to_string(Operand o);

// Throws ConfigError on any violated invariant, including cyclic
// dependencies and policy divisibility constraints.
void validate(const Scenario& s);

// Stage indices in a dependency-respecting order; throws ConfigError on a cycle.
std::vector<std::size_t> topological_order(std::size_t num_stages,
                                           const std::vector<Dependency>& deps);

Count total_tbs(const Scenario& s);

}  // namespace tilesync
