#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tilesync/scenario.hpp"
#include "tilesync/sim_engine.hpp"

namespace tilesync {

// Producer tiles whose posts a consumer tile needs before the reads of one
// k-step. All z-slices of a producer tile are listed individually.
struct DagRequirement {
  int dep = 0;
  std::size_t producer_stage = 0;
  std::size_t consumer_stage = 0;
  TileCoord consumer;
  Count k_step = 0;
  std::vector<TileCoord> producers;
};

struct DepEdge {
  int dep = 0;
  std::size_t producer_stage = 0;
  TileCoord producer;
  std::size_t consumer_stage = 0;
  TileCoord consumer;
  Count k_step = 0;
};

struct DepDag {
  std::vector<Dim3> stage_grids;
  std::vector<DagRequirement> requirements;

  std::size_t edge_count() const;
  std::vector<DepEdge> edges() const;
};

// Built from the policy definitions directly; does not consult the
// semaphore mapping used by the engine.
DepDag build_dep_dag(const Scenario& scenario);

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Violation {
  std::size_t stage = 0;
  TileCoord tile;
  Count k_step = 0;
  int dep = 0;
  std::string message;
};

// Empty result means the trace honours every dependency. Throws
// ValidationError when the trace itself is malformed.
std::vector<Violation> validate_trace(const SimTrace& trace, const DepDag& dag);

constexpr Count kReferenceTileCap = 256;

// Time-stepped list scheduler with the engine's arbitration, readiness taken
// from the dependency DAG. Returns nullopt when the schedule stalls.
// Throws DomainError above kReferenceTileCap total tiles.
std::optional<Time> reference_makespan(const Scenario& scenario);

}  // namespace tilesync
