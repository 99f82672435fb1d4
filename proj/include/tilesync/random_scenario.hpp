#pragma once

#include <cstdint>

#include "tilesync/scenario.hpp"

namespace tilesync {

struct RandomScenarioLimits {
  std::size_t max_stages = 4;
  Count max_tiles_per_stage = 64;
  Count max_sms = 6;
  bool mixed_occupancy = true;
  bool random_costs = true;
  bool random_options = true;
};

// Acyclic multi-stage scenario drawn from `seed`. Stages share grid.x so any
// policy applies; k-step counts are chosen to satisfy every incoming policy.
// Wait kernel is on or auto, never off.
Scenario random_scenario(std::uint64_t seed, const RandomScenarioLimits& limits = {});

}  // namespace tilesync
