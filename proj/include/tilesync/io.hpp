#pragma once

#include <iosfwd>
#include <string>

#include "tilesync/scenario.hpp"
#include "tilesync/sim_engine.hpp"

namespace tilesync {

constexpr int kConfigSchemaVersion = 1;
constexpr int kTraceFormatVersion = 1;

// Scenario config files are JSON with a required "schema_version" field.
// Unknown keys are rejected with ConfigError.
Scenario scenario_from_json(const std::string& text);
Scenario load_scenario(const std::string& path);
std::string scenario_to_json(const Scenario& s);

SyncPolicy parse_policy_name(const std::string& name, Count param = 0);

// Line-delimited trace: a header line followed by one JSON object per event.
void write_trace(std::ostream& out, const SimTrace& trace, const std::string& scenario_name);
SimTrace read_trace(std::istream& in);

// Flat key/value JSON object ("stage.<id>.waves_frac", "makespan", ...).
std::string metrics_to_json(const Metrics& m);

}  // namespace tilesync
