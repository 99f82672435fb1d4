#include "tilesync/scenario.hpp"

#include <queue>

namespace tilesync {

void validate(const CostModel& cost) {
  if (cost.load_cost < 0 || cost.compute_cost < 0 || cost.sync_overhead < 0 ||
      cost.epilogue_cost < 0)
    throw ConfigError("cost model values must be >= 0");
  if (2 * cost.load_cost + cost.compute_cost < 1)
    throw ConfigError("a k-step must take at least one time unit (2*load + compute >= 1)");
}

std::string to_string(Mode m) { return m == Mode::StreamSync ? "stream" : "fine"; }

std::string to_string(WaitKernel w) {
  switch (w) {
    case WaitKernel::On: return "on";
    case WaitKernel::Off: return "off";
    case WaitKernel::Auto: return "auto";
  }
  return "?";
}

std::string to_string(Operand o) { return o == Operand::A ? "A" : "B"; }

std::vector<std::size_t> topological_order(std::size_t num_stages,
                                           const std::vector<Dependency>& deps) {
  std::vector<std::size_t> indegree(num_stages, 0);
  std::vector<std::vector<std::size_t>> out(num_stages);
  for (const auto& d : deps) {
    out[d.producer].push_back(d.consumer);
    ++indegree[d.consumer];
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < num_stages; ++i)
    if (indegree[i] == 0) ready.push(i);
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    const auto i = ready.top();
    ready.pop();
    order.push_back(i);
    for (auto j : out[i])
      if (--indegree[j] == 0) ready.push(j);
  }
  if (order.size() != num_stages) throw ConfigError("cyclic dependency between stages");
  return order;
}

void validate(const Scenario& s) {
  validate(s.gpu);
  validate(s.cost);
  if (s.stages.empty()) throw ConfigError("scenario has no stages");
  for (const auto& st : s.stages) {
    const auto& k = st.kernel;
    validate(k.grid);
    if (k.occupancy < 1) throw ConfigError("stage '" + k.id + "': occupancy must be >= 1");
    if (k.k_steps < 1) throw ConfigError("stage '" + k.id + "': k_steps must be >= 1");
    validate_order(st.order, k.grid);
  }
  for (const auto& d : s.deps) {
    if (d.producer >= s.stages.size() || d.consumer >= s.stages.size())
      throw ConfigError("dependency refers to an unknown stage");
    if (d.producer == d.consumer) throw ConfigError("stage cannot depend on itself");
    const auto& p = s.stages[d.producer].kernel;
    const auto& c = s.stages[d.consumer].kernel;
    try {
      validate_policy_for_consumer(d.policy, p.grid, c.grid, c.k_steps);
    } catch (const ConfigError& e) {
      throw ConfigError("dependency " + p.id + " -> " + c.id + ": " + e.what());
    }
  }
  topological_order(s.stages.size(), s.deps);
}

Count total_tbs(const Scenario& s) {
  Count n = 0;
  for (const auto& st : s.stages) n += st.kernel.grid.total();
  return n;
}

}  // namespace tilesync
