#include "tilesync/report.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <sstream>
#include <thread>

#include "tilesync/workloads.hpp"

namespace tilesync {

std::string policy_label(const Scenario& s) {
  std::string label;
  for (const auto& d : s.deps) {
    if (!label.empty()) label += "/";
    std::string name = policy_name(d.policy);
    label += name.substr(0, name.find('('));
  }
  if (label.empty()) label = "none";
  if (s.mode == Mode::StreamSync) return label;
  std::string suffix;
  if (s.options.wait_kernel == WaitKernel::Auto) suffix += "W";
  if (s.options.wait_kernel == WaitKernel::Off) suffix += "N";
  if (s.options.reorder_loads) suffix += "R";
  return suffix.empty() ? label : label + "+" + suffix;
}

RunRow run_scenario(const Scenario& s) {
  RunRow row;
  row.preset = s.name;
  row.mode = s.mode;
  row.policy = s.mode == Mode::StreamSync ? "stream" : policy_label(s);
  row.metrics = simulate(s).metrics;
  return row;
}

namespace {

std::string join(const std::vector<std::string>& cols) {
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  return out;
}

}  // namespace

std::vector<std::string> csv_lines(const RunRow& row) {
  std::vector<std::string> lines;
  const auto& m = row.metrics;
  const std::string dl = m.deadlock ? "true" : "false";
  for (const auto& s : m.stages)
    lines.push_back(join({row.preset, to_string(row.mode), row.policy, s.id,
                          std::to_string(s.grid.x), std::to_string(s.grid.y),
                          std::to_string(s.grid.z), std::to_string(s.occupancy),
                          s.waves_frac.to_string(2), std::to_string(s.waves_ceil),
                          s.utilization.to_string(2), std::to_string(s.makespan),
                          std::to_string(s.total_wait), dl}));
  lines.push_back(csv_combined_line(row));
  return lines;
}

std::string csv_combined_line(const RunRow& row) {
  const auto& m = row.metrics;
  return join({row.preset, to_string(row.mode), row.policy, "all", "", "", "", "",
               m.waves_frac.to_string(2), std::to_string(m.waves_ceil),
               m.utilization.to_string(2), std::to_string(m.makespan),
               std::to_string(m.total_wait), m.deadlock ? "true" : "false"});
}

std::string render_run_text(const RunRow& row) {
  const auto& m = row.metrics;
  std::ostringstream os;
  os << row.preset << " [" << (row.mode == Mode::StreamSync ? "StreamSync" : "FineGrained")
     << ", " << row.policy << "]\n";
  os << "  " << std::left << std::setw(10) << "stage" << std::setw(12) << "grid" << std::setw(5)
     << "occ" << std::right << std::setw(8) << "waves" << std::setw(6) << "ceil" << std::setw(8)
     << "util%" << std::setw(6) << "gens" << std::setw(10) << "makespan" << std::setw(10)
     << "wait" << '\n';
  for (const auto& s : m.stages)
    os << "  " << std::left << std::setw(10) << s.id << std::setw(12) << to_string(s.grid)
       << std::setw(5) << s.occupancy << std::right << std::setw(8) << s.waves_frac.to_string(2)
       << std::setw(6) << s.waves_ceil << std::setw(8) << s.utilization.to_string(2)
       << std::setw(6) << s.generations << std::setw(10) << s.makespan << std::setw(10)
       << s.total_wait << '\n';
  os << "  " << std::left << std::setw(27) << "combined" << std::right << std::setw(8)
     << m.waves_frac.to_string(2) << std::setw(6) << m.waves_ceil << std::setw(8)
     << m.utilization.to_string(2) << std::setw(6) << m.generations << std::setw(10)
     << m.makespan << std::setw(10) << m.total_wait << '\n';
  os << "  wave generations:";
  for (auto n : m.tbs_per_generation) os << ' ' << n;
  os << "\n  deadlock: " << (m.deadlock ? "yes" : "no") << '\n';
  return os.str();
}

ComparisonRow compare_scenario(const Scenario& base) {
  Scenario stream = base;
  stream.mode = Mode::StreamSync;
  Scenario fine = base;
  fine.mode = Mode::FineGrained;
  const auto sm = simulate(stream).metrics;
  const auto fm = simulate(fine).metrics;
  ComparisonRow row;
  row.preset = base.name;
  row.policy = policy_label(fine);
  for (const auto& s : sm.stages) {
    row.grids.push_back(s.grid);
    row.stage_waves.push_back(s.waves_frac);
  }
  row.stream_waves = sm.waves_ceil;
  row.fine_waves = fm.waves_frac;
  row.stream_generations = sm.generations;
  row.fine_generations = fm.generations;
  row.stream_makespan = sm.makespan;
  row.fine_makespan = fm.makespan;
  row.fine_deadlock = fm.deadlock;
  return row;
}

ComparisonRow compare_preset(const std::string& preset, const std::string& policy,
                             const Options& fine_options, const CostModel& cost) {
  return compare_scenario(preset_scenario(preset, policy, Mode::FineGrained, fine_options, cost));
}

std::vector<std::string> suite_presets(const std::string& suite) {
  if (suite == "table5") return mlp_preset_names();
  if (suite == "table7") return conv_preset_names();
  if (suite == "all") {
    std::vector<std::string> v;
    for (const auto& p : list_presets()) v.push_back(p.name);
    return v;
  }
  throw ConfigError("unknown suite '" + suite + "' (table5, table7, all)");
}

namespace {

std::string grids_text(const ComparisonRow& r) {
  std::string g;
  for (std::size_t i = 0; i < r.grids.size(); ++i) g += (i ? " " : "") + to_string(r.grids[i]);
  return g;
}

std::string waves_text(const ComparisonRow& r, char sep) {
  std::string w;
  for (std::size_t i = 0; i < r.stage_waves.size(); ++i)
    w += (i ? std::string(1, sep) : "") + r.stage_waves[i].to_string(2);
  return w;
}

std::string fixed2(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

}  // namespace

std::string render_comparison_text(const std::vector<ComparisonRow>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(14) << "preset" << std::setw(30) << "grids" << std::setw(18)
     << "stage waves" << std::right << std::setw(8) << "SS wav" << std::setw(8) << "FG wav"
     << std::setw(8) << "SS gen" << std::setw(8) << "FG gen" << std::setw(10) << "SS time"
     << std::setw(10) << "FG time" << std::setw(8) << "gen x" << std::setw(8) << "time x"
     << "  policy\n";
  for (const auto& r : rows)
    os << std::left << std::setw(14) << r.preset << std::setw(30) << grids_text(r)
       << std::setw(18) << waves_text(r, '/') << std::right << std::setw(8) << r.stream_waves
       << std::setw(8) << r.fine_waves.to_string(2) << std::setw(8) << r.stream_generations
       << std::setw(8) << r.fine_generations << std::setw(10) << r.stream_makespan
       << std::setw(10) << (r.fine_deadlock ? std::string("stall") : std::to_string(r.fine_makespan))
       << std::setw(8) << fixed2(r.generation_ratio().to_double()) << std::setw(8)
       << fixed2(r.makespan_ratio()) << "  " << r.policy << '\n';
  return os.str();
}

std::string render_comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::ostringstream os;
  os << "preset,policy,grids,stage_waves,stream_waves,fine_waves,stream_generations,"
        "fine_generations,stream_makespan,fine_makespan,generation_ratio,makespan_ratio,fine_deadlock\n";
  for (const auto& r : rows)
    os << r.preset << ',' << r.policy << ',' << grids_text(r) << ',' << waves_text(r, ' ') << ','
       << r.stream_waves << ',' << r.fine_waves.to_string(2) << ',' << r.stream_generations << ','
       << r.fine_generations << ',' << r.stream_makespan << ',' << r.fine_makespan << ','
       << r.generation_ratio().num() << '/' << r.generation_ratio().den() << ',' << fixed2(r.makespan_ratio()) << ',' << (r.fine_deadlock ? "true" : "false") << '\n';
  return os.str();
}

unsigned sweep_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("TILESYNC_SIM_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<RunRow> sweep(const SweepConfig& cfg) {
  if (cfg.presets.empty() || cfg.policies.empty() || cfg.modes.empty() ||
      cfg.reorder_loads.empty() || cfg.wait_kernel.empty())
    throw ConfigError("sweep axis is empty");
  std::vector<Scenario> runs;
  for (const auto& preset : cfg.presets)
    for (const auto& policy : cfg.policies)
      for (Mode mode : cfg.modes)
        for (bool reorder : cfg.reorder_loads)
          for (WaitKernel wk : cfg.wait_kernel) {
            Options o;
            o.reorder_loads = reorder;
            o.wait_kernel = wk;
            runs.push_back(preset_scenario(preset, policy, mode, o, cfg.cost));
          }

  std::vector<RunRow> rows(runs.size());
  std::vector<std::exception_ptr> errors(runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      try {
        rows[i] = run_scenario(runs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::min<unsigned>(sweep_threads(cfg.threads),
                                        static_cast<unsigned>(std::max<std::size_t>(1, runs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

}  // namespace tilesync
