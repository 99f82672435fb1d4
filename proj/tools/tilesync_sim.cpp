// Command-line front end for the tile-synchronization simulator.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "tilesync/io.hpp"
#include "tilesync/oracle.hpp"
#include "tilesync/random_scenario.hpp"
#include "tilesync/report.hpp"
#include "tilesync/workloads.hpp"

using namespace tilesync;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDeadlock = 3;

struct CommonFlags {
  std::string preset;
  std::string config;
  std::string policy;
  std::string wait_kernel = "on";
  bool reorder_loads = false;
  bool adversarial = false;
  std::optional<Time> load, compute, sync_overhead, epilogue;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool scenario_source = true) {
  if (scenario_source) {
    auto* p = cmd->add_option("--preset", f.preset, "Preset name (see list-presets)");
    auto* c = cmd->add_option("--config", f.config, "Scenario config file (JSON)");
    p->excludes(c);
  }
  const std::map<std::string, std::string> aliases{
      {"tilesync", "tile"}, {"rowsync", "row"}, {"stridedsync", "strided"},
      {"conv2dtilesync", "conv2dtile"}, {"tile", "tile"}, {"row", "row"},
      {"strided", "strided"}, {"conv2dtile", "conv2dtile"}};
  cmd->add_option("--policy", f.policy, "tile, row, strided or conv2dtile")
      ->transform(CLI::CheckedTransformer(aliases, CLI::ignore_case));
  auto* wk = cmd->add_option("--wait-kernel", f.wait_kernel, "Wait-kernel gate: on, off or auto")
                 ->check(CLI::IsMember({"on", "off", "auto"}));
  cmd->add_flag_callback("--no-wait-kernel", [&f] { f.wait_kernel = "off"; },
                         "Same as --wait-kernel off")
      ->excludes(wk);
  cmd->add_flag("--reorder-loads", f.reorder_loads, "Overlap the independent load with waiting");
  cmd->add_flag("--adversarial-order", f.adversarial, "Launch consumer stages before producers");
  cmd->add_option("--load-cost", f.load, "Cost units per operand load per k-step");
  cmd->add_option("--compute-cost", f.compute, "Cost units per k-step compute");
  cmd->add_option("--sync-overhead", f.sync_overhead, "Cost units per wait check and post");
  cmd->add_option("--epilogue-cost", f.epilogue, "Cost units per tile epilogue");
}

Options options_from(const CommonFlags& f) {
  Options o;
  o.wait_kernel = f.wait_kernel == "off" ? WaitKernel::Off
                  : f.wait_kernel == "auto" ? WaitKernel::Auto
                                            : WaitKernel::On;
  o.reorder_loads = f.reorder_loads;
  o.adversarial_order = f.adversarial;
  return o;
}

CostModel cost_from(const CommonFlags& f, CostModel c = {}) {
  if (f.load) c.load_cost = *f.load;
  if (f.compute) c.compute_cost = *f.compute;
  if (f.sync_overhead) c.sync_overhead = *f.sync_overhead;
  if (f.epilogue) c.epilogue_cost = *f.epilogue;
  return c;
}

// Options given on the command line override the config file's.
Scenario build_scenario(const CommonFlags& f, Mode mode, const CLI::App* cmd) {
  if (!f.preset.empty())
    return preset_scenario(f.preset, f.policy, mode, options_from(f), cost_from(f));
  if (f.config.empty()) throw ConfigError("one of --preset or --config is required");
  Scenario s = load_scenario(f.config);
  s.mode = mode;
  s.cost = cost_from(f, s.cost);
  if (cmd->count("--wait-kernel") || cmd->count("--no-wait-kernel"))
    s.options.wait_kernel = options_from(f).wait_kernel;
  if (f.reorder_loads) s.options.reorder_loads = true;
  if (f.adversarial) s.options.adversarial_order = true;
  if (!f.policy.empty()) throw ConfigError("--policy applies to presets; set policies in the config");
  validate(s);
  return s;
}

std::vector<Mode> modes_from(const std::string& m) {
  if (m == "stream") return {Mode::StreamSync};
  if (m == "fine") return {Mode::FineGrained};
  return {Mode::StreamSync, Mode::FineGrained};
}

void ensure_writable(const std::string& path) {
  if (path.empty()) return;
  std::ofstream probe(path, std::ios::app);
  if (!probe) throw ConfigError("cannot write '" + path + "'");
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << content;
}

std::string mode_path(const std::string& path, Mode m, bool several) {
  if (!several) return path;
  std::filesystem::path p(path);
  const auto ext = p.extension().string();
  p.replace_extension();
  return p.string() + "." + to_string(m) + ext;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event simulator for fine-grained inter-kernel tile synchronization"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  std::string run_mode = "fine", trace_path, csv_path, metrics_path;
  bool expect_deadlock = false;
  auto* run = app.add_subcommand("run", "Simulate one scenario in one or both modes");
  add_common(run, run_flags);
  run->add_option("--mode", run_mode, "stream, fine or both")
      ->check(CLI::IsMember({"stream", "fine", "both"}));
  run->add_option("--trace", trace_path, "Write the event trace (JSON lines)");
  run->add_option("--csv", csv_path, "Write metric rows as CSV");
  run->add_option("--metrics", metrics_path, "Write flat metrics JSON");
  run->add_flag("--expect-deadlock", expect_deadlock, "Succeed only if the run deadlocks");

  CommonFlags cmp_flags;
  std::string suite, cmp_csv;
  auto* compare = app.add_subcommand("compare", "StreamSync versus fine-grained per preset");
  add_common(compare, cmp_flags);
  compare->add_option("--suite", suite, "table5, table7 or all");
  compare->add_option("--csv", cmp_csv, "Write the comparison as CSV");

  CommonFlags sw_flags;
  std::vector<std::string> sw_presets, sw_policies{""}, sw_modes{"fine"}, sw_reorder{"off"},
      sw_wait{"on"};
  std::string sw_suite, sw_csv;
  auto* sw = app.add_subcommand("sweep", "Cartesian sweep, one CSV row per run");
  add_common(sw, sw_flags, false);
  sw->add_option("--presets", sw_presets, "Presets to sweep")->delimiter(',');
  sw->add_option("--suite", sw_suite, "Sweep a preset suite instead");
  sw->add_option("--policies", sw_policies, "Policy axis")->delimiter(',');
  sw->add_option("--modes", sw_modes, "Mode axis (stream, fine)")->delimiter(',');
  sw->add_option("--reorder-axis", sw_reorder, "Reorder-loads axis (on, off)")->delimiter(',');
  sw->add_option("--wait-kernel-axis", sw_wait, "Wait-kernel axis (on, off, auto)")->delimiter(',');
  sw->add_option("--csv", sw_csv, "Output CSV (stdout when omitted)");
  unsigned sw_threads = 0;
  sw->add_option("--threads", sw_threads, "Worker threads (default TILESYNC_SIM_THREADS)");

  CommonFlags val_flags;
  std::string val_trace;
  auto* val = app.add_subcommand("validate", "Check an exported trace against the dependency DAG");
  add_common(val, val_flags);
  val->add_option("--trace", val_trace, "Trace file to validate")->required();

  std::uint64_t seed = 1;
  std::size_t fuzz_count = 1000;
  auto* fuzz = app.add_subcommand("fuzz", "Seeded random scenarios checked against the oracle");
  fuzz->add_option("--seed", seed, "First seed");
  fuzz->add_option("--count", fuzz_count, "Number of scenarios");

  app.add_subcommand("list-presets", "List built-in presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (app.got_subcommand("list-presets")) {
      for (const auto& p : list_presets()) {
        std::string pols;
        for (const auto& x : p.policies) pols += (pols.empty() ? "" : ",") + x;
        std::cout << p.name << "  [" << p.default_policy << "; " << pols << "]  " << p.description
                  << '\n';
      }
      return kExitOk;
    }

    if (run->parsed()) {
      ensure_writable(csv_path);
      ensure_writable(metrics_path);
      const auto modes = modes_from(run_mode);
      std::vector<RunRow> rows;
      bool any_deadlock = false;
      for (Mode m : modes) {
        const Scenario s = build_scenario(run_flags, m, run);
        SimResult r = simulate(s);
        if (!trace_path.empty()) {
          std::ofstream out(mode_path(trace_path, m, modes.size() > 1));
          if (!out) throw ConfigError("cannot write trace '" + trace_path + "'");
          write_trace(out, r.trace, s.name);
        }
        RunRow row{s.name, m, m == Mode::StreamSync ? "stream" : policy_label(s), r.metrics};
        any_deadlock = any_deadlock || r.metrics.deadlock;
        std::cout << render_run_text(row);
        if (!metrics_path.empty())
          write_file(mode_path(metrics_path, m, modes.size() > 1), metrics_to_json(r.metrics) + "\n");
        rows.push_back(std::move(row));
      }
      if (!csv_path.empty()) {
        std::ostringstream os;
        os << kCsvHeader << '\n';
        for (const auto& row : rows)
          for (const auto& l : csv_lines(row)) os << l << '\n';
        write_file(csv_path, os.str());
      }
      if (expect_deadlock) return any_deadlock ? kExitOk : kExitFailure;
      return any_deadlock ? kExitDeadlock : kExitOk;
    }

    if (compare->parsed()) {
      std::vector<ComparisonRow> rows;
      if (!suite.empty()) {
        for (const auto& p : suite_presets(suite))
          rows.push_back(compare_preset(p, cmp_flags.policy, options_from(cmp_flags), cost_from(cmp_flags)));
      } else {
        rows.push_back(compare_scenario(build_scenario(cmp_flags, Mode::FineGrained, compare)));
      }
      std::cout << render_comparison_text(rows);
      if (!cmp_csv.empty()) write_file(cmp_csv, render_comparison_csv(rows));
      return kExitOk;
    }

    if (sw->parsed()) {
      SweepConfig cfg;
      cfg.presets = sw_suite.empty() ? sw_presets : suite_presets(sw_suite);
      cfg.policies = sw_policies;
      cfg.modes.clear();
      for (const auto& m : sw_modes) {
        if (m != "stream" && m != "fine") throw ConfigError("mode axis accepts stream, fine");
        cfg.modes.push_back(m == "stream" ? Mode::StreamSync : Mode::FineGrained);
      }
      cfg.reorder_loads.clear();
      for (const auto& r : sw_reorder) {
        if (r != "on" && r != "off") throw ConfigError("reorder axis accepts on, off");
        cfg.reorder_loads.push_back(r == "on");
      }
      cfg.wait_kernel.clear();
      for (const auto& w : sw_wait) {
        CommonFlags tmp;
        tmp.wait_kernel = w;
        if (w != "on" && w != "off" && w != "auto") throw ConfigError("wait-kernel axis accepts on, off, auto");
        cfg.wait_kernel.push_back(options_from(tmp).wait_kernel);
      }
      cfg.cost = cost_from(sw_flags);
      cfg.threads = sw_threads;
      const auto rows = sweep(cfg);
      std::ostringstream os;
      os << kCsvHeader << '\n';
      for (const auto& r : rows) os << csv_combined_line(r) << '\n';
      if (sw_csv.empty())
        std::cout << os.str();
      else
        write_file(sw_csv, os.str());
      return kExitOk;
    }

    if (val->parsed()) {
      std::ifstream in(val_trace);
      if (!in) throw ConfigError("cannot open trace '" + val_trace + "'");
      const SimTrace trace = read_trace(in);
      const Scenario s = build_scenario(val_flags, trace.mode, val);
      const auto violations = validate_trace(trace, build_dep_dag(s));
      for (const auto& v : violations)
        std::cout << "violation: stage " << s.stages[v.stage].kernel.id << " tile "
                  << to_string(v.tile) << " k_step " << v.k_step << ": " << v.message << '\n';
      std::cout << violations.size() << " violation(s) in " << trace.events.size() << " events\n";
      return violations.empty() ? kExitOk : kExitFailure;
    }

    if (fuzz->parsed()) {
      std::size_t failures = 0, deadlocks = 0;
      for (std::size_t i = 0; i < fuzz_count; ++i) {
        const Scenario s = random_scenario(seed + i);
        const SimResult r = simulate(s);
        const auto violations = validate_trace(r.trace, build_dep_dag(s));
        const auto ref = reference_makespan(s);
        deadlocks += r.metrics.deadlock;
        const bool ok = !r.metrics.deadlock && violations.empty() && ref && *ref == r.metrics.makespan;
        if (!ok) {
          ++failures;
          std::cout << "seed " << seed + i << ": deadlock=" << r.metrics.deadlock
                    << " violations=" << violations.size() << " makespan=" << r.metrics.makespan
                    << " reference=" << (ref ? std::to_string(*ref) : "stall") << '\n';
        }
      }
      std::cout << fuzz_count << " scenarios, " << failures << " failure(s), " << deadlocks
                << " deadlock(s)\n";
      return failures ? kExitFailure : kExitOk;
    }
  } catch (const ValidationError& e) {
    std::cerr << "malformed trace: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
