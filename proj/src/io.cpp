#include "tilesync/io.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tilesync/oracle.hpp"

namespace tilesync {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  return it->get<T>();
}

Dim3 parse_dim3(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || j.size() > 3)
    throw ConfigError(where + ": grid must be an array of 1-3 integers");
  Dim3 d;
  d.x = j[0].get<Count>();
  if (j.size() > 1) d.y = j[1].get<Count>();
  if (j.size() > 2) d.z = j[2].get<Count>();
  return d;
}

TileOrder parse_order(const json& j) {
  if (j.is_string() && j == "row_major") return RowMajor{};
  if (j.is_object() && j.size() == 1 && j.contains("strided_row_major"))
    return StridedRowMajor{j["strided_row_major"].get<Count>()};
  throw ConfigError("order must be \"row_major\" or {\"strided_row_major\": stride}");
}

json order_json(const TileOrder& o) {
  if (const auto* s = std::get_if<StridedRowMajor>(&o)) return {{"strided_row_major", s->stride}};
  return "row_major";
}

SyncPolicy parse_policy_json(const json& j) {
  if (j.is_string()) return parse_policy_name(j.get<std::string>());
  if (j.is_object() && j.size() == 1) {
    const auto it = j.begin();
    return parse_policy_name(it.key(), it.value().get<Count>());
  }
  throw ConfigError("policy must be a name or {name: parameter}");
}

json policy_json(const SyncPolicy& p) {
  if (std::holds_alternative<TileSync>(p)) return "tile";
  if (std::holds_alternative<RowSync>(p)) return "row";
  if (const auto* s = std::get_if<StridedSync>(&p)) return {{"strided", s->stride}};
  return {{"conv2dtile", std::get<Conv2DTileSync>(p).kk}};
}

WaitKernel parse_wait_kernel(const std::string& s) {
  if (s == "on") return WaitKernel::On;
  if (s == "off") return WaitKernel::Off;
  if (s == "auto") return WaitKernel::Auto;
  throw ConfigError("wait_kernel must be on, off or auto");
}

Mode parse_mode(const std::string& s) {
  if (s == "stream") return Mode::StreamSync;
  if (s == "fine") return Mode::FineGrained;
  throw ConfigError("mode must be stream or fine");
}

}  // namespace

SyncPolicy parse_policy_name(const std::string& name, Count param) {
  if (name == "tile") return TileSync{};
  if (name == "row") return RowSync{};
  if (name == "strided") {
    if (param < 1) throw ConfigError("strided policy needs a stride >= 1");
    return StridedSync{param};
  }
  if (name == "conv2dtile") return Conv2DTileSync{param < 1 ? 9 : param};
  throw ConfigError("unknown policy '" + name + "'");
}

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    check_keys(j,
               {"schema_version", "name", "num_sms", "mode", "stages", "dependencies", "cost",
                "options"},
               "config");
    if (!j.contains("schema_version") || j["schema_version"] != kConfigSchemaVersion)
      throw ConfigError("config: schema_version must be " + std::to_string(kConfigSchemaVersion));
    Scenario s;
    s.name = get_or<std::string>(j, "name", "custom");
    s.gpu.num_sms = j.at("num_sms").get<Count>();
    s.mode = parse_mode(get_or<std::string>(j, "mode", "fine"));
    std::map<std::string, std::size_t> index;
    for (const auto& st : j.at("stages")) {
      check_keys(st, {"id", "grid", "occupancy", "k_steps", "order", "priority"}, "stage");
      Stage stage;
      stage.kernel.id = st.at("id").get<std::string>();
      stage.kernel.grid = parse_dim3(st.at("grid"), "stage '" + stage.kernel.id + "'");
      stage.kernel.occupancy = get_or<Count>(st, "occupancy", 1);
      stage.kernel.k_steps = get_or<Count>(st, "k_steps", 1);
      if (st.contains("order")) stage.order = parse_order(st["order"]);
      stage.priority = get_or<int>(st, "priority", 0);
      if (!index.emplace(stage.kernel.id, s.stages.size()).second)
        throw ConfigError("duplicate stage id '" + stage.kernel.id + "'");
      s.stages.push_back(stage);
    }
    for (const auto& d : get_or<json>(j, "dependencies", json::array())) {
      check_keys(d, {"producer", "consumer", "operand", "policy"}, "dependency");
      Dependency dep;
      const auto p = index.find(d.at("producer").get<std::string>());
      const auto c = index.find(d.at("consumer").get<std::string>());
      if (p == index.end() || c == index.end())
        throw ConfigError("dependency names an unknown stage");
      dep.producer = p->second;
      dep.consumer = c->second;
      const auto op = get_or<std::string>(d, "operand", "A");
      if (op != "A" && op != "B") throw ConfigError("operand must be A or B");
      dep.operand = op == "A" ? Operand::A : Operand::B;
      dep.policy = parse_policy_json(d.at("policy"));
      s.deps.push_back(dep);
    }
    if (j.contains("cost")) {
      const auto& c = j["cost"];
      check_keys(c, {"load", "compute", "sync_overhead", "epilogue"}, "cost");
      s.cost.load_cost = get_or<Time>(c, "load", 1);
      s.cost.compute_cost = get_or<Time>(c, "compute", 1);
      s.cost.sync_overhead = get_or<Time>(c, "sync_overhead", 0);
      s.cost.epilogue_cost = get_or<Time>(c, "epilogue", 0);
    }
    if (j.contains("options")) {
      const auto& o = j["options"];
      check_keys(o, {"wait_kernel", "reorder_loads", "adversarial_order"}, "options");
      s.options.wait_kernel = parse_wait_kernel(get_or<std::string>(o, "wait_kernel", "on"));
      s.options.reorder_loads = get_or<bool>(o, "reorder_loads", false);
      s.options.adversarial_order = get_or<bool>(o, "adversarial_order", false);
    }
    validate(s);
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config schema violation: ") + e.what());
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str());
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["name"] = s.name;
  j["num_sms"] = s.gpu.num_sms;
  j["mode"] = to_string(s.mode);
  j["stages"] = json::array();
  for (const auto& st : s.stages) {
    const auto& k = st.kernel;
    j["stages"].push_back({{"id", k.id},
                           {"grid", {k.grid.x, k.grid.y, k.grid.z}},
                           {"occupancy", k.occupancy},
                           {"k_steps", k.k_steps},
                           {"order", order_json(st.order)},
                           {"priority", st.priority}});
  }
  j["dependencies"] = json::array();
  for (const auto& d : s.deps)
    j["dependencies"].push_back({{"producer", s.stages[d.producer].kernel.id},
                                 {"consumer", s.stages[d.consumer].kernel.id},
                                 {"operand", to_string(d.operand)},
                                 {"policy", policy_json(d.policy)}});
  j["cost"] = {{"load", s.cost.load_cost},
               {"compute", s.cost.compute_cost},
               {"sync_overhead", s.cost.sync_overhead},
               {"epilogue", s.cost.epilogue_cost}};
  j["options"] = {{"wait_kernel", to_string(s.options.wait_kernel)},
                  {"reorder_loads", s.options.reorder_loads},
                  {"adversarial_order", s.options.adversarial_order}};
  return j.dump(2);
}

void write_trace(std::ostream& out, const SimTrace& trace, const std::string& scenario_name) {
  out << json{{"format", "tilesync-trace"},
              {"version", kTraceFormatVersion},
              {"mode", to_string(trace.mode)},
              {"scenario", scenario_name}}
             .dump()
      << '\n';
  for (const auto& e : trace.events) {
    json j{{"time", e.time},
           {"stage", e.stage},
           {"tb", e.tb},
           {"kind", to_string(e.kind)},
           {"tile", {e.tile.x, e.tile.y, e.tile.z}}};
    if (e.k_step >= 0) j["k_step"] = e.k_step;
    if (e.dep >= 0) j["dep"] = e.dep;
    if (e.sem >= 0) j["sem"] = e.sem;
    if (e.value >= 0) j["value"] = e.value;
    out << j.dump() << '\n';
  }
}

SimTrace read_trace(std::istream& in) {
  SimTrace trace;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  try {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const json j = json::parse(line);
      if (!header) {
        if (j.value("format", "") != "tilesync-trace" || j.value("version", 0) != kTraceFormatVersion)
          throw ValidationError("missing or unsupported trace header");
        const auto mode = j.at("mode").get<std::string>();
        if (mode != "stream" && mode != "fine") throw ValidationError("unknown trace mode");
        trace.mode = mode == "stream" ? Mode::StreamSync : Mode::FineGrained;
        header = true;
        continue;
      }
      Event e;
      e.time = j.at("time").get<Time>();
      e.stage = j.at("stage").get<std::size_t>();
      e.tb = j.at("tb").get<Count>();
      e.kind = event_kind_from_string(j.at("kind").get<std::string>());
      const auto& t = j.at("tile");
      if (!t.is_array() || t.size() != 3) throw ValidationError("tile must have three indices");
      e.tile = {t[0].get<Count>(), t[1].get<Count>(), t[2].get<Count>()};
      e.k_step = j.value("k_step", Count{-1});
      e.dep = j.value("dep", -1);
      e.sem = j.value("sem", Count{-1});
      e.value = j.value("value", Count{-1});
      trace.events.push_back(e);
    }
  } catch (const json::exception& e) {
    throw ValidationError("trace line " + std::to_string(lineno) + ": " + e.what());
  } catch (const DomainError& e) {
    throw ValidationError("trace line " + std::to_string(lineno) + ": " + e.what());
  }
  if (!header) throw ValidationError("empty trace");
  return trace;
}

std::string metrics_to_json(const Metrics& m) {
  json j = json::object();
  for (const auto& s : m.stages) {
    const std::string p = "stage." + s.id + ".";
    j[p + "grid"] = to_string(s.grid);
    j[p + "occupancy"] = s.occupancy;
    j[p + "waves_frac"] = s.waves_frac.to_string(2);
    j[p + "waves_ceil"] = s.waves_ceil;
    j[p + "utilization_pct"] = s.utilization.to_string(2);
    j[p + "generations"] = s.generations;
    j[p + "makespan"] = s.makespan;
    j[p + "total_wait"] = s.total_wait;
  }
  j["waves_frac"] = m.waves_frac.to_string(2);
  j["waves_ceil"] = m.waves_ceil;
  j["utilization_pct"] = m.utilization.to_string(2);
  j["generations"] = m.generations;
  j["makespan"] = m.makespan;
  j["total_wait"] = m.total_wait;
  j["deadlock"] = m.deadlock;
  return j.dump(2);
}

}  // namespace tilesync
