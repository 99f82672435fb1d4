#include "tilesync/sim_engine.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <queue>
#include <set>

namespace tilesync {

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::Scheduled: return "scheduled";
    case EventKind::WaitBegin: return "wait_begin";
    case EventKind::WaitEnd: return "wait_end";
    case EventKind::Post: return "post";
    case EventKind::Finished: return "finished";
  }
  return "?";
}

EventKind event_kind_from_string(const std::string& s) {
  if (s == "scheduled") return EventKind::Scheduled;
  if (s == "wait_begin") return EventKind::WaitBegin;
  if (s == "wait_end") return EventKind::WaitEnd;
  if (s == "post") return EventKind::Post;
  if (s == "finished") return EventKind::Finished;
  throw DomainError("unknown event kind '" + s + "'");
}

bool avoid_wait_kernel(const KernelSpec& producer, const KernelSpec& consumer,
                       const GpuConfig& gpu) {
  const Count min_occ = std::min(producer.occupancy, consumer.occupancy);
  return producer.grid.total() + consumer.grid.total() <= min_occ * gpu.num_sms;
}

std::vector<std::size_t> wait_kernel_gate(const Scenario& scenario, std::size_t stage) {
  std::vector<std::size_t> required;
  if (scenario.mode != Mode::FineGrained || scenario.options.wait_kernel == WaitKernel::Off)
    return required;
  // Auto skips a pair's gate only when every stage also fits in one combined
  // wave; otherwise an ungated stage could take slots ahead of a gated producer.
  Count all_tbs = 0, min_occ = scenario.stages.front().kernel.occupancy;
  for (const auto& st : scenario.stages) {
    all_tbs += st.kernel.grid.total();
    min_occ = std::min(min_occ, st.kernel.occupancy);
  }
  const bool all_fit = all_tbs <= min_occ * scenario.gpu.num_sms;
  for (const auto& d : scenario.deps) {
    if (d.consumer != stage) continue;
    if (scenario.options.wait_kernel == WaitKernel::Auto && all_fit &&
        avoid_wait_kernel(scenario.stages[d.producer].kernel, scenario.stages[stage].kernel,
                          scenario.gpu))
      continue;
    if (std::find(required.begin(), required.end(), d.producer) == required.end())
      required.push_back(d.producer);
  }
  return required;
}

Time reorder_loads_effect(const CostModel& cost, Time wait_time, bool reorder_loads) {
  if (reorder_loads)
    return std::max(wait_time, cost.load_cost) + cost.load_cost + cost.compute_cost;
  return wait_time + 2 * cost.load_cost + cost.compute_cost;
}

bool detect_deadlock(const EngineState& s) {
  return s.queue_empty && s.unfinished > 0 && s.resident_blocked == s.resident &&
         !s.grant_possible;
}

std::vector<std::vector<Count>> expected_semaphore_totals(const Scenario& scenario) {
  std::vector<std::vector<Count>> totals;
  for (const auto& d : scenario.deps) {
    const Dim3 g = scenario.stages[d.producer].kernel.grid;
    std::vector<Count> t(static_cast<std::size_t>(sem_count(d.policy, g)), 0);
    for (Count i = 0; i < g.total(); ++i)
      ++t[static_cast<std::size_t>(post_target(d.policy, delinearize(g, i), g))];
    totals.push_back(std::move(t));
  }
  return totals;
}

namespace {

enum class TbState { Waiting, Running, Done };

struct PendingWait {
  int dep;
  Wait wait;
  bool satisfied;
};

struct Tb {
  std::size_t stage = 0;
  Count id = 0;
  TileCoord tile;
  Count k_step = 0;
  Time step_start = 0;
  TbState state = TbState::Running;
  std::vector<PendingWait> waits;
  Count generation = 0;
};

struct StageRuntime {
  Count next = 0;  // tile counter
  Count finished = 0;
  Count resident = 0;
  bool launched = false;
  Count launch_seq = 0;
  std::vector<std::size_t> gate;
  std::vector<int> deps_in;
  std::vector<int> deps_out;
  Count base_id = 0;
  Time last_finish = 0;
  Time total_wait = 0;
  Count gen_min = std::numeric_limits<Count>::max();
  Count gen_max = 0;
};

enum class QueueKind { StepEnd, Finish };

struct QueueItem {
  Time time;
  Count seq;
  std::size_t tb;
  QueueKind kind;
  bool operator>(const QueueItem& o) const {
    return time != o.time ? time > o.time : seq > o.seq;
  }
};

class Engine {
 public:
  explicit Engine(const Scenario& s) : sc_(s) {
    validate(s);
    const std::size_t n = s.stages.size();
    stages_.resize(n);
    Count base = 0;
    for (std::size_t i = 0; i < n; ++i) {
      stages_[i].base_id = base;
      base += s.stages[i].kernel.grid.total();
      stages_[i].gate = wait_kernel_gate(s, i);
    }
    unfinished_ = base;
    for (std::size_t d = 0; d < s.deps.size(); ++d) {
      const auto& dep = s.deps[d];
      stages_[dep.consumer].deps_in.push_back(static_cast<int>(d));
      stages_[dep.producer].deps_out.push_back(static_cast<int>(d));
      sems_.emplace_back(sem_count(dep.policy, s.stages[dep.producer].kernel.grid));
    }
    base_order_.resize(n);
    for (std::size_t i = 0; i < n; ++i) base_order_[i] = i;
    if (s.mode == Mode::FineGrained && s.options.adversarial_order)
      std::reverse(base_order_.begin(), base_order_.end());
    trace_.mode = s.mode;
  }

  SimResult run() {
    Time now = 0;
    launch_ready(now);
    grant(now);
    while (!queue_.empty()) {
      now = queue_.top().time;
      while (!queue_.empty() && queue_.top().time == now) {
        const QueueItem item = queue_.top();
        queue_.pop();
        if (item.kind == QueueKind::StepEnd)
          end_step(item.tb, now);
        else
          finish(item.tb, now);
      }
      resolve_waits(now);
      launch_ready(now);
      grant(now);
    }
    stall_time_ = now;
    const bool deadlock = detect_deadlock(state());
    return collect(deadlock);
  }

  EngineState state() const {
    EngineState st;
    st.queue_empty = queue_.empty();
    st.unfinished = unfinished_;
    for (const auto& tb : tbs_) {
      if (tb.state == TbState::Done) continue;
      ++st.resident;
      if (tb.state == TbState::Waiting) ++st.resident_blocked;
    }
    st.grant_possible = next_candidate(true).has_value();
    return st;
  }

 private:
  bool stream_mode() const { return sc_.mode == Mode::StreamSync; }

  Count min_resident_occupancy() const {
    Count m = std::numeric_limits<Count>::max();
    for (std::size_t i = 0; i < stages_.size(); ++i)
      if (stages_[i].resident > 0) m = std::min(m, sc_.stages[i].kernel.occupancy);
    return m;
  }

  bool fits(std::size_t stage) const {
    const Count occ = std::min(min_resident_occupancy(), sc_.stages[stage].kernel.occupancy);
    return resident_ + 1 <= occ * sc_.gpu.num_sms;
  }

  bool gate_open(std::size_t stage) const {
    if (stream_mode()) return stage == 0 || stages_[stage - 1].finished ==
                                                 sc_.stages[stage - 1].kernel.grid.total();
    for (auto p : stages_[stage].gate)
      if (stages_[p].next == 0) return false;
    return true;
  }

  void launch_ready(Time) {
    for (auto i : base_order_) {
      if (stages_[i].launched || !gate_open(i)) continue;
      stages_[i].launched = true;
      stages_[i].launch_seq = launch_counter_++;
    }
  }

  // Highest-priority launched stage with undispatched TBs. Dispatch is
  // in-order: when that stage does not fit, nothing else is granted.
  std::optional<std::size_t> next_candidate(bool require_fit) const {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < stages_.size(); ++i) {
      const auto& rt = stages_[i];
      if (!rt.launched || rt.next >= sc_.stages[i].kernel.grid.total()) continue;
      if (!best) {
        best = i;
        continue;
      }
      const auto& b = stages_[*best];
      const int pi = sc_.stages[i].priority;
      const int pb = sc_.stages[*best].priority;
      if (pi > pb || (pi == pb && rt.launch_seq < b.launch_seq)) best = i;
    }
    if (best && require_fit && !fits(*best)) return std::nullopt;
    return best;
  }

  void grant(Time now) {
    while (auto cand = next_candidate(true)) {
      const std::size_t s = *cand;
      auto& rt = stages_[s];
      const auto& k = sc_.stages[s].kernel;
      Tb tb;
      tb.stage = s;
      tb.id = rt.base_id + rt.next;
      tb.tile = order_tile(sc_.stages[s].order, k.grid, rt.next);
      tb.generation = max_finished_generation_ + 1;
      ++rt.next;
      ++rt.resident;
      ++resident_;
      rt.gen_min = std::min(rt.gen_min, tb.generation);
      rt.gen_max = std::max(rt.gen_max, tb.generation);
      const std::size_t idx = tbs_.size();
      tbs_.push_back(tb);
      emit({now, tb.id, s, EventKind::Scheduled, tb.tile});
      begin_step(idx, now);
      launch_ready(now);
    }
  }

  void begin_step(std::size_t idx, Time now) {
    Tb& tb = tbs_[idx];
    tb.step_start = now;
    tb.waits.clear();
    if (!stream_mode()) {
      for (int d : stages_[tb.stage].deps_in) {
        const auto& dep = sc_.deps[static_cast<std::size_t>(d)];
        const Dim3 pg = sc_.stages[dep.producer].kernel.grid;
        const WaitSpec w = consumer_wait(dep.policy, tb.tile, tb.k_step, pg, pg.z);
        if (!w) continue;
        tb.waits.push_back({d, *w, false});
        emit({now, tb.id, tb.stage, EventKind::WaitBegin, tb.tile, tb.k_step, d, w->sem_index,
              w->expected});
      }
    }
    tb.state = TbState::Waiting;
    try_proceed(idx, now);
  }

  void try_proceed(std::size_t idx, Time now) {
    Tb& tb = tbs_[idx];
    bool all = true;
    for (auto& pw : tb.waits) {
      if (pw.satisfied) continue;
      if (sems_[static_cast<std::size_t>(pw.dep)].satisfied(pw.wait)) {
        pw.satisfied = true;
        emit({now, tb.id, tb.stage, EventKind::WaitEnd, tb.tile, tb.k_step, pw.dep,
              pw.wait.sem_index, pw.wait.expected});
      } else {
        all = false;
      }
    }
    if (!all) {
      waiting_.insert(idx);
      return;
    }
    waiting_.erase(idx);
    const Time blocked = now - tb.step_start;
    stages_[tb.stage].total_wait += blocked;
    const Time wait_time =
        blocked + static_cast<Time>(tb.waits.size()) * sc_.cost.sync_overhead;
    const Time dur = reorder_loads_effect(sc_.cost, wait_time, sc_.options.reorder_loads);
    tb.state = TbState::Running;
    push(tb.step_start + dur, idx, QueueKind::StepEnd);
  }

  void resolve_waits(Time now) {
    const std::vector<std::size_t> pending(waiting_.begin(), waiting_.end());
    for (auto i : pending) try_proceed(i, now);
  }

  void end_step(std::size_t idx, Time now) {
    Tb& tb = tbs_[idx];
    const auto& k = sc_.stages[tb.stage].kernel;
    if (tb.k_step + 1 < k.k_steps) {
      ++tb.k_step;
      begin_step(idx, now);
      return;
    }
    const Count posts = stream_mode() ? 0 : static_cast<Count>(stages_[tb.stage].deps_out.size());
    const Time done = now + sc_.cost.epilogue_cost + posts * sc_.cost.sync_overhead;
    if (done == now)
      finish(idx, now);
    else
      push(done, idx, QueueKind::Finish);
  }

  void finish(std::size_t idx, Time now) {
    Tb& tb = tbs_[idx];
    auto& rt = stages_[tb.stage];
    if (!stream_mode()) {
      for (int d : rt.deps_out) {
        const auto& dep = sc_.deps[static_cast<std::size_t>(d)];
        const Count target = post_target(dep.policy, tb.tile, sc_.stages[tb.stage].kernel.grid);
        const Count v = sems_[static_cast<std::size_t>(d)].post(target);
        emit({now, tb.id, tb.stage, EventKind::Post, tb.tile, -1, d, target, v});
      }
    }
    emit({now, tb.id, tb.stage, EventKind::Finished, tb.tile});
    tb.state = TbState::Done;
    --rt.resident;
    --resident_;
    ++rt.finished;
    --unfinished_;
    rt.last_finish = now;
    max_finished_generation_ = std::max(max_finished_generation_, tb.generation);
  }

  void push(Time t, std::size_t idx, QueueKind kind) {
    queue_.push({t, queue_seq_++, idx, kind});
  }

  void emit(Event e) { trace_.events.push_back(e); }

  SimResult collect(bool deadlock) {
    Metrics m;
    m.deadlock = deadlock;
    Time makespan = 0;
    for (std::size_t i = 0; i < stages_.size(); ++i) {
      const auto& k = sc_.stages[i].kernel;
      auto& rt = stages_[i];
      StageMetrics sm;
      sm.id = k.id;
      sm.grid = k.grid;
      sm.occupancy = k.occupancy;
      const auto w = waves(k.grid.total(), sc_.gpu, k.occupancy);
      sm.waves_frac = w.fractional;
      sm.waves_ceil = w.ceil;
      sm.utilization = utilization(k.grid.total(), sc_.gpu, k.occupancy);
      sm.generations = rt.gen_max == 0 ? 0 : rt.gen_max - rt.gen_min + 1;
      sm.makespan = rt.last_finish;
      // blocked TBs at a stall still count their wait so far
      for (const auto& tb : tbs_)
        if (tb.stage == i && tb.state == TbState::Waiting) rt.total_wait += stall_time_ - tb.step_start;
      sm.total_wait = rt.total_wait;
      m.waves_frac += sm.waves_frac;
      m.total_wait += sm.total_wait;
      if (stream_mode()) m.waves_ceil += sm.waves_ceil;
      makespan = std::max(makespan, rt.last_finish);
      m.stages.push_back(sm);
    }
    if (!stream_mode()) m.waves_ceil = m.waves_frac.ceil();
    m.utilization = m.waves_frac * Rational(100) / Rational(m.waves_ceil);
    for (const auto& tb : tbs_) {
      m.generations = std::max(m.generations, tb.generation);
      if (static_cast<Count>(m.tbs_per_generation.size()) < tb.generation)
        m.tbs_per_generation.resize(static_cast<std::size_t>(tb.generation), 0);
      ++m.tbs_per_generation[static_cast<std::size_t>(tb.generation - 1)];
    }
    m.makespan = deadlock ? stall_time_ : makespan;
    return {std::move(trace_), std::move(m), std::move(sems_)};
  }

  const Scenario& sc_;
  std::vector<StageRuntime> stages_;
  std::vector<std::size_t> base_order_;
  std::vector<Tb> tbs_;
  std::vector<SemaphoreArray> sems_;
  std::set<std::size_t> waiting_;
  std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>> queue_;
  Count queue_seq_ = 0;
  Count launch_counter_ = 0;
  Count resident_ = 0;
  Count unfinished_ = 0;
  Count max_finished_generation_ = 0;
  Time stall_time_ = 0;
  SimTrace trace_;
};

}  // namespace

SimResult simulate(const Scenario& scenario) { return Engine(scenario).run(); }

}  // namespace tilesync
