#include "tilesync/oracle.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <tuple>

namespace tilesync {

std::size_t DepDag::edge_count() const {
  std::size_t n = 0;
  for (const auto& r : requirements) n += r.producers.size();
  return n;
}

std::vector<DepEdge> DepDag::edges() const {
  std::vector<DepEdge> out;
  out.reserve(edge_count());
  for (const auto& r : requirements)
    for (const auto& p : r.producers)
      out.push_back({r.dep, r.producer_stage, p, r.consumer_stage, r.consumer, r.k_step});
  return out;
}

namespace {

// Producer columns read by consumer column `col` at `k_step`; empty when the
// k-step reads nothing produced upstream.
std::vector<Count> required_columns(const SyncPolicy& policy, Count col, Count k_step,
                                    const Dim3& producer) {
  std::vector<Count> cols;
  if (std::holds_alternative<TileSync>(policy)) {
    cols.push_back(k_step);
  } else if (std::holds_alternative<RowSync>(policy)) {
    if (k_step == 0)
      for (Count j = 0; j < producer.y; ++j) cols.push_back(j);
  } else if (const auto* s = std::get_if<StridedSync>(&policy)) {
    if (k_step == 0)
      for (Count j = 0; j < producer.y; ++j)
        if (j % s->stride == col % s->stride) cols.push_back(j);
  } else if (const auto* c = std::get_if<Conv2DTileSync>(&policy)) {
    if (k_step % c->kk == 0) cols.push_back(k_step / c->kk);
  }
  return cols;
}

}  // namespace

DepDag build_dep_dag(const Scenario& scenario) {
  validate(scenario);
  DepDag dag;
  for (const auto& st : scenario.stages) dag.stage_grids.push_back(st.kernel.grid);
  for (std::size_t d = 0; d < scenario.deps.size(); ++d) {
    const auto& dep = scenario.deps[d];
    const Dim3 P = scenario.stages[dep.producer].kernel.grid;
    const auto& ck = scenario.stages[dep.consumer].kernel;
    const Dim3 C = ck.grid;
    for (Count z = 0; z < C.z; ++z)
      for (Count y = 0; y < C.y; ++y)
        for (Count x = 0; x < C.x; ++x)
          for (Count k = 0; k < ck.k_steps; ++k) {
            const auto cols = required_columns(dep.policy, y, k, P);
            if (cols.empty()) continue;
            DagRequirement r;
            r.dep = static_cast<int>(d);
            r.producer_stage = dep.producer;
            r.consumer_stage = dep.consumer;
            r.consumer = {x, y, z};
            r.k_step = k;
            for (Count col : cols)
              for (Count pz = 0; pz < P.z; ++pz) r.producers.push_back({x, col, pz});
            dag.requirements.push_back(std::move(r));
          }
  }
  return dag;
}

namespace {

struct TbRecord {
  std::size_t stage = 0;
  TileCoord tile;
  Time scheduled = -1;
  Time finished = -1;
};

using StageTile = std::tuple<std::size_t, Count, Count, Count>;

StageTile key(std::size_t stage, const TileCoord& t) { return {stage, t.x, t.y, t.z}; }

}  // namespace

std::vector<Violation> validate_trace(const SimTrace& trace, const DepDag& dag) {
  const std::size_t n_stages = dag.stage_grids.size();
  std::map<Count, TbRecord> tbs;
  std::map<StageTile, Count> tile_owner;
  // (dep, producer tile) -> post time
  std::map<std::pair<int, StageTile>, Time> post_time;
  // (dep, sem) -> sorted post times
  std::map<std::pair<int, Count>, std::vector<Time>> sem_posts;
  // (tb, dep, k_step) -> wait_end event
  std::map<std::tuple<Count, int, Count>, const Event*> wait_end;

  int max_dep = -1;
  for (const auto& r : dag.requirements) max_dep = std::max(max_dep, r.dep);

  Time last = std::numeric_limits<Time>::min();
  for (const auto& e : trace.events) {
    if (e.time < last) throw ValidationError("event times decrease at tb " + std::to_string(e.tb));
    last = e.time;
    if (e.stage >= n_stages)
      throw ValidationError("event names unknown stage " + std::to_string(e.stage));
    if (!contains(dag.stage_grids[e.stage], e.tile))
      throw ValidationError("tile " + to_string(e.tile) + " outside stage grid");
    auto& rec = tbs[e.tb];
    if (e.kind == EventKind::Scheduled) {
      if (rec.scheduled >= 0) throw ValidationError("tb " + std::to_string(e.tb) + " scheduled twice");
      rec.stage = e.stage;
      rec.tile = e.tile;
      rec.scheduled = e.time;
      if (!tile_owner.emplace(key(e.stage, e.tile), e.tb).second)
        throw ValidationError("tile " + to_string(e.tile) + " computed by two thread blocks");
      continue;
    }
    if (rec.scheduled < 0)
      throw ValidationError("tb " + std::to_string(e.tb) + " has events before being scheduled");
    if (rec.stage != e.stage || rec.tile != e.tile)
      throw ValidationError("tb " + std::to_string(e.tb) + " changes stage or tile");
    if (rec.finished >= 0)
      throw ValidationError("tb " + std::to_string(e.tb) + " has events after finishing");
    switch (e.kind) {
      case EventKind::Finished:
        rec.finished = e.time;
        break;
      case EventKind::Post:
        if (e.dep < 0 || e.dep > max_dep || e.sem < 0)
          throw ValidationError("post with invalid dependency or semaphore");
        if (!post_time.emplace(std::pair{e.dep, key(e.stage, e.tile)}, e.time).second)
          throw ValidationError("tile " + to_string(e.tile) + " posted twice");
        sem_posts[{e.dep, e.sem}].push_back(e.time);
        break;
      case EventKind::WaitBegin:
      case EventKind::WaitEnd:
        if (e.dep < 0 || e.dep > max_dep || e.sem < 0 || e.k_step < 0 || e.value < 1)
          throw ValidationError("wait with invalid dependency, semaphore or k-step");
        if (e.kind == EventKind::WaitEnd) wait_end[{e.tb, e.dep, e.k_step}] = &e;
        break;
      case EventKind::Scheduled:
        break;
    }
  }

  std::map<std::tuple<std::size_t, StageTile, Count, int>, Violation> found;
  auto flag = [&](std::size_t stage, const TileCoord& tile, Count k, int dep,
                  const std::string& msg) {
    auto [it, inserted] =
        found.try_emplace({stage, key(stage, tile), k, dep}, Violation{stage, tile, k, dep, msg});
    if (!inserted) it->second.message += "; " + msg;
  };

  const bool fine = trace.mode == Mode::FineGrained;
  for (const auto& r : dag.requirements) {
    const auto owner = tile_owner.find(key(r.consumer_stage, r.consumer));
    if (owner == tile_owner.end()) continue;  // never dispatched (stalled run)
    const Count tb = owner->second;
    const TbRecord& rec = tbs[tb];
    Time read_time = rec.scheduled;
    if (fine) {
      const auto w = wait_end.find({tb, r.dep, r.k_step});
      if (w == wait_end.end()) {
        if (rec.finished >= 0)
          flag(r.consumer_stage, r.consumer, r.k_step, r.dep,
               "no completed wait before reading producer tiles");
        continue;
      }
      read_time = w->second->time;
    }
    for (const auto& p : r.producers) {
      Time ready = -1;
      if (fine) {
        const auto pt = post_time.find({r.dep, key(r.producer_stage, p)});
        if (pt != post_time.end()) ready = pt->second;
      } else {
        const auto po = tile_owner.find(key(r.producer_stage, p));
        if (po != tile_owner.end()) ready = tbs[po->second].finished;
      }
      if (ready < 0)
        flag(r.consumer_stage, r.consumer, r.k_step, r.dep,
             "producer tile " + to_string(p) + " never completed");
      else if (ready > read_time)
        flag(r.consumer_stage, r.consumer, r.k_step, r.dep,
             "producer tile " + to_string(p) + " completed at " + std::to_string(ready) +
                 " after read at " + std::to_string(read_time));
    }
  }

  if (fine) {
    for (auto& [k, v] : sem_posts) std::sort(v.begin(), v.end());
    for (const auto& [k, e] : wait_end) {
      const auto it = sem_posts.find({e->dep, e->sem});
      Count posted = 0;
      if (it != sem_posts.end())
        posted = std::upper_bound(it->second.begin(), it->second.end(), e->time) -
                 it->second.begin();
      if (posted < e->value)
        flag(e->stage, e->tile, e->k_step, e->dep,
             "semaphore " + std::to_string(e->sem) + " replayed to " + std::to_string(posted) +
                 " < expected " + std::to_string(e->value) + " at wait end");
    }
  }

  std::vector<Violation> out;
  for (auto& [k, v] : found) out.push_back(std::move(v));
  return out;
}

namespace {

// Tiles in processing order, by sorting rather than index arithmetic.
std::vector<TileCoord> processing_order(const TileOrder& order, const Dim3& g) {
  std::vector<TileCoord> tiles;
  for (Count z = 0; z < g.z; ++z)
    for (Count y = 0; y < g.y; ++y)
      for (Count x = 0; x < g.x; ++x) tiles.push_back({x, y, z});
  Count stride = 1;
  if (const auto* s = std::get_if<StridedRowMajor>(&order)) stride = s->stride;
  std::stable_sort(tiles.begin(), tiles.end(), [stride](const TileCoord& a, const TileCoord& b) {
    return std::tuple{a.z, a.x, a.y % stride, a.y / stride} <
           std::tuple{b.z, b.x, b.y % stride, b.y / stride};
  });
  return tiles;
}

enum class Phase { Check, Running, Finishing, Done };

struct RefTb {
  std::size_t stage;
  TileCoord tile;
  Count k = 0;
  Time step_start = 0;
  Time step_end = 0;
  Time finish_at = 0;
  Phase phase = Phase::Check;
};

}  // namespace

std::optional<Time> reference_makespan(const Scenario& scenario) {
  validate(scenario);
  const Count total = total_tbs(scenario);
  if (total > kReferenceTileCap)
    throw DomainError("reference scheduler is limited to " + std::to_string(kReferenceTileCap) +
                      " tiles, scenario has " + std::to_string(total));
  const bool fine = scenario.mode == Mode::FineGrained;
  const std::size_t n = scenario.stages.size();
  const DepDag dag = build_dep_dag(scenario);
  const auto& cost = scenario.cost;

  // (stage, tile, k) -> requirements
  std::map<std::tuple<std::size_t, Count, Count, Count, Count>, std::vector<const DagRequirement*>>
      reqs;
  for (const auto& r : dag.requirements)
    reqs[{r.consumer_stage, r.consumer.x, r.consumer.y, r.consumer.z, r.k_step}].push_back(&r);

  std::vector<std::vector<TileCoord>> order(n);
  std::vector<Count> posts_per_tile(n, 0);
  std::vector<std::vector<std::size_t>> gate(n);
  for (std::size_t i = 0; i < n; ++i)
    order[i] = processing_order(scenario.stages[i].order, scenario.stages[i].kernel.grid);
  Count tbs_sum = 0, occ_min = scenario.stages.front().kernel.occupancy;
  for (const auto& st : scenario.stages) {
    tbs_sum += st.kernel.grid.total();
    occ_min = std::min(occ_min, st.kernel.occupancy);
  }
  const bool everything_fits = tbs_sum <= occ_min * scenario.gpu.num_sms;
  for (const auto& d : scenario.deps) {
    ++posts_per_tile[d.producer];
    if (!fine || scenario.options.wait_kernel == WaitKernel::Off) continue;
    const auto& pk = scenario.stages[d.producer].kernel;
    const auto& ck = scenario.stages[d.consumer].kernel;
    const bool one_wave = pk.grid.total() + ck.grid.total() <=
                          std::min(pk.occupancy, ck.occupancy) * scenario.gpu.num_sms;
    if (scenario.options.wait_kernel == WaitKernel::Auto && one_wave && everything_fits) continue;
    gate[d.consumer].push_back(d.producer);
  }

  std::vector<std::size_t> base(n);
  for (std::size_t i = 0; i < n; ++i) base[i] = fine && scenario.options.adversarial_order ? n - 1 - i : i;

  std::vector<Count> dispatched(n, 0), done(n, 0), resident(n, 0);
  std::vector<Count> launch_seq(n, -1);
  Count next_seq = 0;
  std::map<StageTile, Time> finished_at;
  std::vector<RefTb> tbs;
  Count finished_total = 0;
  Time makespan = 0;

  auto launch = [&] {
    for (auto i : base) {
      if (launch_seq[i] >= 0) continue;
      bool open;
      if (!fine) {
        open = i == 0 || done[i - 1] == scenario.stages[i - 1].kernel.grid.total();
      } else {
        open = std::all_of(gate[i].begin(), gate[i].end(),
                           [&](std::size_t p) { return dispatched[p] > 0; });
      }
      if (open) launch_seq[i] = next_seq++;
    }
  };

  // Returns true once the TB's current k-step has its inputs and is running.
  auto check = [&](RefTb& tb, Time t) {
    Count waits = 0;
    if (fine) {
      const auto it = reqs.find({tb.stage, tb.tile.x, tb.tile.y, tb.tile.z, tb.k});
      if (it != reqs.end()) {
        for (const auto* r : it->second) {
          ++waits;
          for (const auto& p : r->producers) {
            const auto f = finished_at.find(key(r->producer_stage, p));
            if (f == finished_at.end() || f->second > t) return false;
          }
        }
      }
    }
    const Time wait = (t - tb.step_start) + waits * cost.sync_overhead;
    const Time dur = scenario.options.reorder_loads
                         ? std::max(wait, cost.load_cost) + cost.load_cost + cost.compute_cost
                         : wait + 2 * cost.load_cost + cost.compute_cost;
    tb.step_end = tb.step_start + dur;
    tb.phase = Phase::Running;
    return true;
  };

  auto complete = [&](RefTb& tb, Time t) {
    tb.phase = Phase::Done;
    finished_at[key(tb.stage, tb.tile)] = t;
    ++done[tb.stage];
    --resident[tb.stage];
    ++finished_total;
    makespan = std::max(makespan, t);
  };

  const Time limit = std::numeric_limits<Time>::max() / 4;
  for (Time t = 0; t < limit; ++t) {
    for (auto& tb : tbs) {
      if (tb.phase == Phase::Running && tb.step_end == t) {
        if (tb.k + 1 < scenario.stages[tb.stage].kernel.k_steps) {
          ++tb.k;
          tb.step_start = t;
          tb.phase = Phase::Check;
        } else {
          tb.finish_at = t + cost.epilogue_cost +
                         (fine ? posts_per_tile[tb.stage] * cost.sync_overhead : 0);
          tb.phase = Phase::Finishing;
        }
      }
      if (tb.phase == Phase::Finishing && tb.finish_at == t) complete(tb, t);
    }
    for (auto& tb : tbs)
      if (tb.phase == Phase::Check) check(tb, t);

    launch();
    for (;;) {
      std::optional<std::size_t> pick;
      for (std::size_t i = 0; i < n; ++i) {
        if (launch_seq[i] < 0 || dispatched[i] >= scenario.stages[i].kernel.grid.total()) continue;
        if (!pick || scenario.stages[i].priority > scenario.stages[*pick].priority ||
            (scenario.stages[i].priority == scenario.stages[*pick].priority &&
             launch_seq[i] < launch_seq[*pick]))
          pick = i;
      }
      if (!pick) break;
      Count occ = scenario.stages[*pick].kernel.occupancy;
      Count busy = 0;
      for (std::size_t i = 0; i < n; ++i) {
        busy += resident[i];
        if (resident[i] > 0) occ = std::min(occ, scenario.stages[i].kernel.occupancy);
      }
      if (busy + 1 > occ * scenario.gpu.num_sms) break;
      const std::size_t s = *pick;
      RefTb tb{s, order[s][static_cast<std::size_t>(dispatched[s])]};
      tb.step_start = t;
      ++dispatched[s];
      ++resident[s];
      tbs.push_back(tb);
      check(tbs.back(), t);
      launch();
    }

    if (finished_total == total) return makespan;
    const bool moving = std::any_of(tbs.begin(), tbs.end(), [](const RefTb& tb) {
      return tb.phase == Phase::Running || tb.phase == Phase::Finishing;
    });
    if (!moving) return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace tilesync
