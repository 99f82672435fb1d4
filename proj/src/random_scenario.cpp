#include "tilesync/random_scenario.hpp"

#include <random>

namespace tilesync {

namespace {

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  Count range(Count lo, Count hi) { return std::uniform_int_distribution<Count>(lo, hi)(rng_); }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }
  Count divisor_of(Count n) {
    std::vector<Count> ds;
    for (Count d = 1; d <= n; ++d)
      if (n % d == 0) ds.push_back(d);
    return ds[static_cast<std::size_t>(range(0, static_cast<Count>(ds.size()) - 1))];
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

Scenario random_scenario(std::uint64_t seed, const RandomScenarioLimits& limits) {
  Draw draw(seed);
  Scenario s;
  s.name = "random:" + std::to_string(seed);
  s.gpu.num_sms = draw.range(1, limits.max_sms);
  const auto n = static_cast<std::size_t>(draw.range(1, static_cast<Count>(limits.max_stages)));
  const Count rows = draw.range(1, 4);
  const Count base_occ = draw.range(1, 3);

  for (std::size_t i = 0; i < n; ++i) {
    Stage st;
    st.kernel.id = "s" + std::to_string(i);
    const Count z = draw.chance(0.25) ? 2 : 1;
    const Count max_y = std::max<Count>(1, limits.max_tiles_per_stage / (rows * z));
    st.kernel.grid = {rows, draw.range(1, std::min<Count>(max_y, 8)), z};
    st.kernel.occupancy =
        limits.mixed_occupancy && draw.chance(0.2) ? draw.range(1, 3) : base_occ;
    st.kernel.k_steps = draw.range(1, 4);
    if (draw.chance(0.3)) st.order = StridedRowMajor{draw.divisor_of(st.kernel.grid.y)};

    if (i > 0) {
      std::vector<std::size_t> producers{static_cast<std::size_t>(draw.range(0, static_cast<Count>(i) - 1))};
      if (i > 1 && draw.chance(0.3)) {
        const auto other = static_cast<std::size_t>(draw.range(0, static_cast<Count>(i) - 1));
        if (other != producers[0]) producers.push_back(other);
      }
      bool k_fixed = false;
      for (auto p : producers) {
        const Dim3 pg = s.stages[p].kernel.grid;
        Count& k = st.kernel.k_steps;
        std::vector<SyncPolicy> options{RowSync{}, StridedSync{draw.divisor_of(pg.y)}};
        if (!k_fixed || k == pg.y) options.push_back(TileSync{});
        if (!k_fixed) {
          options.push_back(Conv2DTileSync{draw.range(1, 3)});
        } else if (k % pg.y == 0) {
          options.push_back(Conv2DTileSync{k / pg.y});
        }
        SyncPolicy pol = options[static_cast<std::size_t>(draw.range(0, static_cast<Count>(options.size()) - 1))];
        if (!k_fixed) {
          if (std::holds_alternative<TileSync>(pol)) k = pg.y;
          if (const auto* c = std::get_if<Conv2DTileSync>(&pol)) k = pg.y * c->kk;
          k_fixed = true;
        }
        s.deps.push_back({p, i, draw.chance(0.8) ? Operand::A : Operand::B, pol});
      }
    }
    s.stages.push_back(st);
  }

  if (limits.random_costs) {
    s.cost.load_cost = draw.range(0, 2);
    s.cost.compute_cost = draw.range(1, 3);
    s.cost.epilogue_cost = draw.chance(0.3) ? draw.range(1, 2) : 0;
    s.cost.sync_overhead = draw.chance(0.2) ? 1 : 0;
  }
  if (limits.random_options) {
    s.mode = draw.chance(0.75) ? Mode::FineGrained : Mode::StreamSync;
    s.options.wait_kernel = draw.chance(0.5) ? WaitKernel::On : WaitKernel::Auto;
    s.options.reorder_loads = draw.chance(0.5);
    s.options.adversarial_order = draw.chance(0.5);
  }
  validate(s);
  return s;
}

}  // namespace tilesync
