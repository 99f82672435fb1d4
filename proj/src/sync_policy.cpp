#include "tilesync/sync_policy.hpp"

namespace tilesync {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

std::string policy_name(const SyncPolicy& p) {
  return std::visit(
      overloaded{[](const TileSync&) { return std::string("tile"); },
                 [](const RowSync&) { return std::string("row"); },
                 [](const StridedSync& s) { return "strided(" + std::to_string(s.stride) + ")"; },
                 [](const Conv2DTileSync& c) { return "conv2dtile(" + std::to_string(c.kk) + ")"; }},
      p);
}

std::string order_name(const TileOrder& o) {
  return std::visit(overloaded{[](const RowMajor&) { return std::string("row_major"); },
                               [](const StridedRowMajor& s) {
                                 return "strided_row_major(" + std::to_string(s.stride) + ")";
                               }},
                    o);
}

void validate_policy(const SyncPolicy& policy, const Dim3& producer_grid) {
  validate(producer_grid);
  if (const auto* s = std::get_if<StridedSync>(&policy)) {
    if (s->stride < 1) throw ConfigError("StridedSync stride must be >= 1");
    if (producer_grid.y % s->stride != 0)
      throw ConfigError("StridedSync stride " + std::to_string(s->stride) +
                        " does not divide producer grid.y " + std::to_string(producer_grid.y));
  }
  if (const auto* c = std::get_if<Conv2DTileSync>(&policy)) {
    if (c->kk < 1) throw ConfigError("Conv2DTileSync kk must be >= 1");
  }
}

void validate_policy_for_consumer(const SyncPolicy& policy, const Dim3& producer_grid,
                                  const Dim3& consumer_grid, Count consumer_k_steps) {
  validate_policy(policy, producer_grid);
  validate(consumer_grid);
  if (consumer_k_steps < 1) throw ConfigError("k_steps must be >= 1");
  if (consumer_grid.x != producer_grid.x)
    throw ConfigError("consumer grid.x " + std::to_string(consumer_grid.x) +
                      " differs from producer grid.x " + std::to_string(producer_grid.x));
  if (std::holds_alternative<TileSync>(policy) && consumer_k_steps != producer_grid.y)
    throw ConfigError("TileSync requires consumer k_steps == producer grid.y");
  if (const auto* c = std::get_if<Conv2DTileSync>(&policy)) {
    if (consumer_k_steps % c->kk != 0)
      throw ConfigError("Conv2DTileSync kk " + std::to_string(c->kk) +
                        " does not divide consumer k_steps " + std::to_string(consumer_k_steps));
    if (consumer_k_steps / c->kk != producer_grid.y)
      throw ConfigError("Conv2DTileSync requires consumer k_steps == producer grid.y * kk");
  }
}

void validate_order(const TileOrder& order, const Dim3& grid) {
  validate(grid);
  if (const auto* s = std::get_if<StridedRowMajor>(&order)) {
    if (s->stride < 1 || grid.y % s->stride != 0)
      throw ConfigError("tile order stride " + std::to_string(s->stride) +
                        " does not divide grid.y " + std::to_string(grid.y));
  }
}

Count sem_count(const SyncPolicy& policy, const Dim3& producer_grid) {
  validate_policy(policy, producer_grid);
  return std::visit(overloaded{[&](const TileSync&) { return producer_grid.x * producer_grid.y; },
                               [&](const RowSync&) { return producer_grid.x; },
                               [&](const StridedSync& s) { return producer_grid.x * s.stride; },
                               [&](const Conv2DTileSync&) {
                                 return producer_grid.x * producer_grid.y;
                               }},
                    policy);
}

Count post_target(const SyncPolicy& policy, const TileCoord& producer_tile,
                  const Dim3& producer_grid) {
  if (!contains(producer_grid, producer_tile))
    throw DomainError("producer tile " + to_string(producer_tile) + " outside grid " +
                      to_string(producer_grid));
  const Count row = producer_tile.x;
  const Count col = producer_tile.y;
  return std::visit(overloaded{[&](const TileSync&) { return row * producer_grid.y + col; },
                               [&](const RowSync&) { return row; },
                               [&](const StridedSync& s) { return row * s.stride + col % s.stride; },
                               [&](const Conv2DTileSync&) { return row * producer_grid.y + col; }},
                    policy);
}

WaitSpec consumer_wait(const SyncPolicy& policy, const TileCoord& consumer_tile, Count k_step,
                       const Dim3& producer_grid, Count producer_z) {
  const Count row = consumer_tile.x;
  return std::visit(
      overloaded{
          [&](const TileSync&) -> WaitSpec {
            return Wait{row * producer_grid.y + k_step, producer_z};
          },
          [&](const RowSync&) -> WaitSpec {
            if (k_step != 0) return std::nullopt;
            return Wait{row, producer_grid.y * producer_z};
          },
          [&](const StridedSync& s) -> WaitSpec {
            if (k_step != 0) return std::nullopt;
            return Wait{row * s.stride + consumer_tile.y % s.stride,
                        (producer_grid.y / s.stride) * producer_z};
          },
          [&](const Conv2DTileSync& c) -> WaitSpec {
            if (k_step % c.kk != 0) return std::nullopt;
            return Wait{row * producer_grid.y + k_step / c.kk, producer_z};
          }},
      policy);
}

TileCoord order_tile(const TileOrder& order, const Dim3& grid, Count counter) {
  if (counter < 0 || counter >= grid.total())
    throw DomainError("tile counter " + std::to_string(counter) + " outside grid " +
                      to_string(grid));
  // Row-major over tiles: column fastest, then row, then split-k slice.
  const Count per_slice = grid.x * grid.y;
  TileCoord c{(counter % per_slice) / grid.y, counter % grid.y, counter / per_slice};
  if (const auto* s = std::get_if<StridedRowMajor>(&order)) {
    validate_order(order, grid);
    // c.y is the transformed column: group (y mod stride) major, y / stride minor.
    const Count per_group = grid.y / s->stride;
    const Count group = c.y / per_group;
    const Count within = c.y % per_group;
    c.y = within * s->stride + group;
  }
  return c;
}

}  // namespace tilesync
