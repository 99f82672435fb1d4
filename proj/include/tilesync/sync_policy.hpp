#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tilesync/gpu_model.hpp"

namespace tilesync {

// One semaphore per producer tile.
struct TileSync {
  friend bool operator==(const TileSync&, const TileSync&) = default;
};
// One semaphore per producer row; consumers wait once for the whole row.
struct RowSync {
  friend bool operator==(const RowSync&, const RowSync&) = default;
};
// Producer columns `stride` apart share a semaphore.
struct StridedSync {
  Count stride = 1;
  friend bool operator==(const StridedSync&, const StridedSync&) = default;
};
// Implicit-GeMM convolution: consumer k-step k reads producer column k / kk,
// where kk = K*K for a KxK filter.
struct Conv2DTileSync {
  Count kk = 9;
  friend bool operator==(const Conv2DTileSync&, const Conv2DTileSync&) = default;
};

using SyncPolicy = std::variant<TileSync, RowSync, StridedSync, Conv2DTileSync>;

struct RowMajor {
  friend bool operator==(const RowMajor&, const RowMajor&) = default;
};
struct StridedRowMajor {
  Count stride = 1;
  friend bool operator==(const StridedRowMajor&, const StridedRowMajor&) = default;
};

using TileOrder = std::variant<RowMajor, StridedRowMajor>;

struct Wait {
  Count sem_index = 0;
  Count expected = 1;
  friend bool operator==(const Wait&, const Wait&) = default;
};

// std::nullopt is the no-wait case.
using WaitSpec = std::optional<Wait>;

std::string policy_name(const SyncPolicy& p);
std::string order_name(const TileOrder& o);

// Throws ConfigError when the policy's divisibility constraints fail for the
// given producer grid (and consumer k-step count, when known).
void validate_policy(const SyncPolicy& policy, const Dim3& producer_grid);
void validate_policy_for_consumer(const SyncPolicy& policy, const Dim3& producer_grid,
                                  const Dim3& consumer_grid, Count consumer_k_steps);
void validate_order(const TileOrder& order, const Dim3& grid);

Count sem_count(const SyncPolicy& policy, const Dim3& producer_grid);

Count post_target(const SyncPolicy& policy, const TileCoord& producer_tile,
                  const Dim3& producer_grid);

WaitSpec consumer_wait(const SyncPolicy& policy, const TileCoord& consumer_tile, Count k_step,
                       const Dim3& producer_grid, Count producer_z);

// Tile drawn at position `counter`. Tiles are walked column-fastest within a
// row, unlike linearize, which enumerates thread-block indices x-fastest.
TileCoord order_tile(const TileOrder& order, const Dim3& grid, Count counter);

// Monotone counters backing one dependency.
class SemaphoreArray {
 public:
  explicit SemaphoreArray(Count size) : values_(static_cast<std::size_t>(size), 0) {}

  Count size() const { return static_cast<Count>(values_.size()); }
  Count value(Count index) const { return values_.at(static_cast<std::size_t>(index)); }
  Count post(Count index) { return ++values_.at(static_cast<std::size_t>(index)); }
  bool satisfied(const Wait& w) const { return value(w.sem_index) >= w.expected; }
  const std::vector<Count>& values() const { return values_; }

 private:
  std::vector<Count> values_;
};

}  // namespace tilesync
