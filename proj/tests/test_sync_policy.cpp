#include <doctest.h>

#include <map>
#include <set>

#include "tilesync/sync_policy.hpp"

using namespace tilesync;

namespace {

std::vector<TileCoord> tiles_of(const Dim3& g) {
  std::vector<TileCoord> v;
  for (Count z = 0; z < g.z; ++z)
    for (Count x = 0; x < g.x; ++x)
      for (Count y = 0; y < g.y; ++y) v.push_back({x, y, z});
  return v;
}

std::vector<SyncPolicy> policies_for(const Dim3& g) {
  std::vector<SyncPolicy> v{TileSync{}, RowSync{}, Conv2DTileSync{1}, Conv2DTileSync{3}};
  for (Count s = 1; s <= g.y; ++s)
    if (g.y % s == 0) v.push_back(StridedSync{s});
  return v;
}

// Consumer k-steps compatible with `p` for producer grid `g`.
Count k_steps_for(const SyncPolicy& p, const Dim3& g) {
  if (const auto* c = std::get_if<Conv2DTileSync>(&p)) return g.y * c->kk;
  return g.y;
}

}  // namespace

TEST_SUITE("sync-policies") {

TEST_CASE("sem_count") {
  CHECK(sem_count(TileSync{}, {3, 2, 1}) == 6);
  CHECK(sem_count(RowSync{}, {3, 2, 1}) == 3);
  CHECK(sem_count(StridedSync{2}, {1, 6, 1}) == 2);
  CHECK(sem_count(Conv2DTileSync{9}, {4, 2, 1}) == 8);
  for (Count x = 1; x <= 6; ++x)
    for (Count y = 1; y <= 8; ++y) {
      const Dim3 g{x, y, 1};
      CHECK(sem_count(TileSync{}, g) == x * y);
      CHECK(sem_count(RowSync{}, g) == x);
      for (Count s = 1; s <= y; ++s)
        if (y % s == 0) CHECK(sem_count(StridedSync{s}, g) == x * s);
    }
  CHECK_THROWS_AS(sem_count(StridedSync{4}, {1, 6, 1}), ConfigError);
  CHECK_THROWS_AS(sem_count(StridedSync{0}, {1, 6, 1}), ConfigError);
}

TEST_CASE("post_target") {
  CHECK(post_target(TileSync{}, {1, 1, 0}, {3, 2, 1}) == 3);
  CHECK(post_target(RowSync{}, {2, 0, 0}, {3, 2, 1}) == 2);
  CHECK(post_target(StridedSync{2}, {0, 4, 0}, {1, 6, 1}) == 0);
  CHECK(post_target(Conv2DTileSync{9}, {1, 1, 0}, {3, 2, 1}) == 3);
  // Split-k slices share the tile's semaphore.
  CHECK(post_target(TileSync{}, {1, 1, 1}, {3, 2, 2}) == 3);
}

TEST_CASE("consumer_wait") {
  CHECK(consumer_wait(RowSync{}, {1, 0, 0}, 0, {3, 2, 1}, 1) == WaitSpec(Wait{1, 2}));
  CHECK(consumer_wait(RowSync{}, {1, 0, 0}, 1, {3, 2, 1}, 1) == std::nullopt);
  CHECK(consumer_wait(TileSync{}, {0, 3, 0}, 1, {1, 6, 1}, 1) == WaitSpec(Wait{1, 1}));
  CHECK(consumer_wait(Conv2DTileSync{9}, {2, 0, 0}, 10, {4, 2, 1}, 1) == std::nullopt);
  CHECK(consumer_wait(Conv2DTileSync{9}, {2, 0, 0}, 9, {4, 2, 1}, 1) == WaitSpec(Wait{5, 1}));
  CHECK(consumer_wait(StridedSync{2}, {0, 1, 0}, 0, {1, 6, 1}, 1) == WaitSpec(Wait{1, 3}));
  CHECK(consumer_wait(StridedSync{2}, {0, 0, 0}, 0, {1, 6, 1}, 1) == WaitSpec(Wait{0, 3}));
  // Split-k producer multiplies the expected count.
  CHECK(consumer_wait(TileSync{}, {0, 0, 0}, 2, {1, 3, 2}, 2) == WaitSpec(Wait{2, 2}));
  CHECK(consumer_wait(RowSync{}, {0, 5, 0}, 0, {1, 24, 3}, 3) == WaitSpec(Wait{0, 72}));
}

TEST_CASE("order_tile") {
  CHECK(order_tile(RowMajor{}, {3, 2, 1}, 3) == TileCoord{1, 1, 0});
  CHECK(order_tile(RowMajor{}, {1, 1, 1}, 0) == TileCoord{0, 0, 0});
  std::vector<Count> cols;
  for (Count i = 0; i < 6; ++i) cols.push_back(order_tile(StridedRowMajor{2}, {1, 6, 1}, i).y);
  CHECK(cols == std::vector<Count>{0, 2, 4, 1, 3, 5});
  CHECK_THROWS_AS(order_tile(RowMajor{}, {3, 2, 1}, 6), DomainError);
  CHECK_THROWS_AS(order_tile(StridedRowMajor{4}, {1, 6, 1}, 0), ConfigError);
}

TEST_CASE("order_tile is a bijection for every order") {
  for (Count x = 1; x <= 12; ++x)
    for (Count y = 1; y <= 12; ++y)
      for (Count z : {1, 2, 3}) {
        const Dim3 g{x, y, z};
        std::vector<TileOrder> orders{RowMajor{}};
        for (Count s = 1; s <= y; ++s)
          if (y % s == 0) orders.push_back(StridedRowMajor{s});
        for (const auto& o : orders) {
          std::set<TileCoord> seen;
          for (Count i = 0; i < g.total(); ++i) {
            const TileCoord c = order_tile(o, g, i);
            REQUIRE(contains(g, c));
            seen.insert(c);
          }
          REQUIRE(static_cast<Count>(seen.size()) == g.total());
        }
      }
}

TEST_CASE("conservation: posts per semaphore equal every wait's expected value") {
  for (Count x = 1; x <= 4; ++x)
    for (Count y = 1; y <= 8; ++y)
      for (Count z : {1, 2}) {
        const Dim3 pg{x, y, z};
        for (const auto& p : policies_for(pg)) {
          std::map<Count, Count> totals;
          for (const auto& t : tiles_of(pg)) ++totals[post_target(p, t, pg)];
          REQUIRE(static_cast<Count>(totals.size()) == sem_count(p, pg));
          const Dim3 cg{x, y, 1};
          const Count k = k_steps_for(p, pg);
          for (const auto& t : tiles_of(cg))
            for (Count ks = 0; ks < k; ++ks)
              if (auto w = consumer_wait(p, t, ks, pg, z)) {
                REQUIRE(w->expected >= 1);
                REQUIRE(totals.at(w->sem_index) == w->expected);
              }
        }
      }
}

TEST_CASE("number of waits per consumer tile") {
  const Dim3 pg{3, 4, 1};
  for (const auto& t : tiles_of({3, 4, 1})) {
    int row = 0, tile = 0, conv = 0;
    for (Count k = 0; k < 4; ++k) {
      row += consumer_wait(RowSync{}, t, k, pg, 1).has_value();
      tile += consumer_wait(TileSync{}, t, k, pg, 1).has_value();
    }
    for (Count k = 0; k < 4 * 9; ++k) conv += consumer_wait(Conv2DTileSync{9}, t, k, pg, 1).has_value();
    CHECK(row == 1);
    CHECK(tile == 4);
    CHECK(conv == 4);
  }
}

TEST_CASE("TileSync and RowSync require the same producer row") {
  for (Count x = 1; x <= 8; ++x)
    for (Count y = 1; y <= 8; ++y) {
      const Dim3 pg{x, y, 1};
      for (const auto& ct : tiles_of(pg)) {
        std::set<TileCoord> via_tile, via_row;
        for (Count k = 0; k < y; ++k) {
          if (auto w = consumer_wait(TileSync{}, ct, k, pg, 1))
            for (const auto& pt : tiles_of(pg))
              if (post_target(TileSync{}, pt, pg) == w->sem_index) via_tile.insert(pt);
          if (auto w = consumer_wait(RowSync{}, ct, k, pg, 1))
            for (const auto& pt : tiles_of(pg))
              if (post_target(RowSync{}, pt, pg) == w->sem_index) via_row.insert(pt);
        }
        REQUIRE(via_tile == via_row);
        REQUIRE(static_cast<Count>(via_row.size()) == y);
        for (const auto& pt : via_row) REQUIRE(pt.x == ct.x);
      }
    }
}

TEST_CASE("StridedSync groups tiles that are stride apart") {
  const Dim3 g{1, 6, 1};
  std::map<Count, std::set<Count>> groups;
  for (Count c = 0; c < 6; ++c) groups[post_target(StridedSync{2}, {0, c, 0}, g)].insert(c);
  CHECK(groups[0] == std::set<Count>{0, 2, 4});
  CHECK(groups[1] == std::set<Count>{1, 3, 5});
  // A degenerate grid with one column per group behaves like TileSync.
  for (Count c = 0; c < 3; ++c)
    CHECK(post_target(StridedSync{3}, {0, c, 0}, {1, 3, 1}) == post_target(TileSync{}, {0, c, 0}, {1, 3, 1}));
}

TEST_CASE("consumer compatibility checks") {
  CHECK_NOTHROW(validate_policy_for_consumer(TileSync{}, {3, 2, 1}, {3, 5, 1}, 2));
  CHECK_THROWS_AS(validate_policy_for_consumer(TileSync{}, {3, 2, 1}, {3, 5, 1}, 3), ConfigError);
  CHECK_THROWS_AS(validate_policy_for_consumer(RowSync{}, {3, 2, 1}, {2, 2, 1}, 2), ConfigError);
  CHECK_NOTHROW(validate_policy_for_consumer(Conv2DTileSync{9}, {3, 2, 1}, {3, 2, 1}, 18));
  CHECK_THROWS_AS(validate_policy_for_consumer(Conv2DTileSync{9}, {3, 2, 1}, {3, 2, 1}, 17),
                  ConfigError);
}

TEST_CASE("semaphore array is monotone") {
  SemaphoreArray s(3);
  CHECK(s.post(1) == 1);
  CHECK(s.post(1) == 2);
  CHECK(s.satisfied({1, 2}));
  CHECK_FALSE(s.satisfied({0, 1}));
  CHECK(s.values() == std::vector<Count>{0, 2, 0});
}

}  // TEST_SUITE
