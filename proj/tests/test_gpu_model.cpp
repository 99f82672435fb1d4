#include <doctest.h>

#include <set>

#include "tilesync/gpu_model.hpp"

using namespace tilesync;

TEST_SUITE("gpu-model") {

TEST_CASE("linearize enumerates x fastest, then y, then z") {
  CHECK(linearize({3, 2, 1}, {0, 0, 0}) == 0);
  CHECK(linearize({3, 2, 1}, {2, 1, 0}) == 5);
  CHECK(linearize({3, 2, 2}, {1, 1, 1}) == 10);
  CHECK_THROWS_AS(linearize({3, 2, 1}, {3, 0, 0}), DomainError);
  CHECK_THROWS_AS(linearize({3, 2, 1}, {0, 0, 1}), DomainError);
  CHECK_THROWS_AS(linearize({3, 2, 1}, {-1, 0, 0}), DomainError);
}

TEST_CASE("linearize is a bijection and delinearize inverts it") {
  for (Count x = 1; x <= 16; ++x)
    for (Count y = 1; y <= 16; ++y)
      for (Count z = 1; z <= 16; z *= 2) {
        const Dim3 g{x, y, z};
        std::set<Count> seen;
        for (Count cz = 0; cz < z; ++cz)
          for (Count cy = 0; cy < y; ++cy)
            for (Count cx = 0; cx < x; ++cx) {
              const Count i = linearize(g, {cx, cy, cz});
              REQUIRE(i >= 0);
              REQUIRE(i < g.total());
              REQUIRE(delinearize(g, i) == TileCoord{cx, cy, cz});
              seen.insert(i);
            }
        REQUIRE(static_cast<Count>(seen.size()) == g.total());
      }
}

TEST_CASE("tbs_per_wave") {
  CHECK(tbs_per_wave({80}, 2) == 160);
  CHECK(tbs_per_wave({4}, 1) == 4);
  CHECK(tbs_per_wave({1}, 1) == 1);
}

TEST_CASE("waves") {
  auto w = waves(240, {80}, 2);
  CHECK(w.fractional == Rational(3, 2));
  CHECK(w.ceil == 2);
  w = waves(192, {80}, 2);
  CHECK(w.fractional == Rational(6, 5));
  CHECK(w.ceil == 2);
  w = waves(160, {80}, 2);
  CHECK(w.fractional == Rational(1));
  CHECK(w.ceil == 1);
}

TEST_CASE("utilization examples") {
  CHECK(utilization(192, {80}, 2) == Rational(60));
  CHECK(utilization(384, {80}, 2) == Rational(80));
  CHECK(utilization(160, {80}, 2) == Rational(100));
}

TEST_CASE("utilization over the GPT-3 GeMM pairs at occupancy 2") {
  const Dim3 grids[] = {{1, 96, 2}, {1, 96, 1}, {2, 48, 2}, {2, 96, 1}, {4, 48, 1}, {4, 96, 1}};
  const Count expected[] = {60, 60, 60, 60, 60, 80};
  for (int i = 0; i < 6; ++i) CHECK(utilization(grids[i].total(), {80}, 2) == Rational(expected[i]));
}

TEST_CASE("wave bounds and utilization range") {
  for (Count sms = 1; sms <= 9; ++sms)
    for (Count occ = 1; occ <= 4; ++occ)
      for (Count tbs = 1; tbs <= 300; ++tbs) {
        const GpuConfig g{sms};
        const Count per = tbs_per_wave(g, occ);
        const auto w = waves(tbs, g, occ);
        REQUIRE(w.ceil * per >= tbs);
        REQUIRE((w.ceil - 1) * per < tbs);
        REQUIRE(w.fractional == Rational(tbs, per));
        const Rational u = utilization(tbs, g, occ);
        REQUIRE(Rational(0) < u);
        REQUIRE(u <= Rational(100));
        REQUIRE((u == Rational(100)) == (tbs % per == 0));
      }
}

TEST_CASE("rational arithmetic and rendering") {
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(3, -6) == Rational(-1, 2));
  CHECK((Rational(1, 3) + Rational(1, 6)) == Rational(1, 2));
  CHECK(Rational(7, 5).ceil() == 2);
  CHECK(Rational(10, 5).ceil() == 2);
  CHECK(Rational(39, 160).to_string(2) == "0.24");
  CHECK(Rational(49, 40).to_string(2) == "1.23");
  CHECK(Rational(18, 5).to_string(1) == "3.6");
  CHECK(Rational(3).to_string(2) == "3.00");
  CHECK_THROWS(Rational(1, 0));
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(validate(Dim3{0, 1, 1}), ConfigError);
  CHECK_THROWS_AS(validate(GpuConfig{0}), ConfigError);
  CHECK_NOTHROW(validate(Dim3{1, 1, 1}));
}

}  // TEST_SUITE
