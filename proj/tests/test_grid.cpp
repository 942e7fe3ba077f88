// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include "swarminfer/errors.hpp"
#include "swarminfer/grid.hpp"
#include "swarminfer/rng.hpp"

using namespace swarminfer;

namespace {
GridConfig grid5() {
  GridConfig g;
  g.side_cells = 5;
  g.cell_size_m = 20.0;
  return g;
}
RadioParams table_radio() { return RadioParams{}; }  // defaults mirror the testbed numbers
}  // namespace

TEST_CASE("cell centers on the 100 m x 100 m grid") {
  const GridConfig g = grid5();
  CHECK(cell_center(g, 0).x == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(cell_center(g, 0).y == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(cell_center(g, 24).x == doctest::Approx(90.0).epsilon(1e-12));
  CHECK(cell_center(g, 24).y == doctest::Approx(90.0).epsilon(1e-12));
  CHECK(cell_center(g, 7).x == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(cell_center(g, 7).y == doctest::Approx(30.0).epsilon(1e-12));
  CHECK_THROWS_AS(cell_center(g, 25), std::invalid_argument);
  CHECK_THROWS_AS(cell_center(g, -1), std::invalid_argument);
}

TEST_CASE("cell distances") {
  const GridConfig g = grid5();
  CHECK(cell_distance(g, 0, 1) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(cell_distance(g, 3, 3) == 0.0);
  CHECK(cell_distance(g, 0, 6) == doctest::Approx(28.284271247461902).epsilon(1e-12));
}

TEST_CASE("channel gain follows inverse-square distance") {
  const GridConfig g = grid5();
  const RadioParams r = table_radio();
  const Placement adjacent = {0, 1, 12};
  CHECK(channel_gain(g, r, adjacent, 0, 1) == doctest::Approx(2.5e-6).epsilon(1e-12));
  const Placement two_apart = {0, 2, 12};
  CHECK(channel_gain(g, r, two_apart, 0, 1) == doctest::Approx(6.25e-7).epsilon(1e-12));

  // exact 4:1 ratio when the distance doubles
  const double ratio = channel_gain(g, r, adjacent, 0, 1) / channel_gain(g, r, two_apart, 0, 1);
  CHECK(std::abs(ratio - 4.0) <= 1e-12);

  // reference distance 1 m recovers h0 itself
  GridConfig unit;
  unit.side_cells = 2;
  unit.cell_size_m = 1.0;
  CHECK(channel_gain(unit, r, {0, 1}, 0, 1) == doctest::Approx(r.h0).epsilon(1e-12));

  CHECK_THROWS_AS(channel_gain(g, r, adjacent, 1, 1), std::invalid_argument);
  const Placement colocated = {4, 4};
  CHECK_THROWS_AS(channel_gain(g, r, colocated, 0, 1), std::invalid_argument);
}

TEST_CASE("link rate at the testbed operating point") {
  const GridConfig g = grid5();
  const RadioParams r = table_radio();
  const double rate = data_rate(g, r, {0, 1}, 0, 1);  // 20 m separation
  CHECK(std::abs(rate - 5029.0) <= 1.0);  // about 5.03 kbit/s

  RadioParams dead = r;
  dead.h0 = 0.0;
  CHECK(data_rate(g, dead, {0, 1}, 0, 1) == 0.0);

  RadioParams wide = r;
  wide.bandwidth_hz = 2.0 * r.bandwidth_hz;
  CHECK(data_rate(g, wide, {0, 1}, 0, 1) ==
        doctest::Approx(2.0 * rate).epsilon(1e-12));
}

TEST_CASE("rate symmetry and monotonicity properties") {
  const GridConfig g = grid5();
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    // random placement of 3 UAVs in distinct cells
    Placement p;
    while (p.size() < 3) {
      const int c = rng.index(g.cell_count());
      bool dup = false;
      for (int q : p) dup |= (q == c);
      if (!dup) p.push_back(c);
    }
    RadioParams r = table_radio();
    r.h0 = rng.uniform(1e-4, 1e-2);
    r.tx_power_w = rng.uniform(0.01, 1.0);

    const double ab = data_rate(g, r, p, 0, 1);
    const double ba = data_rate(g, r, p, 1, 0);
    CHECK(ab == ba);  // bitwise symmetric

    RadioParams stronger = r;
    stronger.tx_power_w = r.tx_power_w * 2.0;
    CHECK(data_rate(g, stronger, p, 0, 1) > ab);

    // nearer pair never carries a lower rate
    const double d01 = cell_distance(g, p[0], p[1]);
    const double d02 = cell_distance(g, p[0], p[2]);
    const double r01 = data_rate(g, r, p, 0, 1);
    const double r02 = data_rate(g, r, p, 0, 2);
    if (d01 < d02) CHECK(r01 >= r02);
    if (d02 < d01) CHECK(r02 >= r01);
  }
}

TEST_CASE("placement validity") {
  GridConfig g = grid5();
  g.hot_cells = {6, 12};
  std::string why;

  CHECK(placement_valid(g, {6, 12, 3}, true, &why));
  CHECK_FALSE(placement_valid(g, {6, 6, 3}, false, &why));   // shared cell
  CHECK_FALSE(placement_valid(g, {6, 25, 3}, false, &why));  // out of range
  CHECK_FALSE(placement_valid(g, {6, 1, 3}, true, &why));    // hot cell 12 uncovered
  CHECK(placement_valid(g, {6, 1, 3}, false, &why));         // ok when coverage not demanded

  // brute-force cross-check over random placements
  Rng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    Placement p;
    for (int i = 0; i < 3; ++i) p.push_back(rng.index(g.cell_count() + 1) - 0);  // may collide
    bool brute = true;
    for (size_t i = 0; i < p.size(); ++i) {
      if (p[i] < 0 || p[i] >= g.cell_count()) brute = false;
      for (size_t k = i + 1; k < p.size(); ++k)
        if (p[i] == p[k]) brute = false;
    }
    if (brute)
      for (int hot : g.hot_cells) {
        bool covered = false;
        for (int q : p) covered |= (q == hot);
        if (!covered) brute = false;
      }
    CHECK(placement_valid(g, p, true) == brute);
  }
}

TEST_CASE("grid validation and adjacency helper") {
  GridConfig g = grid5();
  g.hot_cells = {6, 12, 18};
  CHECK_NOTHROW(validate_grid(g));
  g.hot_cells = {40};
  CHECK_THROWS_AS(validate_grid(g), ConfigError);
  g.hot_cells.clear();
  g.side_cells = 0;
  CHECK_THROWS_AS(validate_grid(g), ConfigError);

  const GridConfig ok = grid5();
  CHECK(cells_adjacent(ok, 0, 1));
  CHECK(cells_adjacent(ok, 0, 6));   // diagonal counts
  CHECK(cells_adjacent(ok, 7, 7));   // staying put counts
  CHECK_FALSE(cells_adjacent(ok, 0, 2));
  CHECK_FALSE(cells_adjacent(ok, 4, 5));  // row wrap is not adjacency
}
