// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace swarminfer {

// square service area split into side_cells x side_cells cells, row-major ids
struct GridConfig {
  int side_cells = 5;
  double cell_size_m = 20.0;
  std::vector<int> hot_cells;  // cells demanding service coverage

  int cell_count() const { return side_cells * side_cells; }
  double extent_m() const { return side_cells * cell_size_m; }
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct RadioParams {
  double h0 = 1e-3;          // channel gain at 1 m
  double tx_power_w = 0.1;   // transmit power
  double noise_w = 7.9e-9;   // noise power
  double bandwidth_hz = 1000.0;
};

// cell -> hovering position at the cell's center
using Placement = std::vector<int>;

Vec2 cell_center(const GridConfig& grid, int cell);
double cell_distance(const GridConfig& grid, int a, int b);

// air-to-air gain h0 / d^2 between UAVs i and k of the placement;
// throws std::invalid_argument for a self-link or co-located UAVs
double channel_gain(const GridConfig& grid, const RadioParams& radio, const Placement& placement,
                    int i, int k);

// Shannon rate B log2(1 + h P / noise) in bit/s
double data_rate_from_gain(const RadioParams& radio, double gain);
double data_rate(const GridConfig& grid, const RadioParams& radio, const Placement& placement,
                 int i, int k);

// every UAV on a distinct in-range cell; optionally every hot cell occupied
bool placement_valid(const GridConfig& grid, const Placement& placement, bool check_hot_cells,
                     std::string* why = nullptr);

// 8-neighborhood (or staying put), for the optional restricted-movement mode
bool cells_adjacent(const GridConfig& grid, int a, int b);

// throws ConfigError on nonpositive dimensions or out-of-range/duplicate hot cells
void validate_grid(const GridConfig& grid);
void validate_radio(const RadioParams& radio);

}  // namespace swarminfer
