// SPDX-License-Identifier: Apache-2.0
#include "swarminfer/grid.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "swarminfer/errors.hpp"

namespace swarminfer {

namespace {
void check_cell(const GridConfig& grid, int cell) {
  if (cell < 0 || cell >= grid.cell_count())
    throw std::invalid_argument("cell " + std::to_string(cell) + " outside grid of " +
                                std::to_string(grid.cell_count()) + " cells");
}
}  // namespace

Vec2 cell_center(const GridConfig& grid, int cell) {
  check_cell(grid, cell);
  const int row = cell / grid.side_cells;
  const int col = cell % grid.side_cells;
  return {(col + 0.5) * grid.cell_size_m, (row + 0.5) * grid.cell_size_m};
}

double cell_distance(const GridConfig& grid, int a, int b) {
  const Vec2 pa = cell_center(grid, a);
  const Vec2 pb = cell_center(grid, b);
  return std::hypot(pa.x - pb.x, pa.y - pb.y);
}

double channel_gain(const GridConfig& grid, const RadioParams& radio, const Placement& placement,
                    int i, int k) {
  if (i == k) throw std::invalid_argument("channel_gain: no self-link");
  if (i < 0 || k < 0 || i >= static_cast<int>(placement.size()) ||
      k >= static_cast<int>(placement.size()))
    throw std::invalid_argument("channel_gain: UAV index outside placement");
  const double d = cell_distance(grid, placement[i], placement[k]);
  if (d <= 0.0)
    throw std::invalid_argument("channel_gain: co-located UAVs have no defined link");
  return radio.h0 / (d * d);
}

double data_rate_from_gain(const RadioParams& radio, double gain) {
  if (gain < 0.0) throw std::invalid_argument("data_rate: negative gain");
  return radio.bandwidth_hz * std::log2(1.0 + gain * radio.tx_power_w / radio.noise_w);
}

double data_rate(const GridConfig& grid, const RadioParams& radio, const Placement& placement,
                 int i, int k) {
  return data_rate_from_gain(radio, channel_gain(grid, radio, placement, i, k));
}

bool placement_valid(const GridConfig& grid, const Placement& placement, bool check_hot_cells,
                     std::string* why) {
  std::set<int> seen;
  for (size_t i = 0; i < placement.size(); ++i) {
    const int cell = placement[i];
    if (cell < 0 || cell >= grid.cell_count()) {
      if (why) *why = "UAV " + std::to_string(i) + " outside the grid";
      return false;
    }
    if (!seen.insert(cell).second) {
      if (why) *why = "cell " + std::to_string(cell) + " occupied twice";
      return false;
    }
  }
  if (check_hot_cells)
    for (int hot : grid.hot_cells)
      if (!seen.count(hot)) {
        if (why) *why = "hot cell " + std::to_string(hot) + " uncovered";
        return false;
      }
  if (why) why->clear();
  return true;
}

bool cells_adjacent(const GridConfig& grid, int a, int b) {
  check_cell(grid, a);
  check_cell(grid, b);
  const int dr = std::abs(a / grid.side_cells - b / grid.side_cells);
  const int dc = std::abs(a % grid.side_cells - b % grid.side_cells);
  return dr <= 1 && dc <= 1;
}

void validate_grid(const GridConfig& grid) {
  if (grid.side_cells <= 0) throw ConfigError("grid side_cells must be positive");
  if (grid.cell_size_m <= 0.0) throw ConfigError("grid cell_size_m must be positive");
  std::set<int> seen;
  for (int hot : grid.hot_cells) {
    if (hot < 0 || hot >= grid.cell_count())
      throw ConfigError("hot cell " + std::to_string(hot) + " outside the grid");
    if (!seen.insert(hot).second)
      throw ConfigError("hot cell " + std::to_string(hot) + " listed twice");
  }
}

void validate_radio(const RadioParams& radio) {
  if (radio.h0 < 0.0) throw ConfigError("radio h0 must be non-negative");
  if (radio.tx_power_w <= 0.0) throw ConfigError("radio tx_power_w must be positive");
  if (radio.noise_w <= 0.0) throw ConfigError("radio noise_w must be positive");
  if (radio.bandwidth_hz <= 0.0) throw ConfigError("radio bandwidth_hz must be positive");
}

}  // namespace swarminfer
