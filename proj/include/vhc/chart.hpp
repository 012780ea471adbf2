#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace vhc {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// A single coordinate chart. Periodic coordinates live on [lo, lo + 2π)
/// and are reduced on request; non-periodic ones on the open box (lo, hi),
/// possibly unbounded.
struct Chart {
  std::size_t dim = 0;
  std::vector<bool> periodic;
  std::vector<double> lo;
  std::vector<double> hi;
  /// Parts of the chart to keep off when sampling grids (e.g. poles).
  /// Unbounded coordinates are sampled on [-window, window].
  double window = 1.0;

  static Chart euclidean(std::size_t n);
  /// Coordinates flagged true are periodic with period 2π starting at 0.
  static Chart cylinder(std::vector<bool> periodic);
  static Chart box(std::vector<double> lo, std::vector<double> hi);

  bool contains(std::span<const double> x) const;
  bool any_periodic() const;

  /// Reduce periodic coordinates to [lo, lo + 2π); others unchanged.
  std::vector<double> wrap(std::span<const double> x) const;

  /// Tensor grid with `per_dim` points per coordinate. Non-periodic bounded
  /// coordinates keep `margin` away from the boundary; periodic ones are
  /// sampled without repeating the endpoint.
  std::vector<std::vector<double>> grid(std::size_t per_dim, double margin = 1e-3) const;
};

}  // namespace vhc
