#pragma once

#include "mesochain/mesh.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mesochain {

/// Uniform grid of g points on [0, l], endpoints included.
struct FineGrid
{
  std::size_t g = 0;
  double l = 1.0;

  static FineGrid with_points(std::size_t g, double l = 1.0) { return {g, l}; }
  /// min(n, 4096) points.
  static FineGrid default_for(std::size_t n_particles, double l = 1.0);

  void validate() const;

  double dx() const { return l / static_cast<double>(g - 1); }
  double x(std::size_t i) const { return static_cast<double>(i) * dx(); }

  bool operator==(const FineGrid& other) const = default;
};

struct FineField
{
  FineGrid grid;
  std::vector<double> values;

  static FineField zeros(const FineGrid& grid) { return {grid, std::vector<double>(grid.g, 0.0)}; }
  static FineField constant(const FineGrid& grid, double c)
  {
    return {grid, std::vector<double>(grid.g, c)};
  }

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
};

/// Trapezoid weights (dx, half at both ends).
std::vector<double> trapezoid_weights(const FineGrid& grid);

/// Trapezoid L2 norm over [0, l].
double l2_norm(const FineGrid& grid, std::span<const double> values);

/// Piecewise-linear interpolation through the node values of `field`, with
/// constant extension between the outer nodes and the walls.
FineField interpolate_to_fine(const MesoField& field, const FineGrid& grid);

/// Linear interpolation of a fine field at an arbitrary point of [0, l].
double sample(const FineField& field, double x);

/// `sample` at every mesh node.
std::vector<double> sample_at_nodes(const FineField& field, const MesoMesh& mesh);

/// Exact integrals of the piecewise-linear interpolant of fine-grid samples.
class PiecewiseLinear
{
public:
  PiecewiseLinear(const FineGrid& grid, std::span<const double> values);

  double operator()(double y) const;
  /// Integral over [lo, hi] clipped to [0, l].
  double integral(double lo, double hi) const;

private:
  double integral_from_zero(double z) const;

  FineGrid grid_;
  std::vector<double> values_;
  std::vector<double> prefix_;
};

/// int_0^l psi_eta(x - y) G(y) dy, G the piecewise-linear interpolant of
/// `values`. Exact for the box window, trapezoid rule otherwise.
double window_integral(const WindowFunction& window,
                       const PiecewiseLinear& interpolant,
                       const FineGrid& grid,
                       std::span<const double> values,
                       double x);

/// CSV "i,x_i,value" (i is 0-based).
std::string fine_field_csv(const FineField& field);

} // namespace mesochain
