#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace mesochain {

enum class WindowKind
{
  box,
  gaussian
};

std::string_view to_string(WindowKind kind);
WindowKind window_kind_from_string(std::string_view name);

/// Averaging kernel psi_eta(x) = psi(x / (eta l)) / (eta l) on (0, l).
///
/// box:      1 / (eta l) for x in (-eta l / 2, eta l / 2]. A particle sitting
///           exactly on a cell boundary is counted in the cell to its right.
/// gaussian: exp(-(x / (eta l))^2) / (sqrt(pi) eta l), truncated at
///           |x| <= 4 eta l and renormalized to unit mass.
struct WindowFunction
{
  WindowKind kind = WindowKind::box;
  double eta = 0.02;
  double l = 1.0;

  static WindowFunction box(double eta, double l = 1.0) { return {WindowKind::box, eta, l}; }
  static WindowFunction gaussian(double eta, double l = 1.0)
  {
    return {WindowKind::gaussian, eta, l};
  }

  void validate() const;

  /// eta * l, the mesoscale length.
  double width() const { return eta * l; }
  /// Half-width of the (compact) support.
  double support_half_width() const;

  double operator()(double x) const;

  /// Integral of psi_eta(x - y) over y in [lo, hi].
  double mass_between(double x, double lo, double hi) const;
};

/// Mesoscale mesh: b cells of width l/b centered at (beta - 1/2) l / b.
struct MesoMesh
{
  std::size_t b = 0;
  double l = 1.0;

  static MesoMesh with_cells(std::size_t b, double l = 1.0) { return {b, l}; }

  void validate() const;

  double l_eta() const { return l / static_cast<double>(b); }
  double eta() const { return 1.0 / static_cast<double>(b); }
  /// Center of cell i (0-based).
  double center(std::size_t i) const
  {
    return (static_cast<double>(i) + 0.5) * l_eta();
  }
  std::vector<double> centers() const;
};

/// Throws ConfigError unless window and mesh describe the same domain with
/// b * eta = 1.
void check_compatible(const WindowFunction& window, const MesoMesh& mesh);

enum class Quantity
{
  density,
  momentum,
  velocity,
  stress_conv,
  stress_int,
  jacobian,
  generic
};

std::string_view to_string(Quantity q);

/// A quantity sampled at the mesh nodes.
struct MesoField
{
  MesoMesh mesh;
  Quantity quantity = Quantity::generic;
  std::vector<double> values;
  // Cells within max(eta l, kernel half-width) of a wall.
  std::vector<char> boundary_affected;

  static MesoField zeros(const MesoMesh& mesh,
                         const WindowFunction& window,
                         Quantity quantity);

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
};

std::vector<char> boundary_flags(const MesoMesh& mesh, const WindowFunction& window);

/// CSV with header "beta,x_beta,value,boundary_affected" (beta is 1-based).
std::string meso_field_csv(const MesoField& field);

/// Two-field CSV "beta,x_beta,exact,approx,abs_err".
std::string paired_csv(const MesoField& exact, const MesoField& approx);

} // namespace mesochain
