#include "mesochain/fine_grid.hpp"

#include "mesochain/error.hpp"
#include "mesochain/io.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mesochain {

FineGrid
FineGrid::default_for(std::size_t n_particles, double l)
{
  return {std::min<std::size_t>(n_particles, 4096), l};
}

void
FineGrid::validate() const
{
  if (g < 2)
    throw ConfigError("fine grid needs at least two points");
  if (!(l > 0.0))
    throw ConfigError("fine grid domain length must be positive");
}

std::vector<double>
trapezoid_weights(const FineGrid& grid)
{
  std::vector<double> w(grid.g, grid.dx());
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

double
l2_norm(const FineGrid& grid, std::span<const double> values)
{
  if (values.size() != grid.g)
    throw GridMismatchError("field size does not match the grid");
  const double dx = grid.dx();
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = (i == 0 || i + 1 == values.size()) ? 0.5 * dx : dx;
    sum += w * values[i] * values[i];
  }
  return std::sqrt(sum);
}

FineField
interpolate_to_fine(const MesoField& field, const FineGrid& grid)
{
  grid.validate();
  const MesoMesh& mesh = field.mesh;
  if (field.size() != mesh.b || mesh.b == 0)
    throw GridMismatchError("mesh field size does not match its mesh");
  FineField out = FineField::zeros(grid);
  const double le = mesh.l_eta();
  for (std::size_t i = 0; i < grid.g; ++i) {
    const double y = grid.x(i);
    // position in units of node spacing, node k at k + 1/2
    const double u = y / le - 0.5;
    if (u <= 0.0) {
      out[i] = field.values.front();
    } else if (u >= static_cast<double>(mesh.b - 1)) {
      out[i] = field.values.back();
    } else {
      const auto k = static_cast<std::size_t>(u);
      const double t = u - static_cast<double>(k);
      out[i] = (1.0 - t) * field.values[k] + t * field.values[k + 1];
    }
  }
  return out;
}

double
sample(const FineField& field, double x)
{
  const FineGrid& grid = field.grid;
  const double u = std::clamp(x / grid.dx(), 0.0, static_cast<double>(grid.g - 1));
  auto k = static_cast<std::size_t>(u);
  if (k >= grid.g - 1)
    return field.values.back();
  const double t = u - static_cast<double>(k);
  return (1.0 - t) * field.values[k] + t * field.values[k + 1];
}

std::vector<double>
sample_at_nodes(const FineField& field, const MesoMesh& mesh)
{
  std::vector<double> out(mesh.b);
  for (std::size_t i = 0; i < mesh.b; ++i)
    out[i] = sample(field, mesh.center(i));
  return out;
}

PiecewiseLinear::PiecewiseLinear(const FineGrid& grid, std::span<const double> values)
  : grid_(grid)
  , values_(values.begin(), values.end())
  , prefix_(values.size(), 0.0)
{
  if (values.size() != grid.g)
    throw GridMismatchError("interpolant values do not match the grid");
  const double dx = grid.dx();
  for (std::size_t k = 1; k < values_.size(); ++k)
    prefix_[k] = prefix_[k - 1] + 0.5 * dx * (values_[k - 1] + values_[k]);
}

double
PiecewiseLinear::operator()(double y) const
{
  const double u = std::clamp(y / grid_.dx(), 0.0, static_cast<double>(grid_.g - 1));
  auto k = static_cast<std::size_t>(u);
  if (k >= grid_.g - 1)
    return values_.back();
  const double t = u - static_cast<double>(k);
  return (1.0 - t) * values_[k] + t * values_[k + 1];
}

double
PiecewiseLinear::integral_from_zero(double z) const
{
  const double dx = grid_.dx();
  if (z <= 0.0)
    return 0.0;
  if (z >= grid_.l)
    return prefix_.back();
  auto k = static_cast<std::size_t>(z / dx);
  if (k >= grid_.g - 1)
    k = grid_.g - 2;
  const double t = (z - static_cast<double>(k) * dx) / dx;
  const double a = values_[k];
  const double b = values_[k + 1];
  return prefix_[k] + dx * (a * t + 0.5 * (b - a) * t * t);
}

double
PiecewiseLinear::integral(double lo, double hi) const
{
  lo = std::max(lo, 0.0);
  hi = std::min(hi, grid_.l);
  if (!(hi > lo))
    return 0.0;
  return integral_from_zero(hi) - integral_from_zero(lo);
}

double
window_integral(const WindowFunction& window,
                const PiecewiseLinear& interpolant,
                const FineGrid& grid,
                std::span<const double> values,
                double x)
{
  const double s = window.support_half_width();
  if (window.kind == WindowKind::box)
    return interpolant.integral(x - s, x + s) / window.width();

  const double dx = grid.dx();
  const double max_index = static_cast<double>(grid.g - 1);
  const auto first = static_cast<std::size_t>(std::clamp(std::ceil((x - s) / dx), 0.0, max_index));
  const auto last = static_cast<std::size_t>(std::clamp(std::floor((x + s) / dx), 0.0, max_index));
  double sum = 0.0;
  for (std::size_t k = first; k <= last; ++k) {
    const double w = (k == 0 || k + 1 == grid.g) ? 0.5 * dx : dx;
    sum += w * window(x - grid.x(k)) * values[k];
  }
  return sum;
}

std::string
fine_field_csv(const FineField& field)
{
  std::ostringstream out;
  out << "i,x_i,value\n";
  for (std::size_t i = 0; i < field.size(); ++i)
    out << i << ',' << format_double(field.grid.x(i)) << ','
        << format_double(field.values[i]) << '\n';
  return out.str();
}

} // namespace mesochain
