#include "mesochain/mesh.hpp"

#include "mesochain/error.hpp"
#include "mesochain/io.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace mesochain {

namespace {

constexpr double kGaussianCutoff = 4.0;

double
gaussian_norm()
{
  static const double norm = std::erf(kGaussianCutoff);
  return norm;
}

} // namespace

std::string_view
to_string(WindowKind kind)
{
  switch (kind) {
    case WindowKind::box:
      return "box";
    case WindowKind::gaussian:
      return "gaussian";
  }
  return "unknown";
}

WindowKind
window_kind_from_string(std::string_view name)
{
  if (name == "box")
    return WindowKind::box;
  if (name == "gaussian" || name == "gaussian-truncated")
    return WindowKind::gaussian;
  throw ConfigError("unknown window kind '" + std::string(name) + "'");
}

void
WindowFunction::validate() const
{
  if (!(eta > 0.0 && eta < 1.0 + 1e-12))
    throw ConfigError("window eta must lie in (0, 1]");
  if (!(l > 0.0))
    throw ConfigError("window domain length must be positive");
}

double
WindowFunction::support_half_width() const
{
  return kind == WindowKind::box ? 0.5 * width() : kGaussianCutoff * width();
}

double
WindowFunction::operator()(double x) const
{
  const double w = width();
  if (kind == WindowKind::box) {
    const double a = 0.5 * w;
    return (x > -a && x <= a) ? 1.0 / w : 0.0;
  }
  const double u = x / w;
  if (std::abs(u) > kGaussianCutoff)
    return 0.0;
  return std::exp(-u * u) / (std::sqrt(std::numbers::pi) * w * gaussian_norm());
}

double
WindowFunction::mass_between(double x, double lo, double hi) const
{
  if (!(hi > lo))
    return 0.0;
  const double s = support_half_width();
  // y-range where psi_eta(x - y) is nonzero
  const double a = std::max(lo, x - s);
  const double b = std::min(hi, x + s);
  if (!(b > a))
    return 0.0;
  if (kind == WindowKind::box)
    return (b - a) / width();
  const double w = width();
  return (std::erf((x - a) / w) - std::erf((x - b) / w)) / (2.0 * gaussian_norm());
}

void
MesoMesh::validate() const
{
  if (b < 1)
    throw ConfigError("mesh needs at least one cell");
  if (!(l > 0.0))
    throw ConfigError("mesh domain length must be positive");
}

std::vector<double>
MesoMesh::centers() const
{
  std::vector<double> x(b);
  for (std::size_t i = 0; i < b; ++i)
    x[i] = center(i);
  return x;
}

void
check_compatible(const WindowFunction& window, const MesoMesh& mesh)
{
  window.validate();
  mesh.validate();
  if (std::abs(window.l - mesh.l) > 1e-12 * mesh.l)
    throw ConfigError("window and mesh use different domain lengths");
  if (std::abs(window.eta * static_cast<double>(mesh.b) - 1.0) > 1e-9)
    throw ConfigError("mesh cell count b must equal 1/eta");
}

std::string_view
to_string(Quantity q)
{
  switch (q) {
    case Quantity::density:
      return "density";
    case Quantity::momentum:
      return "momentum";
    case Quantity::velocity:
      return "velocity";
    case Quantity::stress_conv:
      return "stress-conv";
    case Quantity::stress_int:
      return "stress-int";
    case Quantity::jacobian:
      return "jacobian";
    case Quantity::generic:
      return "generic";
  }
  return "unknown";
}

std::vector<char>
boundary_flags(const MesoMesh& mesh, const WindowFunction& window)
{
  const double reach = std::max(window.width(), window.support_half_width());
  std::vector<char> flags(mesh.b);
  for (std::size_t i = 0; i < mesh.b; ++i) {
    const double x = mesh.center(i);
    flags[i] = (x < reach || mesh.l - x < reach) ? 1 : 0;
  }
  return flags;
}

MesoField
MesoField::zeros(const MesoMesh& mesh, const WindowFunction& window, Quantity quantity)
{
  MesoField f;
  f.mesh = mesh;
  f.quantity = quantity;
  f.values.assign(mesh.b, 0.0);
  f.boundary_affected = boundary_flags(mesh, window);
  return f;
}

std::string
meso_field_csv(const MesoField& field)
{
  std::ostringstream out;
  out << "beta,x_beta,value,boundary_affected\n";
  for (std::size_t i = 0; i < field.size(); ++i) {
    const bool flag = i < field.boundary_affected.size() && field.boundary_affected[i];
    out << (i + 1) << ',' << format_double(field.mesh.center(i)) << ','
        << format_double(field.values[i]) << ',' << (flag ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string
paired_csv(const MesoField& exact, const MesoField& approx)
{
  if (exact.size() != approx.size())
    throw GridMismatchError("paired fields differ in size");
  std::ostringstream out;
  out << "beta,x_beta,exact,approx,abs_err\n";
  for (std::size_t i = 0; i < exact.size(); ++i)
    out << (i + 1) << ',' << format_double(exact.mesh.center(i)) << ','
        << format_double(exact.values[i]) << ',' << format_double(approx.values[i])
        << ',' << format_double(std::abs(exact.values[i] - approx.values[i]))
        << '\n';
  return out.str();
}

} // namespace mesochain
