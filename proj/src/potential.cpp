#include "mesochain/potential.hpp"

#include "mesochain/error.hpp"

#include <cmath>
#include <string>

namespace mesochain {

void
PowerLawPotential::validate() const
{
  if (!(c_r > 0.0))
    throw ConfigError("potential stiffness c_r must be positive");
  if (!(p > 1.0))
    throw ConfigError("potential exponent p must exceed 1");
  if (!(x_star > 0.0))
    throw ConfigError("potential cutoff x_star must be positive");
}

double
PowerLawPotential::inv_pow_general(double xi) const
{
  return std::pow(xi, -p);
}

double
PowerLawPotential::x_star_pow_1mp() const
{
  if (p == 2.0)
    return 1.0 / x_star;
  return std::pow(x_star, 1.0 - p);
}

double
PowerLawPotential::value(double xi) const
{
  if (!(xi > 0.0))
    throw DomainError("potential evaluated at nonpositive argument " +
                      std::to_string(xi));
  if (xi >= x_star)
    return 0.0;
  const double a = x_star * std::pow(xi, 1.0 - p) / (1.0 - p);
  const double b = xi * std::pow(x_star, 1.0 - p);
  const double c = p / (p - 1.0) * std::pow(x_star, 2.0 - p);
  return c_r * (a - b + c);
}

double
PowerLawPotential::derivative(double xi) const
{
  if (!(xi > 0.0))
    throw DomainError("potential derivative evaluated at nonpositive argument " +
                      std::to_string(xi));
  return derivative_unchecked(xi);
}

double
PowerLawPotential::second_derivative(double xi) const
{
  if (!(xi > 0.0))
    throw DomainError("potential second derivative evaluated at nonpositive "
                      "argument " + std::to_string(xi));
  // left limit at the cutoff (compression side)
  if (xi > x_star)
    return 0.0;
  return -c_r * p * x_star * std::pow(xi, -p - 1.0);
}

double
potential_energy_scalar(const PowerLawPotential& pot, double xi)
{
  return pot.value(xi);
}

double
force_magnitude(const PowerLawPotential& pot, double xi)
{
  return pot.derivative(xi);
}

} // namespace mesochain
