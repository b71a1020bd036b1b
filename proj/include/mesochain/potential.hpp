#pragma once

namespace mesochain {

/// Finite-range repulsive power-law pair potential (Hertz-like contact).
///
///   U(xi) = c_r * ( x_star * xi^(1-p) / (1-p) - xi * x_star^(1-p)
///                   + p/(p-1) * x_star^(2-p) )          for 0 < xi <= x_star
///   U(xi) = 0                                             for xi > x_star
///
/// U and U' both vanish at the cutoff, and U' >= 0 inside the range. The
/// argument xi is a scaled distance (gap / eps), so x_star is measured in the
/// same units as the domain length.
struct PowerLawPotential
{
  double c_r = 100.0;
  double p = 2.0;
  double x_star = 1.0;

  /// Throws ConfigError unless c_r > 0, p > 1 and x_star > 0.
  void validate() const;

  double value(double xi) const;
  double derivative(double xi) const;
  double second_derivative(double xi) const;

  /// Same as derivative() without the domain check, for the hot loop.
  double derivative_unchecked(double xi) const
  {
    if (xi >= x_star)
      return 0.0;
    double inv_pow;
    if (p == 2.0) {
      const double r = 1.0 / xi;
      inv_pow = r * r;
    } else {
      inv_pow = inv_pow_general(xi);
    }
    return c_r * (x_star * inv_pow - x_star_pow_1mp());
  }

private:
  double inv_pow_general(double xi) const;
  double x_star_pow_1mp() const;
};

/// U(xi); throws DomainError for xi <= 0.
double potential_energy_scalar(const PowerLawPotential& pot, double xi);

/// U'(xi) >= 0; throws DomainError for xi <= 0.
double force_magnitude(const PowerLawPotential& pot, double xi);

} // namespace mesochain
