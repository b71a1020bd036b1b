#pragma once

#include "mesochain/chain.hpp"
#include "mesochain/fine_grid.hpp"
#include "mesochain/mesh.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace mesochain {

/// Discretized convolution R[f](x_i) = int_0^l psi_eta(x_i - y) f(y) dy on a
/// fine grid, stored as a banded matrix.
///
/// Box rows integrate the window exactly against the hat functions of the
/// piecewise-linear interpolant of f. Gaussian rows use trapezoid weights
/// normalized so that rows whose support lies inside (0, l) sum to one. The
/// integral is truncated at the walls, so rows near them sum to less than one.
class ConvOperator
{
public:
  ConvOperator(const WindowFunction& window, const FineGrid& grid);

  const WindowFunction& window() const { return window_; }
  const FineGrid& grid() const { return grid_; }

  void apply(std::span<const double> in, std::span<double> out) const;
  void apply_transpose(std::span<const double> in, std::span<double> out) const;

  double row_sum(std::size_t i) const;

  /// Row-major dense copy, g x g.
  std::vector<double> dense() const;

private:
  WindowFunction window_;
  FineGrid grid_;
  std::vector<std::size_t> first_col_;
  std::vector<std::size_t> offset_;
  std::vector<double> weights_;
};

FineField apply_R(const ConvOperator& op, const FineField& f);

/// g_n = sum_{k=0}^{n} (I - R)^k gbar, via g_{k+1} = gbar + (I - R) g_k.
FineField landweber_reconstruct(const ConvOperator& op, const FineField& gbar, std::size_t n);

/// Trapezoid L2 norm of R g - gbar.
double residual_norm(const ConvOperator& op, const FineField& g, const FineField& gbar);

/// J_n = (l/m) * landweber(rho_bar, n).
FineField reconstruct_J(const ConvOperator& op,
                        const FineField& rho_bar,
                        std::size_t n,
                        const ChainConfig& cfg);

/// v_n = landweber(mom_bar, n) / landweber(rho_bar, n). Throws NearVacuumError
/// where the denominator drops below 1e-8 m/l.
FineField reconstruct_v(const ConvOperator& op,
                        const FineField& rho_bar,
                        const FineField& mom_bar,
                        std::size_t n,
                        const ChainConfig& cfg);

/// Smallest n <= max_n with ||R g_n - gbar|| <= tau_delta, else max_n.
std::size_t discrepancy_stop(const ConvOperator& op,
                             const FineField& gbar,
                             std::size_t max_n,
                             double tau_delta);

/// Power-iteration estimate of ||I - R|| in the trapezoid-weighted L2 norm
/// used by residual_norm.
double identity_minus_norm(const ConvOperator& op, std::size_t iterations = 2000);

} // namespace mesochain
