#pragma once

#include "mesochain/chain.hpp"
#include "mesochain/mesh.hpp"

#include <span>
#include <vector>

namespace mesochain {

/// rho_beta = (M/N) sum_j psi_eta(x_beta - q_j).
MesoField average_density(const ChainConfig& cfg,
                          const ChainState& state,
                          const WindowFunction& window,
                          const MesoMesh& mesh);

/// (rho v)_beta = (M/N) sum_j v_j psi_eta(x_beta - q_j).
MesoField average_momentum(const ChainConfig& cfg,
                           const ChainState& state,
                           const WindowFunction& window,
                           const MesoMesh& mesh);

/// v_beta = sum_j v_j psi / sum_j psi. Throws EmptyCellError listing every
/// cell whose kernel sees no particle.
MesoField average_velocity(const ChainConfig& cfg,
                           const ChainState& state,
                           const WindowFunction& window,
                           const MesoMesh& mesh);

/// T_c(x_beta) = -(M/N) sum_j (v_j - v_beta)^2 psi_eta(x_beta - q_j) <= 0.
/// Cells without particles get 0.
MesoField convective_stress_exact(const ChainConfig& cfg,
                                  const ChainState& state,
                                  const WindowFunction& window,
                                  const MesoMesh& mesh);

/// T_int(x_beta) = sum_j f_{j,j+1} (q_{j+1} - q_j) int_0^1 psi_eta(x_beta -
/// q_j - s (q_{j+1} - q_j)) ds over the n-1 internal bonds. Negative under
/// compression.
MesoField interaction_stress_exact(const ChainConfig& cfg,
                                   const ChainState& state,
                                   const WindowFunction& window,
                                   const MesoMesh& mesh);

/// Bond stress sum shared by the exact stress and the Riemann-sum closure:
/// sum_j bond_force[j] * int_{q_j}^{q_{j+1}} psi_eta(x - y) dy. The bond
/// integral is an exact interval overlap for the box window and 5-point
/// Gauss-Legendre otherwise.
std::vector<double> bond_stress_sum(const WindowFunction& window,
                                    const MesoMesh& mesh,
                                    std::span<const double> q,
                                    std::span<const double> bond_force);

/// Kernel-weighted mass of the bond [a, b] seen from x:
/// (b - a) int_0^1 psi_eta(x - a - s (b - a)) ds.
double bond_window_integral(const WindowFunction& window, double x, double a, double b);

struct JacobianField
{
  MesoField field;
  // Node lies outside [q_1, q_n]; the value comes from the nearest end bond.
  std::vector<char> extrapolated;
};

/// J(x_beta) = h / (q_{j+1} - q_j) for the bond of the piecewise-linear
/// position interpolant that contains x_beta. Boundary flags use the cell
/// width as reach.
JacobianField jacobian_at_mesh(const ChainConfig& cfg,
                               const ChainState& state,
                               const MesoMesh& mesh);

} // namespace mesochain
