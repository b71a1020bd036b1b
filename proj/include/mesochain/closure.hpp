#pragma once

#include "mesochain/chain.hpp"
#include "mesochain/fine_grid.hpp"
#include "mesochain/mesh.hpp"

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace mesochain {

/// Synthetic microstate compatible with given mesh averages: equally spaced
/// particles inside every cell, cell means plus +/- fluctuations scaled so that
/// every cell carries the same kernel-weighted fluctuation energy
/// kappa_sq = (m/n) sum_j dv_j^2 psi_eta(x_beta - q_hat_j).
struct PrescribedState
{
  MesoMesh mesh;
  std::vector<double> q_hat;
  std::vector<double> v_hat;
  std::vector<std::size_t> n_beta;
  std::vector<double> delta_beta;
  // first particle index of each cell; cell beta owns [first[beta], first[beta] + n_beta)
  std::vector<std::size_t> first;

  // Filled by prescribe_velocities.
  double kappa_sq = 0.0;
  std::vector<double> k_beta;
  std::vector<double> t_amp;
  std::vector<int> signs;
  std::vector<double> dv;
  double energy_budget = 0.0;
  // total_energy(q_hat, v_hat) - reference energy
  double energy_residual = 0.0;

  bool has_velocities() const { return v_hat.size() == q_hat.size() && !q_hat.empty(); }
};

/// Even per-cell counts proportional to rho_bar and summing to cfg.n (which
/// must be even), placed at x_beta - l_eta/2 + (i + 1/2) l_eta/n_beta.
PrescribedState prescribe_positions(const MesoField& rho_bar, const ChainConfig& cfg);

/// Velocities v_bar_beta + t_beta * sign_j / psi_eta(x_beta - q_hat_j). Signs
/// alternate +1, -1 along each cell. Throws InfeasiblePrescriptionError when
/// energy_ref leaves no room for the potential energy of the prescribed
/// positions plus the kinetic energy of the cell means.
PrescribedState prescribe_velocities(const MesoField& v_bar,
                                     PrescribedState pos,
                                     double energy_ref,
                                     const WindowFunction& window,
                                     const ChainConfig& cfg);

/// ChainState holding the prescribed positions and velocities (t = 0).
ChainState as_chain_state(const PrescribedState& state);

/// Particles as a checkpoint CSV ("j,q,v"), per-cell data and kappa_sq in a
/// JSON record next to it.
void write_prescribed(const std::string& csv_path,
                      const std::string& json_path,
                      const PrescribedState& state,
                      const WindowFunction& window);

PrescribedState read_prescribed(const std::string& csv_path, const std::string& json_path);

enum class StressMode
{
  integral,
  riemann
};

std::string_view to_string(StressMode mode);
StressMode stress_mode_from_string(std::string_view name);

/// Zero-order interaction stress at the mesh nodes.
///
/// integral: -int_0^l U'(m / rho(y)) int_0^1 psi_eta(x - y - s h m / (l rho(y))) ds dy
///           with rho interpolated to `grid`.
/// riemann:  bond sum over the prescribed positions q_hat.
MesoField stress_int_zero(const MesoField& rho_bar,
                          const WindowFunction& window,
                          const ChainConfig& cfg,
                          StressMode mode,
                          const FineGrid& grid);

MesoField stress_int_zero(const MesoField& rho_bar,
                          const WindowFunction& window,
                          const ChainConfig& cfg,
                          StressMode mode = StressMode::integral);

/// Integral mode with a density already given on a fine grid.
MesoField stress_int_zero(const FineField& rho,
                          const MesoMesh& mesh,
                          const WindowFunction& window,
                          const ChainConfig& cfg);

/// Riemann sum of the convective stress over the prescribed particles,
/// -sum_j (l_eta / n_beta) dv_j^2 psi_eta(x - q_hat_j) rho_hat_beta with
/// rho_hat_beta = (m/n) n_beta / l_eta the density the particles represent.
/// For the box window every node equals -kappa_sq.
MesoField stress_conv_zero(const MesoField& v_bar,
                           const PrescribedState& prescribed,
                           const WindowFunction& window,
                           const ChainConfig& cfg);

struct OrderNStress
{
  MesoField conv;
  MesoField interaction;
};

/// Convective and interaction stress of order n from fine-grid
/// reconstructions J_n, v_n. The interaction integral keeps the bond offset
/// h / J_n(y) inside the kernel. Throws ReconstructionError if J_n <= 0.
OrderNStress stress_order_n(const FineField& j_n,
                            const FineField& v_n,
                            const MesoField& v_bar,
                            const WindowFunction& window,
                            const ChainConfig& cfg);

/// -U'(m / rho).
double local_eos(double rho, const ChainConfig& cfg);

/// Sound speed of the local equation of state, sqrt(|U''(m/rho)| m) / rho.
/// Zero in the tension (vacuum) range.
double sound_speed(double rho, const ChainConfig& cfg);

} // namespace mesochain
