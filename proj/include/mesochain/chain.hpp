#pragma once

#include "mesochain/potential.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mesochain {

/// Scaled microscale chain: n identical particles of mass m/n on (0, l),
/// nearest-neighbour forces from `potential`, and two stationary wall
/// particles interacting through the same potential with `wall_stiffness`.
struct ChainConfig
{
  std::size_t n = 0;
  double l = 1.0;
  double m = 1.0;
  PowerLawPotential potential;
  double wall_stiffness = 100.0;
  // Walls at -h/2 and l + h/2 instead of 0 and l; makes the uniform rest
  // lattice an exact equilibrium.
  bool wall_offset_half_h = false;
  double dt = 0.0;

  /// Config with wall stiffness equal to c_r and dt at the default stability
  /// fraction of 1/omega_max.
  static ChainConfig make(std::size_t n,
                          double l,
                          double m,
                          const PowerLawPotential& potential,
                          bool wall_offset_half_h = false);

  double eps() const { return 1.0 / static_cast<double>(n); }
  double h() const { return l / static_cast<double>(n); }
  double particle_mass() const { return m / static_cast<double>(n); }
  double left_wall() const { return wall_offset_half_h ? -0.5 * h() : 0.0; }
  double right_wall() const { return wall_offset_half_h ? l + 0.5 * h() : l; }

  /// Linearized bond frequency estimate n * sqrt(2 c_r p / m).
  double omega_max() const;
  /// 0.05 / omega_max().
  double default_dt() const;

  PowerLawPotential wall_potential() const;

  /// Throws ConfigError on n < 2, nonpositive l/m/dt, bad potential, or a
  /// dt above the stability bound.
  void validate() const;
};

struct ChainState
{
  double t = 0.0;
  std::vector<double> q;
  std::vector<double> v;
};

/// Throws DegenerateGeometryError unless the positions are strictly
/// increasing and strictly between the walls.
void check_admissible(const ChainConfig& cfg, const ChainState& state);

/// Net force on every particle (bond forces plus walls).
std::vector<double> net_forces(const ChainConfig& cfg, const ChainState& state);

/// In-place variant used by the integrator. Throws BlowUpError if a gap is
/// not positive. `forces.size()` must equal `q.size()`.
void compute_forces(const ChainConfig& cfg,
                    std::span<const double> q,
                    std::span<double> forces);

/// Total potential energy -eps * sum U(gap / eps) over bonds and walls.
double potential_energy(const ChainConfig& cfg, std::span<const double> q);

double kinetic_energy(const ChainConfig& cfg, std::span<const double> v);

double total_energy(const ChainConfig& cfg, const ChainState& state);

/// One velocity-Verlet step of size cfg.dt.
ChainState step_verlet(const ChainConfig& cfg, const ChainState& state);

/// Velocity Verlet with cached forces, for long runs.
class ChainIntegrator
{
public:
  ChainIntegrator(ChainConfig cfg, ChainState state);

  void step(double dt);
  void step() { step(cfg_.dt); }

  /// Steps with cfg.dt, shortening the last step so that time lands exactly
  /// on `t_target`.
  void advance_to(double t_target);

  const ChainState& state() const { return state_; }
  const ChainConfig& config() const { return cfg_; }
  std::size_t steps_taken() const { return steps_; }

  /// Negates all velocities (time reversal).
  void reverse_velocities();

private:
  ChainConfig cfg_;
  ChainState state_;
  std::vector<double> forces_;
  std::size_t steps_ = 0;
};

/// Uniform lattice q_j = (j - 1/2) h with the piecewise ramp velocity:
/// gamma on [0, l/5], gamma * (2 - 5q/l) on [l/5, 2l/5], 0 beyond.
ChainState init_ramp(const ChainConfig& cfg, double gamma);

/// init_ramp plus amp * sin(5 k pi q / l) on [0, 2l/5].
ChainState init_oscillatory(const ChainConfig& cfg,
                            double gamma,
                            double amp,
                            double freq);

double ramp_velocity(double q, double l, double gamma);

// Checkpoint I/O: CSV with header "j,q,v" (j is 1-based) plus a JSON sidecar
// holding the ChainConfig and the time.
void write_checkpoint(const std::string& csv_path,
                      const std::string& json_path,
                      const ChainConfig& cfg,
                      const ChainState& state);

ChainState read_checkpoint(const std::string& csv_path,
                           const std::string& json_path,
                           ChainConfig* cfg_out = nullptr);

} // namespace mesochain
