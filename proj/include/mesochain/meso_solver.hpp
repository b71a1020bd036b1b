#pragma once

#include "mesochain/chain.hpp"
#include "mesochain/closure.hpp"
#include "mesochain/mesh.hpp"

#include <functional>
#include <string_view>
#include <vector>

namespace mesochain {

struct MesoState
{
  MesoField rho;
  MesoField mom;
  double t = 0.0;

  /// sum rho * l_eta.
  double mass() const;
  std::vector<double> velocity() const;
};

/// Interaction (or total) stress at the mesh nodes as a function of the
/// current state.
using StressClosure = std::function<std::vector<double>(const MesoState&)>;

/// Zero-order interaction stress, integral form, on `grid`.
StressClosure integral_closure(const WindowFunction& window,
                               const ChainConfig& cfg,
                               const FineGrid& grid);

/// Pointwise -U'(m / rho).
StressClosure local_eos_closure(const ChainConfig& cfg);

/// Adds the zero-order convective stress of a quasi-isothermal prescription
/// built from each state with reference energy `energy_ref`.
StressClosure with_convective(StressClosure base,
                              const WindowFunction& window,
                              const ChainConfig& cfg,
                              double energy_ref);

enum class FluxScheme
{
  lax_friedrichs,
  rusanov
};

std::string_view to_string(FluxScheme scheme);
FluxScheme flux_scheme_from_string(std::string_view name);

struct MesoSolverOptions
{
  FluxScheme scheme = FluxScheme::lax_friedrichs;
  // hard limit checked by step_meso
  double cfl_max = 0.9;
  // step size target used by run_closed
  double cfl_target = 0.8;
};

/// Largest signal speed max(|v| + c_s) over the cells.
double max_signal_speed(const MesoState& state, const ChainConfig& cfg);

/// One conservative explicit finite-volume step of
///   rho_t + m_x = 0,  m_t + (m^2 / rho - T)_x = 0
/// with reflective walls. Throws CflError or NegativeDensityError.
MesoState step_meso(const MesoState& state,
                    const StressClosure& closure,
                    double dt,
                    const ChainConfig& cfg,
                    const MesoSolverOptions& options = {});

/// States at each requested time (sorted, >= initial.t). Steps are
/// shortened to land on every snapshot time.
std::vector<MesoState> run_closed(const MesoState& initial,
                                  const std::vector<double>& snapshot_times,
                                  const StressClosure& closure,
                                  const ChainConfig& cfg,
                                  const MesoSolverOptions& options = {});

} // namespace mesochain
