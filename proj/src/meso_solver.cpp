#include "mesochain/meso_solver.hpp"

#include "mesochain/error.hpp"

#include <algorithm>
#include <cmath>

namespace mesochain {

double
MesoState::mass() const
{
  double sum = 0.0;
  for (double r : rho.values)
    sum += r;
  return sum * rho.mesh.l_eta();
}

std::vector<double>
MesoState::velocity() const
{
  std::vector<double> v(rho.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = mom[i] / rho[i];
  return v;
}

StressClosure
integral_closure(const WindowFunction& window, const ChainConfig& cfg, const FineGrid& grid)
{
  return [window, cfg, grid](const MesoState& s) {
    return stress_int_zero(s.rho, window, cfg, StressMode::integral, grid).values;
  };
}

StressClosure
local_eos_closure(const ChainConfig& cfg)
{
  return [cfg](const MesoState& s) {
    std::vector<double> t(s.rho.size());
    for (std::size_t i = 0; i < t.size(); ++i)
      t[i] = local_eos(s.rho[i], cfg);
    return t;
  };
}

StressClosure
with_convective(StressClosure base,
                const WindowFunction& window,
                const ChainConfig& cfg,
                double energy_ref)
{
  return [base = std::move(base), window, cfg, energy_ref](const MesoState& s) {
    std::vector<double> t = base(s);
    MesoField v = s.rho;
    v.quantity = Quantity::velocity;
    v.values = s.velocity();
    const PrescribedState st =
      prescribe_velocities(v, prescribe_positions(s.rho, cfg), energy_ref, window, cfg);
    const MesoField tc = stress_conv_zero(v, st, window, cfg);
    for (std::size_t i = 0; i < t.size(); ++i)
      t[i] += tc[i];
    return t;
  };
}

std::string_view
to_string(FluxScheme scheme)
{
  return scheme == FluxScheme::lax_friedrichs ? "lax_friedrichs" : "rusanov";
}

FluxScheme
flux_scheme_from_string(std::string_view name)
{
  if (name == "lax_friedrichs" || name == "lax-friedrichs" || name == "lf")
    return FluxScheme::lax_friedrichs;
  if (name == "rusanov")
    return FluxScheme::rusanov;
  throw ConfigError("unknown flux scheme '" + std::string(name) + "'");
}

double
max_signal_speed(const MesoState& state, const ChainConfig& cfg)
{
  double smax = 0.0;
  for (std::size_t i = 0; i < state.rho.size(); ++i) {
    const double r = state.rho[i];
    if (!(r > 0.0))
      throw NegativeDensityError("density " + std::to_string(r) + " in cell " +
                                 std::to_string(i + 1));
    smax = std::max(smax, std::abs(state.mom[i] / r) + sound_speed(r, cfg));
  }
  return smax;
}

MesoState
step_meso(const MesoState& state,
          const StressClosure& closure,
          double dt,
          const ChainConfig& cfg,
          const MesoSolverOptions& options)
{
  const std::size_t b = state.rho.size();
  if (b < 2 || state.mom.size() != b)
    throw GridMismatchError("meso state needs matching density and momentum on >= 2 cells");
  if (!(dt > 0.0))
    throw ConfigError("meso time step must be positive");
  const double dx = state.rho.mesh.l_eta();
  const double smax = max_signal_speed(state, cfg);
  const double cfl = dt * smax / dx;
  if (cfl > options.cfl_max)
    throw CflError("CFL number " + std::to_string(cfl) + " exceeds " +
                   std::to_string(options.cfl_max));

  const std::vector<double> stress = closure(state);
  if (stress.size() != b)
    throw GridMismatchError("closure returned a stress of the wrong size");

  // cells -1 and b are reflective ghosts
  auto rho_at = [&](long i) {
    return state.rho[static_cast<std::size_t>(std::clamp(i, 0L, static_cast<long>(b) - 1))];
  };
  auto mom_at = [&](long i) {
    if (i < 0 || i >= static_cast<long>(b))
      return -state.mom[static_cast<std::size_t>(std::clamp(i, 0L, static_cast<long>(b) - 1))];
    return state.mom[static_cast<std::size_t>(i)];
  };
  auto stress_at = [&](long i) {
    return stress[static_cast<std::size_t>(std::clamp(i, 0L, static_cast<long>(b) - 1))];
  };
  auto speed_at = [&](long i) {
    const double r = rho_at(i);
    return std::abs(mom_at(i) / r) + sound_speed(r, cfg);
  };

  std::vector<double> flux_rho(b + 1);
  std::vector<double> flux_mom(b + 1);
  for (std::size_t f = 0; f <= b; ++f) {
    const long l = static_cast<long>(f) - 1;
    const long r = static_cast<long>(f);
    const double rl = rho_at(l), rr = rho_at(r);
    const double ml = mom_at(l), mr = mom_at(r);
    const double fl_rho = ml;
    const double fr_rho = mr;
    const double fl_mom = ml * ml / rl - stress_at(l);
    const double fr_mom = mr * mr / rr - stress_at(r);
    double diffusion;
    if (options.scheme == FluxScheme::lax_friedrichs)
      diffusion = 0.5 * dx / dt;
    else
      diffusion = 0.5 * std::max(speed_at(l), speed_at(r));
    flux_rho[f] = 0.5 * (fl_rho + fr_rho) - diffusion * (rr - rl);
    flux_mom[f] = 0.5 * (fl_mom + fr_mom) - diffusion * (mr - ml);
  }
  // walls carry no mass
  flux_rho[0] = 0.0;
  flux_rho[b] = 0.0;

  MesoState next = state;
  next.t = state.t + dt;
  const double k = dt / dx;
  for (std::size_t i = 0; i < b; ++i) {
    next.rho[i] = state.rho[i] - k * (flux_rho[i + 1] - flux_rho[i]);
    next.mom[i] = state.mom[i] - k * (flux_mom[i + 1] - flux_mom[i]);
    if (!(next.rho[i] > 0.0))
      throw NegativeDensityError("density " + std::to_string(next.rho[i]) + " in cell " +
                                 std::to_string(i + 1) + " at t = " + std::to_string(next.t));
  }
  return next;
}

std::vector<MesoState>
run_closed(const MesoState& initial,
           const std::vector<double>& snapshot_times,
           const StressClosure& closure,
           const ChainConfig& cfg,
           const MesoSolverOptions& options)
{
  if (!std::is_sorted(snapshot_times.begin(), snapshot_times.end()))
    throw ConfigError("snapshot times must be sorted");
  std::vector<MesoState> out;
  out.reserve(snapshot_times.size());
  MesoState s = initial;
  const double dx = s.rho.mesh.l_eta();
  for (double target : snapshot_times) {
    if (target < initial.t)
      throw ConfigError("snapshot time precedes the initial state");
    while (s.t < target) {
      const double smax = max_signal_speed(s, cfg);
      double dt = smax > 0.0 ? options.cfl_target * dx / smax : target - s.t;
      const double remaining = target - s.t;
      // avoid a sliver step right before the snapshot
      if (dt >= remaining || remaining - dt <= 1e-12 * std::max(1.0, target))
        dt = remaining;
      s = step_meso(s, closure, dt, cfg, options);
      if (dt == remaining)
        s.t = target;
    }
    out.push_back(s);
  }
  return out;
}

} // namespace mesochain
