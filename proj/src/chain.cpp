#include "mesochain/chain.hpp"

#include "mesochain/error.hpp"
#include "mesochain/io.hpp"
#include "mesochain/serialize.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace mesochain {

namespace {

// Fraction of 1/omega_max used as the default time step.
constexpr double kStabilityFraction = 0.05;

} // namespace

ChainConfig
ChainConfig::make(std::size_t n,
                  double l,
                  double m,
                  const PowerLawPotential& potential,
                  bool wall_offset_half_h)
{
  ChainConfig cfg;
  cfg.n = n;
  cfg.l = l;
  cfg.m = m;
  cfg.potential = potential;
  cfg.wall_stiffness = potential.c_r;
  cfg.wall_offset_half_h = wall_offset_half_h;
  cfg.dt = cfg.default_dt();
  return cfg;
}

double
ChainConfig::omega_max() const
{
  return static_cast<double>(n) * std::sqrt(2.0 * potential.c_r * potential.p / m);
}

double
ChainConfig::default_dt() const
{
  return kStabilityFraction / omega_max();
}

PowerLawPotential
ChainConfig::wall_potential() const
{
  PowerLawPotential wall = potential;
  wall.c_r = wall_stiffness;
  return wall;
}

void
ChainConfig::validate() const
{
  if (n < 2)
    throw ConfigError("chain needs at least 2 particles, got " + std::to_string(n));
  if (!(l > 0.0))
    throw ConfigError("domain length must be positive");
  if (!(m > 0.0))
    throw ConfigError("total mass must be positive");
  if (!(wall_stiffness > 0.0))
    throw ConfigError("wall stiffness must be positive");
  potential.validate();
  if (!(dt > 0.0))
    throw ConfigError("time step must be positive");
  if (dt * omega_max() > kStabilityFraction * (1.0 + 1e-12))
    throw ConfigError("time step " + format_double(dt) +
                      " exceeds the stability bound " +
                      format_double(default_dt()));
}

void
check_admissible(const ChainConfig& cfg, const ChainState& state)
{
  const std::size_t n = state.q.size();
  if (n != cfg.n)
    throw DegenerateGeometryError("state has " + std::to_string(n) +
                                  " particles, config expects " +
                                  std::to_string(cfg.n));
  if (state.v.size() != n)
    throw DegenerateGeometryError("position and velocity arrays differ in size");
  if (!(state.q.front() > cfg.left_wall()) || !(state.q.back() < cfg.right_wall()))
    throw DegenerateGeometryError("particles must lie strictly between the walls");
  for (std::size_t j = 0; j + 1 < n; ++j) {
    if (state.q[j + 1] == state.q[j])
      throw DegenerateGeometryError("coincident particles at index " +
                                    std::to_string(j + 1));
    if (!(state.q[j + 1] > state.q[j]))
      throw DegenerateGeometryError("particle order violated at index " +
                                    std::to_string(j + 1));
  }
  for (std::size_t j = 0; j < n; ++j)
    if (!std::isfinite(state.v[j]))
      throw DegenerateGeometryError("non-finite velocity at index " +
                                    std::to_string(j + 1));
}

void
compute_forces(const ChainConfig& cfg,
               std::span<const double> q,
               std::span<double> forces)
{
  const std::size_t n = q.size();
  const double inv_eps = static_cast<double>(cfg.n);
  const PowerLawPotential& pot = cfg.potential;
  const PowerLawPotential wall = cfg.wall_potential();

  auto blow_up = [](std::size_t bond) {
    throw BlowUpError("particle ordering lost at bond " + std::to_string(bond) +
                      "; reduce the time step");
  };

  double gap = q[0] - cfg.left_wall();
  if (!(gap > 0.0))
    blow_up(0);
  // `prev` is the magnitude of the bond force to the left of particle j.
  double prev = wall.derivative_unchecked(gap * inv_eps);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    gap = q[j + 1] - q[j];
    if (!(gap > 0.0))
      blow_up(j + 1);
    const double bond = pot.derivative_unchecked(gap * inv_eps);
    forces[j] = prev - bond;
    prev = bond;
  }
  gap = cfg.right_wall() - q[n - 1];
  if (!(gap > 0.0))
    blow_up(n);
  forces[n - 1] = prev - wall.derivative_unchecked(gap * inv_eps);
}

std::vector<double>
net_forces(const ChainConfig& cfg, const ChainState& state)
{
  check_admissible(cfg, state);
  std::vector<double> f(state.q.size());
  compute_forces(cfg, state.q, f);
  return f;
}

double
potential_energy(const ChainConfig& cfg, std::span<const double> q)
{
  const double eps = cfg.eps();
  const double inv_eps = static_cast<double>(cfg.n);
  const PowerLawPotential wall = cfg.wall_potential();
  double sum = wall.value((q.front() - cfg.left_wall()) * inv_eps);
  for (std::size_t j = 0; j + 1 < q.size(); ++j)
    sum += cfg.potential.value((q[j + 1] - q[j]) * inv_eps);
  sum += wall.value((cfg.right_wall() - q.back()) * inv_eps);
  return -eps * sum;
}

double
kinetic_energy(const ChainConfig& cfg, std::span<const double> v)
{
  double sum = 0.0;
  for (double vj : v)
    sum += vj * vj;
  return 0.5 * cfg.particle_mass() * sum;
}

double
total_energy(const ChainConfig& cfg, const ChainState& state)
{
  return kinetic_energy(cfg, state.v) + potential_energy(cfg, state.q);
}

ChainIntegrator::ChainIntegrator(ChainConfig cfg, ChainState state)
  : cfg_(std::move(cfg))
  , state_(std::move(state))
  , forces_(state_.q.size())
{
  cfg_.validate();
  check_admissible(cfg_, state_);
  compute_forces(cfg_, state_.q, forces_);
}

void
ChainIntegrator::step(double dt)
{
  const std::size_t n = state_.q.size();
  const double half_kick = 0.5 * dt / cfg_.particle_mass();
  double* q = state_.q.data();
  double* v = state_.v.data();
  double* f = forces_.data();
  for (std::size_t j = 0; j < n; ++j) {
    v[j] += half_kick * f[j];
    q[j] += dt * v[j];
  }
  compute_forces(cfg_, state_.q, forces_);
  for (std::size_t j = 0; j < n; ++j)
    v[j] += half_kick * f[j];
  state_.t += dt;
  ++steps_;
}

void
ChainIntegrator::advance_to(double t_target)
{
  const double remaining = t_target - state_.t;
  if (remaining <= 0.0)
    return;
  const double dt = cfg_.dt;
  // Number of steps, tolerating rounding in the ratio.
  auto n_steps = static_cast<std::size_t>(std::ceil(remaining / dt - 1e-9));
  if (n_steps == 0)
    n_steps = 1;
  for (std::size_t k = 0; k + 1 < n_steps; ++k)
    step(dt);
  const double last = remaining - static_cast<double>(n_steps - 1) * dt;
  if (last > 0.0)
    step(last);
  state_.t = t_target;
}

void
ChainIntegrator::reverse_velocities()
{
  for (double& vj : state_.v)
    vj = -vj;
}

ChainState
step_verlet(const ChainConfig& cfg, const ChainState& state)
{
  ChainIntegrator integrator(cfg, state);
  integrator.step();
  return integrator.state();
}

double
ramp_velocity(double q, double l, double gamma)
{
  if (q <= 0.2 * l)
    return gamma;
  if (q <= 0.4 * l)
    return gamma * (2.0 - 5.0 * q / l);
  return 0.0;
}

ChainState
init_ramp(const ChainConfig& cfg, double gamma)
{
  ChainState state;
  state.q.resize(cfg.n);
  state.v.resize(cfg.n);
  const double h = cfg.h();
  for (std::size_t j = 0; j < cfg.n; ++j) {
    state.q[j] = (static_cast<double>(j) + 0.5) * h;
    state.v[j] = ramp_velocity(state.q[j], cfg.l, gamma);
  }
  return state;
}

ChainState
init_oscillatory(const ChainConfig& cfg, double gamma, double amp, double freq)
{
  ChainState state = init_ramp(cfg, gamma);
  if (amp == 0.0)
    return state;
  const double w = 5.0 * freq * std::numbers::pi / cfg.l;
  for (std::size_t j = 0; j < cfg.n; ++j)
    if (state.q[j] <= 0.4 * cfg.l)
      state.v[j] += amp * std::sin(w * state.q[j]);
  return state;
}

void
write_checkpoint(const std::string& csv_path,
                 const std::string& json_path,
                 const ChainConfig& cfg,
                 const ChainState& state)
{
  std::ostringstream out;
  out << "j,q,v\n";
  for (std::size_t j = 0; j < state.q.size(); ++j)
    out << (j + 1) << ',' << format_double(state.q[j]) << ','
        << format_double(state.v[j]) << '\n';
  write_text_file(csv_path, out.str());

  nlohmann::ordered_json meta;
  meta["schema"] = "mesochain.checkpoint/1";
  meta["t"] = state.t;
  meta["config"] = cfg;
  write_text_file(json_path, meta.dump(2) + "\n");
}

ChainState
read_checkpoint(const std::string& csv_path,
                const std::string& json_path,
                ChainConfig* cfg_out)
{
  const auto meta = nlohmann::json::parse(read_text_file(json_path));
  ChainConfig cfg = meta.at("config").get<ChainConfig>();
  ChainState state;
  state.t = meta.at("t").get<double>();

  std::istringstream in(read_text_file(csv_path));
  std::string line;
  std::getline(in, line);
  if (line != "j,q,v")
    throw IoError("unexpected checkpoint header in " + csv_path);
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    std::istringstream row(line);
    std::string j, q, v;
    std::getline(row, j, ',');
    std::getline(row, q, ',');
    std::getline(row, v, ',');
    state.q.push_back(std::stod(q));
    state.v.push_back(std::stod(v));
  }
  if (state.q.size() != cfg.n)
    throw IoError("checkpoint " + csv_path + " has " +
                  std::to_string(state.q.size()) + " rows, config says " +
                  std::to_string(cfg.n));
  if (cfg_out)
    *cfg_out = cfg;
  return state;
}

} // namespace mesochain
