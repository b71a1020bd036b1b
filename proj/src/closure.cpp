#include "mesochain/closure.hpp"

#include "mesochain/averaging.hpp"
#include "mesochain/error.hpp"
#include "mesochain/io.hpp"
#include "mesochain/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace mesochain {

namespace {

// Even counts summing to n: apportion n/2 pairs by largest remainder.
std::vector<std::size_t>
even_counts(const MesoField& rho_bar, const ChainConfig& cfg)
{
  const std::size_t b = rho_bar.size();
  if (cfg.n % 2 != 0)
    throw ConfigError("prescribed positions need an even particle count");
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    if (!(rho_bar[i] > 0.0))
      throw DomainError("cell " + std::to_string(i + 1) + " has nonpositive density " +
                        std::to_string(rho_bar[i]));
    total += rho_bar[i];
  }
  const std::size_t pairs = cfg.n / 2;
  std::vector<std::size_t> count(b);
  std::vector<double> remainder(b);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < b; ++i) {
    const double target = static_cast<double>(pairs) * rho_bar[i] / total;
    count[i] = static_cast<std::size_t>(std::floor(target));
    remainder[i] = target - static_cast<double>(count[i]);
    assigned += count[i];
  }
  std::vector<std::size_t> order(b);
  std::iota(order.begin(), order.end(), 0);
  // ties go to the leftmost cell
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) {
    return remainder[a] > remainder[c];
  });
  for (std::size_t k = 0; assigned < pairs; ++k, ++assigned)
    ++count[order[k % b]];
  for (std::size_t i = 0; i < b; ++i) {
    if (count[i] == 0)
      throw DegenerateGeometryError("cell " + std::to_string(i + 1) +
                                    " receives no prescribed particles");
    count[i] *= 2;
  }
  return count;
}

void
check_positive_j(std::span<const double> j)
{
  for (std::size_t i = 0; i < j.size(); ++i)
    if (!(j[i] > 0.0))
      throw ReconstructionError("reconstructed Jacobian is not positive at fine node " +
                                std::to_string(i) + " (value " + std::to_string(j[i]) + ")");
}

// Solves y + s * delta(y) = target for y by fixed-point iteration.
double
solve_shifted(const PiecewiseLinear& delta, double s, double target, double l)
{
  double y = target - s * delta(std::clamp(target, 0.0, l));
  for (int it = 0; it < 60; ++it) {
    const double next = target - s * delta(std::clamp(y, 0.0, l));
    if (std::abs(next - y) <= 1e-15 * std::max(1.0, std::abs(y))) {
      y = next;
      break;
    }
    y = next;
  }
  return y;
}

// -int_0^l U'(l / J(y)) int_0^1 psi_eta(x - y - s h / J(y)) ds dy at every node,
// with J given on a fine grid.
std::vector<double>
interaction_integral(const FineGrid& grid,
                     std::span<const double> j,
                     const MesoMesh& mesh,
                     const WindowFunction& window,
                     const ChainConfig& cfg)
{
  check_positive_j(j);
  const std::size_t g = grid.g;
  std::vector<double> force(g);
  std::vector<double> delta(g);
  double delta_max = 0.0;
  for (std::size_t i = 0; i < g; ++i) {
    force[i] = cfg.potential.derivative(cfg.l / j[i]);
    delta[i] = cfg.h() / j[i];
    delta_max = std::max(delta_max, delta[i]);
  }

  std::vector<double> out(mesh.b, 0.0);
  const double sw = window.support_half_width();

  if (window.kind == WindowKind::box) {
    const PiecewiseLinear f_lin(grid, force);
    const PiecewiseLinear d_lin(grid, delta);
    for (std::size_t b = 0; b < mesh.b; ++b) {
      const double x = mesh.center(b);
      double sum = 0.0;
      for (std::size_t k = 0; k < GaussLegendre5::nodes.size(); ++k) {
        const double s = GaussLegendre5::nodes[k];
        const double lo = solve_shifted(d_lin, s, x - sw, grid.l);
        const double hi = solve_shifted(d_lin, s, x + sw, grid.l);
        sum += GaussLegendre5::weights[k] * f_lin.integral(lo, hi);
      }
      out[b] = -sum / window.width();
    }
    return out;
  }

  const double dx = grid.dx();
  const double max_index = static_cast<double>(g - 1);
  for (std::size_t b = 0; b < mesh.b; ++b) {
    const double x = mesh.center(b);
    const auto first = static_cast<std::size_t>(
      std::clamp(std::floor((x - sw - delta_max) / dx), 0.0, max_index));
    const auto last =
      static_cast<std::size_t>(std::clamp(std::ceil((x + sw) / dx), 0.0, max_index));
    double sum = 0.0;
    for (std::size_t i = first; i <= last; ++i) {
      if (force[i] == 0.0)
        continue;
      const double y = grid.x(i);
      double inner = 0.0;
      for (std::size_t k = 0; k < GaussLegendre5::nodes.size(); ++k)
        inner += GaussLegendre5::weights[k] * window(x - y - GaussLegendre5::nodes[k] * delta[i]);
      const double w = (i == 0 || i + 1 == g) ? 0.5 * dx : dx;
      sum += w * force[i] * inner;
    }
    out[b] = -sum;
  }
  return out;
}

} // namespace

PrescribedState
prescribe_positions(const MesoField& rho_bar, const ChainConfig& cfg)
{
  cfg.validate();
  const MesoMesh& mesh = rho_bar.mesh;
  mesh.validate();
  if (rho_bar.size() != mesh.b)
    throw GridMismatchError("density field size does not match its mesh");

  PrescribedState st;
  st.mesh = mesh;
  st.n_beta = even_counts(rho_bar, cfg);
  st.delta_beta.resize(mesh.b);
  st.first.resize(mesh.b);
  st.q_hat.reserve(cfg.n);
  const double le = mesh.l_eta();
  for (std::size_t b = 0; b < mesh.b; ++b) {
    const double spacing = le / static_cast<double>(st.n_beta[b]);
    st.delta_beta[b] = spacing;
    st.first[b] = st.q_hat.size();
    const double left = mesh.center(b) - 0.5 * le;
    for (std::size_t i = 0; i < st.n_beta[b]; ++i)
      st.q_hat.push_back(left + (static_cast<double>(i) + 0.5) * spacing);
  }
  return st;
}

PrescribedState
prescribe_velocities(const MesoField& v_bar,
                     PrescribedState st,
                     double energy_ref,
                     const WindowFunction& window,
                     const ChainConfig& cfg)
{
  const MesoMesh& mesh = st.mesh;
  check_compatible(window, mesh);
  if (v_bar.size() != mesh.b || st.n_beta.size() != mesh.b)
    throw GridMismatchError("velocity field does not match the prescribed positions");

  const double pm = cfg.particle_mass();
  const double u_hat = potential_energy(cfg, st.q_hat);
  double kinetic_means = 0.0;
  for (std::size_t b = 0; b < mesh.b; ++b)
    kinetic_means += 0.5 * pm * v_bar[b] * v_bar[b] * static_cast<double>(st.n_beta[b]);
  double budget = energy_ref - u_hat - kinetic_means;
  const double scale = std::max({std::abs(energy_ref), std::abs(u_hat), kinetic_means});
  if (budget < 0.0) {
    // rounding noise around an exactly balanced budget
    if (-budget <= 1e-12 * scale)
      budget = 0.0;
    else
      throw InfeasiblePrescriptionError(
        "energy budget is negative: reference " + std::to_string(energy_ref) +
          " is below potential " + std::to_string(u_hat) + " plus mean kinetic " +
          std::to_string(kinetic_means),
        -budget);
  }
  st.energy_budget = budget;

  std::vector<double> s1(mesh.b, 0.0);
  std::vector<double> s2(mesh.b, 0.0);
  std::vector<double> psi(st.q_hat.size());
  double ratio_sum = 0.0;
  for (std::size_t b = 0; b < mesh.b; ++b) {
    const double x = mesh.center(b);
    for (std::size_t j = st.first[b]; j < st.first[b] + st.n_beta[b]; ++j) {
      psi[j] = window(x - st.q_hat[j]);
      if (!(psi[j] > 0.0))
        throw InfeasiblePrescriptionError(
          "kernel vanishes at a prescribed particle of cell " + std::to_string(b + 1), 0.0);
      s1[b] += 1.0 / psi[j];
      s2[b] += 1.0 / (psi[j] * psi[j]);
    }
    ratio_sum += s2[b] / s1[b];
  }

  // kappa_sq carries the particle mass: (m/n) sum dv^2 psi, the same in every cell
  st.kappa_sq = 2.0 * budget / ratio_sum;
  st.k_beta.resize(mesh.b);
  st.t_amp.resize(mesh.b);
  st.signs.assign(st.q_hat.size(), 0);
  st.dv.assign(st.q_hat.size(), 0.0);
  st.v_hat.assign(st.q_hat.size(), 0.0);
  for (std::size_t b = 0; b < mesh.b; ++b) {
    st.k_beta[b] = st.kappa_sq / pm * s2[b] / s1[b];
    st.t_amp[b] = std::sqrt(st.kappa_sq / (pm * s1[b]));
    for (std::size_t i = 0; i < st.n_beta[b]; ++i) {
      const std::size_t j = st.first[b] + i;
      st.signs[j] = (i % 2 == 0) ? 1 : -1;
      st.dv[j] = st.t_amp[b] * st.signs[j] / psi[j];
      st.v_hat[j] = v_bar[b] + st.dv[j];
    }
  }
  st.energy_residual = total_energy(cfg, as_chain_state(st)) - energy_ref;
  return st;
}

ChainState
as_chain_state(const PrescribedState& state)
{
  ChainState out;
  out.q = state.q_hat;
  out.v = state.has_velocities() ? state.v_hat : std::vector<double>(state.q_hat.size(), 0.0);
  return out;
}

void
write_prescribed(const std::string& csv_path,
                 const std::string& json_path,
                 const PrescribedState& state,
                 const WindowFunction& window)
{
  const ChainState cs = as_chain_state(state);
  std::ostringstream out;
  out << "j,q,v\n";
  for (std::size_t j = 0; j < cs.q.size(); ++j)
    out << (j + 1) << ',' << format_double(cs.q[j]) << ',' << format_double(cs.v[j]) << '\n';
  write_text_file(csv_path, out.str());

  nlohmann::ordered_json meta;
  meta["schema"] = "mesochain.prescribed/1";
  meta["b"] = state.mesh.b;
  meta["l"] = state.mesh.l;
  meta["window"] = std::string(to_string(window.kind));
  meta["eta"] = window.eta;
  meta["kappa_sq"] = state.kappa_sq;
  meta["energy_budget"] = state.energy_budget;
  meta["energy_residual"] = state.energy_residual;
  meta["n_beta"] = state.n_beta;
  meta["delta_beta"] = state.delta_beta;
  meta["k_beta"] = state.k_beta;
  meta["t_amp"] = state.t_amp;
  write_text_file(json_path, meta.dump(2) + "\n");
}

PrescribedState
read_prescribed(const std::string& csv_path, const std::string& json_path)
{
  PrescribedState st;
  WindowFunction window;
  try {
    const auto meta = nlohmann::json::parse(read_text_file(json_path));
    if (meta.at("schema") != "mesochain.prescribed/1")
      throw IoError("unexpected schema in " + json_path);
    st.mesh = MesoMesh::with_cells(meta.at("b").get<std::size_t>(), meta.at("l").get<double>());
    window = WindowFunction{window_kind_from_string(meta.at("window").get<std::string>()),
                            meta.at("eta").get<double>(), st.mesh.l};
    st.kappa_sq = meta.at("kappa_sq").get<double>();
    st.energy_budget = meta.at("energy_budget").get<double>();
    st.energy_residual = meta.at("energy_residual").get<double>();
    st.n_beta = meta.at("n_beta").get<std::vector<std::size_t>>();
    st.delta_beta = meta.at("delta_beta").get<std::vector<double>>();
    st.k_beta = meta.at("k_beta").get<std::vector<double>>();
    st.t_amp = meta.at("t_amp").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed prescription record " + json_path + ": " + e.what());
  }

  std::istringstream in(read_text_file(csv_path));
  std::string line;
  std::getline(in, line);
  if (line != "j,q,v")
    throw IoError("unexpected prescription header in " + csv_path);
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    std::istringstream row(line);
    std::string j, q, v;
    std::getline(row, j, ',');
    std::getline(row, q, ',');
    std::getline(row, v, ',');
    try {
      st.q_hat.push_back(std::stod(q));
      st.v_hat.push_back(std::stod(v));
    } catch (const std::exception&) {
      throw IoError("bad row '" + line + "' in " + csv_path);
    }
  }

  std::size_t total = 0;
  for (std::size_t nb : st.n_beta) {
    st.first.push_back(total);
    total += nb;
  }
  if (total != st.q_hat.size() || st.n_beta.size() != st.mesh.b)
    throw IoError("cell counts in " + json_path + " do not match " + csv_path);
  if (!st.t_amp.empty()) {
    st.signs.assign(total, 0);
    st.dv.assign(total, 0.0);
    for (std::size_t b = 0; b < st.mesh.b; ++b)
      for (std::size_t i = 0; i < st.n_beta[b]; ++i) {
        const std::size_t j = st.first[b] + i;
        st.signs[j] = (i % 2 == 0) ? 1 : -1;
        st.dv[j] = st.t_amp[b] * st.signs[j] / window(st.mesh.center(b) - st.q_hat[j]);
      }
  }
  return st;
}

std::string_view
to_string(StressMode mode)
{
  return mode == StressMode::integral ? "integral" : "riemann";
}

StressMode
stress_mode_from_string(std::string_view name)
{
  if (name == "integral")
    return StressMode::integral;
  if (name == "riemann")
    return StressMode::riemann;
  throw ConfigError("unknown stress mode '" + std::string(name) + "'");
}

MesoField
stress_int_zero(const MesoField& rho_bar,
                const WindowFunction& window,
                const ChainConfig& cfg,
                StressMode mode,
                const FineGrid& grid)
{
  const MesoMesh& mesh = rho_bar.mesh;
  check_compatible(window, mesh);
  for (std::size_t i = 0; i < rho_bar.size(); ++i)
    if (!(rho_bar[i] > 0.0))
      throw DomainError("zero-order stress needs positive density; cell " +
                        std::to_string(i + 1) + " has " + std::to_string(rho_bar[i]));

  if (mode == StressMode::integral)
    return stress_int_zero(interpolate_to_fine(rho_bar, grid), mesh, window, cfg);

  const PrescribedState st = prescribe_positions(rho_bar, cfg);
  std::vector<double> bond_force(st.q_hat.size() - 1);
  const double n = static_cast<double>(cfg.n);
  for (std::size_t j = 0; j + 1 < st.q_hat.size(); ++j)
    bond_force[j] = -cfg.potential.derivative(n * (st.q_hat[j + 1] - st.q_hat[j]));
  MesoField out = MesoField::zeros(mesh, window, Quantity::stress_int);
  out.values = bond_stress_sum(window, mesh, st.q_hat, bond_force);
  return out;
}

MesoField
stress_int_zero(const MesoField& rho_bar,
                const WindowFunction& window,
                const ChainConfig& cfg,
                StressMode mode)
{
  return stress_int_zero(rho_bar, window, cfg, mode, FineGrid::default_for(cfg.n, cfg.l));
}

MesoField
stress_int_zero(const FineField& rho,
                const MesoMesh& mesh,
                const WindowFunction& window,
                const ChainConfig& cfg)
{
  check_compatible(window, mesh);
  std::vector<double> j(rho.size());
  const double scale = cfg.l / cfg.m;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (!(rho[i] > 0.0))
      throw DomainError("zero-order stress needs positive density at fine node " +
                        std::to_string(i));
    j[i] = scale * rho[i];
  }
  MesoField out = MesoField::zeros(mesh, window, Quantity::stress_int);
  out.values = interaction_integral(rho.grid, j, mesh, window, cfg);
  return out;
}

MesoField
stress_conv_zero(const MesoField& v_bar,
                 const PrescribedState& prescribed,
                 const WindowFunction& window,
                 const ChainConfig& cfg)
{
  const MesoMesh& mesh = prescribed.mesh;
  check_compatible(window, mesh);
  if (!prescribed.has_velocities())
    throw ConfigError("convective stress needs prescribed velocities");
  if (v_bar.size() != mesh.b)
    throw GridMismatchError("velocity field does not match the prescribed state");

  MesoField out = MesoField::zeros(mesh, window, Quantity::stress_conv);
  const double le = mesh.l_eta();
  const double pm = cfg.particle_mass();
  const double sw = window.support_half_width();
  for (std::size_t beta = 0; beta < mesh.b; ++beta) {
    const double n_b = static_cast<double>(prescribed.n_beta[beta]);
    const double rho_hat = pm * n_b / le;
    const double weight = le / n_b * rho_hat;
    for (std::size_t j = prescribed.first[beta];
         j < prescribed.first[beta] + prescribed.n_beta[beta];
         ++j) {
      const double q = prescribed.q_hat[j];
      const double dv2 = prescribed.dv[j] * prescribed.dv[j];
      if (dv2 == 0.0)
        continue;
      // nodes whose kernel can see q
      const double lo = std::floor((q - sw) / le - 0.5) - 1.0;
      const double hi = std::ceil((q + sw) / le - 0.5) + 1.0;
      const auto a = static_cast<std::size_t>(std::max(lo, 0.0));
      const auto c = static_cast<std::size_t>(
        std::clamp(hi, 0.0, static_cast<double>(mesh.b - 1)));
      for (std::size_t alpha = a; alpha <= c; ++alpha)
        out[alpha] -= weight * dv2 * window(mesh.center(alpha) - q);
    }
  }
  return out;
}

OrderNStress
stress_order_n(const FineField& j_n,
               const FineField& v_n,
               const MesoField& v_bar,
               const WindowFunction& window,
               const ChainConfig& cfg)
{
  const MesoMesh& mesh = v_bar.mesh;
  check_compatible(window, mesh);
  if (!(j_n.grid == v_n.grid) || j_n.size() != j_n.grid.g || v_n.size() != v_n.grid.g)
    throw GridMismatchError("J_n and v_n live on different fine grids");
  check_positive_j(j_n.values);

  const FineGrid& grid = j_n.grid;
  OrderNStress out{MesoField::zeros(mesh, window, Quantity::stress_conv),
                   MesoField::zeros(mesh, window, Quantity::stress_int)};
  std::vector<double> integrand(grid.g);
  for (std::size_t b = 0; b < mesh.b; ++b) {
    for (std::size_t i = 0; i < grid.g; ++i) {
      const double dv = v_n[i] - v_bar[b];
      integrand[i] = dv * dv * j_n[i];
    }
    const PiecewiseLinear lin(grid, integrand);
    out.conv[b] = -cfg.m / cfg.l * window_integral(window, lin, grid, integrand, mesh.center(b));
  }
  out.interaction.values = interaction_integral(grid, j_n.values, mesh, window, cfg);
  return out;
}

double
local_eos(double rho, const ChainConfig& cfg)
{
  if (!(rho > 0.0))
    throw DomainError("local equation of state needs positive density");
  return -cfg.potential.derivative(cfg.m / rho);
}

double
sound_speed(double rho, const ChainConfig& cfg)
{
  if (!(rho > 0.0))
    throw DomainError("sound speed needs positive density");
  const double u2 = cfg.potential.second_derivative(cfg.m / rho);
  return std::sqrt(std::abs(u2) * cfg.m) / rho;
}

} // namespace mesochain
