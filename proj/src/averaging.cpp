#include "mesochain/averaging.hpp"

#include "mesochain/error.hpp"
#include "mesochain/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace mesochain {

namespace {

// Range of cells [first, last] whose kernel may touch the interval [lo, hi].
struct CellRange
{
  std::size_t first;
  std::size_t last;
  bool empty;
};

CellRange
cells_touching(const MesoMesh& mesh, double support, double lo, double hi)
{
  const double le = mesh.l_eta();
  const double a = std::floor((lo - support) / le) - 1.0;
  const double b = std::floor((hi + support) / le) + 1.0;
  const double max_index = static_cast<double>(mesh.b) - 1.0;
  if (b < 0.0 || a > max_index)
    return {0, 0, true};
  return {static_cast<std::size_t>(std::max(a, 0.0)),
          static_cast<std::size_t>(std::min(b, max_index)),
          false};
}

// Calls fn(cell, psi) for every cell whose kernel value at q is nonzero.
template <class Fn>
void
for_each_cell_weight(const WindowFunction& window, const MesoMesh& mesh, double q, Fn&& fn)
{
  const CellRange r = cells_touching(mesh, window.support_half_width(), q, q);
  if (r.empty)
    return;
  for (std::size_t i = r.first; i <= r.last; ++i) {
    const double w = window(mesh.center(i) - q);
    if (w != 0.0)
      fn(i, w);
  }
}

struct KernelSums
{
  std::vector<double> psi;
  std::vector<double> v_psi;
};

KernelSums
kernel_sums(const ChainState& state, const WindowFunction& window, const MesoMesh& mesh)
{
  KernelSums s{std::vector<double>(mesh.b, 0.0), std::vector<double>(mesh.b, 0.0)};
  for (std::size_t j = 0; j < state.q.size(); ++j) {
    const double vj = state.v[j];
    for_each_cell_weight(window, mesh, state.q[j], [&](std::size_t i, double w) {
      s.psi[i] += w;
      s.v_psi[i] += vj * w;
    });
  }
  return s;
}

void
check_inputs(const ChainConfig& cfg,
             const ChainState& state,
             const WindowFunction& window,
             const MesoMesh& mesh)
{
  check_compatible(window, mesh);
  if (state.q.size() != cfg.n || state.v.size() != cfg.n)
    throw DegenerateGeometryError("state size does not match the chain config");
}

} // namespace

MesoField
average_density(const ChainConfig& cfg,
                const ChainState& state,
                const WindowFunction& window,
                const MesoMesh& mesh)
{
  check_inputs(cfg, state, window, mesh);
  MesoField rho = MesoField::zeros(mesh, window, Quantity::density);
  for (double qj : state.q)
    for_each_cell_weight(window, mesh, qj, [&](std::size_t i, double w) { rho[i] += w; });
  for (double& x : rho.values)
    x *= cfg.particle_mass();
  return rho;
}

MesoField
average_momentum(const ChainConfig& cfg,
                 const ChainState& state,
                 const WindowFunction& window,
                 const MesoMesh& mesh)
{
  check_inputs(cfg, state, window, mesh);
  const KernelSums s = kernel_sums(state, window, mesh);
  MesoField mom = MesoField::zeros(mesh, window, Quantity::momentum);
  for (std::size_t i = 0; i < mesh.b; ++i)
    mom[i] = cfg.particle_mass() * s.v_psi[i];
  return mom;
}

MesoField
average_velocity(const ChainConfig& cfg,
                 const ChainState& state,
                 const WindowFunction& window,
                 const MesoMesh& mesh)
{
  check_inputs(cfg, state, window, mesh);
  const KernelSums s = kernel_sums(state, window, mesh);
  MesoField vel = MesoField::zeros(mesh, window, Quantity::velocity);
  std::string empty;
  for (std::size_t i = 0; i < mesh.b; ++i) {
    if (s.psi[i] > 0.0) {
      vel[i] = s.v_psi[i] / s.psi[i];
    } else {
      empty += (empty.empty() ? "" : ", ") + std::to_string(i + 1);
    }
  }
  if (!empty.empty())
    throw EmptyCellError("no particles in the window of cell(s) " + empty);
  return vel;
}

MesoField
convective_stress_exact(const ChainConfig& cfg,
                        const ChainState& state,
                        const WindowFunction& window,
                        const MesoMesh& mesh)
{
  check_inputs(cfg, state, window, mesh);
  const KernelSums s = kernel_sums(state, window, mesh);
  std::vector<double> vbar(mesh.b, 0.0);
  for (std::size_t i = 0; i < mesh.b; ++i)
    if (s.psi[i] > 0.0)
      vbar[i] = s.v_psi[i] / s.psi[i];

  MesoField tc = MesoField::zeros(mesh, window, Quantity::stress_conv);
  for (std::size_t j = 0; j < state.q.size(); ++j) {
    const double vj = state.v[j];
    for_each_cell_weight(window, mesh, state.q[j], [&](std::size_t i, double w) {
      const double dv = vj - vbar[i];
      tc[i] -= dv * dv * w;
    });
  }
  for (double& x : tc.values)
    x *= cfg.particle_mass();
  return tc;
}

double
bond_window_integral(const WindowFunction& window, double x, double a, double b)
{
  if (window.kind == WindowKind::box)
    return window.mass_between(x, a, b);
  const double gap = b - a;
  double sum = 0.0;
  for (std::size_t k = 0; k < GaussLegendre5::nodes.size(); ++k)
    sum += GaussLegendre5::weights[k] * window(x - a - GaussLegendre5::nodes[k] * gap);
  return gap * sum;
}

std::vector<double>
bond_stress_sum(const WindowFunction& window,
                const MesoMesh& mesh,
                std::span<const double> q,
                std::span<const double> bond_force)
{
  check_compatible(window, mesh);
  if (q.size() < 2 || bond_force.size() + 1 != q.size())
    throw GridMismatchError("bond force array must have one entry per bond");
  std::vector<double> t(mesh.b, 0.0);
  const double support = window.support_half_width();
  for (std::size_t j = 0; j + 1 < q.size(); ++j) {
    const double f = bond_force[j];
    if (f == 0.0)
      continue;
    const CellRange r = cells_touching(mesh, support, q[j], q[j + 1]);
    if (r.empty)
      continue;
    for (std::size_t i = r.first; i <= r.last; ++i)
      t[i] += f * bond_window_integral(window, mesh.center(i), q[j], q[j + 1]);
  }
  return t;
}

MesoField
interaction_stress_exact(const ChainConfig& cfg,
                         const ChainState& state,
                         const WindowFunction& window,
                         const MesoMesh& mesh)
{
  check_inputs(cfg, state, window, mesh);
  const double inv_eps = static_cast<double>(cfg.n);
  std::vector<double> force(state.q.size() - 1);
  for (std::size_t j = 0; j + 1 < state.q.size(); ++j) {
    const double gap = state.q[j + 1] - state.q[j];
    if (!(gap > 0.0))
      throw DegenerateGeometryError("non-positive gap at bond " + std::to_string(j + 1));
    // f_{j,j+1} has the sign of q_j - q_{j+1} < 0
    force[j] = -cfg.potential.derivative(gap * inv_eps);
  }
  MesoField t = MesoField::zeros(mesh, window, Quantity::stress_int);
  t.values = bond_stress_sum(window, mesh, state.q, force);
  return t;
}

JacobianField
jacobian_at_mesh(const ChainConfig& cfg, const ChainState& state, const MesoMesh& mesh)
{
  mesh.validate();
  const auto& q = state.q;
  if (q.size() < 2)
    throw DegenerateGeometryError("jacobian needs at least two particles");
  const double h = cfg.h();
  JacobianField out;
  out.field = MesoField::zeros(mesh, WindowFunction::box(mesh.eta(), mesh.l), Quantity::jacobian);
  out.extrapolated.assign(mesh.b, 0);
  for (std::size_t i = 0; i < mesh.b; ++i) {
    const double x = mesh.center(i);
    auto it = std::upper_bound(q.begin(), q.end(), x);
    std::size_t k = static_cast<std::size_t>(it - q.begin());
    if (k == 0) {
      k = 1;
      out.extrapolated[i] = 1;
    } else if (k == q.size()) {
      k = q.size() - 1;
      out.extrapolated[i] = 1;
    }
    const double gap = q[k] - q[k - 1];
    if (!(gap > 0.0))
      throw DegenerateGeometryError("non-positive gap at bond " + std::to_string(k));
    out.field[i] = h / gap;
  }
  return out;
}

} // namespace mesochain
