#include "mesochain/deconvolution.hpp"

#include "mesochain/error.hpp"

#include <algorithm>
#include <cmath>

namespace mesochain {

namespace {

// Antiderivative of the unit hat 1 - |u| on [-1, 1].
double
hat_antiderivative(double u)
{
  u = std::clamp(u, -1.0, 1.0);
  return u - 0.5 * u * std::abs(u);
}

void
check_grid(const ConvOperator& op, const FineField& f)
{
  if (!(f.grid == op.grid()) || f.values.size() != op.grid().g)
    throw GridMismatchError("field grid does not match the operator grid");
}

} // namespace

ConvOperator::ConvOperator(const WindowFunction& window, const FineGrid& grid)
  : window_(window)
  , grid_(grid)
{
  window_.validate();
  grid_.validate();
  if (std::abs(window_.l - grid_.l) > 1e-12 * grid_.l)
    throw GridMismatchError("window and fine grid use different domain lengths");
  const double dx = grid_.dx();
  if (dx > window_.width())
    throw GridMismatchError("fine grid too coarse to resolve the window");

  const std::size_t g = grid_.g;
  const double l = grid_.l;
  const double max_index = static_cast<double>(g - 1);
  first_col_.resize(g);
  offset_.resize(g + 1);
  offset_[0] = 0;

  // Gaussian normalization over an unbounded lattice with spacing dx; rows
  // use the same integer reach so interior rows sum to one.
  double gauss_z = 0.0;
  std::size_t reach = 0;
  if (window_.kind == WindowKind::gaussian) {
    reach = static_cast<std::size_t>(std::floor(window_.support_half_width() / dx));
    const auto r = static_cast<long>(reach);
    for (long m = -r; m <= r; ++m)
      gauss_z += window_(static_cast<double>(m) * dx) * dx;
  }

  for (std::size_t i = 0; i < g; ++i) {
    const double x = grid_.x(i);
    const double s = window_.support_half_width();
    std::size_t first = 0;
    std::size_t last = 0;
    if (window_.kind == WindowKind::box) {
      // psi_eta(x - y) > 0 for y in [x - s, x + s)
      const double lo = std::max(0.0, x - s);
      const double hi = std::min(l, x + s);
      first = static_cast<std::size_t>(std::clamp(std::floor(lo / dx) - 1.0, 0.0, max_index));
      last = static_cast<std::size_t>(std::clamp(std::ceil(hi / dx) + 1.0, 0.0, max_index));
      first_col_[i] = first;
      for (std::size_t k = first; k <= last; ++k) {
        const double yk = grid_.x(k);
        const double w = dx * (hat_antiderivative((hi - yk) / dx) -
                               hat_antiderivative((lo - yk) / dx)) /
                         window_.width();
        weights_.push_back(w);
      }
    } else {
      first = i > reach ? i - reach : 0;
      last = std::min(i + reach, g - 1);
      first_col_[i] = first;
      for (std::size_t k = first; k <= last; ++k) {
        const double c = (k == 0 || k + 1 == g) ? 0.5 * dx : dx;
        const double d = (static_cast<double>(i) - static_cast<double>(k)) * dx;
        weights_.push_back(window_(d) * c / gauss_z);
      }
    }
    offset_[i + 1] = weights_.size();
  }
}

void
ConvOperator::apply(std::span<const double> in, std::span<double> out) const
{
  const std::size_t g = grid_.g;
  if (in.size() != g || out.size() != g)
    throw GridMismatchError("operator applied to a vector of the wrong size");
  for (std::size_t i = 0; i < g; ++i) {
    const double* w = weights_.data() + offset_[i];
    const double* f = in.data() + first_col_[i];
    const std::size_t len = offset_[i + 1] - offset_[i];
    double sum = 0.0;
    for (std::size_t k = 0; k < len; ++k)
      sum += w[k] * f[k];
    out[i] = sum;
  }
}

void
ConvOperator::apply_transpose(std::span<const double> in, std::span<double> out) const
{
  const std::size_t g = grid_.g;
  if (in.size() != g || out.size() != g)
    throw GridMismatchError("operator applied to a vector of the wrong size");
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < g; ++i) {
    const double* w = weights_.data() + offset_[i];
    const std::size_t len = offset_[i + 1] - offset_[i];
    for (std::size_t k = 0; k < len; ++k)
      out[first_col_[i] + k] += w[k] * in[i];
  }
}

double
ConvOperator::row_sum(std::size_t i) const
{
  double sum = 0.0;
  for (std::size_t k = offset_[i]; k < offset_[i + 1]; ++k)
    sum += weights_[k];
  return sum;
}

std::vector<double>
ConvOperator::dense() const
{
  const std::size_t g = grid_.g;
  std::vector<double> a(g * g, 0.0);
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t k = offset_[i]; k < offset_[i + 1]; ++k)
      a[i * g + first_col_[i] + (k - offset_[i])] = weights_[k];
  return a;
}

FineField
apply_R(const ConvOperator& op, const FineField& f)
{
  check_grid(op, f);
  FineField out = FineField::zeros(op.grid());
  op.apply(f.values, out.values);
  return out;
}

FineField
landweber_reconstruct(const ConvOperator& op, const FineField& gbar, std::size_t n)
{
  check_grid(op, gbar);
  FineField g = gbar;
  std::vector<double> rg(gbar.size());
  for (std::size_t k = 0; k < n; ++k) {
    op.apply(g.values, rg);
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] = gbar[i] + g[i] - rg[i];
  }
  return g;
}

double
residual_norm(const ConvOperator& op, const FineField& g, const FineField& gbar)
{
  check_grid(op, g);
  check_grid(op, gbar);
  std::vector<double> r(g.size());
  op.apply(g.values, r);
  for (std::size_t i = 0; i < r.size(); ++i)
    r[i] -= gbar[i];
  return l2_norm(op.grid(), r);
}

FineField
reconstruct_J(const ConvOperator& op,
              const FineField& rho_bar,
              std::size_t n,
              const ChainConfig& cfg)
{
  FineField j = landweber_reconstruct(op, rho_bar, n);
  const double scale = cfg.l / cfg.m;
  for (double& x : j.values)
    x *= scale;
  return j;
}

FineField
reconstruct_v(const ConvOperator& op,
              const FineField& rho_bar,
              const FineField& mom_bar,
              std::size_t n,
              const ChainConfig& cfg)
{
  const FineField num = landweber_reconstruct(op, mom_bar, n);
  const FineField den = landweber_reconstruct(op, rho_bar, n);
  const double floor = 1e-8 * cfg.m / cfg.l;
  FineField v = FineField::zeros(op.grid());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(den[i] >= floor))
      throw NearVacuumError("reconstructed density " + std::to_string(den[i]) +
                            " at x = " + std::to_string(op.grid().x(i)) +
                            " is below the vacuum threshold");
    v[i] = num[i] / den[i];
  }
  return v;
}

std::size_t
discrepancy_stop(const ConvOperator& op,
                 const FineField& gbar,
                 std::size_t max_n,
                 double tau_delta)
{
  check_grid(op, gbar);
  if (tau_delta < 0.0)
    throw DomainError("discrepancy target must be nonnegative");
  FineField g = gbar;
  std::vector<double> rg(g.size());
  std::vector<double> r(g.size());
  for (std::size_t n = 0;; ++n) {
    op.apply(g.values, rg);
    for (std::size_t i = 0; i < r.size(); ++i)
      r[i] = rg[i] - gbar[i];
    if (l2_norm(op.grid(), r) <= tau_delta || n >= max_n)
      return n;
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] = gbar[i] + g[i] - rg[i];
  }
}

double
identity_minus_norm(const ConvOperator& op, std::size_t iterations)
{
  const std::size_t g = op.grid().g;
  const double dx = op.grid().dx();
  // trapezoid weights; the adjoint of A in this inner product is C^-1 A^T C
  std::vector<double> c(g, dx);
  c.front() = c.back() = 0.5 * dx;
  std::vector<double> v(g), av(g), w(g), tmp(g);
  // deterministic start vector with content at every frequency
  for (std::size_t i = 0; i < g; ++i)
    v[i] = 1.0 + 0.5 * std::sin(0.7 * static_cast<double>(i)) +
           ((i % 2) ? 0.25 : -0.25);
  auto normalize = [&c](std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      s += c[i] * x[i] * x[i];
    s = std::sqrt(s);
    for (double& xi : x)
      xi /= s;
    return s;
  };
  normalize(v);
  double sigma_sq = 0.0;
  for (std::size_t it = 0; it < iterations; ++it) {
    op.apply(v, tmp);
    for (std::size_t i = 0; i < g; ++i)
      av[i] = c[i] * (v[i] - tmp[i]);
    op.apply_transpose(av, tmp);
    for (std::size_t i = 0; i < g; ++i)
      w[i] = (av[i] - tmp[i]) / c[i];
    const double next = normalize(w);
    v.swap(w);
    if (it > 10 && std::abs(next - sigma_sq) <= 1e-15 * next) {
      sigma_sq = next;
      break;
    }
    sigma_sq = next;
  }
  return std::sqrt(sigma_sq);
}

} // namespace mesochain
