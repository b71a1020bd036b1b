#include "mesochain/deconvolution.hpp"
#include "mesochain/error.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace mesochain;

namespace {

// R_ik built from scratch: box entries by a fine midpoint rule of the
// window against the hat function of node k, gaussian entries from the
// closed-form kernel with trapezoid weights.
std::vector<double>
independent_matrix(const WindowFunction& w, const FineGrid& grid)
{
  const std::size_t g = grid.g;
  const double dx = grid.dx();
  std::vector<double> a(g * g, 0.0);
  if (w.kind == WindowKind::box) {
    const int sub = 4000;
    for (std::size_t i = 0; i < g; ++i)
      for (std::size_t k = 0; k < g; ++k) {
        const double lo = std::max(0.0, grid.x(k) - dx);
        const double hi = std::min(grid.l, grid.x(k) + dx);
        const double step = (hi - lo) / sub;
        double sum = 0.0;
        for (int m = 0; m < sub; ++m) {
          const double y = lo + (m + 0.5) * step;
          const double hat = 1.0 - std::abs(y - grid.x(k)) / dx;
          const double d = grid.x(i) - y;
          if (d > -0.5 * w.width() && d <= 0.5 * w.width())
            sum += hat / w.width() * step;
        }
        a[i * g + k] = sum;
      }
  } else {
    const double s = 4.0 * w.width();
    double z = 0.0;
    for (long m = -static_cast<long>(s / dx); m <= static_cast<long>(s / dx); ++m) {
      const double d = static_cast<double>(m) * dx;
      z += std::exp(-(d * d) / (w.width() * w.width())) * dx;
    }
    for (std::size_t i = 0; i < g; ++i)
      for (std::size_t k = 0; k < g; ++k) {
        const double d = grid.x(i) - grid.x(k);
        if (std::abs(d) > s)
          continue;
        const double c = (k == 0 || k + 1 == g) ? 0.5 * dx : dx;
        a[i * g + k] = std::exp(-(d * d) / (w.width() * w.width())) * c / z;
      }
  }
  return a;
}

std::vector<double>
matvec(const std::vector<double>& a, const std::vector<double>& x)
{
  const std::size_t g = x.size();
  std::vector<double> y(g, 0.0);
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t k = 0; k < g; ++k)
      y[i] += a[i * g + k] * x[k];
  return y;
}

// sum_{k=0}^{n} (I - A)^k gbar with explicit matrix powers
std::vector<double>
dense_neumann(const std::vector<double>& a, const std::vector<double>& gbar, std::size_t n)
{
  const std::size_t g = gbar.size();
  std::vector<double> b(g * g), p(g * g, 0.0);
  for (std::size_t i = 0; i < g; ++i) {
    p[i * g + i] = 1.0;
    for (std::size_t k = 0; k < g; ++k)
      b[i * g + k] = (i == k ? 1.0 : 0.0) - a[i * g + k];
  }
  std::vector<double> sum(g, 0.0);
  for (std::size_t k = 0; k <= n; ++k) {
    const auto term = matvec(p, gbar);
    for (std::size_t i = 0; i < g; ++i)
      sum[i] += term[i];
    std::vector<double> next(g * g, 0.0);
    for (std::size_t i = 0; i < g; ++i)
      for (std::size_t m = 0; m < g; ++m)
        for (std::size_t j = 0; j < g; ++j)
          next[i * g + j] += p[i * g + m] * b[m * g + j];
    p.swap(next);
  }
  return sum;
}

FineField
random_field(const FineGrid& grid, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  FineField f = FineField::zeros(grid);
  for (double& x : f.values)
    x = nd(rng);
  return f;
}

double
rel_vec_err(const std::vector<double>& a, const std::vector<double>& b)
{
  return testing::max_abs_diff(a, b) / std::max(testing::max_abs(b), 1e-300);
}

const WindowFunction kWindows[] = {WindowFunction::box(0.1), WindowFunction::gaussian(0.1),
                                   WindowFunction::box(0.05), WindowFunction::gaussian(0.05)};

} // namespace

TEST_CASE("constants are reproduced away from the walls")
{
  const FineGrid grid = FineGrid::with_points(401);
  for (const auto& w : kWindows) {
    const ConvOperator op(w, grid);
    const FineField r = apply_R(op, FineField::constant(grid, 2.5));
    for (std::size_t i = 0; i < grid.g; ++i) {
      const double x = grid.x(i);
      if (x > w.support_half_width() + grid.dx() && x < 1.0 - w.support_half_width() - grid.dx())
        CHECK(std::abs(r[i] - 2.5) <= 1e-13);
    }
    // rows reaching past a wall lose mass
    CHECK(op.row_sum(0) < 0.51);
    CHECK(op.row_sum(0) > 0.49);
  }
}

TEST_CASE("impulse response is the window profile")
{
  const FineGrid grid = FineGrid::with_points(1001);
  const std::size_t k = 500;
  for (const auto& w : {WindowFunction::gaussian(0.05), WindowFunction::box(0.05)}) {
    const ConvOperator op(w, grid);
    FineField spike = FineField::zeros(grid);
    spike[k] = 1.0 / grid.dx();
    const FineField r = apply_R(op, spike);
    for (std::size_t i = 0; i < grid.g; ++i) {
      const double d = grid.x(i) - grid.x(k);
      // skip nodes next to the support edge; lattice and continuous gaussian
      // normalizations differ by ~1e-8
      if (std::abs(std::abs(d) - w.support_half_width()) > grid.dx())
        CHECK(std::abs(r[i] - w(d)) <= (w.kind == WindowKind::box ? 1e-9 : 1e-7) * w(0.0));
    }
  }
}

TEST_CASE("operator matches an independently assembled dense matrix")
{
  const FineGrid grid = FineGrid::with_points(64);
  for (const auto& w : kWindows) {
    const ConvOperator op(w, grid);
    const auto a = independent_matrix(w, grid);
    const auto d = op.dense();
    const double tol = w.kind == WindowKind::box ? 1e-6 : 1e-13;
    CHECK(testing::max_abs_diff(a, d) <= tol * testing::max_abs(a));

    const FineField f = random_field(grid, 7);
    const FineField r = apply_R(op, f);
    CHECK(rel_vec_err(r.values, matvec(d, f.values)) < 1e-14);

    // transpose agrees with the dense transpose
    std::vector<double> t(grid.g);
    op.apply_transpose(f.values, t);
    std::vector<double> ref(grid.g, 0.0);
    for (std::size_t i = 0; i < grid.g; ++i)
      for (std::size_t k = 0; k < grid.g; ++k)
        ref[k] += d[i * grid.g + k] * f[i];
    CHECK(rel_vec_err(t, ref) < 1e-14);
  }
}

TEST_CASE("grid mismatches are rejected")
{
  CHECK_THROWS_AS(ConvOperator(WindowFunction::box(0.02), FineGrid::with_points(20)), GridMismatchError);
  CHECK_THROWS_AS(ConvOperator(WindowFunction::box(0.1, 2.0), FineGrid::with_points(64, 1.0)),
                  GridMismatchError);
  const ConvOperator op(WindowFunction::box(0.1), FineGrid::with_points(64));
  CHECK_THROWS_AS(apply_R(op, FineField::zeros(FineGrid::with_points(65))), GridMismatchError);
  CHECK_THROWS_AS(landweber_reconstruct(op, FineField::zeros(FineGrid::with_points(65)), 1),
                  GridMismatchError);
}

TEST_CASE("low orders have closed forms")
{
  const FineGrid grid = FineGrid::with_points(128);
  for (const auto& w : kWindows) {
    const ConvOperator op(w, grid);
    const FineField gbar = random_field(grid, 11);
    CHECK(landweber_reconstruct(op, gbar, 0).values == gbar.values);

    const FineField rg = apply_R(op, gbar);
    const FineField g1 = landweber_reconstruct(op, gbar, 1);
    std::vector<double> ref1(grid.g), ref2(grid.g);
    for (std::size_t i = 0; i < grid.g; ++i)
      ref1[i] = 2.0 * gbar[i] - rg[i];
    CHECK(rel_vec_err(g1.values, ref1) < 1e-14);

    // g_2 = 3 gbar - 3 R gbar + R^2 gbar
    const FineField rrg = apply_R(op, rg);
    for (std::size_t i = 0; i < grid.g; ++i)
      ref2[i] = 3.0 * gbar[i] - 3.0 * rg[i] + rrg[i];
    CHECK(rel_vec_err(landweber_reconstruct(op, gbar, 2).values, ref2) < 1e-13);
  }
}

TEST_CASE("landweber matches the dense Neumann series")
{
  for (std::size_t g : {64u, 128u}) {
    const FineGrid grid = FineGrid::with_points(g);
    for (const auto& w : kWindows) {
      const ConvOperator op(w, grid);
      const auto d = op.dense();
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const FineField gbar = random_field(grid, seed);
        for (std::size_t n = 0; n <= 5; ++n)
          CHECK(rel_vec_err(landweber_reconstruct(op, gbar, n).values,
                            dense_neumann(d, gbar.values, n)) < 1e-12);
      }
    }
  }
}

TEST_CASE("landweber is linear")
{
  const FineGrid grid = FineGrid::with_points(200);
  const ConvOperator op(WindowFunction::gaussian(0.05), grid);
  const FineField f = random_field(grid, 1), g = random_field(grid, 2);
  FineField mix = FineField::zeros(grid);
  for (std::size_t i = 0; i < grid.g; ++i)
    mix[i] = 1.5 * f[i] - 0.25 * g[i];
  const auto lf = landweber_reconstruct(op, f, 4), lg = landweber_reconstruct(op, g, 4);
  const auto lm = landweber_reconstruct(op, mix, 4);
  std::vector<double> ref(grid.g);
  for (std::size_t i = 0; i < grid.g; ++i)
    ref[i] = 1.5 * lf[i] - 0.25 * lg[i];
  CHECK(rel_vec_err(lm.values, ref) < 1e-13);
}

TEST_CASE("gaussian operator is nonexpansive and residuals do not grow")
{
  for (std::size_t g : {64u, 128u}) {
    const FineGrid grid = FineGrid::with_points(g);
    for (double eta : {0.1, 0.05}) {
      const ConvOperator op(WindowFunction::gaussian(eta), grid);
      CHECK(identity_minus_norm(op) <= 1.0 + 1e-10);
      for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const FineField gbar = random_field(grid, seed);
        double prev = residual_norm(op, gbar, gbar);
        for (std::size_t n = 1; n <= 10; ++n) {
          const double r = residual_norm(op, landweber_reconstruct(op, gbar, n), gbar);
          CHECK(r <= prev * (1.0 + 1e-12));
          prev = r;
        }
      }
    }
  }
}

TEST_CASE("box operator has negative spectral content")
{
  // The box symbol takes negative values, so ||I - R|| exceeds one and
  // residuals grow along those modes.
  const ConvOperator op(WindowFunction::box(0.1), FineGrid::with_points(128));
  CHECK(identity_minus_norm(op) > 1.1);
}

TEST_CASE("forward-model round trip improves with order")
{
  const FineGrid grid = FineGrid::with_points(1024);
  for (const auto& w : kWindows) {
    const ConvOperator op(w, grid);
    FineField f = FineField::zeros(grid);
    for (std::size_t i = 0; i < grid.g; ++i) {
      const double x = grid.x(i);
      // smooth bump supported in [0.3, 0.7]
      const double u = (x - 0.5) / 0.2;
      f[i] = std::abs(u) < 1.0 ? std::pow(1.0 - u * u, 4) : 0.0;
    }
    const FineField gbar = apply_R(op, f);
    double prev = 1e300;
    for (std::size_t n = 0; n <= 3; ++n) {
      const FineField gn = landweber_reconstruct(op, gbar, n);
      std::vector<double> diff(grid.g);
      for (std::size_t i = 0; i < grid.g; ++i)
        diff[i] = f[i] - gn[i];
      const double e = l2_norm(grid, diff);
      CHECK(e <= prev);
      prev = e;
    }
  }
}

TEST_CASE("jacobian reconstruction")
{
  const ChainConfig cfg = ChainConfig::make(4096, 1.0, 2.0, PowerLawPotential{});
  const FineGrid grid = FineGrid::with_points(1024);
  const ConvOperator op(WindowFunction::box(0.05), grid);

  const FineField uniform = FineField::constant(grid, cfg.m / cfg.l);
  const FineField j = reconstruct_J(op, uniform, 3, cfg);
  for (std::size_t i = 0; i < grid.g; ++i)
    if (grid.x(i) > 0.2 && grid.x(i) < 0.8)
      CHECK(j[i] == doctest::Approx(1.0).epsilon(1e-13));

  FineField jt = FineField::zeros(grid);
  for (std::size_t i = 0; i < grid.g; ++i)
    jt[i] = 1.0 + 0.1 * std::sin(2.0 * M_PI * grid.x(i));
  FineField rho = apply_R(op, jt);
  for (double& x : rho.values)
    x *= cfg.m / cfg.l;
  auto interior_err = [&](const FineField& r) {
    double s = 0.0;
    for (std::size_t i = 0; i < grid.g; ++i)
      if (grid.x(i) > 0.15 && grid.x(i) < 0.85)
        s += (r[i] - jt[i]) * (r[i] - jt[i]);
    return std::sqrt(s * grid.dx());
  };
  CHECK(interior_err(reconstruct_J(op, rho, 5, cfg)) < interior_err(reconstruct_J(op, rho, 0, cfg)));
}

TEST_CASE("velocity reconstruction")
{
  const ChainConfig cfg = ChainConfig::make(1000, 1.0, 1.0, PowerLawPotential{});
  const FineGrid grid = FineGrid::with_points(256);
  const ConvOperator op(WindowFunction::gaussian(0.05), grid);
  FineField rho = FineField::zeros(grid), mom = FineField::zeros(grid);
  for (std::size_t i = 0; i < grid.g; ++i) {
    rho[i] = 1.0 + 0.2 * std::cos(3.0 * grid.x(i));
    mom[i] = -0.4 * rho[i];
  }
  for (std::size_t n : {0u, 2u, 5u}) {
    const FineField v = reconstruct_v(op, rho, mom, n, cfg);
    for (double x : v.values)
      CHECK(x == doctest::Approx(-0.4).epsilon(1e-12));
    const FineField v0 = reconstruct_v(op, rho, FineField::zeros(grid), n, cfg);
    for (double x : v0.values)
      CHECK(x == 0.0);
  }

  FineField thin = rho;
  thin[100] = 1e-12;
  CHECK_THROWS_AS(reconstruct_v(op, thin, mom, 0, cfg), NearVacuumError);
}

TEST_CASE("discrepancy stopping")
{
  const FineGrid grid = FineGrid::with_points(128);
  const ConvOperator op(WindowFunction::gaussian(0.05), grid);
  FineField f = FineField::zeros(grid);
  for (std::size_t i = 0; i < grid.g; ++i)
    f[i] = 1.0 + 0.3 * std::sin(2.0 * M_PI * grid.x(i));
  const FineField exact = apply_R(op, f);

  CHECK(discrepancy_stop(op, exact, 10, 1e6) == 0);
  CHECK(discrepancy_stop(op, exact, 10, 0.0) == 10);
  CHECK_THROWS_AS(discrepancy_stop(op, exact, 10, -1.0), DomainError);

  // noise of known L2 size delta
  FineField noise = random_field(grid, 5);
  const double raw = l2_norm(grid, noise.values);
  const double delta = 1e-3;
  FineField noisy = exact;
  for (std::size_t i = 0; i < grid.g; ++i)
    noisy[i] += delta * noise[i] / raw;
  const std::size_t n = discrepancy_stop(op, noisy, 500, 1.1 * delta);
  CHECK(n < 500);
  CHECK(residual_norm(op, landweber_reconstruct(op, noisy, n), noisy) <= 1.1 * delta);
  if (n > 0)
    CHECK(residual_norm(op, landweber_reconstruct(op, noisy, n - 1), noisy) > 1.1 * delta);
  double prev = 1e300;
  for (std::size_t k = 0; k <= n; ++k) {
    const double r = residual_norm(op, landweber_reconstruct(op, noisy, k), noisy);
    CHECK(r <= prev);
    prev = r;
  }
}
