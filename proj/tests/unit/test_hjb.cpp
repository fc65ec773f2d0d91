#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "doctest.h"
#include "matchlab/domain.hpp"
#include "matchlab/errors.hpp"
#include "matchlab/fields.hpp"
#include "matchlab/hjb.hpp"
#include "matchlab/spectral.hpp"
#include "oracles.hpp"

using namespace matchlab;

namespace {

std::shared_ptr<const SpectralBasis> make_basis(DomainKind kind, int cutoff) {
  return std::make_shared<const SpectralBasis>(
      build_basis(DomainGeometry(kind), cutoff));
}

SpectralCoefficients potential(std::shared_ptr<const SpectralBasis> basis,
                               std::vector<std::pair<int, double>> entries) {
  SpectralCoefficients h;
  h.basis = basis;
  h.kind = CoeffKind::Potential;
  h.values.assign(static_cast<std::size_t>(basis->mode_count()), 0.0);
  for (const auto& [m, v] : entries)
    h.values[static_cast<std::size_t>(m)] = v;
  return h;
}

double grid_mean(const GridField& f) {
  double acc = 0.0;
  for (double v : f.values) acc += v;
  return acc / static_cast<double>(f.values.size());
}

GridField dense_field(const SpectralCoefficients& c, int per_axis) {
  return synthesize(c, per_axis);
}

}  // namespace

TEST_CASE("zero-time flow returns the potential unchanged") {
  auto basis = make_basis(DomainKind::Circle, 4);
  SpectralCoefficients h = potential(basis, {{1, 0.3}, {2, -0.2}, {4, 0.07}});
  HopfColeResult r = hopf_cole_flow(h, 0.05, 0.0);
  GridField direct = dense_field(h, r.phi.per_axis);
  REQUIRE(r.phi.values.size() == direct.values.size());
  for (std::size_t i = 0; i < direct.values.size(); ++i)
    CHECK(r.phi.values[i] == doctest::Approx(direct.values[i]).epsilon(1e-10));
  CHECK(r.min_weight > 0.0);
  CHECK_THROWS_AS(hopf_cole_flow(h, 0.05, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(hopf_cole_flow(h, 0.05, 1.1), std::invalid_argument);
}

TEST_CASE("adding a constant passes through the flow exactly") {
  auto basis = make_basis(DomainKind::Circle, 3);
  SpectralCoefficients h = potential(basis, {{1, 0.25}, {3, -0.1}});
  SpectralCoefficients hc = h;
  hc.values[0] = 0.8;
  HopfColeResult a = hopf_cole_flow(h, 0.07);
  HopfColeResult b = hopf_cole_flow(hc, 0.07);
  REQUIRE(a.phi.values.size() == b.phi.values.size());
  for (std::size_t i = 0; i < a.phi.values.size(); ++i)
    CHECK(b.phi.values[i] ==
          doctest::Approx(a.phi.values[i] + 0.8).epsilon(1e-10));
}

TEST_CASE("flow obeys the maximum principle and shrinks oscillation") {
  for (DomainKind kind : {DomainKind::Circle, DomainKind::Torus2}) {
    auto basis = make_basis(kind, 2);
    SpectralCoefficients h = potential(basis, {{1, 0.2}, {2, -0.15}});
    const int dense_axis = basis->dom.dimension() == 1 ? 2048 : 256;
    GridField dense = dense_field(h, dense_axis);
    const double hmin = *std::min_element(dense.values.begin(), dense.values.end());
    const double hmax = *std::max_element(dense.values.begin(), dense.values.end());
    // Extrema read off lattices, so allow a mesh-sized margin.
    const double pad = 0.02;
    for (double sigma : {0.3, 0.05}) {
      HopfColeResult r = hopf_cole_flow(h, sigma);
      const double pmin =
          *std::min_element(r.phi.values.begin(), r.phi.values.end());
      const double pmax =
          *std::max_element(r.phi.values.begin(), r.phi.values.end());
      CHECK(pmin >= hmin - pad);
      CHECK(pmax <= hmax + pad);
      CHECK(pmax - pmin <= (hmax - hmin) + pad);
    }
  }
}

TEST_CASE("mean of the flowed potential is nonincreasing in time") {
  auto basis = make_basis(DomainKind::Circle, 4);
  SpectralCoefficients h = potential(basis, {{1, 0.35}, {2, 0.1}, {4, -0.12}});
  const double sigma = 0.08;
  double prev = 1e300;
  for (double t : {0.0, 0.25, 0.5, 1.0}) {
    const double mean = grid_mean(hopf_cole_flow(h, sigma, t).phi);
    CHECK(mean <= prev + 1e-10);
    prev = mean;
  }
}

TEST_CASE("small viscosity approaches the inf-convolution oracle") {
  auto basis = make_basis(DomainKind::Circle, 3);
  SpectralCoefficients h = potential(basis, {{1, 0.3}, {3, 0.08}});
  GridField source = dense_field(h, 1024);

  auto sup_gap = [&](double sigma) {
    HopfColeResult r = hopf_cole_flow(h, sigma);
    std::vector<Point> query;
    for (double x : grid_coords(r.phi.per_axis)) {
      Point p;
      p[0] = x;
      query.push_back(p);
    }
    const std::vector<double> q = hopf_lax(source, query);
    double worst = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i)
      worst = std::max(worst, std::abs(q[i] - r.phi.values[i]));
    return worst;
  };
  // The gap scales linearly with the viscosity (observed ~0.9 sigma here),
  // so a tenfold sigma drop must shrink it several-fold.
  const double coarse = sup_gap(0.2);
  const double fine = sup_gap(0.02);
  CHECK(fine < 0.35 * coarse);
  CHECK(fine < 0.035);
  CHECK(coarse < 0.25);
}

TEST_CASE("inf-convolution oracle basics") {
  DomainGeometry circle(DomainKind::Circle);
  GridField h{circle, 4, {1.0, 0.0, 2.0, 0.5}};  // nodes 1/8, 3/8, 5/8, 7/8
  std::vector<Point> query(2);
  query[0][0] = 0.375;  // on the minimizing node
  query[1][0] = 0.125;
  std::vector<double> q = hopf_lax(h, query, 0.5);
  CHECK(q[0] == doctest::Approx(0.0).epsilon(1e-14));
  // min over nodes of h + d^2: candidates 1.0 + 0, 0.0 + 0.25^2, ...
  CHECK(q[1] == doctest::Approx(0.0625).epsilon(1e-12));
  for (std::size_t i = 0; i < q.size(); ++i) CHECK(q[i] <= 2.0);
  CHECK_THROWS_AS(hopf_lax(h, query, 0.0), std::invalid_argument);
}

TEST_CASE("underflow guard trips on wild potentials") {
  auto basis = make_basis(DomainKind::Circle, 2);
  SpectralCoefficients h = potential(basis, {{1, 4.0}});  // oscillation ~ 11
  CHECK_THROWS_AS(hopf_cole_flow(h, 0.01), NumericError);
}

TEST_CASE("dual lower bound: accounting identities and event policy") {
  auto basis = make_basis(DomainKind::Interval, 8);
  const std::size_t n = 100;
  const double root_n = 10.0;
  SpectralCoefficients rs;
  rs.basis = basis;
  rs.kind = CoeffKind::SmoothedResidual;
  rs.values.assign(static_cast<std::size_t>(basis->mode_count()), 0.0);
  rs.values[1] = 0.1 * root_n * 0.8;
  rs.values[2] = 0.1 * root_n * 0.5;

  DualLowerBound dual = dual_lower_bound(rs, n, 0.05, 2e-4, 0.5);
  CHECK(dual.value ==
        doctest::Approx(2.0 * (dual.g_integral + dual.dirichlet_term))
            .epsilon(1e-12));
  CHECK(dual.slack ==
        doctest::Approx(dual.sigma * dual.residual_sup).epsilon(1e-9));
  CHECK(dual.sigma >= 2e-4);
  CHECK(dual.sigma < 0.1);
  CHECK(dual.eta == 0.5);
  const double expected_dirichlet =
      dirichlet_energy(poisson_solve(rs)) / static_cast<double>(n);
  CHECK(dual.dirichlet_term ==
        doctest::Approx(expected_dirichlet).epsilon(1e-12));

  CHECK_THROWS_AS(dual_lower_bound(rs, n, 0.05, 2e-4, 1e-9), EventViolation);
  SpectralCoefficients raw = rs;
  raw.kind = CoeffKind::MeasureResidual;
  CHECK_THROWS_AS(dual_lower_bound(raw, n, 0.05, 2e-4, 0.5),
                  std::invalid_argument);
}

TEST_CASE("dual and primal bounds sandwich the exact interval value") {
  // Deterministic smoothed residual on the interval, where the optimal map
  // to uniform is the CDF and the exact cost is a quadrature away.
  auto basis = make_basis(DomainKind::Interval, 8);
  const std::size_t n = 100;
  const double root_n = 10.0;
  const double eps = 0.1;
  const double a1 = 0.8, a2 = 0.5;
  SpectralCoefficients rs;
  rs.basis = basis;
  rs.kind = CoeffKind::SmoothedResidual;
  rs.values.assign(static_cast<std::size_t>(basis->mode_count()), 0.0);
  rs.values[1] = eps * root_n * a1;
  rs.values[2] = eps * root_n * a2;

  auto density = [&](double x) {
    return 1.0 + eps * std::sqrt(2.0) *
                     (a1 * std::cos(M_PI * x) + a2 * std::cos(2.0 * M_PI * x));
  };
  auto shift = [&](double x) {  // F(x) - x
    return eps * std::sqrt(2.0) *
           (a1 * std::sin(M_PI * x) / M_PI +
            a2 * std::sin(2.0 * M_PI * x) / (2.0 * M_PI));
  };
  const int nseg = 4000;
  double exact = 0.0;
  for (int i = 0; i < nseg; ++i) {
    auto f = [&](double x) { return shift(x) * shift(x) * density(x); };
    const double x0 = static_cast<double>(i) / nseg;
    exact += (f(x0) + 4.0 * f(x0 + 0.5 / nseg) + f(x0 + 1.0 / nseg)) /
             (6.0 * nseg);
  }

  // Primal route: Dacorogna-Moser style upper bound.
  GridField u0 = density_field(rs, n, 4 * basis->cutoff + 3);
  SpectralCoefficients rhs = rs;
  for (double& v : rhs.values) v = -v / root_n;
  DmBound dm = dm_upper_bound(u0, poisson_solve(rhs));
  CHECK(dm.value >= exact * (1.0 - 1e-9));
  CHECK(dm.value <= exact * 1.03);

  // Dual route: certified lower bound within its declared slack.
  DualLowerBound dual = dual_lower_bound(rs, n, 0.05, 2e-4, 0.5);
  CHECK(dual.value - dual.slack <= exact * (1.0 + 1e-9));
  CHECK(dual.value >= exact * 0.95 - dual.slack);

  // The two production routes bracket each other as well.
  CHECK(dual.value - dual.slack <= dm.value * (1.0 + 1e-12));
}
