#include <cmath>
#include <vector>

#include "doctest.h"
#include "matchlab/rng.hpp"
#include "matchlab/stats.hpp"
#include "oracles.hpp"

using namespace matchlab;

namespace {

// Band-limited test functions on the circle, sampled on a midpoint grid fine
// enough that every moment below is an exact trigonometric integral.
constexpr int kGrid = 1024;
constexpr double kWeight = 1.0 / kGrid;

std::vector<double> sampled(double (*fn)(double)) {
  std::vector<double> v(kGrid);
  for (int i = 0; i < kGrid; ++i) v[static_cast<std::size_t>(i)] = fn((i + 0.5) / kGrid);
  return v;
}

double cos1(double x) { return std::sqrt(2.0) * std::cos(2.0 * M_PI * x); }
double sin1(double x) { return std::sqrt(2.0) * std::sin(2.0 * M_PI * x); }

}  // namespace

TEST_CASE("moment profiles match direct summation") {
  Rng rng = Rng::from_key(7, 80, 1, 0);
  std::vector<double> v(257);
  for (double& x : v) x = 3.0 * rng.next_double() - 1.0;
  const double w = 1.0 / static_cast<double>(v.size());
  MomentProfile p = moments(v, w);
  double mean = 0.0;
  for (double x : v) mean += w * x;
  double m2 = 0.0, m4 = 0.0, mi = 0.0;
  for (double x : v) {
    const double d = x - mean;
    m2 += w * d * d;
    m4 += w * d * d * d * d;
    mi = std::max(mi, std::abs(d));
  }
  CHECK(p.mean == doctest::Approx(mean).epsilon(1e-13));
  CHECK(p.m2 == doctest::Approx(m2).epsilon(1e-13));
  CHECK(p.m4 == doctest::Approx(m4).epsilon(1e-13));
  CHECK(p.m_inf == doctest::Approx(mi).epsilon(1e-13));

  std::vector<double> g(v.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = v[v.size() - 1 - i] - 0.4;
  CrossMoments cm = cross_moments(v, g, w);
  double gmean = 0.0;
  for (double x : g) gmean += w * x;
  double c2 = 0.0, c4 = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double df = v[i] - mean, dg = g[i] - gmean;
    c2 += w * df * dg;
    c4 += w * df * df * dg * dg;
  }
  CHECK(cm.m2 == doctest::Approx(c2).epsilon(1e-12));
  CHECK(cm.m4 == doctest::Approx(c4).epsilon(1e-12));

  std::vector<double> pw = power_moments(v, w, 6);
  REQUIRE(pw.size() == 7);
  CHECK(pw[0] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(std::abs(pw[1]) < 1e-13);
  CHECK(pw[2] == doctest::Approx(m2).epsilon(1e-13));
  CHECK(pw[4] == doctest::Approx(m4).epsilon(1e-13));
}

TEST_CASE("known trigonometric moments on the unit circle") {
  std::vector<double> f = sampled(cos1);
  std::vector<double> g = sampled(sin1);
  MomentProfile pf = moments(f, kWeight);
  CHECK(pf.mean == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(pf.m2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pf.m4 == doctest::Approx(1.5).epsilon(1e-12));  // int 4 cos^4 = 3/2
  CrossMoments cm = cross_moments(f, g, kWeight);
  CHECK(std::abs(cm.m2) < 1e-12);
  CHECK(cm.m4 == doctest::Approx(0.5).epsilon(1e-12));  // int 4 cos^2 sin^2
}

TEST_CASE("pairing second and fourth moments: closed form and Monte Carlo") {
  std::vector<double> f = sampled(cos1);
  std::vector<double> g = sampled(sin1);
  const std::size_t n = 10;
  PairingMoments pm = covariance_identities(f, g, kWeight, n);
  CHECK(std::abs(pm.second) < 1e-12);
  // ((n-1)/n)(1*1 + 0) + (1/2)/n with n = 10.
  CHECK(pm.fourth == doctest::Approx(0.95).epsilon(1e-12));

  PairingMoments pff = covariance_identities(f, f, kWeight, n);
  CHECK(pff.second == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pff.fourth == doctest::Approx(3.0 * 0.9 + 0.15).epsilon(1e-12));

  Rng rng = Rng::from_key(7, 81, 1, 0);
  const int trials = 200000;
  std::vector<double> prod(trials), quart(trials);
  for (int trial = 0; trial < trials; ++trial) {
    double sf = 0.0, sg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = rng.next_double();
      sf += cos1(x);
      sg += sin1(x);
    }
    const double pairf = residual_pairing(sf, n, 0.0);
    const double pairg = residual_pairing(sg, n, 0.0);
    prod[static_cast<std::size_t>(trial)] = pairf * pairg;
    quart[static_cast<std::size_t>(trial)] = pairf * pairf * pairg * pairg;
  }
  oracles::MeanSe second = oracles::mean_se(prod);
  oracles::MeanSe fourth = oracles::mean_se(quart);
  CHECK(std::abs(second.mean - pm.second) < 4.0 * second.se);
  CHECK(std::abs(fourth.mean - pm.fourth) < 4.0 * fourth.se);
}

TEST_CASE("residual pairing formula") {
  // sum f(X_i) = 7.5 over n = 25 samples, mean f = 0.2:
  // 7.5 / 5 - 5 * 0.2 = 0.5.
  CHECK(residual_pairing(7.5, 25, 0.2) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(residual_pairing(0.0, 16, 0.0) == 0.0);
}

TEST_CASE("mgf series is exact for a single draw") {
  std::vector<double> f = sampled(cos1);
  for (double lambda : {0.3, 1.0, 2.5}) {
    MgfEstimate est = mgf_series(f, kWeight, lambda, 1);
    double direct = 0.0;
    for (double v : f) direct += kWeight * std::exp(lambda * v);
    CHECK(est.series == doctest::Approx(direct).epsilon(1e-12));
    CHECK(est.k_used >= 2);
  }
}

TEST_CASE("mgf series matches Monte Carlo and sits below its envelope") {
  std::vector<double> f = sampled(cos1);
  MomentProfile p = moments(f, kWeight);
  const std::size_t n = 5;
  const double lambda = 0.7;
  MgfEstimate est = mgf_series(f, kWeight, lambda, n);
  const double envelope = std::exp(
      0.5 * lambda * lambda * p.m2 *
      std::exp(std::abs(lambda) * p.m_inf / std::sqrt(static_cast<double>(n))));
  CHECK(est.upper_bound == doctest::Approx(envelope).epsilon(1e-12));
  CHECK(est.series <= est.upper_bound);

  Rng rng = Rng::from_key(7, 82, 1, 0);
  const int trials = 400000;
  std::vector<double> vals(trials);
  for (int trial = 0; trial < trials; ++trial) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += cos1(rng.next_double());
    vals[static_cast<std::size_t>(trial)] =
        std::exp(lambda * residual_pairing(s, n, 0.0));
  }
  oracles::MeanSe mc = oracles::mean_se(vals);
  CHECK(std::abs(mc.mean - est.series) < 4.0 * mc.se);

  // The envelope dominates across a lambda sweep, not just at one point.
  for (double l : {0.1, 0.5, 1.0, 2.0, 4.0}) {
    MgfEstimate e = mgf_series(f, kWeight, l, 64);
    CHECK(e.series <= e.upper_bound * (1.0 + 1e-12));
  }
}

TEST_CASE("tail rate against a dense grid search") {
  for (double c : {0.0, 0.3, 1.0, 3.0}) {
    for (double eta : {1e-3, 0.1, 0.5, 2.0}) {
      const double got = tail_rate(c, eta);
      const double want = oracles::dense_tail_rate(c, eta);
      CHECK(got == doctest::Approx(want).epsilon(1e-6));
    }
  }
  // F(0, eta) = eta^2 / 2 exactly.
  CHECK(tail_rate(0.0, 0.5) == doctest::Approx(0.125).epsilon(1e-10));
  CHECK(tail_rate(0.0, 2.0) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("tail rate monotonicity in both arguments") {
  const double etas[] = {0.05, 0.2, 0.8, 1.6};
  const double cs[] = {0.0, 0.25, 0.7, 1.5, 4.0};
  for (double eta : etas) {
    double prev = 1e300;
    for (double c : cs) {
      const double f = tail_rate(c, eta);
      CHECK(f > 0.0);
      CHECK(f <= prev * (1.0 + 1e-12));  // decreasing in c
      prev = f;
    }
    // c * F(c, eta) increasing in c.
    double prev_cf = 0.0;
    for (double c : cs) {
      const double cf = c * tail_rate(c, eta);
      CHECK(cf >= prev_cf - 1e-12);
      prev_cf = cf;
    }
  }
  for (double c : cs) {
    double prev = 0.0;
    for (double eta : etas) {
      const double f = tail_rate(c, eta);
      CHECK(f >= prev);  // increasing in eta
      prev = f;
    }
  }
}

TEST_CASE("subexponential tail estimate composes the rate") {
  for (double c1 : {0.5, 1.0, 2.0}) {
    for (double c2 : {0.0, 0.4, 1.3}) {
      for (double eta : {0.1, 0.7}) {
        const double want = 2.0 * std::exp(-tail_rate(c2 / c1, eta) / c1);
        CHECK(bernstein_tail(c1, c2, eta) ==
              doctest::Approx(want).epsilon(1e-12));
      }
    }
  }
  // Sub-Gaussian limit when the scale constant vanishes.
  CHECK(bernstein_tail(2.0, 0.0, 0.3) ==
        doctest::Approx(2.0 * std::exp(-0.3 * 0.3 / 4.0)).epsilon(1e-10));
  CHECK(bernstein_tail(1.0, 1.0, 0.2) > bernstein_tail(1.0, 1.0, 0.4));
  CHECK(bernstein_tail(1.0, 1.0, 0.4) <= 2.0);
}
