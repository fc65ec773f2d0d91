#include "matchlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace matchlab {

namespace {

double grid_mean(const std::vector<double>& values, double weight) {
  if (values.empty()) throw std::invalid_argument("moments: empty grid");
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc * weight;
}

}  // namespace

MomentProfile moments(const std::vector<double>& values, double weight) {
  MomentProfile p;
  p.mean = grid_mean(values, weight);
  for (double v : values) {
    const double d = v - p.mean;
    p.m2 += d * d * weight;
    p.m4 += d * d * d * d * weight;
    p.m_inf = std::max(p.m_inf, std::fabs(d));
  }
  return p;
}

CrossMoments cross_moments(const std::vector<double>& f_values,
                           const std::vector<double>& g_values, double weight) {
  if (f_values.size() != g_values.size())
    throw std::invalid_argument("cross_moments: size mismatch");
  const double mf = grid_mean(f_values, weight);
  const double mg = grid_mean(g_values, weight);
  CrossMoments c;
  for (std::size_t i = 0; i < f_values.size(); ++i) {
    const double df = f_values[i] - mf;
    const double dg = g_values[i] - mg;
    c.m2 += df * dg * weight;
    c.m4 += df * df * dg * dg * weight;
  }
  return c;
}

std::vector<double> power_moments(const std::vector<double>& values,
                                  double weight, int k_max) {
  if (k_max < 0) throw std::invalid_argument("power_moments: k_max < 0");
  const double mean = grid_mean(values, weight);
  std::vector<double> mk(static_cast<std::size_t>(k_max) + 1, 0.0);
  mk[0] = 1.0;
  for (double v : values) {
    const double d = v - mean;
    double p = d;
    for (int k = 1; k <= k_max; ++k) {
      mk[static_cast<std::size_t>(k)] += p * weight;
      p *= d;
    }
  }
  if (k_max >= 1) mk[1] = 0.0;  // exactly centered by construction
  return mk;
}

MgfEstimate mgf_series(const std::vector<double>& values, double weight,
                       double lambda, std::size_t n) {
  if (n == 0) throw std::invalid_argument("mgf_series: n == 0");
  const MomentProfile prof = moments(values, weight);
  const double root_n = std::sqrt(static_cast<double>(n));
  const double a = std::fabs(lambda) * prof.m_inf / root_n;

  // Truncation: once |lambda|^k m_inf^k / (k! n^{k/2}) drops below 1e-14 * k
  // the remaining terms cannot move the sum at double precision.
  int k_max = 2;
  {
    double term = a * a / 2.0;  // k = 2 envelope
    while (!(term < 1e-14 * k_max) && k_max < 300) {
      ++k_max;
      term *= a / k_max;
    }
  }

  const std::vector<double> mk = power_moments(values, weight, k_max);
  double inner = 1.0;
  double lam_pow = lambda * lambda;
  double fact = 2.0;
  for (int k = 2; k <= k_max; ++k) {
    inner += lam_pow * mk[static_cast<std::size_t>(k)] /
             (fact * std::pow(root_n, k));
    lam_pow *= lambda;
    fact *= (k + 1);
  }

  MgfEstimate est;
  est.k_used = k_max;
  est.series = std::pow(inner, static_cast<double>(n));
  est.upper_bound =
      std::exp(0.5 * lambda * lambda * prof.m2 * std::exp(a));
  return est;
}

PairingMoments covariance_identities(const std::vector<double>& f_values,
                                     const std::vector<double>& g_values,
                                     double weight, std::size_t n) {
  if (n == 0) throw std::invalid_argument("covariance_identities: n == 0");
  const MomentProfile pf = moments(f_values, weight);
  const MomentProfile pg = moments(g_values, weight);
  const CrossMoments cx = cross_moments(f_values, g_values, weight);
  const double nn = static_cast<double>(n);
  PairingMoments pm;
  pm.second = cx.m2;
  pm.fourth =
      ((nn - 1.0) / nn) * (pf.m2 * pg.m2 + 2.0 * cx.m2 * cx.m2) + cx.m4 / nn;
  return pm;
}

double residual_pairing(double sum_f_at_samples, std::size_t n, double mean_f) {
  if (n == 0) throw std::invalid_argument("residual_pairing: n == 0");
  const double root_n = std::sqrt(static_cast<double>(n));
  return sum_f_at_samples / root_n - root_n * mean_f;
}

double tail_rate(double c, double eta) {
  if (c < 0.0 || eta < 0.0)
    throw std::invalid_argument("tail_rate: negative argument");
  if (eta == 0.0) return 0.0;
  const auto objective = [c, eta](double lam) {
    return lam * eta - 0.5 * lam * lam * std::exp(c * lam);
  };
  // The objective is concave-like with a single interior maximum; bracket it
  // by doubling until the value turns down, then golden-section.
  double hi = 1.0;
  while (objective(hi * 2.0) > objective(hi) && hi < 1e12) hi *= 2.0;
  hi *= 2.0;
  double lo = 0.0;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - gr * (hi - lo);
  double x2 = lo + gr * (hi - lo);
  double f1 = objective(x1);
  double f2 = objective(x2);
  while (hi - lo > 1e-10 * std::max(1.0, hi)) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = objective(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = objective(x1);
    }
  }
  return std::max(0.0, std::max(f1, f2));
}

double bernstein_tail(double c1, double c2, double eta) {
  // c2 = 0 is the sub-Gaussian regime, where the rate is exactly eta^2 / 2.
  if (!(c1 > 0.0) || !(c2 >= 0.0))
    throw std::invalid_argument("bernstein_tail: scales must be positive");
  return 2.0 * std::exp(-tail_rate(c2 / c1, eta) / c1);
}

}  // namespace matchlab
