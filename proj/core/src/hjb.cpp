#include "matchlab/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "matchlab/errors.hpp"

namespace matchlab {

namespace {

constexpr double kAxisPi = 3.14159265358979323846;

// Largest |h| and largest |grad h| over a probe lattice, used to size the
// internal grid and to keep exponents representable.
struct ProbeStats {
  double osc = 0.0;
  double lip = 0.0;
};

ProbeStats probe_function(const SpectralCoefficients& h) {
  const int probe_axis = std::max(2 * h.basis->cutoff + 1, 33);
  const GridField vals = synthesize(h, probe_axis);
  double lo = vals.values[0], hi = vals.values[0];
  for (double v : vals.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const GradientField gf = gradient_field(h, probe_axis);
  double lip = 0.0;
  if (gf.component.size() == 1) {
    for (double v : gf.component[0].values) lip = std::max(lip, std::fabs(v));
  } else {
    for (std::size_t i = 0; i < gf.component[0].values.size(); ++i)
      lip = std::max(lip, std::hypot(gf.component[0].values[i],
                                     gf.component[1].values[i]));
  }
  return {hi - lo, lip};
}

// log p_tau(x, y) for the one-dimensional unit axis: a wrapped Gaussian on
// periodic axes, a doubly reflected Gaussian under Neumann walls. Assembled
// with log-sum-exp over images so deep tails never underflow.
double log_axis_kernel(bool periodic, double tau, double x, double y) {
  const double lead = -0.5 * std::log(4.0 * kAxisPi * tau);
  double terms[26];
  int count = 0;
  if (periodic) {
    for (int m = -6; m <= 6; ++m) {
      const double z = x - y - m;
      terms[count++] = -z * z / (4.0 * tau);
    }
  } else {
    for (int m = -6; m <= 6; ++m) {
      const double z1 = x - y - 2.0 * m;
      const double z2 = x + y - 2.0 * m;
      terms[count++] = -z1 * z1 / (4.0 * tau);
      terms[count++] = -z2 * z2 / (4.0 * tau);
    }
  }
  double peak = terms[0];
  for (int i = 1; i < count; ++i) peak = std::max(peak, terms[i]);
  double acc = 0.0;
  for (int i = 0; i < count; ++i) acc += std::exp(terms[i] - peak);
  return lead + peak + std::log(acc);
}

// log sum_b exp(lk[b] + e[b * stride]) over b in [0, g).
double lse_row(const double* lk, const double* e, std::size_t stride, int g) {
  double peak = -std::numeric_limits<double>::infinity();
  for (int b = 0; b < g; ++b)
    peak = std::max(peak, lk[b] + e[static_cast<std::size_t>(b) * stride]);
  double acc = 0.0;
  for (int b = 0; b < g; ++b)
    acc += std::exp(lk[b] + e[static_cast<std::size_t>(b) * stride] - peak);
  return peak + std::log(acc);
}

}  // namespace

HopfColeResult hopf_cole_flow(const SpectralCoefficients& h, double sigma,
                              double t) {
  if (!h.basis) throw std::invalid_argument("hopf_cole_flow: null basis");
  if (!(sigma > 0.0)) throw std::invalid_argument("hopf_cole_flow: sigma <= 0");
  if (t < 0.0 || t > 1.0)
    throw std::invalid_argument("hopf_cole_flow: t outside [0, 1]");
  const SpectralBasis& b0 = *h.basis;

  const ProbeStats ps = probe_function(h);
  if (ps.osc / sigma > 700.0)
    throw NumericError("hopf_cole_flow: exponent range " +
                       std::to_string(ps.osc / sigma) +
                       " risks underflow; raise sigma");

  // exp(-h/sigma) oscillates at rate lip/sigma, so resolve half again as many
  // modes, plus the input's own bandwidth and a tail margin.
  const int cutoff = static_cast<int>(
                         std::ceil(1.5 * ps.lip / (sigma * b0.omega))) +
                     b0.cutoff + 8;
  if (cutoff > 4096)
    throw NumericError("hopf_cole_flow: bandwidth " + std::to_string(cutoff) +
                       " over the 4096 cap; raise sigma");
  const int g = 2 * cutoff + 1;
  const std::vector<double> xs = grid_coords(g);
  const int d = b0.dom.dimension();

  std::vector<double> vals = synthesize_values(b0, h.values, xs);
  double shift = vals[0], top = vals[0];
  for (double v : vals) {
    shift = std::min(shift, v);
    top = std::max(top, v);
  }

  HopfColeResult out;
  out.sigma = sigma;
  out.cutoff = cutoff;
  out.phi.dom = b0.dom;
  out.phi.per_axis = g;

  if (t == 0.0) {
    // The zero-time flow is the identity by definition; return h itself so
    // the exp/log round trip cannot smear it at large osc/sigma.
    out.min_weight = std::exp(std::max(-(top - shift) / sigma, -700.0));
    out.phi.values = std::move(vals);
    return out;
  }

  // Evolve the exponential weights with the exact positive heat kernel,
  // entirely in the log domain. The kernel factorizes over axes, so the
  // d-dimensional step is two one-dimensional log-sum-exp sweeps; midpoint
  // quadrature of the (evenly reflected) periodic integrand is spectrally
  // accurate, so the grid sized for exp(-h/sigma) already resolves it.
  const double tau = sigma * t / 2.0;
  const bool periodic = b0.dom.periodic();
  const double log_w = -std::log(static_cast<double>(g));
  std::vector<double> lk(static_cast<std::size_t>(g) * g);
  for (int a = 0; a < g; ++a)
    for (int b = 0; b < g; ++b)
      lk[static_cast<std::size_t>(a) * g + b] =
          log_axis_kernel(periodic, tau, xs[static_cast<std::size_t>(a)],
                          xs[static_cast<std::size_t>(b)]);

  std::vector<double> e0(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i)
    e0[i] = -(vals[i] - shift) / sigma;

  std::vector<double> lse;
  if (d == 1) {
    lse.resize(static_cast<std::size_t>(g));
    for (int a = 0; a < g; ++a)
      lse[static_cast<std::size_t>(a)] =
          lse_row(&lk[static_cast<std::size_t>(a) * g], e0.data(), 1, g) +
          log_w;
  } else {
    // First sweep contracts the trailing axis; mid(a1, i0) keeps the
    // contracted axis leading so the second sweep scans contiguously.
    std::vector<double> mid(static_cast<std::size_t>(g) * g);
    for (int i0 = 0; i0 < g; ++i0)
      for (int a1 = 0; a1 < g; ++a1)
        mid[static_cast<std::size_t>(a1) * g + i0] =
            lse_row(&lk[static_cast<std::size_t>(a1) * g],
                    &e0[static_cast<std::size_t>(i0) * g], 1, g) +
            log_w;
    lse.resize(static_cast<std::size_t>(g) * g);
    for (int a0 = 0; a0 < g; ++a0)
      for (int a1 = 0; a1 < g; ++a1)
        lse[static_cast<std::size_t>(a0) * g + a1] =
            lse_row(&lk[static_cast<std::size_t>(a0) * g],
                    &mid[static_cast<std::size_t>(a1) * g], 1, g) +
            log_w;
  }

  double min_log = lse[0];
  for (double v : lse) {
    if (!std::isfinite(v))
      throw NumericError("hopf_cole_flow: heat step produced a non-finite "
                         "log weight");
    min_log = std::min(min_log, v);
  }
  out.min_weight = std::exp(std::max(min_log, -700.0));
  out.phi.values.resize(lse.size());
  for (std::size_t i = 0; i < lse.size(); ++i)
    out.phi.values[i] = -sigma * lse[i] + shift;
  return out;
}

std::vector<double> hopf_lax(const GridField& h,
                             const std::vector<Point>& query, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("hopf_lax: t <= 0");
  const QuadratureGrid qg = quadrature_grid(h.dom, h.per_axis);
  std::vector<double> out(query.size(),
                          std::numeric_limits<double>::infinity());
  for (std::size_t q = 0; q < query.size(); ++q)
    for (std::size_t i = 0; i < qg.nodes.size(); ++i) {
      const double dd = distance(h.dom, qg.nodes[i], query[q]);
      out[q] = std::min(out[q], h.values[i] + dd * dd / (2.0 * t));
    }
  return out;
}

DualLowerBound dual_lower_bound(const SpectralCoefficients& r_smooth,
                                std::size_t n, double t, double sigma_floor,
                                double eta) {
  if (r_smooth.kind != CoeffKind::SmoothedResidual)
    throw std::invalid_argument("dual_lower_bound: expected smoothed residual");
  if (n == 0) throw std::invalid_argument("dual_lower_bound: n == 0");
  if (!(t > 0.0)) throw std::invalid_argument("dual_lower_bound: t <= 0");
  if (!(sigma_floor > 0.0))
    throw std::invalid_argument("dual_lower_bound: sigma_floor <= 0");
  if (!(eta > 0.0)) throw std::invalid_argument("dual_lower_bound: eta <= 0");

  const DomainGeometry& dom = r_smooth.basis->dom;
  const double c_ge = dom.declared_constants().c_ge;
  SupResidual sr;
  try {
    sr = sup_residual(r_smooth, n, t, c_ge, eta / 4.0);
  } catch (const GridError& e) {
    // A certificate lattice beyond the cap means the concentration event
    // cannot be certified at this eta; treat it like an observed violation.
    throw EventViolation(std::string("dual_lower_bound: ") + e.what());
  }
  const double sup_bound = sr.value + sr.slack;
  if (sup_bound > eta)
    throw EventViolation("dual_lower_bound: certified sup residual " +
                         std::to_string(sup_bound) + " exceeds eta " +
                         std::to_string(eta));

  SpectralCoefficients f_pot = poisson_solve(r_smooth);
  const double dirichlet = dirichlet_energy(f_pot);
  SpectralCoefficients h = f_pot;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (double& c : h.values) c *= scale;

  const double underflow_floor = probe_function(h).osc / 700.0;
  const double floor = std::max(sigma_floor, underflow_floor);
  double sigma = 0.1;
  while (sigma * 0.5 >= floor) sigma *= 0.5;
  while (sigma < floor) sigma *= 2.0;

  const HopfColeResult hc = hopf_cole_flow(h, sigma);
  double g_integral = 0.0;
  for (double v : hc.phi.values) g_integral += v;
  g_integral *= hc.phi.weight();

  DualLowerBound out;
  out.sigma = sigma;
  out.eta = eta;
  out.residual_sup = sup_bound;
  out.g_integral = g_integral;
  out.dirichlet_term = dirichlet / static_cast<double>(n);
  out.value = 2.0 * (g_integral + out.dirichlet_term);
  out.slack = sigma * sup_bound;
  return out;
}

}  // namespace matchlab
