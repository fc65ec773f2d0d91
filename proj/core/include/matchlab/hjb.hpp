#pragma once
// Viscous inf-convolution machinery for the dual side of the matching
// problem. A backward heat step conjugated by exponentials turns a
// band-limited potential into an admissible Kantorovich pair for the halved
// quadratic cost, with an explicit defect proportional to the viscosity.

#include <vector>

#include "matchlab/domain.hpp"
#include "matchlab/fields.hpp"
#include "matchlab/spectral.hpp"

namespace matchlab {

struct HopfColeResult {
  GridField phi;            // -sigma log(P_{sigma/2} exp(-h / sigma))
  double sigma = 0.0;
  double min_weight = 0.0;  // smallest evolved exponential, underflow audit
  int cutoff = 0;           // internal bandwidth the flow ran at
};

// Viscous inf-convolution up to time t in [0, 1] applied to the band-limited
// h (heat step sigma * t / 2 inside the exponential conjugation; t = 0
// returns h itself). The internal grid is sized from a measured Lipschitz
// constant of h so the exponential is resolved before the heat multiplier
// acts. Throws NumericError when the exponent range risks underflow
// (osc/sigma > 700) or when positivity is lost.
HopfColeResult hopf_cole_flow(const SpectralCoefficients& h, double sigma,
                              double t = 1.0);

// Brute-force inf-convolution oracle  Q_t(y) = min_x [h(x) + d(x, y)^2 / (2t)]
// with x restricted to the nodes of h. Test-grade, O(|query| * |nodes|).
std::vector<double> hopf_lax(const GridField& h,
                             const std::vector<Point>& query, double t = 1.0);

struct DualLowerBound {
  double value = 0.0;   // certified: W2^2(smoothed empirical, uniform) >= value - slack
  double slack = 0.0;   // viscosity defect bound, sigma * residual_sup
  double sigma = 0.0;   // viscosity actually used
  double residual_sup = 0.0;    // certified sup |smoothed residual| / sqrt(n)
  double g_integral = 0.0;      // second dual potential integrated against uniform
  double dirichlet_term = 0.0;  // int |grad f|^2 / n, exact by Parseval
  double eta = 0.0;             // concentration threshold the trial ran under
};

// Dual pair built from the smoothed residual: f = -(Poisson potential)/sqrt(n),
// g = viscous inf-convolution of -f. The viscosity is halved geometrically
// from 0.1 until it reaches sigma_floor (never past the underflow guard
// osc/700). Throws EventViolation when the certified sup of the smoothed
// residual exceeds eta, or when no certificate lattice within the cap can
// settle that question; callers treat either as a flagged trial, not an
// error.
DualLowerBound dual_lower_bound(const SpectralCoefficients& r_smooth,
                                std::size_t n, double t, double sigma_floor,
                                double eta);

}  // namespace matchlab
