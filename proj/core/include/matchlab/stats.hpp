#pragma once

#include <cstddef>
#include <vector>

namespace matchlab {

// Centered moment functionals of a function sampled on an equal-weight
// quadrature grid. All quantities are taken relative to the grid mean:
//   m2 = int (f - mean)^2,  m4 = int (f - mean)^4,  m_inf = sup |f - mean|.
struct MomentProfile {
  double mean = 0.0;
  double m2 = 0.0;
  double m4 = 0.0;
  double m_inf = 0.0;
};

// Joint centered moments of a pair:
//   m2 = int (f - mean_f)(g - mean_g),  m4 = int (f - mean_f)^2 (g - mean_g)^2.
struct CrossMoments {
  double m2 = 0.0;
  double m4 = 0.0;
};

MomentProfile moments(const std::vector<double>& values, double weight);
CrossMoments cross_moments(const std::vector<double>& f_values,
                           const std::vector<double>& g_values, double weight);

// Centered power sums int (f - mean)^k for k = 0 .. k_max.
std::vector<double> power_moments(const std::vector<double>& values,
                                  double weight, int k_max);

// Exact moment generating function of the normalized empirical pairing
// sqrt(n) (mu_n - m) applied to f, for n independent uniform draws:
//   E exp(lambda * pairing) = (1 + sum_{k>=2} lambda^k m_k / (k! n^{k/2}))^n,
// truncated where terms drop below machine relevance, together with the
// closed-form exponential envelope
//   exp( (lambda^2 m2 / 2) * exp(|lambda| m_inf / sqrt(n)) )
// which dominates it for every lambda.
struct MgfEstimate {
  double series = 0.0;
  double upper_bound = 0.0;
  int k_used = 0;
};

MgfEstimate mgf_series(const std::vector<double>& values, double weight,
                       double lambda, std::size_t n);

// Exact low moments of the empirical pairings of a pair (f, g):
//   second = E[ pair(f) pair(g) ]                  = m2(f, g)
//   fourth = E[ pair(f)^2 pair(g)^2 ]
//          = ((n-1)/n)(m2(f) m2(g) + 2 m2(f,g)^2) + m4(f, g)/n.
struct PairingMoments {
  double second = 0.0;
  double fourth = 0.0;
};

PairingMoments covariance_identities(const std::vector<double>& f_values,
                                     const std::vector<double>& g_values,
                                     double weight, std::size_t n);

// Pairing of a single realized sample with f:
//   int f d[sqrt(n)(mu_n - m)] = sum_i f(X_i)/sqrt(n) - sqrt(n) * mean(f).
double residual_pairing(double sum_f_at_samples, std::size_t n, double mean_f);

// Concave conjugate-type rate
//   F(c, eta) = sup_{lambda > 0} [ lambda eta - (lambda^2 / 2) e^{c lambda} ],
// evaluated by bracket doubling plus golden-section search (relative
// tolerance 1e-10). F is decreasing in c, increasing in eta, and c F(c, eta)
// is increasing in c; F(0, eta) = eta^2 / 2.
double tail_rate(double c, double eta);

// Two-sided subexponential tail estimate 2 exp(-F(c2/c1, eta)/c1).
double bernstein_tail(double c1, double c2, double eta);

}  // namespace matchlab
