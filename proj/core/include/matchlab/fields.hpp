#pragma once

#include <memory>
#include <string>
#include <vector>

#include "matchlab/domain.hpp"
#include "matchlab/spectral.hpp"
#include "matchlab/stats.hpp"

namespace matchlab {

// Values on the midpoint lattice ((i+1/2)/g, (j+1/2)/g), row-major in i.
struct GridField {
  DomainGeometry dom;
  int per_axis = 0;
  std::vector<double> values;

  double weight() const { return 1.0 / static_cast<double>(values.size()); }
};

std::vector<double> grid_coords(int per_axis);

// What a coefficient vector represents; transforms check these so that a
// potential is never smoothed or a residual never fed where a potential
// belongs.
enum class CoeffKind { MeasureResidual, SmoothedResidual, Potential };

struct SpectralCoefficients {
  std::shared_ptr<const SpectralBasis> basis;
  CoeffKind kind = CoeffKind::MeasureResidual;
  std::vector<double> values;
};

struct EmpiricalSample {
  DomainGeometry dom;
  std::vector<Point> points;
};

// Mode pairings of the centered empirical fluctuation sqrt(n)(mu_n - m):
// coefficient_m = sum_i u_m(X_i) / sqrt(n), constant mode exactly 0.
SpectralCoefficients residual_coefficients(
    const EmpiricalSample& sample, std::shared_ptr<const SpectralBasis> basis);

// Heat flow for time t >= 0 acting mode-wise: c_m <- e^{lambda_m t} c_m.
SpectralCoefficients heat_smooth(const SpectralCoefficients& r, double t);

// u = 1 + r_smooth / sqrt(n) on the grid. Values may dip slightly negative
// from truncation; consumers clamp (and report) where positivity matters.
GridField density_field(const SpectralCoefficients& r_smooth, std::size_t n,
                        int per_axis);

// Exact masses of that density over the k^d cells of the midpoint grid
// (row-major, matching quadrature_grid). Closed-form integrals, so the
// masses sum to one except for rounding. NumericError on a nonpositive cell.
std::vector<double> cell_masses(const SpectralCoefficients& r_smooth,
                                std::size_t n, int k);

// Solves  Delta f = rhs  mode-wise (f_m = rhs_m / lambda_m). The constant
// mode of the right-hand side must vanish; otherwise there is no solution.
SpectralCoefficients poisson_solve(const SpectralCoefficients& rhs);

// int |grad f|^2 via Parseval: sum (-lambda_m) f_m^2. Exact for band-limited f.
double dirichlet_energy(const SpectralCoefficients& f);

// Gradient on a grid plus quadrature values of int |grad f|^2 and
// int |grad f|^4. With per_axis >= 2*cutoff (+1) the energy quadrature
// reproduces dirichlet_energy to rounding.
struct GradientField {
  std::vector<GridField> component;
  double energy_quadrature = 0.0;
  double quartic_quadrature = 0.0;
};

GradientField gradient_field(const SpectralCoefficients& f, int per_axis);

// Logarithmic mean M(a, b) = (a - b) / (log a - log b), continuously
// extended: M(a, a) = a, M(a, 0) = M(0, b) = M(0, 0) = 0. Near-equal
// arguments switch to a series in (a-b)/(a+b) to avoid cancellation.
double log_mean(double a, double b);

// Transport upper bound  int |grad f|^2 / M(u0, 1) dm  for the flux
// interpolation between densities u0 and 1, where f solves
// Delta f = 1 - u0 (checked against the grid residual). Nodes where u0 was
// clamped to zero make the bound +inf unless the local flux vanishes.
struct DmBound {
  double value = 0.0;
  double min_density = 0.0;   // before clamping
  double clamped_mass = 0.0;  // total quadrature mass clamped away
  double residual_error = 0.0;  // max | Delta f - (1 - u0) | over nodes
};

DmBound dm_upper_bound(const GridField& u0, const SpectralCoefficients& f);

// int ( 1 / M((1-c) u + c, 1) - 1 )^2 dm, the integrability control for the
// mixed density; requires c in (0, 1] so the mixed density stays positive,
// or c = 0 with strictly positive u.
double log_mean_integral(const GridField& u, double c);

// Certified uniform norm of r_smooth / sqrt(n): grid maximum plus a
// Lipschitz slack  (2 c_ge / t^{(d+1)/2}) * sqrt(d)/(2 g)  covering the gap
// between lattice and continuum. The grid is sized so the slack stays within
// the caller's budget; GridError when that would take more than 4096 nodes
// per axis.
struct SupResidual {
  double value = 0.0;  // grid max of |r|/sqrt(n)
  double slack = 0.0;  // true sup <= value + slack
  int per_axis = 0;    // resolution the certificate was computed at
};

SupResidual sup_residual(const SpectralCoefficients& r_smooth, std::size_t n,
                         double t, double c_ge, double slack_budget);

// Grid synthesis / quadrature analysis round-trip helpers.
GridField synthesize(const SpectralCoefficients& coeffs, int per_axis);
SpectralCoefficients analyze(std::shared_ptr<const SpectralBasis> basis,
                             const GridField& field, CoeffKind kind);

inline MomentProfile moments(const GridField& f) {
  return moments(f.values, f.weight());
}

}  // namespace matchlab
