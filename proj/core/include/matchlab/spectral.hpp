#pragma once

#include <vector>

#include "matchlab/domain.hpp"

namespace matchlab {

// Real orthonormal Laplacian eigenbasis, resolved mode by mode.
//
// Boundary domains carry the Neumann cosine family
//     1, sqrt(2) cos(pi k x), ...            eigenvalue -pi^2 |k|^2,
// periodic domains the full trigonometric family
//     1, sqrt(2) cos(2 pi k x), sqrt(2) sin(2 pi k x),   eigenvalue -4 pi^2 |k|^2,
// tensorized over axes in two dimensions. Modes are enumerated per axis up
// to the per-axis frequency cutoff; the constant mode always sits at index 0.

enum class AxisFn { One, Cos, Sin };

struct AxisMode {
  int k = 0;
  AxisFn fn = AxisFn::One;
};

struct SpectralBasis {
  DomainGeometry dom;
  int cutoff = 0;               // largest per-axis frequency retained
  double omega = 0.0;           // pi (boundary) or 2*pi (periodic)
  std::vector<AxisMode> axis;   // per-axis mode list, shared by both axes
  std::vector<double> lambda;   // eigenvalue per full mode

  int axis_count() const { return static_cast<int>(axis.size()); }
  int mode_count() const { return static_cast<int>(lambda.size()); }

  // Full-mode index layout: m = a (1-d) or m = a0 * axis_count + a1 (2-d).
  int mode_index(int a0, int a1) const {
    return dom.dimension() == 1 ? a0 : a0 * axis_count() + a1;
  }
};

SpectralBasis build_basis(const DomainGeometry& dom, int cutoff);

// Smallest cutoff whose omitted-mode tail at heat time t stays below tol,
// per the same tail estimate heat_kernel enforces.
int required_cutoff(const DomainGeometry& dom, double t, double tol = 1e-12);

// ----- dense transforms ------------------------------------------------
// These operate on raw mode-coefficient vectors (length mode_count) and on
// tensor grids described by their per-axis coordinates. They are the only
// hot loops in the spectral layer, shared by the field and flow code.

// Values (or d/dx values) of every axis mode at the given coordinates,
// laid out as table[a * xs.size() + i].
std::vector<double> axis_values(const SpectralBasis& b,
                                const std::vector<double>& xs);
std::vector<double> axis_derivs(const SpectralBasis& b,
                                const std::vector<double>& xs);

// Exact integrals of every axis mode over the k equal cells of [0, 1],
// laid out as table[a * k + c]. Antiderivatives in closed form, so the
// result carries no quadrature error.
std::vector<double> axis_cell_integrals(const SpectralBasis& b, int k);

// Field values on the tensor grid xs (x) xs (row-major; plain xs in 1-d).
std::vector<double> synthesize_values(const SpectralBasis& b,
                                      const std::vector<double>& coeffs,
                                      const std::vector<double>& xs);
// Same but differentiated along one axis.
std::vector<double> synthesize_partial(const SpectralBasis& b,
                                       const std::vector<double>& coeffs,
                                       const std::vector<double>& xs, int axis);

// Adjoint of synthesize_values under the equal-weight inner product:
// returns per-mode quadrature pairings  sum_i values[i] * u_m(node_i) * weight.
std::vector<double> analyze_values(const SpectralBasis& b,
                                   const std::vector<double>& values,
                                   const std::vector<double>& xs,
                                   double weight);

// acc[m] += scale * u_m(p) for every mode; used to build empirical residuals.
void accumulate_point_modes(const SpectralBasis& b, const Point& p,
                            double scale, std::vector<double>& acc);

double eval_at_point(const SpectralBasis& b, const std::vector<double>& coeffs,
                     const Point& p);

// ----- spectral functionals --------------------------------------------

// p_t(x, y) by eigenexpansion. Throws CutoffError if the omitted tail at
// time t cannot be certified below 1e-12.
double heat_kernel(const SpectralBasis& b, double t, const Point& x,
                   const Point& y);

// sum_lambda e^{s lambda}, with the same tail certification.
double heat_trace(const SpectralBasis& b, double s);

// -sum_{lambda != 0} e^{2 t lambda} / lambda. In one dimension a tail
// correction for the omitted frequencies is added (trigamma-based at t = 0),
// making the t = 0 value accurate to ~1/cutoff^3. In two dimensions t = 0
// diverges logarithmically and throws NumericError.
double energy_curve(const SpectralBasis& b, double t);

// Data-driven contraction/regularity constants: scans kernels over a
// (t, x, y) lattice and returns the observed envelopes for c_uc, c_ge, c_dr
// (c_sg and c_cover are copied from the declared table). grid_size controls
// the scan resolution; the t grid must be positive and nonempty.
SemigroupConstants measure_semigroup_constants(const SpectralBasis& b,
                                               const std::vector<double>& t_grid,
                                               int grid_size = 64);

}  // namespace matchlab
