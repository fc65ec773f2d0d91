#include "matchlab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "matchlab/errors.hpp"

namespace matchlab {

std::vector<double> grid_coords(int per_axis) {
  if (per_axis < 1) throw std::invalid_argument("grid_coords: per_axis < 1");
  std::vector<double> xs(static_cast<std::size_t>(per_axis));
  for (int i = 0; i < per_axis; ++i)
    xs[static_cast<std::size_t>(i)] = (i + 0.5) / per_axis;
  return xs;
}

SpectralCoefficients residual_coefficients(
    const EmpiricalSample& sample, std::shared_ptr<const SpectralBasis> basis) {
  if (!basis) throw std::invalid_argument("residual_coefficients: null basis");
  if (!(sample.dom == basis->dom))
    throw std::invalid_argument("residual_coefficients: domain mismatch");
  if (sample.points.empty())
    throw std::invalid_argument("residual_coefficients: empty sample");
  SpectralCoefficients out;
  out.basis = basis;
  out.kind = CoeffKind::MeasureResidual;
  out.values.assign(static_cast<std::size_t>(basis->mode_count()), 0.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(sample.points.size()));
  for (const Point& p : sample.points)
    accumulate_point_modes(*basis, p, scale, out.values);
  // The mean of every nonconstant mode is zero, so the centering term only
  // touches the constant coefficient; it vanishes identically.
  out.values[0] = 0.0;
  return out;
}

SpectralCoefficients heat_smooth(const SpectralCoefficients& r, double t) {
  if (!r.basis) throw std::invalid_argument("heat_smooth: null basis");
  if (r.kind == CoeffKind::Potential)
    throw std::invalid_argument("heat_smooth: potentials are not smoothed");
  if (t < 0.0) throw std::invalid_argument("heat_smooth: t < 0");
  SpectralCoefficients out = r;
  out.kind = CoeffKind::SmoothedResidual;
  for (std::size_t m = 0; m < out.values.size(); ++m)
    out.values[m] *= std::exp(r.basis->lambda[m] * t);
  return out;
}

GridField synthesize(const SpectralCoefficients& coeffs, int per_axis) {
  if (!coeffs.basis) throw std::invalid_argument("synthesize: null basis");
  GridField f{coeffs.basis->dom, per_axis, {}};
  f.values = synthesize_values(*coeffs.basis, coeffs.values, grid_coords(per_axis));
  return f;
}

SpectralCoefficients analyze(std::shared_ptr<const SpectralBasis> basis,
                             const GridField& field, CoeffKind kind) {
  if (!basis) throw std::invalid_argument("analyze: null basis");
  if (!(field.dom == basis->dom))
    throw std::invalid_argument("analyze: domain mismatch");
  SpectralCoefficients out;
  out.basis = basis;
  out.kind = kind;
  out.values = analyze_values(*basis, field.values, grid_coords(field.per_axis),
                              field.weight());
  return out;
}

GridField density_field(const SpectralCoefficients& r_smooth, std::size_t n,
                        int per_axis) {
  if (r_smooth.kind == CoeffKind::Potential)
    throw std::invalid_argument("density_field: expected a residual");
  if (n == 0) throw std::invalid_argument("density_field: n == 0");
  GridField f = synthesize(r_smooth, per_axis);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (double& v : f.values) v = 1.0 + scale * v;
  return f;
}

std::vector<double> cell_masses(const SpectralCoefficients& r_smooth,
                                std::size_t n, int k) {
  if (!r_smooth.basis) throw std::invalid_argument("cell_masses: null basis");
  if (r_smooth.kind == CoeffKind::Potential)
    throw std::invalid_argument("cell_masses: expected a residual");
  if (n == 0) throw std::invalid_argument("cell_masses: n == 0");
  const SpectralBasis& b = *r_smooth.basis;
  const std::size_t A = b.axis.size();
  const std::size_t kk = static_cast<std::size_t>(k);
  const std::vector<double> I = axis_cell_integrals(b, k);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));

  std::vector<double> mass;
  if (b.dom.dimension() == 1) {
    mass.assign(kk, 1.0 / k);
    for (std::size_t a = 0; a < A; ++a) {
      const double c = r_smooth.values[a];
      if (c == 0.0) continue;
      for (std::size_t j = 0; j < kk; ++j) mass[j] += scale * c * I[a * kk + j];
    }
  } else {
    // tmp[a0][c1] = sum_{a1} coeff[a0][a1] * I[a1][c1], then contract a0.
    std::vector<double> tmp(A * kk, 0.0);
    for (std::size_t a0 = 0; a0 < A; ++a0)
      for (std::size_t a1 = 0; a1 < A; ++a1) {
        const double c = r_smooth.values[a0 * A + a1];
        if (c == 0.0) continue;
        const double* irow = I.data() + a1 * kk;
        double* trow = tmp.data() + a0 * kk;
        for (std::size_t j = 0; j < kk; ++j) trow[j] += c * irow[j];
      }
    mass.assign(kk * kk, 1.0 / (static_cast<double>(k) * k));
    for (std::size_t a0 = 0; a0 < A; ++a0) {
      const double* irow = I.data() + a0 * kk;
      const double* trow = tmp.data() + a0 * kk;
      for (std::size_t c0 = 0; c0 < kk; ++c0) {
        if (irow[c0] == 0.0) continue;
        double* mrow = mass.data() + c0 * kk;
        const double f0 = scale * irow[c0];
        for (std::size_t c1 = 0; c1 < kk; ++c1) mrow[c1] += f0 * trow[c1];
      }
    }
  }
  for (double m : mass)
    if (!(m > 0.0))
      throw NumericError("cell_masses: nonpositive cell mass " +
                         std::to_string(m));
  return mass;
}

SpectralCoefficients poisson_solve(const SpectralCoefficients& rhs) {
  if (!rhs.basis) throw std::invalid_argument("poisson_solve: null basis");
  if (rhs.kind == CoeffKind::Potential)
    throw std::invalid_argument("poisson_solve: rhs is already a potential");
  if (std::fabs(rhs.values[0]) > 1e-12)
    throw NumericError(
        "poisson_solve: nonzero mean on the right-hand side (constant mode " +
        std::to_string(rhs.values[0]) + ")");
  SpectralCoefficients out = rhs;
  out.kind = CoeffKind::Potential;
  out.values[0] = 0.0;
  for (std::size_t m = 1; m < out.values.size(); ++m)
    out.values[m] /= rhs.basis->lambda[m];
  return out;
}

double dirichlet_energy(const SpectralCoefficients& f) {
  if (!f.basis) throw std::invalid_argument("dirichlet_energy: null basis");
  double acc = 0.0;
  for (std::size_t m = 0; m < f.values.size(); ++m)
    acc += (-f.basis->lambda[m]) * f.values[m] * f.values[m];
  return acc;
}

GradientField gradient_field(const SpectralCoefficients& f, int per_axis) {
  if (!f.basis) throw std::invalid_argument("gradient_field: null basis");
  const int d = f.basis->dom.dimension();
  const std::vector<double> xs = grid_coords(per_axis);
  GradientField g;
  for (int axis = 0; axis < d; ++axis) {
    GridField comp{f.basis->dom, per_axis,
                   synthesize_partial(*f.basis, f.values, xs, axis)};
    g.component.push_back(std::move(comp));
  }
  const double w = g.component[0].weight();
  for (std::size_t i = 0; i < g.component[0].values.size(); ++i) {
    double sq = 0.0;
    for (int axis = 0; axis < d; ++axis) {
      const double v = g.component[static_cast<std::size_t>(axis)].values[i];
      sq += v * v;
    }
    g.energy_quadrature += sq * w;
    g.quartic_quadrature += sq * sq * w;
  }
  return g;
}

double log_mean(double a, double b) {
  if (a < 0.0 || b < 0.0) throw std::invalid_argument("log_mean: negative input");
  if (a == 0.0 || b == 0.0) return 0.0;
  if (a == b) return a;
  const double s = a + b;
  if (std::fabs(a - b) < 1e-8 * s) {
    // M = ((a+b)/2) * r/atanh(r) with r = (a-b)/(a+b); expand in r^2.
    const double r = (a - b) / s;
    const double r2 = r * r;
    return 0.5 * s *
           (1.0 - r2 * (1.0 / 3.0 + r2 * (4.0 / 45.0 + r2 * (44.0 / 945.0))));
  }
  // log1p form keeps the quotient accurate when a/b is near 1 but outside
  // the series window.
  return (a - b) / std::log1p((a - b) / b);
}

DmBound dm_upper_bound(const GridField& u0, const SpectralCoefficients& f) {
  if (!f.basis) throw std::invalid_argument("dm_upper_bound: null basis");
  if (f.kind != CoeffKind::Potential)
    throw std::invalid_argument("dm_upper_bound: f must be a potential");
  if (!(u0.dom == f.basis->dom))
    throw std::invalid_argument("dm_upper_bound: domain mismatch");

  DmBound out;
  out.min_density = *std::min_element(u0.values.begin(), u0.values.end());
  if (out.min_density < -1e-9)
    throw NumericError("dm_upper_bound: density " +
                       std::to_string(out.min_density) +
                       " below the truncation noise floor");

  // Check that f actually solves Delta f = 1 - u0 on this grid.
  SpectralCoefficients lap = f;
  lap.kind = CoeffKind::SmoothedResidual;
  for (std::size_t m = 0; m < lap.values.size(); ++m)
    lap.values[m] *= f.basis->lambda[m];
  const GridField lap_grid = synthesize(lap, u0.per_axis);
  for (std::size_t i = 0; i < u0.values.size(); ++i)
    out.residual_error = std::max(
        out.residual_error,
        std::fabs(lap_grid.values[i] - (1.0 - u0.values[i])));
  if (out.residual_error > 1e-7)
    throw NumericError("dm_upper_bound: Delta f misses 1 - u0 by " +
                       std::to_string(out.residual_error));

  const GradientField grad = gradient_field(f, u0.per_axis);
  const double w = u0.weight();
  const int d = u0.dom.dimension();
  for (std::size_t i = 0; i < u0.values.size(); ++i) {
    double sq = 0.0;
    for (int axis = 0; axis < d; ++axis) {
      const double v = grad.component[static_cast<std::size_t>(axis)].values[i];
      sq += v * v;
    }
    double u = u0.values[i];
    if (u < 0.0) {
      out.clamped_mass += -u * w;
      u = 0.0;
    }
    const double m = log_mean(u, 1.0);
    if (m == 0.0) {
      if (sq > 0.0) {
        out.value = std::numeric_limits<double>::infinity();
        return out;
      }
      continue;
    }
    out.value += sq / m * w;
  }
  return out;
}

double log_mean_integral(const GridField& u, double c) {
  if (c < 0.0 || c > 1.0)
    throw std::invalid_argument("log_mean_integral: c outside [0, 1]");
  const double w = u.weight();
  double acc = 0.0;
  for (double v : u.values) {
    double mixed = (1.0 - c) * v + c;
    if (mixed < 0.0) {
      if (mixed < -1e-9)
        throw NumericError("log_mean_integral: mixed density " +
                           std::to_string(mixed) + " negative");
      mixed = 0.0;
    }
    const double m = log_mean(mixed, 1.0);
    if (m == 0.0)
      throw NumericError("log_mean_integral: vanishing logarithmic mean");
    const double dev = 1.0 / m - 1.0;
    acc += dev * dev * w;
  }
  return acc;
}

SupResidual sup_residual(const SpectralCoefficients& r_smooth, std::size_t n,
                         double t, double c_ge, double slack_budget) {
  if (r_smooth.kind != CoeffKind::SmoothedResidual)
    throw std::invalid_argument("sup_residual: expected a smoothed residual");
  if (!(t > 0.0)) throw std::invalid_argument("sup_residual: t <= 0");
  if (!(c_ge > 0.0)) throw std::invalid_argument("sup_residual: c_ge <= 0");
  if (!(slack_budget > 0.0))
    throw std::invalid_argument("sup_residual: slack budget <= 0");
  if (n == 0) throw std::invalid_argument("sup_residual: n == 0");
  const int d = r_smooth.basis->dom.dimension();
  const double lip = 2.0 * c_ge / std::pow(t, (d + 1) / 2.0);
  const double root_d = std::sqrt(static_cast<double>(d));
  // Size the lattice in floating point first; casting an overflowing value
  // to int would wrap and silently skip the cap check.
  const double needed = std::ceil(lip * root_d / (2.0 * slack_budget));
  const double axis_f = std::max(
      {needed, static_cast<double>(2 * r_smooth.basis->cutoff + 1), 8.0});
  if (!(axis_f <= 4096.0))
    throw GridError("sup_residual: certificate needs " + std::to_string(axis_f) +
                    " nodes per axis, above the 4096 cap");
  const int per_axis = static_cast<int>(axis_f);
  SupResidual out;
  out.per_axis = per_axis;
  out.slack = lip * root_d / (2.0 * per_axis);
  const GridField r = synthesize(r_smooth, per_axis);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (double v : r.values)
    out.value = std::max(out.value, std::fabs(v) * scale);
  return out;
}

}  // namespace matchlab
