#include "matchlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "matchlab/errors.hpp"

namespace matchlab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kMaxModes = 1 << 24;

// Axis-mode count with per-axis frequency at most j.
int axis_modes_upto(const DomainGeometry& dom, int j) {
  if (j < 0) return 0;
  return dom.periodic() ? 2 * j + 1 : j + 1;
}

// Number of full modes whose largest per-axis frequency is exactly j.
double modes_on_shell(const DomainGeometry& dom, int j) {
  const double s1 = axis_modes_upto(dom, j);
  const double s0 = axis_modes_upto(dom, j - 1);
  if (dom.dimension() == 1) return s1 - s0;
  return s1 * s1 - s0 * s0;
}

// Upper estimate for the contribution of all omitted modes (per-axis
// frequency beyond the cutoff) to an eigen-sum whose terms are bounded by
// amp * e^{-omega^2 j^2 time} on shell j. Returns +inf if it fails to
// certify convergence within the iteration budget.
double omitted_tail(const DomainGeometry& dom, int cutoff, double omega,
                    double time, double amp) {
  double tail = 0.0;
  const double rate = omega * omega * time;
  for (int j = cutoff + 1; j < cutoff + 2000000; ++j) {
    const double term =
        amp * modes_on_shell(dom, j) * std::exp(-rate * double(j) * double(j));
    tail += term;
    if (term < 1e-18 && j > cutoff + 4) return tail;
  }
  return std::numeric_limits<double>::infinity();
}

double trigamma(double x) {
  double acc = 0.0;
  while (x < 10.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Asymptotic series; error below 1e-13 once x >= 10.
  double s = inv + 0.5 * inv2 +
             inv * inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 / 42.0));
  return acc + s;
}

}  // namespace

SpectralBasis build_basis(const DomainGeometry& dom, int cutoff) {
  if (cutoff < 1) throw std::invalid_argument("build_basis: cutoff < 1");
  SpectralBasis b{dom, cutoff, dom.periodic() ? 2.0 * kPi : kPi, {}, {}};

  b.axis.push_back({0, AxisFn::One});
  for (int k = 1; k <= cutoff; ++k) {
    b.axis.push_back({k, AxisFn::Cos});
    if (dom.periodic()) b.axis.push_back({k, AxisFn::Sin});
  }

  const int a_count = b.axis_count();
  const double w2 = b.omega * b.omega;
  if (dom.dimension() == 1) {
    b.lambda.resize(static_cast<std::size_t>(a_count));
    for (int a = 0; a < a_count; ++a) {
      const double k = b.axis[static_cast<std::size_t>(a)].k;
      b.lambda[static_cast<std::size_t>(a)] = -w2 * k * k;
    }
  } else {
    if (static_cast<long long>(a_count) * a_count > kMaxModes)
      throw CutoffError("build_basis: mode count over budget at cutoff " +
                        std::to_string(cutoff));
    b.lambda.resize(static_cast<std::size_t>(a_count) * a_count);
    for (int a0 = 0; a0 < a_count; ++a0) {
      const double k0 = b.axis[static_cast<std::size_t>(a0)].k;
      for (int a1 = 0; a1 < a_count; ++a1) {
        const double k1 = b.axis[static_cast<std::size_t>(a1)].k;
        b.lambda[static_cast<std::size_t>(a0 * a_count + a1)] =
            -w2 * (k0 * k0 + k1 * k1);
      }
    }
  }
  return b;
}

int required_cutoff(const DomainGeometry& dom, double t, double tol) {
  if (!(t > 0.0)) throw std::invalid_argument("required_cutoff: t <= 0");
  const double omega = dom.periodic() ? 2.0 * kPi : kPi;
  const double amp = dom.dimension() == 1 ? 2.0 : 4.0;
  int hi = 2;
  while (omitted_tail(dom, hi, omega, t, amp) >= tol) {
    hi *= 2;
    if (hi > (1 << 15))
      throw CutoffError("required_cutoff: no admissible cutoff below 32768");
  }
  int lo = std::max(1, hi / 2);
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (omitted_tail(dom, mid, omega, t, amp) < tol)
      hi = mid;
    else
      lo = mid + 1;
  }
  return hi;
}

std::vector<double> axis_values(const SpectralBasis& b,
                                const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  const std::size_t a_count = b.axis.size();
  const double sq2 = std::sqrt(2.0);
  std::vector<double> table(a_count * n);
  // cos/sin of k*omega*x by the angle-addition recurrence: one trig pair per
  // point instead of one per (mode, point). Drift is ~cutoff ulps, far below
  // the quadrature tolerances used downstream (verified against direct
  // evaluation in the tests).
  std::vector<double> ck(n), sk(n), c1(n), s1(n);
  for (std::size_t i = 0; i < n; ++i) {
    c1[i] = std::cos(b.omega * xs[i]);
    s1[i] = std::sin(b.omega * xs[i]);
    ck[i] = 1.0;
    sk[i] = 0.0;
  }
  int current_k = 0;
  for (std::size_t a = 0; a < a_count; ++a) {
    const AxisMode am = b.axis[a];
    while (current_k < am.k) {
      for (std::size_t i = 0; i < n; ++i) {
        const double c = ck[i] * c1[i] - sk[i] * s1[i];
        const double s = sk[i] * c1[i] + ck[i] * s1[i];
        ck[i] = c;
        sk[i] = s;
      }
      ++current_k;
    }
    double* row = table.data() + a * n;
    switch (am.fn) {
      case AxisFn::One:
        std::fill(row, row + n, 1.0);
        break;
      case AxisFn::Cos:
        for (std::size_t i = 0; i < n; ++i) row[i] = sq2 * ck[i];
        break;
      case AxisFn::Sin:
        for (std::size_t i = 0; i < n; ++i) row[i] = sq2 * sk[i];
        break;
    }
  }
  return table;
}

std::vector<double> axis_derivs(const SpectralBasis& b,
                                const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  const std::size_t a_count = b.axis.size();
  std::vector<double> table = axis_values(b, xs);
  // d/dx [sqrt2 cos(wkx)] = -wk * sqrt2 sin(wkx) and vice versa, so the
  // derivative table is a swap of rows with frequency factors.
  std::vector<double> out(a_count * n, 0.0);
  for (std::size_t a = 0; a < a_count; ++a) {
    const AxisMode am = b.axis[a];
    if (am.fn == AxisFn::One) continue;
    const double wk = b.omega * am.k;
    // Locate the partner row (Sin for Cos and vice versa). On boundary
    // domains there is no stored Sin row, so rebuild it from the recurrence
    // values implicitly: partner of Cos(k) sits at the same k.
    if (am.fn == AxisFn::Cos) {
      if (b.dom.periodic()) {
        const double* sin_row = table.data() + (a + 1) * n;
        double* row = out.data() + a * n;
        for (std::size_t i = 0; i < n; ++i) row[i] = -wk * sin_row[i];
      } else {
        // Neumann basis: derivative needs sin(pi k x), not represented in
        // the table; compute directly (cold path, boundary domains only).
        double* row = out.data() + a * n;
        const double sq2 = std::sqrt(2.0);
        for (std::size_t i = 0; i < n; ++i)
          row[i] = -wk * sq2 * std::sin(b.omega * am.k * xs[i]);
      }
    } else {  // Sin
      const double* cos_row = table.data() + (a - 1) * n;
      double* row = out.data() + a * n;
      for (std::size_t i = 0; i < n; ++i) row[i] = wk * cos_row[i];
    }
  }
  return out;
}

std::vector<double> axis_cell_integrals(const SpectralBasis& b, int k) {
  if (k < 1) throw std::invalid_argument("axis_cell_integrals: k < 1");
  const std::size_t a_count = b.axis.size();
  const std::size_t kk = static_cast<std::size_t>(k);
  const double sq2 = std::sqrt(2.0);
  std::vector<double> out(a_count * kk);
  for (std::size_t a = 0; a < a_count; ++a) {
    const AxisMode am = b.axis[a];
    double* row = out.data() + a * kk;
    if (am.fn == AxisFn::One) {
      for (std::size_t c = 0; c < kk; ++c) row[c] = 1.0 / k;
      continue;
    }
    const double wk = b.omega * am.k;
    for (std::size_t c = 0; c < kk; ++c) {
      const double lo = static_cast<double>(c) / k;
      const double hi = static_cast<double>(c + 1) / k;
      row[c] = am.fn == AxisFn::Cos
                   ? sq2 * (std::sin(wk * hi) - std::sin(wk * lo)) / wk
                   : -sq2 * (std::cos(wk * hi) - std::cos(wk * lo)) / wk;
    }
  }
  return out;
}

namespace {

// out[i][j] = sum_{a0,a1} C[a0][a1] T0[a0][i] T1[a1][j], the shared core of
// synthesis in two dimensions.
std::vector<double> sandwich(const std::vector<double>& coeffs, int a_count,
                             const std::vector<double>& t0,
                             const std::vector<double>& t1, std::size_t n) {
  std::vector<double> tmp(static_cast<std::size_t>(a_count) * n, 0.0);
  for (int a0 = 0; a0 < a_count; ++a0) {
    double* trow = tmp.data() + static_cast<std::size_t>(a0) * n;
    for (int a1 = 0; a1 < a_count; ++a1) {
      const double c = coeffs[static_cast<std::size_t>(a0 * a_count + a1)];
      if (c == 0.0) continue;
      const double* vrow = t1.data() + static_cast<std::size_t>(a1) * n;
      for (std::size_t j = 0; j < n; ++j) trow[j] += c * vrow[j];
    }
  }
  std::vector<double> out(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double* orow = out.data() + i * n;
    for (int a0 = 0; a0 < a_count; ++a0) {
      const double v = t0[static_cast<std::size_t>(a0) * n + i];
      if (v == 0.0) continue;
      const double* trow = tmp.data() + static_cast<std::size_t>(a0) * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += v * trow[j];
    }
  }
  return out;
}

}  // namespace

std::vector<double> synthesize_values(const SpectralBasis& b,
                                      const std::vector<double>& coeffs,
                                      const std::vector<double>& xs) {
  if (coeffs.size() != static_cast<std::size_t>(b.mode_count()))
    throw std::invalid_argument("synthesize_values: coefficient size mismatch");
  const std::size_t n = xs.size();
  const std::vector<double> table = axis_values(b, xs);
  if (b.dom.dimension() == 1) {
    std::vector<double> out(n, 0.0);
    for (int a = 0; a < b.axis_count(); ++a) {
      const double c = coeffs[static_cast<std::size_t>(a)];
      if (c == 0.0) continue;
      const double* row = table.data() + static_cast<std::size_t>(a) * n;
      for (std::size_t i = 0; i < n; ++i) out[i] += c * row[i];
    }
    return out;
  }
  return sandwich(coeffs, b.axis_count(), table, table, n);
}

std::vector<double> synthesize_partial(const SpectralBasis& b,
                                       const std::vector<double>& coeffs,
                                       const std::vector<double>& xs,
                                       int axis) {
  if (coeffs.size() != static_cast<std::size_t>(b.mode_count()))
    throw std::invalid_argument("synthesize_partial: coefficient size mismatch");
  if (axis < 0 || axis >= b.dom.dimension())
    throw std::invalid_argument("synthesize_partial: bad axis");
  const std::size_t n = xs.size();
  const std::vector<double> vals = axis_values(b, xs);
  const std::vector<double> ders = axis_derivs(b, xs);
  if (b.dom.dimension() == 1) {
    std::vector<double> out(n, 0.0);
    for (int a = 0; a < b.axis_count(); ++a) {
      const double c = coeffs[static_cast<std::size_t>(a)];
      if (c == 0.0) continue;
      const double* row = ders.data() + static_cast<std::size_t>(a) * n;
      for (std::size_t i = 0; i < n; ++i) out[i] += c * row[i];
    }
    return out;
  }
  return axis == 0 ? sandwich(coeffs, b.axis_count(), ders, vals, n)
                   : sandwich(coeffs, b.axis_count(), vals, ders, n);
}

std::vector<double> analyze_values(const SpectralBasis& b,
                                   const std::vector<double>& values,
                                   const std::vector<double>& xs,
                                   double weight) {
  const std::size_t n = xs.size();
  const int a_count = b.axis_count();
  const std::vector<double> table = axis_values(b, xs);
  if (b.dom.dimension() == 1) {
    if (values.size() != n)
      throw std::invalid_argument("analyze_values: size mismatch");
    std::vector<double> coeffs(static_cast<std::size_t>(a_count), 0.0);
    for (int a = 0; a < a_count; ++a) {
      const double* row = table.data() + static_cast<std::size_t>(a) * n;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += row[i] * values[i];
      coeffs[static_cast<std::size_t>(a)] = acc * weight;
    }
    return coeffs;
  }
  if (values.size() != n * n)
    throw std::invalid_argument("analyze_values: size mismatch");
  // tmp[a0][j] = sum_i T[a0][i] G[i][j]
  std::vector<double> tmp(static_cast<std::size_t>(a_count) * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* grow = values.data() + i * n;
    for (int a0 = 0; a0 < a_count; ++a0) {
      const double v = table[static_cast<std::size_t>(a0) * n + i];
      if (v == 0.0) continue;
      double* trow = tmp.data() + static_cast<std::size_t>(a0) * n;
      for (std::size_t j = 0; j < n; ++j) trow[j] += v * grow[j];
    }
  }
  std::vector<double> coeffs(static_cast<std::size_t>(a_count) * a_count, 0.0);
  for (int a0 = 0; a0 < a_count; ++a0) {
    const double* trow = tmp.data() + static_cast<std::size_t>(a0) * n;
    for (int a1 = 0; a1 < a_count; ++a1) {
      const double* vrow = table.data() + static_cast<std::size_t>(a1) * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += trow[j] * vrow[j];
      coeffs[static_cast<std::size_t>(a0 * a_count + a1)] = acc * weight;
    }
  }
  return coeffs;
}

void accumulate_point_modes(const SpectralBasis& b, const Point& p,
                            double scale, std::vector<double>& acc) {
  if (acc.size() != static_cast<std::size_t>(b.mode_count()))
    throw std::invalid_argument("accumulate_point_modes: size mismatch");
  const int a_count = b.axis_count();
  const std::vector<double> v0 = axis_values(b, {p[0]});
  if (b.dom.dimension() == 1) {
    for (int a = 0; a < a_count; ++a)
      acc[static_cast<std::size_t>(a)] += scale * v0[static_cast<std::size_t>(a)];
    return;
  }
  const std::vector<double> v1 = axis_values(b, {p[1]});
  for (int a0 = 0; a0 < a_count; ++a0) {
    const double f = scale * v0[static_cast<std::size_t>(a0)];
    if (f == 0.0) continue;
    double* row = acc.data() + static_cast<std::size_t>(a0) * a_count;
    for (int a1 = 0; a1 < a_count; ++a1)
      row[a1] += f * v1[static_cast<std::size_t>(a1)];
  }
}

double eval_at_point(const SpectralBasis& b, const std::vector<double>& coeffs,
                     const Point& p) {
  if (coeffs.size() != static_cast<std::size_t>(b.mode_count()))
    throw std::invalid_argument("eval_at_point: size mismatch");
  const int a_count = b.axis_count();
  const std::vector<double> v0 = axis_values(b, {p[0]});
  if (b.dom.dimension() == 1) {
    double acc = 0.0;
    for (int a = 0; a < a_count; ++a)
      acc += coeffs[static_cast<std::size_t>(a)] * v0[static_cast<std::size_t>(a)];
    return acc;
  }
  const std::vector<double> v1 = axis_values(b, {p[1]});
  double acc = 0.0;
  for (int a0 = 0; a0 < a_count; ++a0) {
    const double f = v0[static_cast<std::size_t>(a0)];
    const double* row = coeffs.data() + static_cast<std::size_t>(a0) * a_count;
    double inner = 0.0;
    for (int a1 = 0; a1 < a_count; ++a1)
      inner += row[a1] * v1[static_cast<std::size_t>(a1)];
    acc += f * inner;
  }
  return acc;
}

namespace {

void require_tail(const SpectralBasis& b, double time, double amp,
                  const char* who) {
  const double tail = omitted_tail(b.dom, b.cutoff, b.omega, time, amp);
  if (!(tail < 1e-12))
    throw CutoffError(std::string(who) + ": truncation tail " +
                      std::to_string(tail) + " above 1e-12 at cutoff " +
                      std::to_string(b.cutoff));
}

}  // namespace

double heat_kernel(const SpectralBasis& b, double t, const Point& x,
                   const Point& y) {
  if (!(t > 0.0)) throw std::invalid_argument("heat_kernel: t <= 0");
  require_tail(b, t, b.dom.dimension() == 1 ? 2.0 : 4.0, "heat_kernel");
  // The kernel factorizes across axes on every supported domain.
  const double w2 = b.omega * b.omega;
  double prod = 1.0;
  for (int axis = 0; axis < b.dom.dimension(); ++axis) {
    const std::vector<double> vx = axis_values(b, {x[axis]});
    const std::vector<double> vy = axis_values(b, {y[axis]});
    double acc = 0.0;
    for (int a = 0; a < b.axis_count(); ++a) {
      const double k = b.axis[static_cast<std::size_t>(a)].k;
      acc += std::exp(-w2 * k * k * t) * vx[static_cast<std::size_t>(a)] *
             vy[static_cast<std::size_t>(a)];
    }
    prod *= acc;
  }
  return prod;
}

double heat_trace(const SpectralBasis& b, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("heat_trace: s <= 0");
  require_tail(b, s, 1.0, "heat_trace");
  const double w2 = b.omega * b.omega;
  double axis_sum = 0.0;
  for (int a = 0; a < b.axis_count(); ++a) {
    const double k = b.axis[static_cast<std::size_t>(a)].k;
    axis_sum += std::exp(-w2 * k * k * s);
  }
  return b.dom.dimension() == 1 ? axis_sum : axis_sum * axis_sum;
}

double energy_curve(const SpectralBasis& b, double t) {
  if (t < 0.0) throw std::invalid_argument("energy_curve: t < 0");
  if (b.dom.dimension() == 2 && t == 0.0)
    throw NumericError("energy_curve: diverges at t = 0 in two dimensions");
  double acc = 0.0;
  const std::size_t m = b.lambda.size();
  for (std::size_t i = 0; i < m; ++i) {
    const double lam = b.lambda[i];
    if (lam == 0.0) continue;
    acc += std::exp(2.0 * t * lam) / (-lam);
  }
  if (b.dom.dimension() == 1) {
    // Omitted frequencies j > cutoff contribute mult * e^{2 lambda t}/|lambda|
    // with |lambda| = w2 j^2; resolve the tail exactly enough that the t = 0
    // values are trustworthy at tolerance 1e-5 and far better.
    const double w2 = b.omega * b.omega;
    const double mult = b.dom.periodic() ? 2.0 : 1.0;
    const double k1 = b.cutoff + 1;
    if (2.0 * w2 * k1 * k1 * t < 1e-8) {
      acc += mult / w2 * trigamma(k1);
    } else {
      for (int j = b.cutoff + 1;; ++j) {
        const double lam = w2 * double(j) * double(j);
        const double term = mult * std::exp(-2.0 * t * lam) / lam;
        acc += term;
        if (term < 1e-25) break;
      }
    }
  }
  return acc;
}

SemigroupConstants measure_semigroup_constants(const SpectralBasis& b,
                                               const std::vector<double>& t_grid,
                                               int grid_size) {
  if (t_grid.empty())
    throw std::invalid_argument("measure_semigroup_constants: empty t grid");
  for (double t : t_grid)
    if (!(t > 0.0))
      throw std::invalid_argument("measure_semigroup_constants: t <= 0");
  if (grid_size < 8)
    throw std::invalid_argument("measure_semigroup_constants: grid too small");

  SemigroupConstants out = b.dom.declared_constants();
  const int d = b.dom.dimension();

  // Evaluation coordinates: inclusive lattice so boundary extremes are seen
  // (that is where |p_t - 1| and the kernel gradient peak on Neumann
  // domains), plus the midpoint lattice for the dispersion integral.
  std::vector<double> sup_xs(static_cast<std::size_t>(grid_size) + 1);
  for (int i = 0; i <= grid_size; ++i)
    sup_xs[static_cast<std::size_t>(i)] = double(i) / grid_size;
  const QuadratureGrid mid = quadrature_grid(b.dom, grid_size);
  std::vector<double> mid_xs(static_cast<std::size_t>(grid_size));
  for (int i = 0; i < grid_size; ++i)
    mid_xs[static_cast<std::size_t>(i)] = (i + 0.5) / grid_size;

  // Kernel centers: periodic kernels are translation invariant, one center
  // suffices; boundary domains need a sweep including near-boundary points.
  std::vector<Point> centers;
  if (b.dom.periodic()) {
    centers.push_back({{0.5, 0.5}});
  } else {
    const int cpts = 7;
    for (int i = 0; i < cpts; ++i) {
      const double xi = double(i) / (cpts - 1);
      if (d == 1) {
        centers.push_back({{xi, 0.0}});
      } else {
        for (int j = 0; j < cpts; ++j)
          centers.push_back({{xi, double(j) / (cpts - 1)}});
      }
    }
  }

  double uc = 0.0, ge = 0.0, dr = 0.0;
  std::vector<double> coeffs(static_cast<std::size_t>(b.mode_count()));
  for (double t : t_grid) {
    std::vector<double> decay(static_cast<std::size_t>(b.mode_count()));
    for (int m = 0; m < b.mode_count(); ++m)
      decay[static_cast<std::size_t>(m)] =
          std::exp(b.lambda[static_cast<std::size_t>(m)] * t);
    for (const Point& y : centers) {
      // p_t(., y) = sum_m e^{lambda t} u_m(y) u_m(.)
      std::fill(coeffs.begin(), coeffs.end(), 0.0);
      accumulate_point_modes(b, y, 1.0, coeffs);
      for (int m = 0; m < b.mode_count(); ++m)
        coeffs[static_cast<std::size_t>(m)] *= decay[static_cast<std::size_t>(m)];

      const std::vector<double> vals = synthesize_values(b, coeffs, sup_xs);
      double max_dev = 0.0;
      for (double v : vals) max_dev = std::max(max_dev, std::fabs(v - 1.0));
      uc = std::max(uc, max_dev * std::pow(t, d / 2.0));

      double max_grad = 0.0;
      if (d == 1) {
        const std::vector<double> g0 = synthesize_partial(b, coeffs, sup_xs, 0);
        for (double v : g0) max_grad = std::max(max_grad, std::fabs(v));
      } else {
        const std::vector<double> g0 = synthesize_partial(b, coeffs, sup_xs, 0);
        const std::vector<double> g1 = synthesize_partial(b, coeffs, sup_xs, 1);
        for (std::size_t i = 0; i < g0.size(); ++i)
          max_grad = std::max(max_grad, std::hypot(g0[i], g1[i]));
      }
      ge = std::max(ge, max_grad * std::pow(t, (d + 1) / 2.0));

      const std::vector<double> mvals = synthesize_values(b, coeffs, mid_xs);
      double disp = 0.0;
      for (std::size_t i = 0; i < mid.nodes.size(); ++i) {
        const double dist = distance(b.dom, mid.nodes[i], y);
        disp += dist * dist * mvals[i] * mid.weight;
      }
      dr = std::max(dr, disp / t);
    }
  }
  out.c_uc = uc;
  out.c_ge = ge;
  out.c_dr = dr;
  return out;
}

}  // namespace matchlab
