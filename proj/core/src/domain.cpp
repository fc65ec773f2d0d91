#include "matchlab/domain.hpp"

#include <cmath>
#include <stdexcept>

#include "matchlab/errors.hpp"

namespace matchlab {

namespace {
constexpr double kPi = 3.14159265358979323846;

double axis_gap(double a, double b, bool wrap) {
  double d = std::fabs(a - b);
  if (wrap) d = std::min(d, 1.0 - d);
  return d;
}
}  // namespace

double DomainGeometry::diameter() const {
  switch (kind_) {
    case DomainKind::Interval: return 1.0;
    case DomainKind::Square:   return std::sqrt(2.0);
    case DomainKind::Circle:   return 0.5;
    case DomainKind::Torus2:   return std::sqrt(2.0) / 2.0;
  }
  throw std::logic_error("unreachable");
}

SemigroupConstants DomainGeometry::declared_constants() const {
  // c_sg is the exact spectral gap. The contraction/regularity envelopes
  // c_uc, c_ge, c_dr are small-time asymptotics of the flat-space kernel
  // (with reflection doubling on boundary domains) padded by a factor 1.5;
  // the measured values in the spectral layer stay below these on a (t,x,y)
  // sweep, which is checked by tests.
  SemigroupConstants c;
  switch (kind_) {
    case DomainKind::Interval:
      c = {kPi * kPi, 0.85, 0.64, 2.5, 1.0};
      break;
    case DomainKind::Circle:
      c = {4.0 * kPi * kPi, 0.43, 0.32, 2.5, 1.0};
      break;
    case DomainKind::Square:
      c = {kPi * kPi, 0.48, 0.41, 5.0, 2.0};
      break;
    case DomainKind::Torus2:
      c = {4.0 * kPi * kPi, 0.12, 0.11, 5.0, 2.0};
      break;
  }
  return c;
}

double distance(const DomainGeometry& dom, const Point& a, const Point& b) {
  const bool wrap = dom.periodic();
  double sq = 0.0;
  for (int i = 0; i < dom.dimension(); ++i) {
    const double d = axis_gap(a[i], b[i], wrap);
    sq += d * d;
  }
  return std::sqrt(sq);
}

std::array<double, 2> displacement(const DomainGeometry& dom, const Point& a,
                                   const Point& b) {
  std::array<double, 2> out{0.0, 0.0};
  const bool wrap = dom.periodic();
  for (int i = 0; i < dom.dimension(); ++i) {
    double d = b[i] - a[i];
    if (wrap) {
      // Shift into (-1/2, 1/2].
      d -= std::floor(d + 0.5);
      if (d == -0.5) d = 0.5;
    }
    out[static_cast<std::size_t>(i)] = d;
  }
  return out;
}

QuadratureGrid quadrature_grid(const DomainGeometry& dom, int per_axis) {
  if (per_axis < 1) throw std::invalid_argument("quadrature_grid: per_axis < 1");
  QuadratureGrid g{dom, per_axis, {}, 0.0};
  const int d = dom.dimension();
  const double h = 1.0 / per_axis;
  if (d == 1) {
    g.nodes.reserve(static_cast<std::size_t>(per_axis));
    for (int i = 0; i < per_axis; ++i) g.nodes.push_back({{(i + 0.5) * h, 0.0}});
  } else {
    g.nodes.reserve(static_cast<std::size_t>(per_axis) * per_axis);
    for (int i = 0; i < per_axis; ++i)
      for (int j = 0; j < per_axis; ++j)
        g.nodes.push_back({{(i + 0.5) * h, (j + 0.5) * h}});
  }
  g.weight = 1.0 / static_cast<double>(g.nodes.size());
  return g;
}

std::vector<Point> covering_net(const DomainGeometry& dom, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("covering_net: delta <= 0");
  const int d = dom.dimension();
  // A midpoint grid with m nodes per axis leaves every point within
  // sqrt(d)/(2m) of a node, on both boundary and periodic axes.
  const int m = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d)) / (2.0 * delta))));
  return quadrature_grid(dom, m).nodes;
}

std::size_t covering_number(const DomainGeometry& dom, double delta) {
  return covering_net(dom, delta).size();
}

DomainKind parse_domain_token(const std::string& token) {
  if (token == "interval") return DomainKind::Interval;
  if (token == "square") return DomainKind::Square;
  if (token == "circle") return DomainKind::Circle;
  if (token == "torus2") return DomainKind::Torus2;
  throw ConfigError("unknown domain token: '" + token +
                    "' (expected interval|square|circle|torus2)");
}

std::string domain_token(DomainKind kind) {
  switch (kind) {
    case DomainKind::Interval: return "interval";
    case DomainKind::Square:   return "square";
    case DomainKind::Circle:   return "circle";
    case DomainKind::Torus2:   return "torus2";
  }
  throw std::logic_error("unreachable");
}

}  // namespace matchlab
