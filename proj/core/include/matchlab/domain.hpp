#pragma once

#include <array>
#include <string>
#include <vector>

namespace matchlab {

// The four model geometries. All live on the unit fundamental cell
// [0,1)^d with either reflecting boundary (Interval, Square) or periodic
// identification (Circle, Torus2). Curvature is zero everywhere, which the
// downstream semigroup estimates rely on.
enum class DomainKind { Interval, Square, Circle, Torus2 };

struct Point {
  std::array<double, 2> c{0.0, 0.0};
  double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
};

// Constants of the heat semigroup on a given domain:
//   c_sg     L2 contraction rate of the mean-zero part, equals |lambda_1|
//   c_uc     sup |p_t(x,y) - 1| <= c_uc * t^{-d/2}
//   c_ge     Lip(p_t(x, .))    <= c_ge * t^{-(d+1)/2}
//   c_dr     int d(x,y)^2 p_t(x,y) dm(y) <= c_dr * t
//   c_cover  covering numbers obey N(delta) <= max(1, c_cover * delta^-d)
// The values declared by DomainGeometry::declared_constants() are analytic
// envelopes with margin; measured counterparts (tighter, data-driven) come
// from the spectral layer and must stay below the declared ones.
struct SemigroupConstants {
  double c_sg = 0;
  double c_uc = 0;
  double c_ge = 0;
  double c_dr = 0;
  double c_cover = 0;
};

class DomainGeometry {
 public:
  // Default-constructed fields in aggregates start on the interval; anything
  // real overwrites it before use.
  DomainGeometry() = default;
  explicit DomainGeometry(DomainKind kind) : kind_(kind) {}

  DomainKind kind() const { return kind_; }
  int dimension() const {
    return (kind_ == DomainKind::Interval || kind_ == DomainKind::Circle) ? 1
                                                                          : 2;
  }
  bool periodic() const {
    return kind_ == DomainKind::Circle || kind_ == DomainKind::Torus2;
  }
  bool has_boundary() const { return !periodic(); }
  double diameter() const;
  // Curvature lower bound; zero for every supported geometry.
  double ricci_lower_bound() const { return 0.0; }

  SemigroupConstants declared_constants() const;

  bool operator==(const DomainGeometry& o) const { return kind_ == o.kind_; }

 private:
  DomainKind kind_ = DomainKind::Interval;
};

// Geodesic distance. Euclidean on boundary domains, per-axis wrapped
// Euclidean on periodic ones.
double distance(const DomainGeometry& dom, const Point& a, const Point& b);

// Displacement b - a taken axis-wise, with periodic axes unwrapped into
// (-1/2, 1/2]. On boundary domains this is the plain difference.
std::array<double, 2> displacement(const DomainGeometry& dom, const Point& a,
                                   const Point& b);

// Midpoint-rule quadrature: per_axis^d nodes at ((i+1/2)/per_axis, ...),
// all carrying the same weight 1/per_axis^d. Exactness degree is enough for
// every band-limited integrand the spectral layer produces (see tests).
struct QuadratureGrid {
  DomainGeometry dom;
  int per_axis = 0;
  std::vector<Point> nodes;
  double weight = 0.0;  // same for every node, nodes.size() * weight == 1
};

QuadratureGrid quadrature_grid(const DomainGeometry& dom, int per_axis);

// Regular-grid delta-net: the smallest midpoint grid whose mesh guarantees
// every point of the domain lies within delta of some node. Cardinality
// satisfies the declared covering bound with constant c_cover.
std::vector<Point> covering_net(const DomainGeometry& dom, double delta);
std::size_t covering_number(const DomainGeometry& dom, double delta);

// CLI-facing names: "interval" | "square" | "circle" | "torus2".
DomainKind parse_domain_token(const std::string& token);
std::string domain_token(DomainKind kind);

}  // namespace matchlab
