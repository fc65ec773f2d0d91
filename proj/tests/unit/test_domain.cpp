#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "matchlab/domain.hpp"
#include "matchlab/errors.hpp"
#include "matchlab/rng.hpp"
#include "oracles.hpp"

using namespace matchlab;

namespace {

const DomainKind kAllKinds[] = {DomainKind::Interval, DomainKind::Square,
                                DomainKind::Circle, DomainKind::Torus2};

Point random_point(const DomainGeometry& dom, Rng& rng) {
  Point p;
  for (int a = 0; a < dom.dimension(); ++a) p[a] = rng.next_double();
  return p;
}

}  // namespace

TEST_CASE("distance is a metric on random triples") {
  Rng rng = Rng::from_key(7, 90, 1, 0);
  for (DomainKind kind : kAllKinds) {
    DomainGeometry dom(kind);
    for (int rep = 0; rep < 2000; ++rep) {
      Point a = random_point(dom, rng);
      Point b = random_point(dom, rng);
      Point c = random_point(dom, rng);
      const double ab = distance(dom, a, b);
      const double ba = distance(dom, b, a);
      CHECK(ab == doctest::Approx(ba).epsilon(1e-14));
      CHECK(ab >= 0.0);
      CHECK(distance(dom, a, a) == 0.0);
      const double ac = distance(dom, a, c);
      const double cb = distance(dom, c, b);
      CHECK(ab <= ac + cb + 1e-12);
    }
  }
}

TEST_CASE("periodic distances wrap around the short way") {
  DomainGeometry circle(DomainKind::Circle);
  Point a, b;
  a[0] = 0.1;
  b[0] = 0.9;
  CHECK(distance(circle, a, b) == doctest::Approx(0.2).epsilon(1e-14));

  DomainGeometry torus(DomainKind::Torus2);
  Point p, q;
  p[0] = 0.1;
  p[1] = 0.95;
  q[0] = 0.9;
  q[1] = 0.05;
  CHECK(distance(torus, p, q) ==
        doctest::Approx(std::sqrt(0.2 * 0.2 + 0.1 * 0.1)).epsilon(1e-14));
}

TEST_CASE("displacement unwraps into the half-open symmetric cell") {
  DomainGeometry circle(DomainKind::Circle);
  Point a, b;
  a[0] = 0.9;
  b[0] = 0.1;
  CHECK(displacement(circle, a, b)[0] == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(displacement(circle, b, a)[0] == doctest::Approx(-0.2).epsilon(1e-14));

  // Antipodal pairs land on the +1/2 edge, never -1/2.
  a[0] = 0.0;
  b[0] = 0.5;
  CHECK(displacement(circle, a, b)[0] == 0.5);
  CHECK(displacement(circle, b, a)[0] == 0.5);
}

TEST_CASE("displacement norm equals distance") {
  Rng rng = Rng::from_key(7, 91, 1, 0);
  for (DomainKind kind : kAllKinds) {
    DomainGeometry dom(kind);
    for (int rep = 0; rep < 2000; ++rep) {
      Point a = random_point(dom, rng);
      Point b = random_point(dom, rng);
      auto d = displacement(dom, a, b);
      const double norm = std::sqrt(d[0] * d[0] + d[1] * d[1]);
      CHECK(norm == doctest::Approx(distance(dom, a, b)).epsilon(1e-13));
    }
  }
}

TEST_CASE("diameter matches the geometry and bounds all pairs") {
  CHECK(DomainGeometry(DomainKind::Interval).diameter() == doctest::Approx(1.0));
  CHECK(DomainGeometry(DomainKind::Square).diameter() ==
        doctest::Approx(std::sqrt(2.0)));
  CHECK(DomainGeometry(DomainKind::Circle).diameter() == doctest::Approx(0.5));
  CHECK(DomainGeometry(DomainKind::Torus2).diameter() ==
        doctest::Approx(std::sqrt(2.0) / 2.0));

  Rng rng = Rng::from_key(7, 92, 1, 0);
  for (DomainKind kind : kAllKinds) {
    DomainGeometry dom(kind);
    double sup = 0.0;
    for (int rep = 0; rep < 5000; ++rep) {
      sup = std::max(
          sup, distance(dom, random_point(dom, rng), random_point(dom, rng)));
    }
    CHECK(sup <= dom.diameter() + 1e-14);
    // Random sampling should come close to attaining the supremum.
    CHECK(sup > 0.8 * dom.diameter());
  }
}

TEST_CASE("quadrature grid is a uniform midpoint rule") {
  for (DomainKind kind : kAllKinds) {
    DomainGeometry dom(kind);
    const int k = 9;
    QuadratureGrid g = quadrature_grid(dom, k);
    const std::size_t expect =
        dom.dimension() == 1 ? static_cast<std::size_t>(k)
                             : static_cast<std::size_t>(k) * k;
    CHECK(g.nodes.size() == expect);
    CHECK(static_cast<double>(g.nodes.size()) * g.weight ==
          doctest::Approx(1.0).epsilon(1e-14));
    for (const Point& p : g.nodes) {
      for (int a = 0; a < dom.dimension(); ++a) {
        const double scaled = p[a] * k - 0.5;
        CHECK(scaled == doctest::Approx(std::round(scaled)).epsilon(1e-12));
      }
    }
    // Midpoint rules integrate affine functions exactly.
    double mean = 0.0;
    for (const Point& p : g.nodes) mean += g.weight * (p[0] + 0.25);
    CHECK(mean == doctest::Approx(0.75).epsilon(1e-13));
  }
}

TEST_CASE("covering net cardinalities on pinned cases") {
  CHECK(covering_number(DomainGeometry(DomainKind::Interval), 0.1) == 5);
  CHECK(covering_number(DomainGeometry(DomainKind::Interval), 0.5) == 1);
  CHECK(covering_number(DomainGeometry(DomainKind::Torus2), 0.4) == 4);
}

TEST_CASE("covering net actually covers and obeys the declared constant") {
  Rng rng = Rng::from_key(7, 93, 1, 0);
  for (DomainKind kind : kAllKinds) {
    DomainGeometry dom(kind);
    const double c_cover = dom.declared_constants().c_cover;
    for (double delta : {0.03, 0.07, 0.2, 0.45, 0.8}) {
      std::vector<Point> net = covering_net(dom, delta);
      CHECK(net.size() == covering_number(dom, delta));
      const double cap = std::max(
          1.0, c_cover * std::pow(delta, -static_cast<double>(dom.dimension())));
      CHECK(static_cast<double>(net.size()) <= cap + 1e-9);
      for (int rep = 0; rep < 400; ++rep) {
        Point p = random_point(dom, rng);
        double best = 1e300;
        for (const Point& q : net) best = std::min(best, distance(dom, p, q));
        CHECK(best <= delta + 1e-12);
      }
    }
  }
}

TEST_CASE("semigroup constants are positive and ordered by geometry") {
  for (DomainKind kind : kAllKinds) {
    DomainGeometry dom(kind);
    SemigroupConstants c = dom.declared_constants();
    CHECK(c.c_sg > 0.0);
    CHECK(c.c_uc > 0.0);
    CHECK(c.c_ge > 0.0);
    CHECK(c.c_dr > 0.0);
    CHECK(c.c_cover > 0.0);
  }
  // Periodic spectral gaps are four times the reflecting ones in each
  // dimension (first frequency doubles, gap is its square).
  CHECK(DomainGeometry(DomainKind::Circle).declared_constants().c_sg ==
        doctest::Approx(4.0 *
                        DomainGeometry(DomainKind::Interval)
                            .declared_constants()
                            .c_sg));
  CHECK(DomainGeometry(DomainKind::Torus2).declared_constants().c_sg ==
        doctest::Approx(4.0 * M_PI * M_PI));
}

TEST_CASE("domain tokens round-trip and reject junk") {
  for (DomainKind kind : kAllKinds) {
    CHECK(parse_domain_token(domain_token(kind)) == kind);
  }
  CHECK_THROWS_AS(parse_domain_token("nosuch"), ConfigError);
  CHECK_THROWS_AS(parse_domain_token(""), ConfigError);
}
