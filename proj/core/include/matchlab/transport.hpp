#pragma once

#include <cstddef>
#include <vector>

#include "matchlab/domain.hpp"
#include "matchlab/fields.hpp"

namespace matchlab {

// ----- exact solvers ----------------------------------------------------

// Optimal assignment on a dense n x n cost matrix (row-major), by the
// Jonker-Volgenant shortest-augmenting-path method. Exact; the returned
// potentials certify optimality: u_i + v_j <= cost(i,j) everywhere with
// equality on the matching.
struct AssignmentResult {
  std::vector<int> col_of_row;
  double total_cost = 0.0;
  std::vector<double> row_potential;
  std::vector<double> col_potential;
};

AssignmentResult exact_assignment(const std::vector<double>& cost, int n);

// Balanced transportation problem: supplies and demands are positive and
// sum to the same total; cost is row-major (source-major) S x T. Solved by
// successive shortest augmenting paths with potentials. When supplies and
// demands are multiples of a common unit, every sink ends up served by a
// single source (no splitting), which the quantized matching relies on.
struct FlowEntry {
  int source = 0;
  int sink = 0;
  double amount = 0.0;
};

struct TransportSolution {
  double cost = 0.0;  // total shipped cost; equals W2^2 for unit-mass inputs
  std::vector<FlowEntry> flow;
  std::vector<double> source_potential;
  std::vector<double> sink_potential;
};

TransportSolution exact_transport(const std::vector<double>& supply,
                                  const std::vector<double>& demand,
                                  const std::vector<double>& cost);

// Largest dual-feasibility / complementary-slackness violation of a
// solution; exactness checks in tests pin this near rounding level.
double transport_certificate(const TransportSolution& sol,
                             const std::vector<double>& cost,
                             std::size_t num_sinks);

// ----- empirical matchings ----------------------------------------------

// One-dimensional exact values via order statistics.
double w2_interval_empirical(std::vector<double> xs, std::vector<double> ys);
double w2_interval_to_uniform(std::vector<double> xs);

// Squared cost from a sample to the uniform measure on the circle: quantile
// coupling per cyclic cut, rotation optimized in closed form per cut. O(n^2).
double w2_circle_to_uniform(std::vector<double> xs);
// Quadratic-cost matching on the circle: sort both samples and minimize
// over the n cyclic pairings, each pair measured in quotient distance.
double w2_circle_empirical(std::vector<double> xs, std::vector<double> ys);

// Matching of two n-point samples under d(x,y)^p, p in {1, 2}.
// cost is the mean over atoms, so p = 2 yields W2 squared and p = 1 yields W1.
struct TransportPlanResult {
  double cost = 0.0;
  std::vector<int> assignment;  // target index per source atom
  bool exact = true;
  double slack = 0.0;  // certified quantization slack, 0 for exact solves
};

TransportPlanResult w2_bipartite(const EmpiricalSample& a,
                                 const EmpiricalSample& b, int p = 2);

// Matching of a sample to the uniform measure through its k^d-point midpoint
// quantization. Requires k^d divisible by n (each sample atom is replicated
// k^d/n times). The result is exact for the quantized pair; `slack` is the
// a-priori bound 2 W2(grid, m) diam + W2(grid, m)^2 with
// W2(grid, m) <= sqrt(d)/(2k), and `grid_gap` stores that W2(grid, m) bound
// for per-trial certified intervals. matched[i] is the sample point serving
// grid node i, from which displacement fields are read off.
struct QuantizedPlan {
  TransportPlanResult plan;
  std::vector<Point> grid;
  std::vector<Point> matched;
  double grid_gap = 0.0;
  int k = 0;
};

QuantizedPlan w2_to_uniform_quantized(const EmpiricalSample& a, int k,
                                      std::size_t max_atoms = 4096);

// Exact squared-distance transport between two weighted measures given on
// point supports over the same domain. Used for quantized densities and
// mixtures; weights must each sum to 1 within 1e-9 (they are renormalized).
struct DiscreteMeasure {
  std::vector<Point> support;
  std::vector<double> mass;
};

TransportSolution w2_discrete(const DomainGeometry& dom,
                              const DiscreteMeasure& a,
                              const DiscreteMeasure& b);

// Joint convexity probe: mixes two pairs with weight t and compares the
// mixed cost against the mixture of costs (values returned for inspection).
struct ConvexityCheck {
  double mixed = 0.0;
  double convex_combination = 0.0;
  bool holds = false;
};

ConvexityCheck joint_convexity_check(const DomainGeometry& dom,
                                     const DiscreteMeasure& mu1,
                                     const DiscreteMeasure& nu1,
                                     const DiscreteMeasure& mu2,
                                     const DiscreteMeasure& nu2, double t);

// ----- displacement statistics -------------------------------------------

// Accumulates optimal-map displacements T(x) - x at the quantization nodes
// across trials (periodic axes unwrapped into (-1/2, 1/2]) and reports the
// grid integral of |mean displacement|^2 with a leave-one-out (jackknife)
// standard error.
class DisplacementAccumulator {
 public:
  DisplacementAccumulator(const DomainGeometry& dom, int k);

  void add_trial(const QuantizedPlan& plan);

  struct Result {
    double integral = 0.0;
    double jackknife_se = 0.0;
    std::size_t trials = 0;
  };
  Result finalize() const;

 private:
  DomainGeometry dom_;
  int k_;
  std::size_t nodes_ = 0;
  std::vector<std::vector<std::array<double, 2>>> per_trial_;
};

}  // namespace matchlab
