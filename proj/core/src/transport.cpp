#include "matchlab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "matchlab/errors.hpp"

namespace matchlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite(const std::vector<double>& cost) {
  for (double c : cost)
    if (!std::isfinite(c)) throw NumericError("transport: nonfinite cost entry");
}

}  // namespace

AssignmentResult exact_assignment(const std::vector<double>& cost, int n) {
  if (n < 1) throw std::invalid_argument("exact_assignment: n < 1");
  if (cost.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
    throw std::invalid_argument("exact_assignment: matrix size mismatch");
  require_finite(cost);
  const auto C = [&](int i, int j) -> double {
    return cost[static_cast<std::size_t>(i) * n + j];
  };

  std::vector<int> x(static_cast<std::size_t>(n), -1);
  std::vector<int> y(static_cast<std::size_t>(n), -1);
  std::vector<double> v(static_cast<std::size_t>(n), 0.0);

  // Column reduction: seed potentials with column minima, handing each
  // column to its minimizing row when that row is still unclaimed.
  std::vector<int> matches(static_cast<std::size_t>(n), 0);
  for (int j = n - 1; j >= 0; --j) {
    double mn = C(0, j);
    int imin = 0;
    for (int i = 1; i < n; ++i)
      if (C(i, j) < mn) {
        mn = C(i, j);
        imin = i;
      }
    v[static_cast<std::size_t>(j)] = mn;
    if (++matches[static_cast<std::size_t>(imin)] == 1) {
      x[static_cast<std::size_t>(imin)] = j;
      y[static_cast<std::size_t>(j)] = imin;
    }
  }

  // Reduction transfer: rows that won exactly one column donate their
  // second-best margin back to the potential.
  std::vector<int> free_rows;
  free_rows.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (matches[static_cast<std::size_t>(i)] == 0) {
      free_rows.push_back(i);
      continue;
    }
    if (matches[static_cast<std::size_t>(i)] == 1) {
      const int j1 = x[static_cast<std::size_t>(i)];
      double mn = kInf;
      for (int j = 0; j < n; ++j)
        if (j != j1) mn = std::min(mn, C(i, j) - v[static_cast<std::size_t>(j)]);
      if (mn < kInf) v[static_cast<std::size_t>(j1)] -= mn;
    }
  }

  // Augmenting row reduction, two sweeps. The strict-improvement test uses
  // a tolerance so that floating near-ties cannot spin the retry loop, and
  // each sweep additionally carries a retry budget: with real-valued costs a
  // displacement can lower a potential by an arbitrarily small margin, so
  // unbounded immediate retries degenerate into million-step displacement
  // chains on near-tie instances. Rows past the budget defer to the next
  // sweep and ultimately to the exact augmentation phase, which this phase
  // only accelerates.
  for (int sweep = 0; sweep < 2 && !free_rows.empty(); ++sweep) {
    std::vector<int> next_free;
    std::size_t k = 0;
    const std::size_t num_free = free_rows.size();
    std::int64_t retry_budget = 4 * static_cast<std::int64_t>(n);
    while (k < num_free) {
      const int i = free_rows[k++];
      double u1 = kInf, u2 = kInf;
      int j1 = -1, j2 = -1;
      for (int j = 0; j < n; ++j) {
        const double h = C(i, j) - v[static_cast<std::size_t>(j)];
        if (h < u1) {
          u2 = u1;
          j2 = j1;
          u1 = h;
          j1 = j;
        } else if (h < u2) {
          u2 = h;
          j2 = j;
        }
      }
      const bool strict = (u2 - u1) > 1e-12 * (1.0 + std::fabs(u2)) && u2 < kInf;
      int i0 = y[static_cast<std::size_t>(j1)];
      if (strict) {
        v[static_cast<std::size_t>(j1)] -= (u2 - u1);
      } else if (i0 >= 0 && j2 >= 0) {
        j1 = j2;
        i0 = y[static_cast<std::size_t>(j1)];
      }
      x[static_cast<std::size_t>(i)] = j1;
      y[static_cast<std::size_t>(j1)] = i;
      if (i0 >= 0) {
        x[static_cast<std::size_t>(i0)] = -1;
        if (strict && retry_budget-- > 0)
          free_rows[--k] = i0;  // retry right away against the new potential
        else
          next_free.push_back(i0);
      }
    }
    free_rows = std::move(next_free);
  }

  // Shortest augmenting paths for whatever is left.
  std::vector<double> d(static_cast<std::size_t>(n));
  std::vector<int> pred(static_cast<std::size_t>(n));
  std::vector<char> scanned(static_cast<std::size_t>(n));
  for (const int f : free_rows) {
    for (int j = 0; j < n; ++j) {
      d[static_cast<std::size_t>(j)] = C(f, j) - v[static_cast<std::size_t>(j)];
      pred[static_cast<std::size_t>(j)] = f;
      scanned[static_cast<std::size_t>(j)] = 0;
    }
    int endj = -1;
    double mind = 0.0;
    while (endj < 0) {
      int jmin = -1;
      double dm = kInf;
      for (int j = 0; j < n; ++j)
        if (!scanned[static_cast<std::size_t>(j)] &&
            d[static_cast<std::size_t>(j)] < dm) {
          dm = d[static_cast<std::size_t>(j)];
          jmin = j;
        }
      scanned[static_cast<std::size_t>(jmin)] = 1;
      mind = dm;
      if (y[static_cast<std::size_t>(jmin)] < 0) {
        endj = jmin;
        break;
      }
      const int i = y[static_cast<std::size_t>(jmin)];
      const double base = mind - (C(i, jmin) - v[static_cast<std::size_t>(jmin)]);
      for (int j = 0; j < n; ++j) {
        if (scanned[static_cast<std::size_t>(j)]) continue;
        const double nd = base + C(i, j) - v[static_cast<std::size_t>(j)];
        if (nd < d[static_cast<std::size_t>(j)]) {
          d[static_cast<std::size_t>(j)] = nd;
          pred[static_cast<std::size_t>(j)] = i;
        }
      }
    }
    for (int j = 0; j < n; ++j)
      if (scanned[static_cast<std::size_t>(j)])
        v[static_cast<std::size_t>(j)] += d[static_cast<std::size_t>(j)] - mind;
    int j = endj;
    while (true) {
      const int i = pred[static_cast<std::size_t>(j)];
      y[static_cast<std::size_t>(j)] = i;
      const int jnext = x[static_cast<std::size_t>(i)];
      x[static_cast<std::size_t>(i)] = j;
      if (i == f) break;
      j = jnext;
    }
  }

  AssignmentResult res;
  res.col_of_row = x;
  res.col_potential = v;
  res.row_potential.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int j = x[static_cast<std::size_t>(i)];
    res.row_potential[static_cast<std::size_t>(i)] =
        C(i, j) - v[static_cast<std::size_t>(j)];
    res.total_cost += C(i, j);
  }
  return res;
}

TransportSolution exact_transport(const std::vector<double>& supply,
                                  const std::vector<double>& demand,
                                  const std::vector<double>& cost) {
  const std::size_t S = supply.size();
  const std::size_t T = demand.size();
  if (S == 0 || T == 0) throw std::invalid_argument("exact_transport: empty side");
  if (cost.size() != S * T)
    throw std::invalid_argument("exact_transport: matrix size mismatch");
  if (S * T > (std::size_t{1} << 26))
    throw std::invalid_argument("exact_transport: instance over size budget");
  require_finite(cost);
  for (double c : cost)
    if (c < 0.0) throw std::invalid_argument("exact_transport: negative cost");
  double sum_s = 0.0, sum_d = 0.0;
  for (double s : supply) {
    if (!(s > 0.0)) throw std::invalid_argument("exact_transport: supply <= 0");
    sum_s += s;
  }
  for (double dd : demand) {
    if (!(dd > 0.0)) throw std::invalid_argument("exact_transport: demand <= 0");
    sum_d += dd;
  }
  if (std::fabs(sum_s - sum_d) > 1e-9 * std::max(sum_s, sum_d))
    throw std::invalid_argument("exact_transport: unbalanced masses");

  std::vector<double> rs = supply;
  std::vector<double> rd = demand;
  // Absorb the (tiny) imbalance on the demand side so the loop can drain
  // residuals to zero exactly.
  const double rescale = sum_s / sum_d;
  for (double& dd : rd) dd *= rescale;

  std::vector<double> flow(S * T, 0.0);
  std::vector<std::vector<int>> sources_of(T);
  std::vector<double> pi_s(S, 0.0), pi_t(T, 0.0);
  std::vector<double> ds(S), dt(T);
  std::vector<int> pred_t(T), pred_s(S);
  std::vector<char> seen_s(S), seen_t(T);
  std::vector<int> zero_q;
  zero_q.reserve(S + T);

  double remaining = sum_s;
  const double done_tol = 1e-12 * std::max(1.0, sum_s);
  const std::size_t max_augments = 64 * (S + T) + 4096;
  std::size_t augments = 0;

  // Sources are encoded as [0, S) and sinks as [S, S + T) in the queue of
  // distance-zero nodes; those can be settled FIFO before any scan for a
  // positive-distance minimum is needed.
  const auto scan_source = [&](std::size_t s, double base) {
    seen_s[s] = 1;
    const double* crow = cost.data() + s * T;
    const double ps = pi_s[s];
    for (std::size_t t = 0; t < T; ++t) {
      if (seen_t[t]) continue;
      const double red = std::max(0.0, crow[t] + ps - pi_t[t]);
      const double nd = base + red;
      if (nd < dt[t]) {
        dt[t] = nd;
        pred_t[t] = static_cast<int>(s);
        if (nd == base) zero_q.push_back(static_cast<int>(S + t));
      }
    }
  };

  while (remaining > done_tol) {
    if (++augments > max_augments)
      throw NumericError("exact_transport: augmentation budget exhausted");
    std::fill(seen_s.begin(), seen_s.end(), 0);
    std::fill(seen_t.begin(), seen_t.end(), 0);
    std::fill(dt.begin(), dt.end(), kInf);
    std::fill(pred_s.begin(), pred_s.end(), -1);
    zero_q.clear();
    for (std::size_t s = 0; s < S; ++s) {
      ds[s] = rs[s] > 0.0 ? 0.0 : kInf;
      if (rs[s] > 0.0) zero_q.push_back(static_cast<int>(s));
    }

    int endt = -1;
    double delta = kInf;
    std::size_t zhead = 0;
    while (endt < 0) {
      double best;
      int bs = -1, bt = -1;
      if (zhead < zero_q.size()) {
        const int node = zero_q[zhead++];
        if (node < static_cast<int>(S)) {
          if (seen_s[static_cast<std::size_t>(node)]) continue;
          bs = node;
        } else {
          if (seen_t[static_cast<std::size_t>(node) - S]) continue;
          bt = node - static_cast<int>(S);
        }
        best = bs >= 0 ? ds[static_cast<std::size_t>(bs)]
                       : dt[static_cast<std::size_t>(bt)];
      } else {
        // Plateau queue is drained; fall back to a linear minimum scan.
        best = kInf;
        for (std::size_t s = 0; s < S; ++s)
          if (!seen_s[s] && ds[s] < best) {
            best = ds[s];
            bs = static_cast<int>(s);
            bt = -1;
          }
        for (std::size_t t = 0; t < T; ++t)
          if (!seen_t[t] && dt[t] < best) {
            best = dt[t];
            bt = static_cast<int>(t);
            bs = -1;
          }
        if (bs < 0 && bt < 0)
          throw NumericError("exact_transport: disconnected residual graph");
      }
      if (bt >= 0) {
        seen_t[static_cast<std::size_t>(bt)] = 1;
        if (rd[static_cast<std::size_t>(bt)] > 0.0) {
          endt = bt;
          delta = best;
          break;
        }
        // Relax backward along carried flow; those edges are tight, so the
        // step has zero reduced cost.
        auto& list = sources_of[static_cast<std::size_t>(bt)];
        std::size_t w = 0;
        for (std::size_t idx = 0; idx < list.size(); ++idx) {
          const int s = list[idx];
          if (flow[static_cast<std::size_t>(s) * T + bt] <= 0.0) continue;
          list[w++] = s;
          if (!seen_s[static_cast<std::size_t>(s)] &&
              best < ds[static_cast<std::size_t>(s)]) {
            ds[static_cast<std::size_t>(s)] = best;
            pred_s[static_cast<std::size_t>(s)] = bt;
            zero_q.push_back(s);
          }
        }
        list.resize(w);
      } else {
        scan_source(static_cast<std::size_t>(bs), best);
      }
    }

    // Johnson potential update keeps all residual reduced costs nonnegative.
    for (std::size_t s = 0; s < S; ++s) pi_s[s] += std::min(ds[s], delta);
    for (std::size_t t = 0; t < T; ++t) pi_t[t] += std::min(dt[t], delta);

    // Trace the alternating path and find its bottleneck; the path root is
    // the source without a predecessor sink.
    double push = rd[static_cast<std::size_t>(endt)];
    {
      int t = endt;
      while (true) {
        const int s = pred_t[static_cast<std::size_t>(t)];
        const int tprev = pred_s[static_cast<std::size_t>(s)];
        if (tprev < 0) {
          push = std::min(push, rs[static_cast<std::size_t>(s)]);
          break;
        }
        push = std::min(push, flow[static_cast<std::size_t>(s) * T + tprev]);
        t = tprev;
      }
    }
    {
      int t = endt;
      while (true) {
        const int s = pred_t[static_cast<std::size_t>(t)];
        double& f = flow[static_cast<std::size_t>(s) * T + t];
        if (f == 0.0) sources_of[static_cast<std::size_t>(t)].push_back(s);
        f += push;
        const int tprev = pred_s[static_cast<std::size_t>(s)];
        if (tprev < 0) {
          rs[static_cast<std::size_t>(s)] -= push;
          if (rs[static_cast<std::size_t>(s)] < 1e-15)
            rs[static_cast<std::size_t>(s)] = 0.0;
          break;
        }
        flow[static_cast<std::size_t>(s) * T + tprev] -= push;
        t = tprev;
      }
      rd[static_cast<std::size_t>(endt)] -= push;
      if (rd[static_cast<std::size_t>(endt)] < 1e-15)
        rd[static_cast<std::size_t>(endt)] = 0.0;
    }
    remaining -= push;
  }

  TransportSolution sol;
  sol.source_potential.resize(S);
  sol.sink_potential.resize(T);
  for (std::size_t s = 0; s < S; ++s) sol.source_potential[s] = -pi_s[s];
  for (std::size_t t = 0; t < T; ++t) sol.sink_potential[t] = pi_t[t];
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t t = 0; t < T; ++t) {
      const double f = flow[s * T + t];
      if (f > 0.0) {
        sol.flow.push_back({static_cast<int>(s), static_cast<int>(t), f});
        sol.cost += f * cost[s * T + t];
      }
    }
  return sol;
}

double transport_certificate(const TransportSolution& sol,
                             const std::vector<double>& cost,
                             std::size_t num_sinks) {
  const std::size_t S = sol.source_potential.size();
  const std::size_t T = num_sinks;
  double viol = 0.0;
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t t = 0; t < T; ++t)
      viol = std::max(viol, sol.source_potential[s] + sol.sink_potential[t] -
                                cost[s * T + t]);
  for (const FlowEntry& e : sol.flow)
    viol = std::max(
        viol, std::fabs(cost[static_cast<std::size_t>(e.source) * T +
                             static_cast<std::size_t>(e.sink)] -
                        sol.source_potential[static_cast<std::size_t>(e.source)] -
                        sol.sink_potential[static_cast<std::size_t>(e.sink)]));
  return viol;
}

namespace {

double circle_gap(double a, double b) {
  double d = std::fabs(a - b);
  return std::min(d, 1.0 - d);
}

void check_unit_interval(const std::vector<double>& xs, const char* who) {
  for (double x : xs)
    if (!(x >= 0.0 && x <= 1.0))
      throw std::invalid_argument(std::string(who) + ": point outside [0, 1]");
}

}  // namespace

double w2_interval_empirical(std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() != ys.size() || xs.empty())
    throw std::invalid_argument("w2_interval_empirical: size mismatch");
  check_unit_interval(xs, "w2_interval_empirical");
  check_unit_interval(ys, "w2_interval_empirical");
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = xs[i] - ys[i];
    acc += d * d;
  }
  return acc / static_cast<double>(xs.size());
}

double w2_interval_to_uniform(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("w2_interval_to_uniform: empty");
  check_unit_interval(xs, "w2_interval_to_uniform");
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = static_cast<double>(i) / n;
    const double b = static_cast<double>(i + 1) / n;
    const double xa = xs[i] - a;
    const double xb = xs[i] - b;
    acc += (xa * xa * xa - xb * xb * xb) / 3.0;
  }
  return acc;
}

double w2_circle_to_uniform(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("w2_circle_to_uniform: empty");
  check_unit_interval(xs, "w2_circle_to_uniform");
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  // For each cyclic cut, atom j (counted from the cut, lifted past the wrap)
  // serves the arc [j/n, (j+1)/n]; the free rotation of that coupling is a
  // quadratic in theta, minimized at the mean displacement.
  double best = kInf;
  for (std::size_t c = 0; c < n; ++c) {
    double mean_disp = 0.0, sq = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double y = xs[(c + j) % n] + (c + j >= n ? 1.0 : 0.0);
      const double a = static_cast<double>(j) / n;
      const double b = static_cast<double>(j + 1) / n;
      mean_disp += y * (b - a) - (b * b - a * a) / 2.0;
      const double ya = y - a;
      const double yb = y - b;
      sq += (ya * ya * ya - yb * yb * yb) / 3.0;
    }
    best = std::min(best, sq - mean_disp * mean_disp);
  }
  return best;
}

double w2_circle_empirical(std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() != ys.size() || xs.empty())
    throw std::invalid_argument("w2_circle_empirical: size mismatch");
  check_unit_interval(xs, "w2_circle_empirical");
  check_unit_interval(ys, "w2_circle_empirical");
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const std::size_t n = xs.size();
  // An optimal quadratic matching on the circle preserves cyclic order, so
  // only the n rotations of the sorted pairing compete.
  double best = kInf;
  for (std::size_t shift = 0; shift < n; ++shift) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double g = circle_gap(xs[i], ys[(i + shift) % n]);
      acc += g * g;
    }
    best = std::min(best, acc);
  }
  return best / static_cast<double>(n);
}

TransportPlanResult w2_bipartite(const EmpiricalSample& a,
                                 const EmpiricalSample& b, int p) {
  if (!(a.dom == b.dom))
    throw std::invalid_argument("w2_bipartite: domain mismatch");
  if (a.points.size() != b.points.size() || a.points.empty())
    throw std::invalid_argument("w2_bipartite: size mismatch");
  if (p != 1 && p != 2) throw std::invalid_argument("w2_bipartite: p not in {1,2}");
  const int n = static_cast<int>(a.points.size());
  std::vector<double> cost(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double d = distance(a.dom, a.points[static_cast<std::size_t>(i)],
                                b.points[static_cast<std::size_t>(j)]);
      cost[static_cast<std::size_t>(i) * n + j] = p == 2 ? d * d : d;
    }
  const AssignmentResult r = exact_assignment(cost, n);
  TransportPlanResult out;
  out.cost = r.total_cost / n;
  out.assignment = r.col_of_row;
  out.exact = true;
  out.slack = 0.0;
  return out;
}

QuantizedPlan w2_to_uniform_quantized(const EmpiricalSample& a, int k,
                                      std::size_t max_atoms) {
  const int d = a.dom.dimension();
  if (k < 1) throw std::invalid_argument("w2_to_uniform_quantized: k < 1");
  const std::size_t atoms =
      d == 1 ? static_cast<std::size_t>(k)
             : static_cast<std::size_t>(k) * static_cast<std::size_t>(k);
  const std::size_t n = a.points.size();
  if (n == 0) throw std::invalid_argument("w2_to_uniform_quantized: empty sample");
  if (atoms % n != 0)
    throw std::invalid_argument(
        "w2_to_uniform_quantized: grid size not divisible by sample size");
  if (atoms > max_atoms)
    throw std::invalid_argument("w2_to_uniform_quantized: " +
                                std::to_string(atoms) + " atoms over cap " +
                                std::to_string(max_atoms));

  QuantizedPlan q;
  q.k = k;
  q.grid = quadrature_grid(a.dom, k).nodes;

  // Each sample atom carries k^d/n grid units of mass, so the problem is an
  // assignment between replicated sample rows and grid nodes. Replication
  // keeps every unit intact, which pins down a unique serving sample per
  // grid node.
  const std::size_t reps = atoms / n;
  std::vector<double> cost(atoms * atoms);
  std::vector<double> row(atoms);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < atoms; ++t) {
      const double dist = distance(a.dom, a.points[s], q.grid[t]);
      row[t] = dist * dist;
    }
    for (std::size_t r = 0; r < reps; ++r)
      std::copy(row.begin(), row.end(),
                cost.begin() + static_cast<std::ptrdiff_t>((s * reps + r) * atoms));
  }
  const AssignmentResult sol =
      exact_assignment(cost, static_cast<int>(atoms));

  q.matched.resize(atoms);
  q.plan.assignment.resize(atoms);
  for (std::size_t i = 0; i < atoms; ++i) {
    const std::size_t j = static_cast<std::size_t>(sol.col_of_row[i]);
    const std::size_t sample = i / reps;
    q.plan.assignment[j] = static_cast<int>(sample);
    q.matched[j] = a.points[sample];
  }

  q.grid_gap = std::sqrt(static_cast<double>(d)) / (2.0 * k);
  q.plan.cost = sol.total_cost / static_cast<double>(atoms);
  q.plan.exact = false;
  q.plan.slack = 2.0 * q.grid_gap * a.dom.diameter() + q.grid_gap * q.grid_gap;
  return q;
}

namespace {

DiscreteMeasure normalized(const DiscreteMeasure& m, const char* who) {
  if (m.support.size() != m.mass.size() || m.support.empty())
    throw std::invalid_argument(std::string(who) + ": bad measure");
  DiscreteMeasure out;
  double total = 0.0;
  for (std::size_t i = 0; i < m.mass.size(); ++i) {
    if (m.mass[i] < 0.0)
      throw std::invalid_argument(std::string(who) + ": negative mass");
    if (m.mass[i] > 0.0) {
      out.support.push_back(m.support[i]);
      out.mass.push_back(m.mass[i]);
      total += m.mass[i];
    }
  }
  if (std::fabs(total - 1.0) > 1e-9)
    throw std::invalid_argument(std::string(who) + ": mass not normalized");
  for (double& w : out.mass) w /= total;
  return out;
}

}  // namespace

TransportSolution w2_discrete(const DomainGeometry& dom,
                              const DiscreteMeasure& a,
                              const DiscreteMeasure& b) {
  const DiscreteMeasure ma = normalized(a, "w2_discrete");
  const DiscreteMeasure mb = normalized(b, "w2_discrete");
  const std::size_t S = ma.support.size();
  const std::size_t T = mb.support.size();
  std::vector<double> cost(S * T);
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t t = 0; t < T; ++t) {
      const double dd = distance(dom, ma.support[s], mb.support[t]);
      cost[s * T + t] = dd * dd;
    }
  return exact_transport(ma.mass, mb.mass, cost);
}

ConvexityCheck joint_convexity_check(const DomainGeometry& dom,
                                     const DiscreteMeasure& mu1,
                                     const DiscreteMeasure& nu1,
                                     const DiscreteMeasure& mu2,
                                     const DiscreteMeasure& nu2, double t) {
  if (!(t >= 0.0 && t <= 1.0))
    throw std::invalid_argument("joint_convexity_check: t outside [0, 1]");
  const auto mix = [t](const DiscreteMeasure& p, const DiscreteMeasure& q) {
    DiscreteMeasure m;
    for (std::size_t i = 0; i < p.support.size(); ++i) {
      m.support.push_back(p.support[i]);
      m.mass.push_back(t * p.mass[i]);
    }
    for (std::size_t i = 0; i < q.support.size(); ++i) {
      m.support.push_back(q.support[i]);
      m.mass.push_back((1.0 - t) * q.mass[i]);
    }
    return m;
  };
  ConvexityCheck out;
  out.mixed = w2_discrete(dom, mix(mu1, mu2), mix(nu1, nu2)).cost;
  const double c1 = w2_discrete(dom, mu1, nu1).cost;
  const double c2 = w2_discrete(dom, mu2, nu2).cost;
  out.convex_combination = t * c1 + (1.0 - t) * c2;
  out.holds = out.mixed <= out.convex_combination + 1e-9;
  return out;
}

DisplacementAccumulator::DisplacementAccumulator(const DomainGeometry& dom,
                                                 int k)
    : dom_(dom), k_(k) {
  nodes_ = dom.dimension() == 1
               ? static_cast<std::size_t>(k)
               : static_cast<std::size_t>(k) * static_cast<std::size_t>(k);
}

void DisplacementAccumulator::add_trial(const QuantizedPlan& plan) {
  if (plan.grid.size() != nodes_ || plan.matched.size() != nodes_)
    throw std::invalid_argument("DisplacementAccumulator: plan size mismatch");
  std::vector<std::array<double, 2>> disp(nodes_);
  for (std::size_t i = 0; i < nodes_; ++i)
    disp[i] = displacement(dom_, plan.grid[i], plan.matched[i]);
  per_trial_.push_back(std::move(disp));
}

DisplacementAccumulator::Result DisplacementAccumulator::finalize() const {
  Result r;
  r.trials = per_trial_.size();
  if (r.trials == 0) throw std::invalid_argument("DisplacementAccumulator: no trials");
  const double tn = static_cast<double>(r.trials);
  std::vector<std::array<double, 2>> sum(nodes_, {0.0, 0.0});
  for (const auto& trial : per_trial_)
    for (std::size_t i = 0; i < nodes_; ++i) {
      sum[i][0] += trial[i][0];
      sum[i][1] += trial[i][1];
    }
  double integral = 0.0;
  for (std::size_t i = 0; i < nodes_; ++i) {
    const double mx = sum[i][0] / tn;
    const double my = sum[i][1] / tn;
    integral += mx * mx + my * my;
  }
  r.integral = integral / static_cast<double>(nodes_);

  if (r.trials > 1) {
    // Leave-one-out estimates of the same integral.
    std::vector<double> loo(r.trials, 0.0);
    for (std::size_t tix = 0; tix < r.trials; ++tix) {
      double acc = 0.0;
      for (std::size_t i = 0; i < nodes_; ++i) {
        const double mx = (sum[i][0] - per_trial_[tix][i][0]) / (tn - 1.0);
        const double my = (sum[i][1] - per_trial_[tix][i][1]) / (tn - 1.0);
        acc += mx * mx + my * my;
      }
      loo[tix] = acc / static_cast<double>(nodes_);
    }
    double mean_loo = 0.0;
    for (double v : loo) mean_loo += v;
    mean_loo /= tn;
    double var = 0.0;
    for (double v : loo) var += (v - mean_loo) * (v - mean_loo);
    r.jackknife_se = std::sqrt(std::max(0.0, (tn - 1.0) / tn * var));
  }
  return r;
}

}  // namespace matchlab
