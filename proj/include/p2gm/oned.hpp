#pragma once

#include "p2gm/problem.hpp"

#include <vector>

namespace p2gm {

struct Interval {
  double lo = -kInfinity;
  double hi = kInfinity;

  bool contains(double t) const { return lo <= t && t <= hi; }
};

/// Largest interval [t_l, t_u] with x + t d in dom(g o A); (-inf, inf) for
/// the L1 term or d = 0. Requires x feasible; coordinates that sit slightly
/// outside the domain through rounding are treated as on the boundary, so
/// the result always contains 0.
Interval feasible_range(const CompositeProblem& problem, const VectorXd& x, const VectorXd& d);

/// Exact minimizer of a t^2 + b t over `range` (a > 0).
double min_quad_on_segment(double a, double b, const Interval& range);

/// h(t) = a t^2 + b t + ||v + t d||_1 with a > 0.
struct PiecewiseQuadratic1D {
  double a = 1.0;
  double b = 0.0;
  VectorXd v;
  VectorXd d;

  double operator()(double t) const { return a * t * t + b * t + (v + t * d).lpNorm<1>(); }
};

/// Bookkeeping of one partitioning solve: candidate-set size at the start of
/// every loop pass and the number of subdifferential evaluations.
struct PartitionTrace {
  std::vector<std::size_t> candidate_sizes;
  std::size_t subgradient_evals = 0;
};

/// Minimizer of h by median bisection over the breakpoints -v_i / d_i,
/// finished in closed form once no breakpoint lies strictly inside [L, U].
double min_quad_plus_l1(const PiecewiseQuadratic1D& h, PartitionTrace* trace = nullptr);

/// argmin_t slope t + g(A x + t A d) + curvature / 2 t^2 (curvature > 0),
/// dispatching to the segment or the partitioning solver.
double minimize_along_ray(const CompositeProblem& problem, const VectorXd& x, const VectorXd& d, double slope,
                          double curvature);

}  // namespace p2gm
