#include "p2gm/oned.hpp"

#include <algorithm>
#include <cmath>

namespace p2gm {

namespace {

constexpr double kBreakpointTol = 1e-14;

// Tightens `range` so that value + t * rate <= bound + give. A constraint
// that is already violated pins that side of the interval at zero.
void add_upper(Interval& range, double value, double rate, double bound, double give = 0.0) {
  const double slack = std::max(bound + give - value, 0.0);
  if (rate > 0) {
    range.hi = std::min(range.hi, slack / rate);
  } else if (rate < 0) {
    range.lo = std::max(range.lo, slack / rate);
  }
}

void add_lower(Interval& range, double value, double rate, double bound, double give = 0.0) {
  add_upper(range, -value, -rate, -bound, give);
}

// value + t * rate = bound, held to within a small give. The sum of an
// iterate drifts by a few ulps per step; a direction that pulls it back must
// not be blocked, while one that moves away is stopped almost at once.
void add_equal(Interval& range, double value, double rate, double bound) {
  constexpr double kEqualityGive = 1e-12;
  add_upper(range, value, rate, bound, kEqualityGive);
  add_lower(range, value, rate, bound, kEqualityGive);
}

Interval ellipsoid_range(const VectorXd& z, const VectorXd& w, double b) {
  const double qa = w.squaredNorm();
  if (qa == 0.0) return {};
  const double qb = 2.0 * z.dot(w);
  const double qc = std::min(z.squaredNorm() - b, 0.0);
  const double disc = std::max(qb * qb - 4.0 * qa * qc, 0.0);
  const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
  double r1 = 0.0;
  double r2 = 0.0;
  if (q != 0.0) {
    r1 = q / qa;
    r2 = qc / q;
  }
  return {std::min({r1, r2, 0.0}), std::max({r1, r2, 0.0})};
}

}  // namespace

Interval feasible_range(const CompositeProblem& problem, const VectorXd& x, const VectorXd& d) {
  if (x.size() != problem.dim() || d.size() != problem.dim()) {
    throw std::invalid_argument("feasible_range: dimension mismatch");
  }
  if (d.cwiseAbs().maxCoeff() == 0.0) return {};

  return std::visit(
      [&](const auto& t) -> Interval {
        using T = std::decay_t<decltype(t)>;
        Interval range;
        if constexpr (std::is_same_v<T, L1Norm>) {
          return range;
        } else if constexpr (std::is_same_v<T, EllipsoidIndicator>) {
          return ellipsoid_range(problem.op->apply(x), problem.op->apply(d), t.b);
        } else if constexpr (std::is_same_v<T, SimplexConstraint>) {
          add_equal(range, x.sum(), d.sum(), 1.0);
          for (Index j = 0; j < x.size(); ++j) add_lower(range, x(j), d(j), 0.0);
          return range;
        } else if constexpr (std::is_same_v<T, CappedSimplex>) {
          for (Index j = 0; j < x.size(); ++j) {
            add_lower(range, x(j), d(j), 0.0);
            add_upper(range, x(j), d(j), 1.0);
          }
          add_upper(range, x.sum(), d.sum(), t.s);
          return range;
        } else {
          const VectorXd z = problem.op->apply(x);
          const VectorXd w = problem.op->apply(d);
          const Index p = t.upper.size();
          for (Index j = 0; j < p; ++j) add_upper(range, z(j), w(j), t.upper(j));
          for (Index j = p; j < w.size(); ++j) add_equal(range, z(j), w(j), t.equal(j - p));
          return range;
        }
      },
      problem.nonsmooth);
}

double min_quad_on_segment(double a, double b, const Interval& range) {
  if (!(a > 0)) throw std::invalid_argument("min_quad_on_segment: a must be positive");
  if (!(range.lo <= range.hi)) throw std::invalid_argument("min_quad_on_segment: empty range");
  return std::clamp(-b / (2.0 * a), range.lo, range.hi);
}

double min_quad_plus_l1(const PiecewiseQuadratic1D& h, PartitionTrace* trace) {
  if (!(h.a > 0)) throw std::invalid_argument("min_quad_plus_l1: a must be positive");
  if (h.v.size() != h.d.size()) throw std::invalid_argument("min_quad_plus_l1: v and d differ in length");

  const Index m = h.v.size();
  const double total = h.d.lpNorm<1>();
  double lower = (-total - h.b) / (2.0 * h.a);
  double upper = (total - h.b) / (2.0 * h.a);

  std::vector<double> cand;
  cand.reserve(static_cast<std::size_t>(m) + 2);
  cand.push_back(lower);
  cand.push_back(upper);
  for (Index i = 0; i < m; ++i) {
    if (h.d(i) == 0.0) continue;
    const double bp = -h.v(i) / h.d(i);
    if (bp >= lower && bp <= upper) cand.push_back(bp);
  }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end(),
                         [](double p, double q) { return std::abs(p - q) <= kBreakpointTol; }),
             cand.end());

  // Subdifferential [lo, hi] of h at t.
  auto subdiff = [&](double t) {
    if (trace) ++trace->subgradient_evals;
    double lo = 2.0 * h.a * t + h.b;
    double hi = lo;
    const double kink_tol = std::max(kBreakpointTol, 4.0 * std::numeric_limits<double>::epsilon() * std::abs(t));
    for (Index i = 0; i < m; ++i) {
      const double di = h.d(i);
      if (di == 0.0) continue;
      if (std::abs(t + h.v(i) / di) <= kink_tol) {
        lo -= std::abs(di);
        hi += std::abs(di);
      } else if (h.v(i) + t * di > 0) {
        lo += di;
        hi += di;
      } else {
        lo -= di;
        hi -= di;
      }
    }
    return std::pair{lo, hi};
  };

  for (;;) {
    if (trace) trace->candidate_sizes.push_back(cand.size());
    if (cand.size() <= 2) {
      const double mid = 0.5 * (lower + upper);
      double slope = h.b;
      for (Index i = 0; i < m; ++i) {
        const double r = h.v(i) + mid * h.d(i);
        slope += (r > 0 ? 1.0 : (r < 0 ? -1.0 : 0.0)) * h.d(i);
      }
      return std::clamp(-slope / (2.0 * h.a), lower, upper);
    }
    const std::size_t k = (cand.size() - 1) / 2;
    const double med = cand[k];
    const auto [lo, hi] = subdiff(med);
    const double tol = 1e-12 * (std::abs(h.b) + 2.0 * h.a * std::abs(med) + total);
    if (lo <= tol && hi >= -tol) return med;
    if (hi < 0) {
      lower = med;
      cand.erase(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k));
    } else {
      upper = med;
      cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(k) + 1, cand.end());
    }
  }
}

double minimize_along_ray(const CompositeProblem& problem, const VectorXd& x, const VectorXd& d, double slope,
                          double curvature) {
  if (!(curvature > 0)) throw std::invalid_argument("minimize_along_ray: curvature must be positive");
  if (const auto* l1 = std::get_if<L1Norm>(&problem.nonsmooth)) {
    PiecewiseQuadratic1D h;
    h.a = 0.5 * curvature / l1->lambda;
    h.b = slope / l1->lambda;
    h.v = problem.op->apply(x);
    h.d = problem.op->apply(d);
    return min_quad_plus_l1(h);
  }
  return min_quad_on_segment(0.5 * curvature, slope, feasible_range(problem, x, d));
}

}  // namespace p2gm
