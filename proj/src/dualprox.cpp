#include "p2gm/dualprox.hpp"

#include <algorithm>
#include <cmath>

namespace p2gm {

namespace {

void check_metric(const CompositeProblem& problem, const Preconditioner& p) {
  if (p.dim() != problem.dim()) throw std::invalid_argument("preconditioner dimension does not match the problem");
  const bool working = p.working_set_kind().has_value();
  if (working != uses_working_matrix(problem.nonsmooth)) {
    throw std::invalid_argument("preconditioner form does not match the nonsmooth term");
  }
  if (const auto kind = p.working_set_kind()) {
    const bool capped = std::holds_alternative<CappedSimplex>(problem.nonsmooth);
    if (capped != (*kind == WorkingSetKind::CappedSimplex)) {
      throw std::invalid_argument("working matrix kind does not match the nonsmooth term");
    }
  }
}

Index require_active(std::optional<Index> active, Index n) {
  if (!active) throw std::invalid_argument("solve_dual: working index required for simplex-type terms");
  if (*active < 0 || *active >= n) throw std::invalid_argument("solve_dual: working index out of range");
  return *active;
}

}  // namespace

Preconditioner make_preconditioner(const CompositeProblem& problem, const VectorXd& x, double alpha,
                                   const std::optional<MatrixXd>& tilde_p) {
  return std::visit(
      [&](const auto& t) -> Preconditioner {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, SimplexConstraint>) {
          return Preconditioner::working_set(WorkingSetKind::Simplex, problem.dim(), t.policy(x)).rescaled(alpha);
        } else if constexpr (std::is_same_v<T, CappedSimplex>) {
          return Preconditioner::working_set(WorkingSetKind::CappedSimplex, problem.dim(), t.policy(x))
              .rescaled(alpha);
        } else {
          return Preconditioner::from_operator(problem.op, tilde_p).rescaled(alpha);
        }
      },
      problem.nonsmooth);
}

VectorXd dual_coefficient(const VectorXd& x, const VectorXd& grad, const Preconditioner& p) {
  if (x.size() != p.dim() || grad.size() != p.dim()) throw std::invalid_argument("dual_coefficient: dimension mismatch");
  return p.op(x - p.apply_inverse(grad));
}

VectorXd solve_dual(const NonsmoothTerm& term, const VectorXd& a, const VectorXd& d, std::optional<Index> active) {
  if (a.size() != d.size()) throw std::invalid_argument("solve_dual: a and D differ in length");
  if (d.size() > 0 && !(d.minCoeff() > 0)) throw std::invalid_argument("solve_dual: D must be positive");
  const Index m = a.size();

  return std::visit(
      [&](const auto& t) -> VectorXd {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, L1Norm>) {
          // g* is the indicator of the l_inf ball of radius lambda.
          return d.cwiseProduct(a).cwiseMax(-t.lambda).cwiseMin(t.lambda);
        } else if constexpr (std::is_same_v<T, EllipsoidIndicator>) {
          // g* = sqrt(b) ||y||; with D = L I the minimizer is
          // L (a - Pi_{B[0, sqrt b]}(a)).
          const double lo = d.minCoeff();
          const double hi = d.maxCoeff();
          if (hi - lo > 1e-12 * hi) throw std::invalid_argument("solve_dual: ellipsoid term needs a scalar D");
          const double radius = std::sqrt(t.b);
          const double norm = a.norm();
          if (norm <= radius) return VectorXd::Zero(m);
          return (hi * (1.0 - radius / norm)) * a;
        } else if constexpr (std::is_same_v<T, SimplexConstraint>) {
          const Index i = require_active(active, m);
          VectorXd y = a.cwiseMax(0.0);
          y(i) = a(i) - 1.0;
          return d.cwiseProduct(y);
        } else if constexpr (std::is_same_v<T, CappedSimplex>) {
          const Index i = require_active(active, m);
          VectorXd y = a - a.cwiseMax(0.0).cwiseMin(1.0);
          y(i) = std::max(a(i) - t.s, 0.0);
          return d.cwiseProduct(y);
        } else {
          const Index p = t.upper.size();
          if (p + t.equal.size() != m) throw std::invalid_argument("solve_dual: working-set sizes disagree with a");
          VectorXd y(m);
          y.head(p) = (a.head(p) - t.upper).cwiseMax(0.0);
          y.tail(m - p) = a.tail(m - p) - t.equal;
          return d.cwiseProduct(y);
        }
      },
      term);
}

DualSolution prox_direction(const CompositeProblem& problem, const VectorXd& x, const VectorXd& grad,
                            const Preconditioner& p) {
  check_metric(problem, p);
  DualSolution sol;
  sol.a = dual_coefficient(x, grad, p);
  sol.y = solve_dual(problem.nonsmooth, sol.a, p.dual_scale(), p.active_index());
  sol.v = -p.apply_inverse(grad + p.op_transpose(sol.y));

  // Complementary slackness: a bound row with a nonzero multiplier is active
  // at x + v. Pin those coordinates exactly so rounding cannot leave x + v a
  // hair outside the box and block every later ratio test.
  if (const auto active = p.active_index()) {
    const bool capped = std::holds_alternative<CappedSimplex>(problem.nonsmooth);
    for (Index j = 0; j < x.size(); ++j) {
      if (j == *active) continue;
      if (sol.y(j) > 0) {
        sol.v(j) = (capped ? 1.0 : 0.0) - x(j);
      } else if (capped && sol.y(j) < 0) {
        sol.v(j) = -x(j);
      }
    }
  }
  return sol;
}

VectorXd precond_project(const CompositeProblem& problem, const Preconditioner& p, const VectorXd& z) {
  if (!is_indicator(problem.nonsmooth)) return z;
  const VectorXd zero = VectorXd::Zero(z.size());
  return z + prox_direction(problem, z, zero, p).v;
}

}  // namespace p2gm
