#pragma once

#include "p2gm/precond.hpp"
#include "p2gm/problem.hpp"

namespace p2gm {

/// Solution of the preconditioned proximal subproblem through its dual.
struct DualSolution {
  VectorXd y;  // dual optimum
  VectorXd a;  // dual coefficient A x - A P^{-1} grad
  VectorXd v;  // primal direction, v = -P^{-1}(grad + A^T y)
};

/// Metric for `problem` at x with scalar scale alpha. Simplex-type terms get
/// the working matrix chosen by their index policy; the other terms use the
/// SVD factors of the problem operator (Ptilde defaults to the identity).
Preconditioner make_preconditioner(const CompositeProblem& problem, const VectorXd& x, double alpha = 1.0,
                                   const std::optional<MatrixXd>& tilde_p = std::nullopt);

/// A x - A P^{-1} grad.
VectorXd dual_coefficient(const VectorXd& x, const VectorXd& grad, const Preconditioner& p);

/// argmin_y 1/2 ||y||^2_{D^{-1}} + g*(y) - a^T y for diagonal D > 0.
///
/// `active` is the working index i_k, required by the simplex-type terms.
/// The ellipsoid term needs a scalar D. Throws std::invalid_argument on a
/// non-positive D entry.
VectorXd solve_dual(const NonsmoothTerm& term, const VectorXd& a, const VectorXd& d,
                    std::optional<Index> active = std::nullopt);

/// v = argmin grad^T v + g(A x + A v) + 1/2 ||v||_P^2, recovered from the dual.
DualSolution prox_direction(const CompositeProblem& problem, const VectorXd& x, const VectorXd& grad,
                            const Preconditioner& p);

/// argmin_{w in dom} ||w - z||_P. Identity for the full-domain L1 term.
VectorXd precond_project(const CompositeProblem& problem, const Preconditioner& p, const VectorXd& z);

}  // namespace p2gm
