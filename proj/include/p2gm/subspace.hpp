#pragma once

#include "p2gm/precond.hpp"
#include "p2gm/problem.hpp"

namespace p2gm {

/// Finite-difference Hessian-vector product and its safeguarded curvature.
struct CurvatureProbe {
  VectorXd hv;
  double q = 0.0;
  double eps_used = 0.0;
};

struct SubspaceConfig {
  double c1 = 1e-8;
  double c2 = 1e8;
  double fd_eps_scale = 1.0;
  /// Orthogonalise the momentum against v in the curvature metric. Off gives
  /// the plain-momentum variant (s_tilde = s).
  bool conjugate = true;
  /// Use SmoothOracle::hessian_exact instead of finite differences.
  bool exact_hessian = false;
};

struct SubspaceStep {
  VectorXd v;
  VectorXd s;
  VectorXd s_tilde;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double alpha3 = 0.0;
  double q_v = 0.0;
  double q_s = 0.0;
  double q_d = 0.0;
  VectorXd d;
  bool degenerate_momentum = false;
};

/// s_k: the previous direction if x + d_prev stays in the domain, otherwise
/// the P-projection of x + d_prev back onto it, minus x.
VectorXd momentum_direction(const CompositeProblem& problem, const Preconditioner& p, const VectorXd& x,
                            const VectorXd& d_prev);

/// Default FD step sqrt(machine eps) (1 + ||x||) / ||v||, times `scale`.
double fd_step(const VectorXd& x, const VectorXd& v, double scale = 1.0);

/// (grad f(x + eps v) - grad f(x)) / eps.
VectorXd hvp_fd(const SmoothOracle& f, const VectorXd& x, const VectorXd& v, double eps);
/// Same, reusing a known grad f(x).
VectorXd hvp_fd(const SmoothOracle& f, const VectorXd& x, const VectorXd& grad_x, const VectorXd& v, double eps);

/// Safeguarded curvature q(v) in [c1, c2] from a Hessian-vector product.
double curvature(const VectorXd& v, const VectorXd& hv, double c1, double c2);

/// s - (s^T Hv / (q_v ||v||^2)) v.
VectorXd conjugate_orthogonalize(const VectorXd& v, const VectorXd& s, const VectorXd& hv, double q_v);

/// Curvature probe along v at x (FD or exact per config).
CurvatureProbe probe_curvature(const SmoothOracle& f, const VectorXd& x, const VectorXd& grad_x, const VectorXd& v,
                               const SubspaceConfig& config);

/// Direction d_k from the two-dimensional subspace span{v, s} by three exact
/// one-dimensional solves. Requires v != 0.
SubspaceStep build_direction(const CompositeProblem& problem, const Preconditioner& p, const VectorXd& x,
                             const VectorXd& grad, const VectorXd& v, const VectorXd& d_prev,
                             const SubspaceConfig& config);

}  // namespace p2gm
