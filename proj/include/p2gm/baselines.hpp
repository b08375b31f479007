#pragma once

#include "p2gm/problem.hpp"
#include "p2gm/solver.hpp"

#include <stdexcept>

namespace p2gm {

/// The requested method has no closed-form building block for this problem.
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BaselineResult {
  VectorXd x;
  Trace trace;
  /// Momentum restarts (gradient-restart FISTA only).
  int restarts = 0;
  /// Final dual iterate (PDHG only).
  VectorXd y;
};

/// Euclidean projection onto the unit simplex by sort and threshold.
VectorXd euclid_simplex_project(const VectorXd& z);

/// Componentwise sign(z) max(|z| - tau, 0).
VectorXd soft_threshold(const VectorXd& z, double tau);

/// True when FISTA has a closed-form prox: L1 with the identity operator, or
/// the simplex.
bool fista_supported(const CompositeProblem& problem);

struct FistaConfig {
  int max_iter = 5000;
  double lipschitz0 = 1.0;
  /// Each iteration first tries L * shrink, then doubles until the
  /// sufficient-decrease test holds.
  double shrink = 0.9;
  int max_doublings = 60;
  bool restart = false;
};

/// Accelerated proximal gradient with backtracking on the Lipschitz estimate.
/// Trace residual column: ||x_{k+1} - y_k||; stepsize column: 1 / L_k.
/// Throws CapabilityError when fista_supported() is false.
BaselineResult fista(const CompositeProblem& problem, const VectorXd& x0, const FistaConfig& config);

BaselineResult fista_bt(const CompositeProblem& problem, const VectorXd& x0, int max_iter);

/// fista_bt with gradient restart: the momentum sequence resets whenever
/// <y_k - x_{k+1}, x_{k+1} - x_k> > 0.
BaselineResult fista_bt_rs(const CompositeProblem& problem, const VectorXd& x0, int max_iter);

struct PdhgConfig {
  double tau = 1.0;
  double theta = 0.9;
  double sigma_dual = 1.0;

  void validate() const;
};

/// tau = 1 / L with L the smooth part's Lipschitz hint, and
/// sigma = 4 / (tau (1 + theta)^2 ||A^T A||).
PdhgConfig make_pdhg_config(const CompositeProblem& problem, double theta = 0.9);

/// Linearized primal-dual iteration for g = lambda ||.||_1:
///   x+ = x - tau (grad f(x) + A^T y)
///   xbar = x+ + theta (x+ - x)
///   y = clip(y + sigma A xbar, -lambda, lambda).
/// Trace residual column: ||x+ - x||; stepsize column: tau.
BaselineResult pdhg(const CompositeProblem& problem, const VectorXd& x0, const VectorXd& y0, const PdhgConfig& config,
                    int max_iter);

}  // namespace p2gm
