#pragma once

#include "p2gm/precond.hpp"
#include "p2gm/problem.hpp"
#include "p2gm/subspace.hpp"

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace p2gm {

/// Thrown when backtracking exhausts its trial budget.
class LineSearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Variant { ConjugateMomentum, PlainMomentum };

struct SolverConfig {
  double c1 = 1e-8;
  double c2 = 1e8;
  double sigma = 1e-4;
  double gamma = 0.5;
  double fd_eps_scale = 1.0;
  double tol = 1e-10;
  int max_iter = 5000;
  Variant variant = Variant::ConjugateMomentum;
  /// Clip interval of the Barzilai-Borwein scale (this fixes c3, c4).
  double alpha_lo = 1e-8;
  double alpha_hi = 1e8;
  bool exact_hessian = false;
  std::optional<MatrixXd> tilde_p;

  /// Throws std::invalid_argument unless every ordering constraint holds.
  void validate() const;
  SubspaceConfig subspace() const;
};

/// One row of a convergence trace. Row 0 is the starting point.
struct TraceRecord {
  int iter = 0;
  double objective = 0.0;
  double residual = 0.0;
  double stepsize = 0.0;
  double wall_seconds = 0.0;
};

struct Trace {
  std::string algo;
  std::vector<TraceRecord> rows;

  int iterations() const { return rows.empty() ? 0 : static_cast<int>(rows.size()) - 1; }
};

/// Per-iteration diagnostics handed to an observer.
struct IterationInfo {
  int k = 0;
  double objective_before = 0.0;
  double objective_after = 0.0;
  double model_decrement = 0.0;
  double v_norm = 0.0;
  double d_norm = 0.0;
  double stepsize = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double c4 = 0.0;
  double alpha = 0.0;
  std::optional<SubspaceStep> subspace;
  /// |<v, H s~>| and ||v||_H ||s~||_H, filled in exact-Hessian mode.
  std::optional<std::pair<double, double>> conjugacy;
};

using Observer = std::function<void(const IterationInfo&)>;

struct SolverState {
  VectorXd x;
  VectorXd grad;
  double objective = 0.0;
  VectorXd x_prev;
  VectorXd grad_prev;
  VectorXd d_prev;
  int k = 0;
  double alpha = 1.0;
  double last_residual = 0.0;
  bool converged = false;
};

enum class Status { Converged, MaxIterations, LineSearchStalled };

std::string to_string(Status status);

struct RunResult {
  VectorXd x;
  Trace trace;
  Status status = Status::MaxIterations;
  int iterations = 0;
  double final_residual = 0.0;
};

/// t = gamma^j for the smallest j with
/// F(x + t d) - F(x) <= sigma t model_decrement. Infeasible trials count as
/// +inf. Throws std::invalid_argument for model_decrement >= 0 and
/// LineSearchError after `max_trials` rejections.
double armijo_search(const CompositeProblem& problem, const VectorXd& x, const VectorXd& d, double model_decrement,
                     double sigma, double gamma, std::optional<double> fx = std::nullopt, int max_trials = 100);

/// grad^T d + g(A x + A d) - g(A x).
double model_decrement(const CompositeProblem& problem, const VectorXd& x, const VectorXd& grad, const VectorXd& d);

/// Starting state: x0 checked for feasibility, initial curvature scale.
SolverState initial_state(const CompositeProblem& problem, const VectorXd& x0, const SolverConfig& config);

/// One iteration. Returns the trace row of the new iterate, or nullopt when
/// the residual test fires (state.converged is then set).
std::optional<TraceRecord> step(const CompositeProblem& problem, SolverState& state, const SolverConfig& config,
                                const Observer& observer = {});

RunResult run(const CompositeProblem& problem, const VectorXd& x0, const SolverConfig& config,
              const Observer& observer = {});

}  // namespace p2gm
