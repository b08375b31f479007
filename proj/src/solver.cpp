#include "p2gm/solver.hpp"

#include "p2gm/dualprox.hpp"
#include "p2gm/oned.hpp"

#include <algorithm>
#include <cmath>

namespace p2gm {

void SolverConfig::validate() const {
  if (!(c1 > 0) || c1 > c2) throw std::invalid_argument("SolverConfig: need 0 < c1 <= c2");
  if (!(sigma > 0 && sigma < 1)) throw std::invalid_argument("SolverConfig: sigma must lie in (0, 1)");
  if (!(gamma > 0 && gamma < 1)) throw std::invalid_argument("SolverConfig: gamma must lie in (0, 1)");
  if (!(alpha_lo > 0) || alpha_lo > alpha_hi) throw std::invalid_argument("SolverConfig: need 0 < alpha_lo <= alpha_hi");
  if (!(fd_eps_scale > 0)) throw std::invalid_argument("SolverConfig: fd_eps_scale must be positive");
  if (!(tol >= 0)) throw std::invalid_argument("SolverConfig: tol must be nonnegative");
  if (max_iter < 0) throw std::invalid_argument("SolverConfig: max_iter must be nonnegative");
}

SubspaceConfig SolverConfig::subspace() const {
  SubspaceConfig sc;
  sc.c1 = c1;
  sc.c2 = c2;
  sc.fd_eps_scale = fd_eps_scale;
  sc.conjugate = variant == Variant::ConjugateMomentum;
  sc.exact_hessian = exact_hessian;
  return sc;
}

std::string to_string(Status status) {
  switch (status) {
    case Status::Converged: return "converged";
    case Status::MaxIterations: return "max_iter";
    case Status::LineSearchStalled: return "line_search_stalled";
  }
  return "unknown";
}

double model_decrement(const CompositeProblem& problem, const VectorXd& x, const VectorXd& grad, const VectorXd& d) {
  const VectorXd ax = map_point(problem, x);
  const VectorXd axd = map_point(problem, x + d);
  return grad.dot(d) + eval_nonsmooth(problem, axd) - eval_nonsmooth(problem, ax);
}

double armijo_search(const CompositeProblem& problem, const VectorXd& x, const VectorXd& d, double decrement,
                     double sigma, double gamma, std::optional<double> fx, int max_trials) {
  if (!(decrement < 0)) throw std::invalid_argument("armijo_search: model decrement must be negative");
  const double f0 = fx ? *fx : eval_objective(problem, x);
  double t = 1.0;
  for (int j = 0; j <= max_trials; ++j) {
    const double ft = eval_objective(problem, x + t * d);
    if (ft - f0 <= sigma * t * decrement) return t;
    t *= gamma;
  }
  throw LineSearchError("armijo_search: no acceptable step after " + std::to_string(max_trials) + " backtracks");
}

namespace {

// Scale from a curvature probe along the unit-metric gradient step:
// <w, H w> / <w, P1 w> with w = P1^{-1} grad f(x0).
double initial_scale(const CompositeProblem& problem, const SolverState& state, const SolverConfig& config) {
  const Preconditioner unit = make_preconditioner(problem, state.x, 1.0, config.tilde_p);
  const VectorXd w = unit.apply_inverse(state.grad);
  if (!(w.norm() > 0) || !w.allFinite()) return 1.0;
  const CurvatureProbe probe = probe_curvature(problem.smooth, state.x, state.grad, w, config.subspace());
  const double whw = w.dot(probe.hv);
  if (!(whw > 0)) return 1.0;
  return std::clamp(whw / w.dot(unit.apply_unit(w)), config.alpha_lo, config.alpha_hi);
}

}  // namespace

SolverState initial_state(const CompositeProblem& problem, const VectorXd& x0, const SolverConfig& config) {
  config.validate();
  if (x0.size() != problem.dim()) throw std::invalid_argument("initial point has the wrong dimension");
  if (!x0.allFinite() || !domain_contains(problem, x0)) {
    throw std::invalid_argument("initial point is not in dom(g o A)");
  }
  SolverState state;
  state.x = x0;
  state.grad = eval_gradient(problem, x0);
  state.objective = eval_objective(problem, x0);
  state.alpha = initial_scale(problem, state, config);
  return state;
}

std::optional<TraceRecord> step(const CompositeProblem& problem, SolverState& state, const SolverConfig& config,
                                const Observer& observer) {
  const VectorXd& x = state.x;
  const VectorXd& grad = state.grad;

  Preconditioner p = make_preconditioner(problem, x, state.alpha, config.tilde_p);
  if (state.k > 0) {
    const VectorXd s = x - state.x_prev;
    if (s.norm() > 0) p = bb_rescale(p, s, grad - state.grad_prev, config.alpha_lo, config.alpha_hi);
  }
  state.alpha = p.scale();

  const VectorXd v = prox_direction(problem, x, grad, p).v;
  const double v_norm = v.norm();
  state.last_residual = v_norm;
  if (v_norm <= config.tol * (1.0 + x.norm())) {
    state.converged = true;
    return std::nullopt;
  }

  IterationInfo info;
  VectorXd d;
  if (state.k == 0) {
    // The working-set subproblem may leave the true domain; scale back in.
    d = v;
    if (!domain_contains(problem, x + v)) d = std::min(1.0, feasible_range(problem, x, v).hi) * v;
  } else {
    SubspaceStep sub = build_direction(problem, p, x, grad, v, state.d_prev, config.subspace());
    d = sub.d;
    if (observer && config.exact_hessian && problem.smooth.hessian_exact) {
      const MatrixXd h = problem.smooth.hessian_exact(x);
      const double vh = std::sqrt(std::max(v.dot(h * v), 0.0));
      const double sh = std::sqrt(std::max(sub.s_tilde.dot(h * sub.s_tilde), 0.0));
      info.conjugacy = std::pair{std::abs(v.dot(h * sub.s_tilde)), vh * sh};
    }
    if (observer) info.subspace = std::move(sub);
  }

  const double decrement = model_decrement(problem, x, grad, d);
  if (!(decrement < 0)) throw LineSearchError("step: direction is not a descent direction");
  const double t = armijo_search(problem, x, d, decrement, config.sigma, config.gamma, state.objective);

  VectorXd x_new = x + t * d;
  const double f_new = eval_objective(problem, x_new);

  if (observer) {
    const auto [c3, c4] = p.spectral_bounds();
    info.k = state.k;
    info.objective_before = state.objective;
    info.objective_after = f_new;
    info.model_decrement = decrement;
    info.v_norm = v_norm;
    info.d_norm = d.norm();
    info.stepsize = t;
    info.c1 = config.c1;
    info.c2 = config.c2;
    info.c3 = c3;
    info.c4 = c4;
    info.alpha = p.scale();
    observer(info);
  }

  state.x_prev = state.x;
  state.grad_prev = state.grad;
  state.d_prev = std::move(d);
  state.x = std::move(x_new);
  state.grad = eval_gradient(problem, state.x);
  state.objective = f_new;
  ++state.k;

  TraceRecord rec;
  rec.iter = state.k;
  rec.objective = f_new;
  rec.residual = v_norm;
  rec.stepsize = t;
  return rec;
}

RunResult run(const CompositeProblem& problem, const VectorXd& x0, const SolverConfig& config,
              const Observer& observer) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  SolverState state = initial_state(problem, x0, config);

  RunResult result;
  result.trace.algo = config.variant == Variant::ConjugateMomentum ? "P2GM_CM" : "P2GM_M";
  result.trace.rows.push_back({0, state.objective, 0.0, 0.0, 0.0});
  result.status = Status::MaxIterations;

  while (state.k < config.max_iter) {
    std::optional<TraceRecord> rec;
    try {
      rec = step(problem, state, config, observer);
    } catch (const LineSearchError&) {
      result.status = Status::LineSearchStalled;
      break;
    }
    if (!rec) {
      result.status = Status::Converged;
      break;
    }
    rec->wall_seconds = std::chrono::duration<double>(clock::now() - start).count();
    result.trace.rows.push_back(*rec);
  }
  result.x = state.x;
  result.iterations = state.k;
  result.final_residual = state.last_residual;
  return result;
}

}  // namespace p2gm
