#include "p2gm/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

namespace p2gm {

VectorXd euclid_simplex_project(const VectorXd& z) {
  const Index n = z.size();
  if (n == 0) throw std::invalid_argument("euclid_simplex_project: empty vector");
  std::vector<double> u(z.data(), z.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Index j = 0; j < n; ++j) {
    cumsum += u[static_cast<std::size_t>(j)];
    const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[static_cast<std::size_t>(j)] - t > 0) theta = t;
  }
  return (z.array() - theta).max(0.0).matrix();
}

VectorXd soft_threshold(const VectorXd& z, double tau) {
  return z.unaryExpr([tau](double v) { return std::copysign(std::max(std::abs(v) - tau, 0.0), v); });
}

bool fista_supported(const CompositeProblem& problem) {
  if (std::holds_alternative<SimplexConstraint>(problem.nonsmooth)) return true;
  return std::holds_alternative<L1Norm>(problem.nonsmooth) && problem.op->is_identity();
}

namespace {

using clock = std::chrono::steady_clock;

double seconds_since(clock::time_point start) { return std::chrono::duration<double>(clock::now() - start).count(); }

}  // namespace

BaselineResult fista(const CompositeProblem& problem, const VectorXd& x0, const FistaConfig& config) {
  if (!fista_supported(problem)) throw CapabilityError("FISTA: no closed-form prox for this problem");
  if (x0.size() != problem.dim()) throw std::invalid_argument("FISTA: x0 has the wrong dimension");
  if (!(config.lipschitz0 > 0) || !(config.shrink > 0 && config.shrink <= 1)) {
    throw std::invalid_argument("FISTA: bad backtracking parameters");
  }

  // prox of g / L, i.e. argmin g(u) + L/2 ||u - z||^2
  std::function<VectorXd(const VectorXd&, double)> prox;
  if (const auto* l1 = std::get_if<L1Norm>(&problem.nonsmooth)) {
    const double lambda = l1->lambda;
    prox = [lambda](const VectorXd& z, double lip) { return soft_threshold(z, lambda / lip); };
  } else {
    prox = [](const VectorXd& z, double) { return euclid_simplex_project(z); };
  }

  const auto start = clock::now();
  const SmoothOracle& f = problem.smooth;
  BaselineResult out;
  out.trace.algo = config.restart ? "FISTA_bt_rs" : "FISTA_bt";

  VectorXd x = std::holds_alternative<SimplexConstraint>(problem.nonsmooth) && !domain_contains(problem, x0)
                   ? euclid_simplex_project(x0)
                   : x0;
  VectorXd y = x;
  double t = 1.0;
  double lip = config.lipschitz0;
  out.trace.rows.push_back({0, eval_objective(problem, x), 0.0, 0.0, 0.0});

  for (int k = 0; k < config.max_iter; ++k) {
    const double fy = f.value(y);
    const VectorXd gy = f.gradient(y);
    double trial = lip * config.shrink;
    VectorXd z;
    for (int j = 0;; ++j) {
      z = prox(y - gy / trial, trial);
      const VectorXd dz = z - y;
      const double dz2 = dz.squaredNorm();
      const double model = fy + gy.dot(dz) + 0.5 * trial * dz2;
      const double fz = f.value(z);
      bool accept = fz <= model + 1e-15 * std::abs(fy);
      // Near a solution the quadratic term drops below the rounding level of
      // f and the value test accepts any estimate; fall back to the
      // gradient-based curvature test there.
      if (accept && 0.5 * trial * dz2 <= 1e-10 * (1.0 + std::abs(fy))) {
        accept = (f.gradient(z) - gy).dot(dz) <= trial * dz2;
      }
      if (accept || j >= config.max_doublings) break;
      trial *= 2.0;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t * trial / lip));
    const VectorXd step = z - x;
    const double residual = (z - y).norm();

    if (config.restart && (y - z).dot(step) > 0) {
      ++out.restarts;
      t = 1.0;
      y = z;
    } else {
      y = z + ((t - 1.0) / t_next) * step;
      t = t_next;
    }
    x = std::move(z);
    lip = trial;
    out.trace.rows.push_back({k + 1, eval_objective(problem, x), residual, 1.0 / lip, seconds_since(start)});
  }
  out.x = std::move(x);
  return out;
}

BaselineResult fista_bt(const CompositeProblem& problem, const VectorXd& x0, int max_iter) {
  FistaConfig config;
  config.max_iter = max_iter;
  return fista(problem, x0, config);
}

BaselineResult fista_bt_rs(const CompositeProblem& problem, const VectorXd& x0, int max_iter) {
  FistaConfig config;
  config.max_iter = max_iter;
  config.restart = true;
  return fista(problem, x0, config);
}

void PdhgConfig::validate() const {
  if (!(tau > 0) || !(theta > 0) || !(sigma_dual > 0)) {
    throw std::invalid_argument("PdhgConfig: tau, theta and sigma_dual must be positive");
  }
}

PdhgConfig make_pdhg_config(const CompositeProblem& problem, double theta) {
  if (!std::holds_alternative<L1Norm>(problem.nonsmooth)) throw CapabilityError("PDHG: only the l1 term is supported");
  if (!problem.smooth.lipschitz_hint || !(*problem.smooth.lipschitz_hint > 0)) {
    throw CapabilityError("PDHG: the smooth part carries no Lipschitz constant");
  }
  const double smax = problem.op->singular_values().maxCoeff();
  PdhgConfig config;
  config.tau = 1.0 / *problem.smooth.lipschitz_hint;
  config.theta = theta;
  config.sigma_dual = 4.0 / (config.tau * (1.0 + theta) * (1.0 + theta) * smax * smax);
  config.validate();
  return config;
}

BaselineResult pdhg(const CompositeProblem& problem, const VectorXd& x0, const VectorXd& y0, const PdhgConfig& config,
                    int max_iter) {
  const auto* l1 = std::get_if<L1Norm>(&problem.nonsmooth);
  if (!l1) throw CapabilityError("PDHG: only the l1 term is supported");
  config.validate();
  const LinearMap& a = *problem.op;
  if (x0.size() != problem.dim() || y0.size() != a.rows()) throw std::invalid_argument("PDHG: dimension mismatch");

  const auto start = clock::now();
  const double lambda = l1->lambda;
  BaselineResult out;
  out.trace.algo = "PDHG";
  VectorXd x = x0;
  VectorXd y = y0.cwiseMax(-lambda).cwiseMin(lambda);
  out.trace.rows.push_back({0, eval_objective(problem, x), 0.0, 0.0, 0.0});

  for (int k = 0; k < max_iter; ++k) {
    const VectorXd x_next = x - config.tau * (problem.smooth.gradient(x) + a.apply_transpose(y));
    const VectorXd x_bar = x_next + config.theta * (x_next - x);
    y = (y + config.sigma_dual * a.apply(x_bar)).cwiseMax(-lambda).cwiseMin(lambda);
    const double residual = (x_next - x).norm();
    x = x_next;
    out.trace.rows.push_back({k + 1, eval_objective(problem, x), residual, config.tau, seconds_since(start)});
  }
  out.x = std::move(x);
  out.y = std::move(y);
  return out;
}

}  // namespace p2gm
