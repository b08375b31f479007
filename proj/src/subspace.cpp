#include "p2gm/subspace.hpp"

#include "p2gm/dualprox.hpp"
#include "p2gm/oned.hpp"

#include <algorithm>
#include <cmath>

namespace p2gm {

VectorXd momentum_direction(const CompositeProblem& problem, const Preconditioner& p, const VectorXd& x,
                            const VectorXd& d_prev) {
  const VectorXd target = x + d_prev;
  if (domain_contains(problem, target)) return d_prev;
  return precond_project(problem, p, target) - x;
}

double fd_step(const VectorXd& x, const VectorXd& v, double scale) {
  const double vn = v.norm();
  if (!(vn > 0)) throw std::invalid_argument("fd_step: zero direction");
  return scale * std::sqrt(std::numeric_limits<double>::epsilon()) * (1.0 + x.norm()) / vn;
}

VectorXd hvp_fd(const SmoothOracle& f, const VectorXd& x, const VectorXd& v, double eps) {
  return hvp_fd(f, x, f.gradient(x), v, eps);
}

VectorXd hvp_fd(const SmoothOracle& f, const VectorXd& x, const VectorXd& grad_x, const VectorXd& v, double eps) {
  if (!(eps > 0)) throw std::invalid_argument("hvp_fd: eps must be positive");
  return (f.gradient(x + eps * v) - grad_x) / eps;
}

double curvature(const VectorXd& v, const VectorXd& hv, double c1, double c2) {
  if (!(c1 > 0) || c1 > c2) throw std::invalid_argument("curvature: need 0 < c1 <= c2");
  const double vv = v.squaredNorm();
  if (!(vv > 0)) throw std::invalid_argument("curvature: zero direction");
  const double vhv = v.dot(hv);
  if (vhv > 0) return std::clamp(vhv / vv, c1, c2);
  if (vhv < 0) return std::clamp(hv.norm() / std::sqrt(vv), c1, c2);
  return c1;
}

VectorXd conjugate_orthogonalize(const VectorXd& v, const VectorXd& s, const VectorXd& hv, double q_v) {
  const double vv = v.squaredNorm();
  if (!(vv > 0)) throw std::invalid_argument("conjugate_orthogonalize: zero v");
  return s - (s.dot(hv) / (q_v * vv)) * v;
}

CurvatureProbe probe_curvature(const SmoothOracle& f, const VectorXd& x, const VectorXd& grad_x, const VectorXd& v,
                               const SubspaceConfig& config) {
  CurvatureProbe probe;
  if (config.exact_hessian && f.hessian_exact) {
    probe.hv = f.hessian_exact(x) * v;
  } else {
    probe.eps_used = fd_step(x, v, config.fd_eps_scale);
    probe.hv = hvp_fd(f, x, grad_x, v, probe.eps_used);
  }
  probe.q = curvature(v, probe.hv, config.c1, config.c2);
  return probe;
}

SubspaceStep build_direction(const CompositeProblem& problem, const Preconditioner& p, const VectorXd& x,
                             const VectorXd& grad, const VectorXd& v, const VectorXd& d_prev,
                             const SubspaceConfig& config) {
  if (!(v.norm() > 0)) throw std::invalid_argument("build_direction: v must be nonzero");
  SubspaceStep st;
  st.v = v;
  st.s = momentum_direction(problem, p, x, d_prev);

  const CurvatureProbe pv = probe_curvature(problem.smooth, x, grad, v, config);
  st.q_v = pv.q;
  st.s_tilde = config.conjugate ? conjugate_orthogonalize(v, st.s, pv.hv, pv.q) : st.s;

  st.alpha1 = minimize_along_ray(problem, x, v, grad.dot(v), st.q_v * v.squaredNorm());

  const double st_norm = st.s_tilde.norm();
  st.degenerate_momentum = !(st_norm > 1e-12 * (1.0 + st.s.norm()));
  if (st.degenerate_momentum) {
    st.q_s = config.c1;
    st.alpha2 = 0.0;
  } else {
    st.q_s = probe_curvature(problem.smooth, x, grad, st.s_tilde, config).q;
    st.alpha2 = minimize_along_ray(problem, x, st.s_tilde, grad.dot(st.s_tilde), st.q_s * st_norm * st_norm);
  }

  const VectorXd d_tilde = st.alpha1 * v + st.alpha2 * st.s_tilde;
  st.q_d = st.q_v * (st.alpha1 * v).squaredNorm() + st.q_s * (st.alpha2 * st.s_tilde).squaredNorm();
  if (!(st.q_d > 0) || !(d_tilde.norm() > 0)) {
    st.alpha2 = 0.0;
    st.alpha3 = 1.0;
    st.q_d = st.q_v * (st.alpha1 * v).squaredNorm();
    st.d = st.alpha1 * v;
    return st;
  }
  st.alpha3 = minimize_along_ray(problem, x, d_tilde, grad.dot(d_tilde), st.q_d);
  st.d = st.alpha3 * d_tilde;
  return st;
}

}  // namespace p2gm
