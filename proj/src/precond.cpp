#include "p2gm/precond.hpp"

#include <algorithm>
#include <cmath>

namespace p2gm {

namespace {

// Extreme eigenvalues of A_k^T A_k = I - e_i e_i^T + 1 1^T, identical for the
// simplex and capped-simplex working matrices and independent of i.
std::pair<double, double> working_set_spectrum(Index n) {
  if (n == 1) return {1.0, 1.0};
  const double k = static_cast<double>(n - 1);
  const double root = std::sqrt(k * (k + 4.0));
  const double lo = 1.0 + 0.5 * (k - root);
  const double hi = 1.0 + 0.5 * (k + root);
  return {std::min(lo, 1.0), std::max(hi, 1.0)};
}

}  // namespace

Preconditioner Preconditioner::from_operator(std::shared_ptr<const LinearMap> op, std::optional<MatrixXd> tilde_p) {
  if (!op) throw std::invalid_argument("Preconditioner: null operator");
  const Index m = op->rows();
  const Index n = op->cols();
  Preconditioner p;
  p.n_ = n;
  p.m_ = m;
  p.diag_ = VectorXd::Ones(n);

  SvdFactor f;
  f.op = op;
  if (op->rank_class() == RankClass::FullColumn) {
    if (m != n) {
      throw std::invalid_argument("Preconditioner: full-column-rank A with m > n cannot satisfy A P^-1 A^T = I");
    }
    if (tilde_p && tilde_p->size() != 0) {
      throw std::invalid_argument("Preconditioner: Ptilde given for a square operator");
    }
    f.lead = n;
  } else {
    f.lead = m;
    const Index k = n - m;
    MatrixXd tp = tilde_p ? *tilde_p : MatrixXd::Identity(k, k);
    if (tp.rows() != k || tp.cols() != k) throw std::invalid_argument("Preconditioner: Ptilde must be (n-m)x(n-m)");
    if ((tp - tp.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + tp.cwiseAbs().maxCoeff())) {
      throw std::invalid_argument("Preconditioner: Ptilde must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(tp);
    if (eig.eigenvalues().minCoeff() <= 0.0) throw std::invalid_argument("Preconditioner: Ptilde must be SPD");
    f.tilde_vectors = eig.eigenvectors();
    f.tilde_root = eig.eigenvalues().cwiseSqrt();
  }

  const VectorXd sig = op->singular_values().head(f.lead);
  double lo = sig.minCoeff() * sig.minCoeff();
  double hi = sig.maxCoeff() * sig.maxCoeff();
  if (f.tilde_root.size() > 0) {
    lo = std::min(lo, f.tilde_root.minCoeff() * f.tilde_root.minCoeff());
    hi = std::max(hi, f.tilde_root.maxCoeff() * f.tilde_root.maxCoeff());
  }
  p.unit_min_ = lo;
  p.unit_max_ = hi;
  p.factor_ = std::move(f);
  return p;
}

Preconditioner Preconditioner::working_set(WorkingSetKind kind, Index n, Index active) {
  if (n < 1) throw std::invalid_argument("Preconditioner::working_set: n must be positive");
  if (active < 0 || active >= n) throw std::invalid_argument("Preconditioner::working_set: active index out of range");
  Preconditioner p;
  p.n_ = n;
  p.m_ = n;
  p.diag_ = VectorXd::Ones(n);
  std::tie(p.unit_min_, p.unit_max_) = working_set_spectrum(n);
  p.factor_ = WorkingFactor{kind, active};
  return p;
}

Preconditioner Preconditioner::rescaled(double alpha) const {
  if (!(alpha > 0) || !std::isfinite(alpha)) throw std::invalid_argument("Preconditioner: scale must be positive");
  Preconditioner p = *this;
  p.alpha_ = alpha;
  return p;
}

Preconditioner Preconditioner::with_diagonal(VectorXd d, double d_lo, double d_hi) const {
  if (d.size() != n_) throw std::invalid_argument("Preconditioner: diagonal has wrong length");
  if (!(d_lo > 0) || d_lo > d_hi) throw std::invalid_argument("Preconditioner: need 0 < d_lo <= d_hi");
  if (d.minCoeff() < d_lo || d.maxCoeff() > d_hi) {
    throw std::invalid_argument("Preconditioner: diagonal entries outside [d_lo, d_hi]");
  }
  Preconditioner p = *this;
  p.diag_ = std::move(d);
  return p;
}

std::optional<Index> Preconditioner::active_index() const {
  if (const auto* w = std::get_if<WorkingFactor>(&factor_)) return w->active;
  return std::nullopt;
}

std::optional<WorkingSetKind> Preconditioner::working_set_kind() const {
  if (const auto* w = std::get_if<WorkingFactor>(&factor_)) return w->kind;
  return std::nullopt;
}

VectorXd Preconditioner::apply_m(const VectorXd& w) const {
  if (const auto* f = std::get_if<SvdFactor>(&factor_)) {
    if (f->op->is_identity()) return w;
    const VectorXd z = f->op->svd_v().transpose() * w;
    VectorXd out(n_);
    const Index r = f->lead;
    out.head(r) = f->op->svd_u() * (f->op->singular_values().head(r).cwiseProduct(z.head(r)));
    if (r < n_) {
      const MatrixXd& q = f->tilde_vectors;
      out.tail(n_ - r) = q * f->tilde_root.cwiseProduct(q.transpose() * z.tail(n_ - r));
    }
    return out;
  }
  const auto& wf = std::get<WorkingFactor>(factor_);
  const double total = w.sum();
  VectorXd out = wf.kind == WorkingSetKind::Simplex ? VectorXd(-w) : w;
  out(wf.active) = total;
  return out;
}

VectorXd Preconditioner::apply_mt(const VectorXd& u) const {
  if (const auto* f = std::get_if<SvdFactor>(&factor_)) {
    if (f->op->is_identity()) return u;
    const Index r = f->lead;
    VectorXd z(n_);
    z.head(r) = f->op->singular_values().head(r).cwiseProduct(f->op->svd_u().transpose() * u.head(r));
    if (r < n_) {
      const MatrixXd& q = f->tilde_vectors;
      z.tail(n_ - r) = q * f->tilde_root.cwiseProduct(q.transpose() * u.tail(n_ - r));
    }
    return f->op->svd_v() * z;
  }
  const auto& wf = std::get<WorkingFactor>(factor_);
  const double ui = u(wf.active);
  VectorXd out;
  if (wf.kind == WorkingSetKind::Simplex) {
    out = (-u).array() + ui;
  } else {
    out = u.array() + ui;
  }
  out(wf.active) = ui;
  return out;
}

VectorXd Preconditioner::solve_m(const VectorXd& u) const {
  if (const auto* f = std::get_if<SvdFactor>(&factor_)) {
    if (f->op->is_identity()) return u;
    const Index r = f->lead;
    VectorXd z(n_);
    z.head(r) = (f->op->svd_u().transpose() * u.head(r)).cwiseQuotient(f->op->singular_values().head(r));
    if (r < n_) {
      const MatrixXd& q = f->tilde_vectors;
      z.tail(n_ - r) = q * (q.transpose() * u.tail(n_ - r)).cwiseQuotient(f->tilde_root);
    }
    return f->op->svd_v() * z;
  }
  // Sherman-Morrison: the simplex working matrix is an involution; the capped
  // one has inverse I - e_i (1 - e_i)^T.
  const auto& wf = std::get<WorkingFactor>(factor_);
  if (wf.kind == WorkingSetKind::Simplex) return apply_m(u);
  VectorXd out = u;
  out(wf.active) = 2.0 * u(wf.active) - u.sum();
  return out;
}

VectorXd Preconditioner::solve_mt(const VectorXd& w) const {
  if (const auto* f = std::get_if<SvdFactor>(&factor_)) {
    if (f->op->is_identity()) return w;
    const VectorXd z = f->op->svd_v().transpose() * w;
    const Index r = f->lead;
    VectorXd out(n_);
    out.head(r) = f->op->svd_u() * z.head(r).cwiseQuotient(f->op->singular_values().head(r));
    if (r < n_) {
      const MatrixXd& q = f->tilde_vectors;
      out.tail(n_ - r) = q * (q.transpose() * z.tail(n_ - r)).cwiseQuotient(f->tilde_root);
    }
    return out;
  }
  const auto& wf = std::get<WorkingFactor>(factor_);
  if (wf.kind == WorkingSetKind::Simplex) return apply_mt(w);
  const double wi = w(wf.active);
  VectorXd out = w.array() - wi;
  out(wf.active) = wi;
  return out;
}

VectorXd Preconditioner::apply(const VectorXd& w) const {
  if (w.size() != n_) throw std::invalid_argument("Preconditioner::apply: dimension mismatch");
  return alpha_ * apply_mt(diag_.cwiseProduct(apply_m(w)));
}

VectorXd Preconditioner::apply_unit(const VectorXd& w) const {
  if (w.size() != n_) throw std::invalid_argument("Preconditioner::apply_unit: dimension mismatch");
  return apply_mt(diag_.cwiseProduct(apply_m(w)));
}

VectorXd Preconditioner::apply_inverse(const VectorXd& v) const {
  if (v.size() != n_) throw std::invalid_argument("Preconditioner::apply_inverse: dimension mismatch");
  return solve_m(solve_mt(v).cwiseQuotient(diag_)) / alpha_;
}

VectorXd Preconditioner::op(const VectorXd& x) const {
  if (const auto* f = std::get_if<SvdFactor>(&factor_)) return f->op->apply(x);
  return apply_m(x);
}

VectorXd Preconditioner::op_transpose(const VectorXd& y) const {
  if (const auto* f = std::get_if<SvdFactor>(&factor_)) return f->op->apply_transpose(y);
  return apply_mt(y);
}

VectorXd Preconditioner::dual_scale() const { return alpha_ * diag_.head(m_); }

std::pair<double, double> Preconditioner::spectral_bounds() const {
  return {alpha_ * diag_.minCoeff() * unit_min_, alpha_ * diag_.maxCoeff() * unit_max_};
}

MatrixXd Preconditioner::dense() const {
  MatrixXd p(n_, n_);
  for (Index j = 0; j < n_; ++j) p.col(j) = apply(VectorXd::Unit(n_, j));
  return 0.5 * (p + p.transpose());
}

Preconditioner bb_rescale(const Preconditioner& p, const VectorXd& step, const VectorXd& grad_diff, double alpha_lo,
                          double alpha_hi) {
  if (step.size() != p.dim() || grad_diff.size() != p.dim()) {
    throw std::invalid_argument("bb_rescale: dimension mismatch");
  }
  if (!(step.norm() > 0)) throw std::invalid_argument("bb_rescale: zero step");
  if (!(alpha_lo > 0) || alpha_lo > alpha_hi) throw std::invalid_argument("bb_rescale: bad clip interval");
  const double sy = step.dot(grad_diff);
  if (!(sy > 0)) return p;
  const double sps = step.dot(p.apply_unit(step));
  const double alpha = std::clamp(sy / sps, alpha_lo, alpha_hi);
  return p.rescaled(alpha);
}

}  // namespace p2gm
