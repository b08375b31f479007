#pragma once

#include "p2gm/problem.hpp"

#include <optional>
#include <utility>

namespace p2gm {

enum class WorkingSetKind { Simplex, CappedSimplex };

/// Metric P = alpha * M^T D M with A P^{-1} A^T = (alpha D)^{-1} on the dual
/// coordinates.
///
/// Two factorizations are supported. The operator form builds M from the
/// cached SVD of a LinearMap: M = A for square full-rank A, and
/// M = [U Sigma, 0; 0, Ptilde^{1/2}] V^T for full-row-rank A. The working-set
/// form uses the rank-one working matrices of the simplex and capped simplex,
/// M = A_k, whose inverses are applied in closed form. Neither form ever
/// builds or inverts P densely.
class Preconditioner {
 public:
  /// Throws std::invalid_argument for a full-column-rank A with m > n (then
  /// A P^{-1} A^T is a projector, not the identity) or a bad Ptilde.
  static Preconditioner from_operator(std::shared_ptr<const LinearMap> op,
                                      std::optional<MatrixXd> tilde_p = std::nullopt);

  /// Working matrix A_k with the sum row at `active`.
  static Preconditioner working_set(WorkingSetKind kind, Index n, Index active);

  /// Same factor, new scalar alpha.
  Preconditioner rescaled(double alpha) const;

  /// Same factor, diagonal D with every entry in [d_lo, d_hi], d_lo > 0.
  Preconditioner with_diagonal(VectorXd d, double d_lo, double d_hi) const;

  Index dim() const { return n_; }
  /// Number of dual coordinates m (rows of the dual operator).
  Index dual_dim() const { return m_; }
  double scale() const { return alpha_; }
  const VectorXd& diagonal() const { return diag_; }
  std::optional<Index> active_index() const;
  std::optional<WorkingSetKind> working_set_kind() const;

  VectorXd apply(const VectorXd& w) const;
  VectorXd apply_inverse(const VectorXd& v) const;
  /// M^T D M w, the metric at unit scale.
  VectorXd apply_unit(const VectorXd& w) const;
  double inner(const VectorXd& u, const VectorXd& w) const { return u.dot(apply(w)); }
  double norm_sq(const VectorXd& w) const { return inner(w, w); }

  /// The operator whose dual is diagonalised: A for the operator form, A_k
  /// for the working-set form.
  VectorXd op(const VectorXd& x) const;
  VectorXd op_transpose(const VectorXd& y) const;

  /// Diagonal of (A P^{-1} A^T)^{-1}: alpha times the leading m entries of D.
  VectorXd dual_scale() const;

  /// (c3, c4) with c3 I <= P <= c4 I.
  std::pair<double, double> spectral_bounds() const;

  /// Dense P, for tests and small diagnostics.
  MatrixXd dense() const;

 private:
  // No default member initializers here: they would make the variant below
  // non-default-constructible inside the enclosing class.
  struct SvdFactor {
    std::shared_ptr<const LinearMap> op;
    Index lead;                  // size of the U Sigma block
    MatrixXd tilde_vectors;      // eigenvectors of Ptilde
    VectorXd tilde_root;         // sqrt of eigenvalues of Ptilde
  };
  struct WorkingFactor {
    WorkingSetKind kind;
    Index active;
  };

  VectorXd apply_m(const VectorXd& w) const;
  VectorXd apply_mt(const VectorXd& u) const;
  VectorXd solve_m(const VectorXd& u) const;
  VectorXd solve_mt(const VectorXd& w) const;

  std::variant<SvdFactor, WorkingFactor> factor_;
  Index n_ = 0;
  Index m_ = 0;
  double alpha_ = 1.0;
  VectorXd diag_;
  double unit_min_ = 1.0;  // extreme eigenvalues of M^T M
  double unit_max_ = 1.0;
};

/// Barzilai-Borwein rescaling in the unit-scale P-geometry:
/// alpha = clamp(<s, y> / <s, P1 s>, lo, hi); keeps the previous alpha when
/// <s, y> <= 0.
Preconditioner bb_rescale(const Preconditioner& p, const VectorXd& step, const VectorXd& grad_diff,
                          double alpha_lo = 1e-8, double alpha_hi = 1e8);

}  // namespace p2gm
