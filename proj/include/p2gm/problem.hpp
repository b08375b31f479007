#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

namespace p2gm {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Absolute tolerance used when testing membership in dom(g o A).
inline constexpr double kFeasibilityTol = 1e-10;

enum class RankClass { FullColumn, FullRow };

/// Dense operator with its full SVD cached at construction.
///
/// A = U diag(sigma) V^T with U (m x m), V (n x n). The operator must have
/// full column rank (rank n) or full row rank (rank m < n); anything else is
/// rejected with std::invalid_argument. Singular values below
/// 1e-12 * sigma_max are treated as zero.
class LinearMap {
 public:
  explicit LinearMap(MatrixXd entries);

  /// Identity on R^n with trivial factors; applications short-circuit.
  static LinearMap identity(Index n);

  Index rows() const { return entries_.rows(); }
  Index cols() const { return entries_.cols(); }
  const MatrixXd& matrix() const { return entries_; }
  const MatrixXd& svd_u() const { return u_; }
  const VectorXd& singular_values() const { return sigma_; }
  const MatrixXd& svd_v() const { return v_; }
  RankClass rank_class() const { return rank_class_; }
  bool is_identity() const { return identity_; }

  VectorXd apply(const VectorXd& x) const;
  VectorXd apply_transpose(const VectorXd& y) const;

 private:
  LinearMap() = default;

  MatrixXd entries_;
  MatrixXd u_;
  VectorXd sigma_;
  MatrixXd v_;
  RankClass rank_class_ = RankClass::FullColumn;
  bool identity_ = false;
};

/// Smooth part f of F = f + g(A .).
struct SmoothOracle {
  Index dim = 0;
  std::function<double(const VectorXd&)> value;
  std::function<VectorXd(const VectorXd&)> gradient;
  /// Exact Hessian, used by tests and the exact-curvature solver mode.
  std::function<MatrixXd(const VectorXd&)> hessian_exact;
  std::optional<double> lipschitz_hint;
};

/// f(x) = 1/2 x^T Q x + c^T x.
SmoothOracle quadratic_oracle(MatrixXd q, VectorXd c);

/// f(x) = 1/2 ||A x - b||^2. Gradients use the cached Gram matrix A^T A.
SmoothOracle least_squares_oracle(MatrixXd a, VectorXd b);

/// Picks the working index i_k for the simplex-type working matrices.
using WorkingIndexPolicy = std::function<Index(const VectorXd& x)>;

/// Default policy: the largest coordinate (lowest index on ties).
Index argmax_coordinate(const VectorXd& x);

/// g(z) = lambda ||z||_1.
struct L1Norm {
  double lambda = 1.0;
};

/// g(z) = indicator of {||z||_2 <= sqrt(b)}.
struct EllipsoidIndicator {
  double b = 1.0;
};

/// x in the unit simplex; the working matrix replaces row i_k of -I by 1^T.
struct SimplexConstraint {
  WorkingIndexPolicy policy = argmax_coordinate;
};

/// 0 <= x <= 1, 1^T x <= s; the working matrix replaces row i_k of I by 1^T.
struct CappedSimplex {
  double s = 1.0;
  WorkingIndexPolicy policy = argmax_coordinate;
};

/// Caller-supplied full-row-rank working matrix (the problem operator):
/// rows [0, p) satisfy (A x)_j <= upper_j, rows [p, p + q) satisfy
/// (A x)_j = equal_j.
struct GenericWorkingSet {
  VectorXd upper;
  VectorXd equal;
};

using NonsmoothTerm = std::variant<L1Norm, EllipsoidIndicator, SimplexConstraint, CappedSimplex,
                                   GenericWorkingSet>;

/// True for the variants whose g is an indicator function.
bool is_indicator(const NonsmoothTerm& term);

/// True for the simplex-type variants whose working matrix changes with x.
bool uses_working_matrix(const NonsmoothTerm& term);

std::string term_name(const NonsmoothTerm& term);

/// F(x) = f(x) + g(A x). Simplex-type variants use the identity operator;
/// their working matrix is built per iteration.
struct CompositeProblem {
  SmoothOracle smooth;
  std::shared_ptr<const LinearMap> op;
  NonsmoothTerm nonsmooth;

  CompositeProblem(SmoothOracle smooth, std::shared_ptr<const LinearMap> op, NonsmoothTerm term);

  Index dim() const { return smooth.dim; }
};

/// g evaluated at z = A x (already mapped), honouring the feasibility tolerance.
double eval_nonsmooth(const CompositeProblem& problem, const VectorXd& ax);

double eval_objective(const CompositeProblem& problem, const VectorXd& x);
VectorXd eval_gradient(const CompositeProblem& problem, const VectorXd& x);
bool domain_contains(const CompositeProblem& problem, const VectorXd& x, double tol = kFeasibilityTol);

/// The operator image used by g: A x, or x itself for simplex-type variants.
VectorXd map_point(const CompositeProblem& problem, const VectorXd& x);

}  // namespace p2gm
