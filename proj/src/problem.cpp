#include "p2gm/problem.hpp"

#include <cmath>

namespace p2gm {

namespace {

constexpr double kRankTol = 1e-12;

void check_dim(Index got, Index want, const char* what) {
  if (got != want) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (got " + std::to_string(got) +
                                ", expected " + std::to_string(want) + ")");
  }
}

bool within_domain(const NonsmoothTerm& term, const VectorXd& z, double tol) {
  return std::visit(
      [&](const auto& t) -> bool {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, L1Norm>) {
          return true;
        } else if constexpr (std::is_same_v<T, EllipsoidIndicator>) {
          return z.norm() <= std::sqrt(t.b) + tol;
        } else if constexpr (std::is_same_v<T, SimplexConstraint>) {
          return z.minCoeff() >= -tol && std::abs(z.sum() - 1.0) <= tol;
        } else if constexpr (std::is_same_v<T, CappedSimplex>) {
          return z.minCoeff() >= -tol && z.maxCoeff() <= 1.0 + tol && z.sum() <= t.s + tol;
        } else {
          const Index p = t.upper.size();
          const Index q = t.equal.size();
          for (Index j = 0; j < p; ++j) {
            if (z(j) > t.upper(j) + tol) return false;
          }
          for (Index j = 0; j < q; ++j) {
            if (std::abs(z(p + j) - t.equal(j)) > tol) return false;
          }
          return true;
        }
      },
      term);
}

}  // namespace

LinearMap::LinearMap(MatrixXd entries) : entries_(std::move(entries)) {
  const Index m = entries_.rows();
  const Index n = entries_.cols();
  if (m < 1 || n < 1) throw std::invalid_argument("LinearMap: empty matrix");
  if (!entries_.allFinite()) throw std::invalid_argument("LinearMap: non-finite entries");

  Eigen::BDCSVD<MatrixXd> svd(entries_, Eigen::ComputeFullU | Eigen::ComputeFullV);
  u_ = svd.matrixU();
  sigma_ = svd.singularValues();
  v_ = svd.matrixV();

  const double smax = sigma_.size() > 0 ? sigma_(0) : 0.0;
  Index rank = 0;
  for (Index i = 0; i < sigma_.size(); ++i) {
    if (sigma_(i) > kRankTol * smax) ++rank;
  }
  if (rank == n) {
    rank_class_ = RankClass::FullColumn;
  } else if (rank == m && m < n) {
    rank_class_ = RankClass::FullRow;
  } else {
    throw std::invalid_argument("LinearMap: operator is rank deficient (rank " + std::to_string(rank) + " for " +
                                std::to_string(m) + "x" + std::to_string(n) + ")");
  }
}

LinearMap LinearMap::identity(Index n) {
  if (n < 1) throw std::invalid_argument("LinearMap::identity: n must be positive");
  LinearMap map;
  map.entries_ = MatrixXd::Identity(n, n);
  map.u_ = MatrixXd::Identity(n, n);
  map.sigma_ = VectorXd::Ones(n);
  map.v_ = MatrixXd::Identity(n, n);
  map.rank_class_ = RankClass::FullColumn;
  map.identity_ = true;
  return map;
}

VectorXd LinearMap::apply(const VectorXd& x) const {
  check_dim(x.size(), cols(), "LinearMap::apply");
  if (identity_) return x;
  return entries_ * x;
}

VectorXd LinearMap::apply_transpose(const VectorXd& y) const {
  check_dim(y.size(), rows(), "LinearMap::apply_transpose");
  if (identity_) return y;
  return entries_.transpose() * y;
}

SmoothOracle quadratic_oracle(MatrixXd q, VectorXd c) {
  if (q.rows() != q.cols() || q.rows() != c.size()) {
    throw std::invalid_argument("quadratic_oracle: Q must be n x n and c length n");
  }
  auto qp = std::make_shared<const MatrixXd>(std::move(q));
  auto cp = std::make_shared<const VectorXd>(std::move(c));
  SmoothOracle f;
  f.dim = cp->size();
  f.value = [qp, cp](const VectorXd& x) { return 0.5 * x.dot(*qp * x) + cp->dot(x); };
  f.gradient = [qp, cp](const VectorXd& x) -> VectorXd { return *qp * x + *cp; };
  f.hessian_exact = [qp](const VectorXd&) -> MatrixXd { return *qp; };
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(*qp, Eigen::EigenvaluesOnly);
  f.lipschitz_hint = eig.eigenvalues().cwiseAbs().maxCoeff();
  return f;
}

SmoothOracle least_squares_oracle(MatrixXd a, VectorXd b) {
  if (a.rows() != b.size()) throw std::invalid_argument("least_squares_oracle: A and b disagree");
  auto ap = std::make_shared<const MatrixXd>(std::move(a));
  auto bp = std::make_shared<const VectorXd>(std::move(b));
  auto gram = std::make_shared<const MatrixXd>(ap->transpose() * *ap);
  auto atb = std::make_shared<const VectorXd>(ap->transpose() * *bp);
  SmoothOracle f;
  f.dim = ap->cols();
  f.value = [ap, bp](const VectorXd& x) { return 0.5 * (*ap * x - *bp).squaredNorm(); };
  f.gradient = [gram, atb](const VectorXd& x) -> VectorXd { return *gram * x - *atb; };
  f.hessian_exact = [gram](const VectorXd&) -> MatrixXd { return *gram; };
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(*gram, Eigen::EigenvaluesOnly);
  f.lipschitz_hint = eig.eigenvalues().maxCoeff();
  return f;
}

Index argmax_coordinate(const VectorXd& x) {
  Index best = 0;
  x.maxCoeff(&best);
  return best;
}

bool is_indicator(const NonsmoothTerm& term) { return !std::holds_alternative<L1Norm>(term); }

bool uses_working_matrix(const NonsmoothTerm& term) {
  return std::holds_alternative<SimplexConstraint>(term) || std::holds_alternative<CappedSimplex>(term);
}

std::string term_name(const NonsmoothTerm& term) {
  return std::visit(
      [](const auto& t) -> std::string {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, L1Norm>) return "l1";
        else if constexpr (std::is_same_v<T, EllipsoidIndicator>) return "ellipsoid";
        else if constexpr (std::is_same_v<T, SimplexConstraint>) return "simplex";
        else if constexpr (std::is_same_v<T, CappedSimplex>) return "capped-simplex";
        else return "working-set";
      },
      term);
}

CompositeProblem::CompositeProblem(SmoothOracle smooth_in, std::shared_ptr<const LinearMap> op_in,
                                   NonsmoothTerm term)
    : smooth(std::move(smooth_in)), op(std::move(op_in)), nonsmooth(std::move(term)) {
  if (!smooth.value || !smooth.gradient) throw std::invalid_argument("CompositeProblem: oracle incomplete");
  if (!op) op = std::make_shared<const LinearMap>(LinearMap::identity(smooth.dim));
  check_dim(op->cols(), smooth.dim, "CompositeProblem operator");
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, L1Norm>) {
          if (!(t.lambda > 0)) throw std::invalid_argument("L1Norm: lambda must be positive");
        } else if constexpr (std::is_same_v<T, EllipsoidIndicator>) {
          if (!(t.b > 0)) throw std::invalid_argument("EllipsoidIndicator: b must be positive");
        } else if constexpr (std::is_same_v<T, CappedSimplex>) {
          if (!(t.s > 0)) throw std::invalid_argument("CappedSimplex: s must be positive");
        } else if constexpr (std::is_same_v<T, GenericWorkingSet>) {
          check_dim(t.upper.size() + t.equal.size(), op->rows(), "GenericWorkingSet right-hand sides");
          if (op->rank_class() != RankClass::FullRow && op->rows() != op->cols()) {
            throw std::invalid_argument("GenericWorkingSet: working matrix must have full row rank");
          }
        }
      },
      nonsmooth);
  if (uses_working_matrix(nonsmooth) && !op->is_identity()) {
    throw std::invalid_argument("simplex-type constraints act on x directly; use the identity operator");
  }
}

VectorXd map_point(const CompositeProblem& problem, const VectorXd& x) { return problem.op->apply(x); }

double eval_nonsmooth(const CompositeProblem& problem, const VectorXd& ax) {
  if (const auto* l1 = std::get_if<L1Norm>(&problem.nonsmooth)) return l1->lambda * ax.lpNorm<1>();
  return within_domain(problem.nonsmooth, ax, kFeasibilityTol) ? 0.0 : kInfinity;
}

double eval_objective(const CompositeProblem& problem, const VectorXd& x) {
  check_dim(x.size(), problem.dim(), "eval_objective");
  const double g = eval_nonsmooth(problem, map_point(problem, x));
  if (std::isinf(g)) return kInfinity;
  return problem.smooth.value(x) + g;
}

VectorXd eval_gradient(const CompositeProblem& problem, const VectorXd& x) {
  check_dim(x.size(), problem.dim(), "eval_gradient");
  return problem.smooth.gradient(x);
}

bool domain_contains(const CompositeProblem& problem, const VectorXd& x, double tol) {
  check_dim(x.size(), problem.dim(), "domain_contains");
  return within_domain(problem.nonsmooth, map_point(problem, x), tol);
}

}  // namespace p2gm
