#include "helpers.hpp"
#include "oracles.hpp"

#include "p2gm/dualprox.hpp"

#include <cmath>

using namespace p2gm;
using namespace p2gm::test;

namespace {

MatrixXd random_matrix(Index m, Index n, std::mt19937_64& rng) {
  MatrixXd a(m, n);
  for (Index j = 0; j < n; ++j) a.col(j) = oracle::gaussian(m, rng);
  return a;
}

}  // namespace

TEST_SUITE("dualprox") {
  TEST_CASE("dual_coefficient examples") {
    MatrixXd a(2, 3);
    a << 3, 0, 0, 0, 2, 0;
    const auto p = Preconditioner::from_operator(op(a));
    const VectorXd x = vec({1, 0, 0});
    CHECK(max_abs(dual_coefficient(x, VectorXd::Zero(3), p) - a * x) < 1e-15);
    CHECK(max_abs(dual_coefficient(x, vec({9, 0, 0}), p)) < 1e-14);

    const auto id = Preconditioner::from_operator(std::make_shared<const LinearMap>(LinearMap::identity(2)));
    CHECK(max_abs(dual_coefficient(VectorXd::Zero(2), vec({2, -0.3}), id) - vec({-2, 0.3})) < 1e-15);
  }

  TEST_CASE("closed-form duals on the worked examples") {
    const VectorXd ones3 = VectorXd::Ones(3);
    CHECK(max_abs(solve_dual(L1Norm{1.0}, vec({2, -0.5, -3}), ones3) - vec({1, -0.5, -1})) < 1e-15);
    CHECK(max_abs(solve_dual(SimplexConstraint{}, vec({-1, 0.3, 2}), ones3, 1) - vec({0, -0.7, 2})) < 1e-15);
    CHECK(max_abs(solve_dual(CappedSimplex{1.0}, vec({1.5, 2.3, -0.4, 0.7}), VectorXd::Ones(4), 1) -
                  vec({0.5, 1.3, -0.4, 0})) < 1e-15);
    // g* = 2 ||y||: y = a - Pi_{B[0, 2]}(a) = (3, 4) (1 - 2 / 5).
    CHECK(max_abs(solve_dual(EllipsoidIndicator{4.0}, vec({3, 4}), VectorXd::Ones(2)) - vec({1.8, 2.4})) < 1e-15);
    CHECK(max_abs(solve_dual(EllipsoidIndicator{4.0}, vec({1, 1}), VectorXd::Ones(2))) == 0.0);
  }

  TEST_CASE("worked examples satisfy the dual optimality inclusion") {
    CHECK(oracle::dual_inclusion_residual(SimplexConstraint{}, vec({-1, 0.3, 2}), VectorXd::Ones(3), vec({0, -0.7, 2}),
                                          1) < 1e-12);
    CHECK(oracle::dual_inclusion_residual(CappedSimplex{1.0}, vec({1.5, 2.3, -0.4, 0.7}), VectorXd::Ones(4),
                                          vec({0.5, 1.3, -0.4, 0}), 1) < 1e-12);
    CHECK(oracle::dual_inclusion_residual(EllipsoidIndicator{4.0}, vec({3, 4}), VectorXd::Ones(2), vec({1.8, 2.4}),
                                          std::nullopt) < 1e-12);
  }

  TEST_CASE("closed forms agree with iterative dual minimization on random data") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 8; ++trial) {
      const Index m = oracle::uniform_index(2, 6, rng);
      const VectorXd a = 2 * oracle::gaussian(m, rng);
      VectorXd d(m);
      for (Index j = 0; j < m; ++j) d(j) = oracle::uniform(0.5, 3.0, rng);
      const Index i = oracle::uniform_index(0, m - 1, rng);
      const std::vector<std::pair<NonsmoothTerm, std::optional<Index>>> cases = {
          {L1Norm{0.7}, std::nullopt}, {SimplexConstraint{}, i}, {CappedSimplex{1.5}, i}};
      for (const auto& [term, active] : cases) {
        const VectorXd y = solve_dual(term, a, d, active);
        const VectorXd ref = oracle::dual_by_prox_gradient(term, a, d, active, 20000);
        CHECK((y - ref).lpNorm<Eigen::Infinity>() < 1e-8);
      }
      const VectorXd scalar = VectorXd::Constant(m, d(0));
      const VectorXd y = solve_dual(EllipsoidIndicator{0.8}, a, scalar);
      const VectorXd ref = oracle::dual_by_prox_gradient(EllipsoidIndicator{0.8}, a, scalar, std::nullopt, 20000);
      CHECK((y - ref).lpNorm<Eigen::Infinity>() < 1e-8);
    }
  }

  TEST_CASE("solve_dual rejects bad input") {
    CHECK_THROWS_AS(solve_dual(L1Norm{1.0}, vec({1, 2}), vec({1, 0})), std::invalid_argument);
    CHECK_THROWS_AS(solve_dual(L1Norm{1.0}, vec({1, 2}), vec({1})), std::invalid_argument);
    CHECK_THROWS_AS(solve_dual(SimplexConstraint{}, vec({1, 2}), vec({1, 1})), std::invalid_argument);
    CHECK_THROWS_AS(solve_dual(SimplexConstraint{}, vec({1, 2}), vec({1, 1}), 2), std::invalid_argument);
    CHECK_THROWS_AS(solve_dual(EllipsoidIndicator{1.0}, vec({1, 2}), vec({1, 2})), std::invalid_argument);
  }

  TEST_CASE("prox_direction: l1 soft-threshold step") {
    const CompositeProblem prob(shifted_norm(VectorXd::Zero(2)), nullptr, L1Norm{1.0});
    const VectorXd x = VectorXd::Zero(2);
    const auto p = make_preconditioner(prob, x);
    const auto sol = prox_direction(prob, x, vec({2, -0.3}), p);
    CHECK(max_abs(sol.v - vec({-1, 0})) < 1e-15);
  }

  TEST_CASE("prox_direction: zero gradient at an interior point gives v = 0") {
    const CompositeProblem simplex(shifted_norm(VectorXd::Zero(3)), nullptr, SimplexConstraint{});
    const VectorXd x = vec({0.2, 0.5, 0.3});
    CHECK(prox_direction(simplex, x, VectorXd::Zero(3), make_preconditioner(simplex, x, 4.0)).v.norm() < 1e-15);
    const CompositeProblem capped(shifted_norm(VectorXd::Zero(3)), nullptr, CappedSimplex{2.0});
    CHECK(prox_direction(capped, x, VectorXd::Zero(3), make_preconditioner(capped, x, 0.3)).v.norm() < 1e-15);
    const CompositeProblem ball(shifted_norm(VectorXd::Zero(3)), nullptr, EllipsoidIndicator{1.0});
    CHECK(prox_direction(ball, x, VectorXd::Zero(3), make_preconditioner(ball, x, 2.0)).v.norm() < 1e-15);
  }

  TEST_CASE("prox_direction on the simplex matches a brute-force metric QP") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 20; ++trial) {
      const MatrixXd q = oracle::random_spd(3, 20.0, rng);
      const CompositeProblem prob(quadratic_oracle(q, oracle::gaussian(3, rng)), nullptr, SimplexConstraint{});
      const VectorXd x = oracle::random_simplex_point(3, rng);
      const auto p = make_preconditioner(prob, x, oracle::log_uniform(0.3, 30.0, rng));
      const VectorXd grad = eval_gradient(prob, x);
      const auto sol = prox_direction(prob, x, grad, p);
      // min_w grad^T (w - x) + 1/2 ||w - x||_P^2 over the working domain.
      const MatrixXd h = p.dense();
      const VectorXd w = oracle::box_sum_qp(h, grad - h * x, oracle::simplex_domain(3, *p.active_index()));
      CHECK((x + sol.v - w).lpNorm<Eigen::Infinity>() < 1e-6);
    }
  }

  TEST_CASE("sufficient-decrease bound of the prox step") {
    // grad^T v + g(A(x + v)) - g(A x) <= -||v||_P^2 by strong convexity.
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 30; ++trial) {
      const Index n = 8;
      const Index m = 3;
      const MatrixXd a = random_matrix(m, n, rng);
      const CompositeProblem l1(quadratic_oracle(oracle::random_spd(n, 50.0, rng), oracle::gaussian(n, rng)), op(a),
                                L1Norm{0.4});
      const VectorXd x = oracle::gaussian(n, rng);
      const auto p = make_preconditioner(l1, x, oracle::log_uniform(0.1, 10.0, rng));
      const VectorXd grad = eval_gradient(l1, x);
      const auto sol = prox_direction(l1, x, grad, p);
      const double dec = grad.dot(sol.v) + eval_nonsmooth(l1, map_point(l1, x + sol.v)) -
                         eval_nonsmooth(l1, map_point(l1, x));
      CHECK(dec <= -p.norm_sq(sol.v) * (1 - 1e-10) + 1e-12);

      const CompositeProblem simplex(quadratic_oracle(oracle::random_spd(n, 50.0, rng), oracle::gaussian(n, rng)),
                                     nullptr, SimplexConstraint{});
      const VectorXd xs = oracle::random_simplex_point(n, rng);
      const auto ps = make_preconditioner(simplex, xs, oracle::log_uniform(0.1, 10.0, rng));
      const VectorXd gs = eval_gradient(simplex, xs);
      const auto ss = prox_direction(simplex, xs, gs, ps);
      CHECK(gs.dot(ss.v) <= -ps.norm_sq(ss.v) * (1 - 1e-10) + 1e-12);
      CHECK(std::abs((xs + ss.v).sum() - 1.0) < 1e-12);
      for (Index j = 0; j < n; ++j) {
        if (j != *ps.active_index()) CHECK(xs(j) + ss.v(j) >= -1e-14);
      }
    }
  }

  TEST_CASE("primal recovery: A (x + v) lies in the ellipsoid") {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 20; ++trial) {
      const MatrixXd a = random_matrix(4, 4, rng);
      const CompositeProblem prob(quadratic_oracle(oracle::random_spd(4, 10.0, rng), 5 * oracle::gaussian(4, rng)),
                                  op(a), EllipsoidIndicator{2.0});
      const VectorXd x = VectorXd::Zero(4);
      const auto p = make_preconditioner(prob, x, 1.0);
      const auto sol = prox_direction(prob, x, eval_gradient(prob, x), p);
      CHECK((a * (x + sol.v)).norm() <= std::sqrt(2.0) + 1e-12);
    }
  }

  TEST_CASE("precond_project") {
    const CompositeProblem simplex(shifted_norm(VectorXd::Zero(3)), nullptr, SimplexConstraint{});
    const VectorXd feasible = vec({0.2, 0.3, 0.5});
    const auto p_feas = make_preconditioner(simplex, feasible, 1.0);
    CHECK(max_abs(precond_project(simplex, p_feas, feasible) - feasible) < 1e-15);

    const VectorXd z = vec({0, 0, 2});
    const auto p = make_preconditioner(simplex, z, 1.0);
    const VectorXd w = precond_project(simplex, p, z);
    const MatrixXd h = p.dense();
    const VectorXd ref = oracle::box_sum_qp(h, -h * z, oracle::simplex_domain(3, *p.active_index()));
    CHECK((w - ref).lpNorm<Eigen::Infinity>() < 1e-8);
    CHECK(std::abs(w.sum() - 1.0) < 1e-14);

    const CompositeProblem l1(shifted_norm(VectorXd::Zero(3)), nullptr, L1Norm{1.0});
    CHECK(max_abs(precond_project(l1, make_preconditioner(l1, z), z) - z) == 0.0);
  }

  TEST_CASE("metric form must match the term") {
    const CompositeProblem simplex(shifted_norm(VectorXd::Zero(3)), nullptr, SimplexConstraint{});
    const auto wrong = Preconditioner::from_operator(std::make_shared<const LinearMap>(LinearMap::identity(3)));
    CHECK_THROWS_AS(prox_direction(simplex, vec({1, 0, 0}), VectorXd::Zero(3), wrong), std::invalid_argument);
    const CompositeProblem capped(shifted_norm(VectorXd::Zero(3)), nullptr, CappedSimplex{1.0});
    CHECK_THROWS_AS(prox_direction(capped, vec({0.1, 0, 0}), VectorXd::Zero(3),
                                   Preconditioner::working_set(WorkingSetKind::Simplex, 3, 0)),
                    std::invalid_argument);
  }
}
