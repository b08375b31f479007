#pragma once

// Slow, independent reference computations for the test suites. Nothing in
// here calls into the solver's own closed forms.

#include "p2gm/problem.hpp"

#include <functional>
#include <optional>
#include <random>
#include <vector>

namespace p2gm::oracle {

VectorXd gaussian(Index n, std::mt19937_64& rng);
double uniform(double lo, double hi, std::mt19937_64& rng);
/// exp(uniform(log lo, log hi)).
double log_uniform(double lo, double hi, std::mt19937_64& rng);
Index uniform_index(Index lo, Index hi, std::mt19937_64& rng);  // inclusive
/// Uniform point of the unit simplex (normalized exponentials).
VectorXd random_simplex_point(Index n, std::mt19937_64& rng);
/// Q = U diag(logspace(1, kappa)) U^T with U from a Gaussian QR.
MatrixXd random_spd(Index n, double kappa, std::mt19937_64& rng);

/// Minimizer of 1/2 y^T D^{-1} y + g*(y) - a^T y by proximal gradient with
/// step min(D), run for exactly `steps` iterations from y = 0. g* is written
/// out per term from its definition as a support function.
VectorXd dual_by_prox_gradient(const NonsmoothTerm& term, const VectorXd& a, const VectorXd& d,
                               std::optional<Index> active, int steps = 100000);

/// Largest componentwise distance of a - D^{-1} y from the subdifferential
/// of g* at y (for the ellipsoid, the Euclidean distance of the whole
/// vector). Branches of the subdifferential are selected with tolerance
/// `tol` on y.
double dual_inclusion_residual(const NonsmoothTerm& term, const VectorXd& a, const VectorXd& d, const VectorXd& y,
                               std::optional<Index> active, double tol = 1e-12);

/// Golden-section search of a unimodal h on [lo, hi].
double golden_section(const std::function<double(double)>& h, double lo, double hi, int iterations = 200);

/// Dense grid on [lo, hi], then golden section on the two cells around the
/// best grid point.
double grid_golden_minimize(const std::function<double(double)>& h, double lo, double hi, int grid = 4000);

/// Box-and-sum domain {lo <= w <= hi, 1^T w (== or <=) sum}.
struct BoxSum {
  VectorXd lo;
  VectorXd hi;
  double sum = 1.0;
  bool sum_equal = true;
};

/// Unit simplex, with the lower bound of `free_index` dropped when given.
BoxSum simplex_domain(Index n, std::optional<Index> free_index = std::nullopt);
/// {0 <= w <= 1, 1^T w <= s}, the bounds of `free_index` dropped when given.
BoxSum capped_domain(Index n, double s, std::optional<Index> free_index = std::nullopt);

/// argmin 1/2 w^T H w + c^T w over `dom` (H SPD): best point of a grid with
/// spacing 1 / grid over the bounded part of the domain, then polished by
/// exact line minimization along the edge directions e_a - e_b (and e_a when
/// the sum is an inequality) until no move improves.
VectorXd box_sum_qp(const MatrixXd& h, const VectorXd& c, const BoxSum& dom, int grid = 24);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace p2gm::oracle
