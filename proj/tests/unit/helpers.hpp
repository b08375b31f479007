#pragma once

#include "p2gm/problem.hpp"

#include <doctest.h>

#include <initializer_list>
#include <memory>

namespace p2gm::test {

inline VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

inline MatrixXd diag(std::initializer_list<double> xs) { return vec(xs).asDiagonal(); }

inline std::shared_ptr<const LinearMap> op(const MatrixXd& a) { return std::make_shared<const LinearMap>(a); }

/// f(x) = 1/2 ||x - center||^2, with no constant offset.
inline SmoothOracle shifted_norm(const VectorXd& center) {
  return least_squares_oracle(MatrixXd::Identity(center.size(), center.size()), center);
}

inline double max_abs(const MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace p2gm::test
