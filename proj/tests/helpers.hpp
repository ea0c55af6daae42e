#pragma once

#include "twr/linalg.hpp"
#include "twr/rng.hpp"

namespace test {

inline twr::CMat random_complex(twr::Rng& rng, twr::Index rows, twr::Index cols) {
  twr::CMat m(rows, cols);
  for (twr::Index j = 0; j < cols; ++j)
    for (twr::Index i = 0; i < rows; ++i) m(i, j) = rng.complex_gaussian(1.0);
  return m;
}

inline twr::RVec random_real(twr::Rng& rng, twr::Index n) {
  twr::RVec v(n);
  for (twr::Index i = 0; i < n; ++i) v(i) = rng.gaussian();
  return v;
}

inline double rel_error(const twr::CMat& got, const twr::CMat& want) {
  return (got - want).norm() / std::max(want.norm(), 1e-300);
}

// Largest principal angle between the column spans of two orthonormal bases.
inline double max_principal_angle(const twr::CMat& a, const twr::CMat& b) {
  const twr::RVec s = Eigen::JacobiSVD<twr::CMat>(a.adjoint() * b).singularValues();
  const double c = std::min(1.0, s(s.size() - 1));
  return std::acos(c);
}

}  // namespace test
