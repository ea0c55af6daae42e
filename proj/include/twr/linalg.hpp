#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <complex>
#include <stdexcept>
#include <string>

namespace twr {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Index = Eigen::Index;

// Column-major stacking: entry (i, j) of m lands at position j * rows + i.
inline CVec vec(const CMat& m) { return m.reshaped(); }

inline CMat unvec(const CVec& v, Index rows, Index cols) {
  if (rows < 1 || cols < 1 || v.size() != rows * cols)
    throw std::invalid_argument("unvec: vector of length " + std::to_string(v.size()) +
                                " cannot fill a " + std::to_string(rows) + "x" +
                                std::to_string(cols) + " matrix");
  return v.reshaped(rows, cols);
}

inline CMat kron(const CMat& a, const CMat& b) {
  return Eigen::kroneckerProduct(a, b);
}

// Column-wise Kronecker product; both factors must have the same column count.
inline CMat khatri_rao(const CMat& a, const CMat& b) {
  if (a.cols() != b.cols())
    throw std::invalid_argument("khatri_rao: column counts differ (" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.cols()) + ")");
  CMat out(a.rows() * b.rows(), a.cols());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      out.col(j).segment(i * b.rows(), b.rows()) = a(i, j) * b.col(j);
  return out;
}

// Rotates each column of u so that its first entry with magnitude above tol is
// real and nonnegative. When v is given, its columns absorb the conjugate
// rotation, leaving u * diag(s) * v^H unchanged. This pins the phase gauge so
// repeated factorizations of the same matrix are reproducible.
inline void fix_column_phases(CMat& u, CMat* v = nullptr, double tol = 1e-12) {
  for (Index j = 0; j < u.cols(); ++j) {
    for (Index i = 0; i < u.rows(); ++i) {
      const double mag = std::abs(u(i, j));
      if (mag > tol) {
        const Complex rot = std::conj(u(i, j)) / mag;
        u.col(j) *= rot;
        if (v != nullptr && j < v->cols()) v->col(j) *= rot;
        break;
      }
    }
  }
}

struct SvdResult {
  CMat u;   // orthonormal columns
  RVec s;   // descending, nonnegative
  CMat v;   // orthonormal columns; a = u * s.asDiagonal() * v^H
};

// Thin SVD with a deterministic phase gauge (see fix_column_phases).
inline SvdResult svd(const CMat& a) {
  Eigen::JacobiSVD<CMat> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdResult r{dec.matrixU(), dec.singularValues(), dec.matrixV()};
  fix_column_phases(r.u, &r.v);
  return r;
}

inline Index numerical_rank(const CMat& a, double rel_tol = 1e-8) {
  const RVec s = Eigen::JacobiSVD<CMat>(a).singularValues();
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++rank;
  return rank;
}

// Moore-Penrose pseudo-inverse; singular values below rel_tol * s_max are
// treated as zero.
inline CMat pinv(const CMat& a, double rel_tol = 1e-12) {
  const SvdResult d = svd(a);
  RVec inv = RVec::Zero(d.s.size());
  const double cut = d.s.size() > 0 ? rel_tol * d.s(0) : 0.0;
  for (Index i = 0; i < d.s.size(); ++i)
    if (d.s(i) > cut) inv(i) = 1.0 / d.s(i);
  return d.v * inv.asDiagonal() * d.u.adjoint();
}

}  // namespace twr
