#pragma once

#include <utility>
#include <vector>

#include "twr/linalg.hpp"

namespace twr {

// Dense third-order complex tensor stored as frontal slices.
class Tensor3 {
 public:
  Tensor3() = default;

  Tensor3(Index rows, Index cols, Index depth)
      : rows_(rows), cols_(cols), slices_(static_cast<std::size_t>(depth), CMat::Zero(rows, cols)) {
    if (rows < 1 || cols < 1 || depth < 1)
      throw std::invalid_argument("Tensor3: all dimensions must be positive");
  }

  explicit Tensor3(std::vector<CMat> slices) {
    if (slices.empty()) throw std::invalid_argument("Tensor3: needs at least one slice");
    rows_ = slices.front().rows();
    cols_ = slices.front().cols();
    if (rows_ < 1 || cols_ < 1) throw std::invalid_argument("Tensor3: slices must be non-empty");
    for (const CMat& s : slices)
      if (s.rows() != rows_ || s.cols() != cols_)
        throw std::invalid_argument("Tensor3: slices have inconsistent dimensions");
    slices_ = std::move(slices);
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index depth() const { return static_cast<Index>(slices_.size()); }

  const CMat& slice(Index k) const { return slices_.at(static_cast<std::size_t>(k)); }
  CMat& slice(Index k) { return slices_.at(static_cast<std::size_t>(k)); }

  double squared_norm() const {
    double acc = 0.0;
    for (const CMat& s : slices_) acc += s.squaredNorm();
    return acc;
  }
  double norm() const { return std::sqrt(squared_norm()); }

 private:
  Index rows_ = 0, cols_ = 0;
  std::vector<CMat> slices_;
};

// Mode-n unfolding with forward cyclic column ordering:
//   mode 1: rows x (cols*depth),   slices placed side by side
//   mode 2: cols x (rows*depth),   transposed slices side by side
//   mode 3: depth x (rows*cols),   row k = vec(slice k)^T
inline CMat mode_unfold(const Tensor3& t, int mode) {
  switch (mode) {
    case 1: {
      CMat out(t.rows(), t.cols() * t.depth());
      for (Index k = 0; k < t.depth(); ++k) out.middleCols(k * t.cols(), t.cols()) = t.slice(k);
      return out;
    }
    case 2: {
      CMat out(t.cols(), t.rows() * t.depth());
      for (Index k = 0; k < t.depth(); ++k)
        out.middleCols(k * t.rows(), t.rows()) = t.slice(k).transpose();
      return out;
    }
    case 3: {
      CMat out(t.depth(), t.rows() * t.cols());
      for (Index k = 0; k < t.depth(); ++k) out.row(k) = vec(t.slice(k)).transpose();
      return out;
    }
    default:
      throw std::invalid_argument("mode_unfold: mode must be 1, 2, or 3");
  }
}

// Mode-n product: the mode-n unfolding of the result equals m times the
// mode-n unfolding of t.
inline Tensor3 mode_multiply(const Tensor3& t, int mode, const CMat& m) {
  switch (mode) {
    case 1: {
      if (m.cols() != t.rows()) throw std::invalid_argument("mode_multiply: mode-1 size mismatch");
      Tensor3 out(m.rows(), t.cols(), t.depth());
      for (Index k = 0; k < t.depth(); ++k) out.slice(k) = m * t.slice(k);
      return out;
    }
    case 2: {
      if (m.cols() != t.cols()) throw std::invalid_argument("mode_multiply: mode-2 size mismatch");
      Tensor3 out(t.rows(), m.rows(), t.depth());
      for (Index k = 0; k < t.depth(); ++k) out.slice(k) = t.slice(k) * m.transpose();
      return out;
    }
    case 3: {
      if (m.cols() != t.depth()) throw std::invalid_argument("mode_multiply: mode-3 size mismatch");
      Tensor3 out(t.rows(), t.cols(), m.rows());
      for (Index i = 0; i < m.rows(); ++i) {
        CMat acc = CMat::Zero(t.rows(), t.cols());
        for (Index k = 0; k < t.depth(); ++k) acc += m(i, k) * t.slice(k);
        out.slice(i) = acc;
      }
      return out;
    }
    default:
      throw std::invalid_argument("mode_multiply: mode must be 1, 2, or 3");
  }
}

struct HosvdResult {
  Tensor3 core;  // t x1 u1^H x2 u2^H x3 u3^H
  CMat u1, u2, u3;
};

// Factor matrices are the left singular vectors of the three unfoldings.
inline HosvdResult hosvd(const Tensor3& t) {
  CMat u1 = svd(mode_unfold(t, 1)).u;
  CMat u2 = svd(mode_unfold(t, 2)).u;
  CMat u3 = svd(mode_unfold(t, 3)).u;
  Tensor3 core = mode_multiply(mode_multiply(mode_multiply(t, 1, u1.adjoint()), 2, u2.adjoint()),
                               3, u3.adjoint());
  return {std::move(core), std::move(u1), std::move(u2), std::move(u3)};
}

}  // namespace twr
