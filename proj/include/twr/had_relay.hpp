#pragma once

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "twr/linalg.hpp"
#include "twr/rng.hpp"
#include "twr/tensor.hpp"

namespace twr {

// Entrywise projection onto the unit-modulus set; exact zeros map to 1.
inline CMat unit_modulus_project(const CMat& m) {
  CMat out(m.rows(), m.cols());
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) {
      const double mag = std::abs(m(i, j));
      out(i, j) = mag == 0.0 ? Complex(1.0, 0.0) : m(i, j) / mag;
    }
  return out;
}

inline CVec unit_modulus_project(const CVec& v) {
  CVec out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v(i));
    out(i) = mag == 0.0 ? Complex(1.0, 0.0) : v(i) / mag;
  }
  return out;
}

// Stacks per-subcarrier fully-digital gain matrices into a third-order tensor.
inline Tensor3 stack_fd_tensor(const std::vector<CMat>& slices) { return Tensor3(slices); }

// Hybrid analog-digital relay factorization G_k = beta_k * A_tx * B_k * A_rx^T
// with unit-modulus analog factors shared across subcarriers.
struct HadRelayDesign {
  CMat analog_tx;              // relay_dim x num_rf
  CMat analog_rx;              // relay_dim x num_rf
  std::vector<CMat> baseband;  // num_rf x num_rf, one per subcarrier
  std::vector<double> beta;    // per-subcarrier scale, 1 until normalized
  std::string method;
};

inline CMat compose_had(const HadRelayDesign& d, int k) {
  if (k < 0 || k >= static_cast<int>(d.baseband.size()))
    throw std::invalid_argument("compose_had: subcarrier index out of range");
  return d.beta[k] * (d.analog_tx * d.baseband[k] * d.analog_rx.transpose());
}

// Non-iterative factorization from the tensor's multilinear singular vectors:
// analog factors are the unit-modulus projections of the leading left singular
// vectors of the mode-1/mode-2 unfoldings, and the baseband slices are the
// matching Tucker core slices (identity third mode). The unprojected variant
// (project = false) is a test hook that reconstructs exactly at full rank.
inline HadRelayDesign had_hosvd(const Tensor3& gt, int num_rf, bool project = true) {
  if (num_rf < 1 || num_rf > std::min(gt.rows(), gt.cols()))
    throw std::invalid_argument("had_hosvd: rf-chain count outside [1, min(dim)]");
  const CMat u1 = svd(mode_unfold(gt, 1)).u.leftCols(num_rf);
  const CMat u2 = svd(mode_unfold(gt, 2)).u.leftCols(num_rf);
  HadRelayDesign d;
  d.analog_tx = project ? unit_modulus_project(u1) : u1;
  d.analog_rx = project ? unit_modulus_project(u2) : u2;
  d.baseband.reserve(gt.depth());
  for (Index k = 0; k < gt.depth(); ++k)
    d.baseband.push_back(u1.adjoint() * gt.slice(k) * u2.conjugate());
  d.beta.assign(gt.depth(), 1.0);
  d.method = "had_hosvd";
  return d;
}

struct AltMaxOptions {
  double tol = 1e-8;      // relative objective change that counts as converged
  int max_sweeps = 200;
  bool deflate = true;    // deflate previously updated columns per sweep
  bool random_init = false;  // random phases instead of the multilinear start
  std::uint64_t init_seed = 0;
};

struct AltMaxResult {
  CMat a;
  double objective = 0.0;              // trace(A^H Q A), undeflated
  int sweeps = 0;
  std::vector<double> objective_trace;  // objective after init and each sweep
};

// Maximizes trace(A^H Q A) over unit-modulus A by cyclic projected power
// steps, one column per step. With deflation, column j sees Q restricted to
// the orthogonal complement of the previously updated columns, which keeps
// the columns from collapsing onto the dominant eigenvector. The returned
// iterate is the sweep with the best undeflated objective, so the result is
// never worse than its starting point.
inline AltMaxResult altmax_analog(const CMat& q, int dim, int num_rf,
                                  const AltMaxOptions& opts = {}) {
  if (q.rows() != dim || q.cols() != dim)
    throw std::invalid_argument("altmax_analog: q must be dim x dim");
  if (num_rf < 1 || num_rf > dim)
    throw std::invalid_argument("altmax_analog: rf-chain count outside [1, dim]");
  const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
  if ((q - q.adjoint()).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw std::invalid_argument("altmax_analog: q is not Hermitian");

  CMat a(dim, num_rf);
  if (opts.random_init) {
    Rng rng(opts.init_seed);
    for (Index j = 0; j < a.cols(); ++j)
      for (Index i = 0; i < a.rows(); ++i) a(i, j) = std::polar(1.0, 2.0 * M_PI * rng.uniform());
  } else {
    // Leading eigenvectors of q = left singular vectors of the unfolded data.
    Eigen::SelfAdjointEigenSolver<CMat> es(CMat(0.5 * (q + q.adjoint())));
    CMat top(dim, num_rf);
    for (int j = 0; j < num_rf; ++j) top.col(j) = es.eigenvectors().col(dim - 1 - j);
    fix_column_phases(top);
    a = unit_modulus_project(top);
  }

  const auto objective = [&q](const CMat& m) { return (m.adjoint() * q * m).trace().real(); };

  AltMaxResult r;
  r.a = a;
  r.objective = objective(a);
  r.objective_trace.push_back(r.objective);

  double prev = r.objective;
  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    for (Index j = 0; j < a.cols(); ++j) {
      CVec col = a.col(j);
      if (opts.deflate && j > 0) {
        const Eigen::HouseholderQR<CMat> qr(a.leftCols(j));
        const CMat basis = qr.householderQ() * CMat::Identity(dim, j);
        col -= basis * (basis.adjoint() * col);
        col = q * col;
        col -= basis * (basis.adjoint() * col);
      } else {
        col = q * col;
      }
      a.col(j) = unit_modulus_project(col);
    }
    const double obj = objective(a);
    r.objective_trace.push_back(obj);
    r.sweeps = sweep;
    if (obj > r.objective) {
      r.objective = obj;
      r.a = a;
    }
    if (std::abs(obj - prev) <= opts.tol * std::max(1.0, std::abs(prev))) break;
    prev = obj;
  }
  return r;
}

// Least-squares baseband slices for fixed analog factors. Computed per slice
// through the factor pseudo-inverses, B_k = A_tx^+ G_k (A_rx^T)^+, which
// equals the mode-3 unfolding solution [B](3) = [G](3) * [(A_rx (x) A_tx)^T]^+
// because pseudo-inversion distributes over the Kronecker product.
inline std::vector<CMat> baseband_ls(const Tensor3& gt, const CMat& a_tx, const CMat& a_rx) {
  if (a_tx.rows() != gt.rows() || a_rx.rows() != gt.cols())
    throw std::invalid_argument("baseband_ls: analog factors do not match the tensor");
  if (numerical_rank(a_tx) < a_tx.cols() || numerical_rank(a_rx) < a_rx.cols())
    std::cerr << "baseband_ls: warning: analog factor is rank deficient, "
                 "solving in the least-squares sense\n";
  const CMat ptx = pinv(a_tx);
  const CMat prx_t = pinv(a_rx).transpose();
  std::vector<CMat> b;
  b.reserve(gt.depth());
  for (Index k = 0; k < gt.depth(); ++k) b.push_back(ptx * gt.slice(k) * prx_t);
  return b;
}

struct HadOptions {
  AltMaxOptions altmax{};
  int outer_refine = 0;  // projected alternating-LS cycles after the baseband solve
};

// Alternating-maximization factorization: each analog factor maximizes the
// energy its unfolding captures (trace of A^H Q A with Q the unfolding Gram
// matrix), then the baseband is the least-squares fit. Optional outer cycles
// re-solve each analog factor against the current composition by projected
// least squares.
inline HadRelayDesign had_altmax(const Tensor3& gt, int num_rf, const HadOptions& opts = {}) {
  if (num_rf < 1 || num_rf > std::min(gt.rows(), gt.cols()))
    throw std::invalid_argument("had_altmax: rf-chain count outside [1, min(dim)]");
  const CMat g1 = mode_unfold(gt, 1);
  const CMat g2 = mode_unfold(gt, 2);
  HadRelayDesign d;
  d.analog_tx = altmax_analog(CMat(g1 * g1.adjoint()), static_cast<int>(gt.rows()), num_rf,
                              opts.altmax).a;
  d.analog_rx = altmax_analog(CMat(g2 * g2.adjoint()), static_cast<int>(gt.cols()), num_rf,
                              opts.altmax).a;
  d.baseband = baseband_ls(gt, d.analog_tx, d.analog_rx);

  const CMat eye_k = CMat::Identity(gt.depth(), gt.depth());
  for (int cycle = 0; cycle < opts.outer_refine; ++cycle) {
    const Tensor3 bt{d.baseband};
    d.analog_tx = unit_modulus_project(
        CMat(g1 * pinv(CMat(mode_unfold(bt, 1) * kron(eye_k, d.analog_rx).transpose()))));
    const Tensor3 bt2{d.baseband};
    d.analog_rx = unit_modulus_project(
        CMat(g2 * pinv(CMat(mode_unfold(bt2, 2) * kron(eye_k, d.analog_tx).transpose()))));
    d.baseband = baseband_ls(gt, d.analog_tx, d.analog_rx);
  }

  d.beta.assign(gt.depth(), 1.0);
  d.method = "had_altmax";
  return d;
}

}  // namespace twr
