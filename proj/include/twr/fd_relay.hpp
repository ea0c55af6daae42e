#pragma once

#include "twr/linalg.hpp"
#include "twr/waterfill.hpp"

namespace twr {

// Stacked Kronecker operator of the two uplink channels. Applied to vec(G) it
// yields the stacked vectorizations of the two effective end-to-end channels,
//   [vec(H1^T G H2); vec(H2^T G H1)],
// so its rows are the transposed columns of [(H2 (x) H1), (H1 (x) H2)].
inline CMat stacked_channel_kron(const CMat& h1, const CMat& h2) {
  if (h1.rows() != h2.rows())
    throw std::invalid_argument("stacked_channel_kron: relay-side dimensions differ");
  const Index block = h1.cols() * h2.cols();
  CMat k(2 * block, h1.rows() * h1.rows());
  k.topRows(block) = kron(h2, h1).transpose();
  k.bottomRows(block) = kron(h1, h2).transpose();
  return k;
}

// Relay gain matrix maximizing the summed Frobenius energy of the two
// effective channels over unit-Frobenius G: the dominant right singular
// vector of the stacked operator, reshaped.
inline CMat anomax(const CMat& h1, const CMat& h2) {
  const CMat k = stacked_channel_kron(h1, h2);
  const SvdResult d = svd(k);
  if (!(d.s(0) > 0.0))
    throw std::invalid_argument("anomax: both channels are zero, no direction to amplify");
  return unvec(d.v.col(0), h1.rows(), h1.rows());
}

// Singular-value profile that re-opens a dyad frame (u_j, v_j^H): the frame's
// modes are passed through the stacked operator (columns of k restricted to
// the frame) and the profile water-fills that spectrum under a unit
// allocation budget, so strong bidirectional modes get most of the weight
// while negligible ones stay closed.
inline RVec restored_profile(const CMat& k, const CMat& u, const CMat& v) {
  const SvdResult dr = svd(k * khatri_rao(v.conjugate(), u));
  if (!(dr.s(0) > 0.0))
    throw std::invalid_argument("restored_profile: frame carries no energy through the channels");
  return water_fill(dr.s, 1.0, WaterfillForm::literal).powers;
}

// Rank-restored variant: keeps the singular subspaces of the anomax solution
// but re-allocates the singular values of its leading 2*num_streams modes by
// water-filling against their channel gains, so the relay re-opens the modes
// that all bidirectional streams need.
inline CMat rr_anomax(const CMat& h1, const CMat& h2, int num_streams) {
  if (num_streams < 1) throw std::invalid_argument("rr_anomax: need at least one stream");
  if (2 * static_cast<Index>(num_streams) > h1.rows())
    throw std::invalid_argument("rr_anomax: 2*Ns exceeds the relay dimension");
  const CMat k = stacked_channel_kron(h1, h2);
  const SvdResult dk = svd(k);
  if (!(dk.s(0) > 0.0))
    throw std::invalid_argument("rr_anomax: both channels are zero, no direction to amplify");
  const SvdResult d = svd(unvec(dk.v.col(0), h1.rows(), h1.rows()));
  const Index modes = std::min<Index>(2 * num_streams, d.u.cols());
  RVec profile = RVec::Zero(d.s.size());
  profile.head(modes) = restored_profile(k, d.u.leftCols(modes), d.v.leftCols(modes));
  return d.u * profile.asDiagonal() * d.v.adjoint();
}

// Efficient rank-restored variant: enriches the frame by summing the leading
// rank_terms right singular vectors of the stacked operator, keeps the
// singular subspaces of that seed matrix, and re-allocates its singular
// values across every mode of the enriched frame.
inline CMat err_anomax(const CMat& h1, const CMat& h2, int rank_terms) {
  const CMat k = stacked_channel_kron(h1, h2);
  const SvdResult dk = svd(k);
  if (rank_terms < 1 || rank_terms > dk.v.cols())
    throw std::invalid_argument("err_anomax: rank_terms outside [1, " +
                                std::to_string(dk.v.cols()) + "]");
  if (!(dk.s(0) > 0.0))
    throw std::invalid_argument("err_anomax: both channels are zero, no direction to amplify");

  const Index m = h1.rows();
  const CVec seed = dk.v.leftCols(rank_terms).rowwise().sum();
  const SvdResult dg = svd(unvec(seed, m, m));
  const RVec restored = restored_profile(k, dg.u, dg.v);
  RVec profile = RVec::Zero(dg.s.size());
  profile.head(restored.size()) = restored;
  return dg.u * profile.asDiagonal() * dg.v.adjoint();
}

struct NormalizedGain {
  CMat gain;
  double beta = 0.0;
};

// Scales g so the relay transmit power trace(G Cx G^H) equals p_rs, where
// cov_x is the covariance of the relay input signal.
inline NormalizedGain normalize_relay_gain(const CMat& g, const CMat& cov_x, double p_rs) {
  if (cov_x.rows() != g.cols() || cov_x.cols() != g.cols())
    throw std::invalid_argument("normalize_relay_gain: covariance does not match the gain input");
  if (!(p_rs > 0.0)) throw std::invalid_argument("normalize_relay_gain: power must be positive");
  const double power = (g * cov_x * g.adjoint()).trace().real();
  if (!(power > 0.0))
    throw std::invalid_argument(
        "normalize_relay_gain: gain radiates no power under the given covariance");
  const double beta = std::sqrt(p_rs / power);
  return {beta * g, beta};
}

}  // namespace twr
