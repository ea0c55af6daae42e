#pragma once

#include "twr/linalg.hpp"
#include "twr/waterfill.hpp"

namespace twr {

// End-to-end channel seen by the receiving station: its downlink (transpose of
// the uplink h_rx, by reciprocity) through the relay gain and the other
// station's uplink h_tx.
inline CMat effective_channel(const CMat& h_rx, const CMat& g, const CMat& h_tx) {
  if (h_rx.rows() != g.rows() || g.cols() != h_tx.rows())
    throw std::invalid_argument("effective_channel: dimension mismatch");
  return h_rx.transpose() * g * h_tx;
}

// Covariance of the receive-side noise: relay noise forwarded through g and
// the downlink, plus the station's own thermal noise.
inline CMat noise_covariance(const CMat& h, const CMat& g, double sigma2_rs, double sigma2_ue) {
  if (h.rows() != g.rows()) throw std::invalid_argument("noise_covariance: dimension mismatch");
  const CMat t = h.transpose() * g;
  return sigma2_rs * (t * t.adjoint()) +
         sigma2_ue * CMat::Identity(h.cols(), h.cols());
}

// Inverse principal square root of a Hermitian positive definite matrix, so
// whitener(phi) * phi * whitener(phi) = I.
inline CMat whitener(const CMat& phi) {
  if (phi.rows() != phi.cols()) throw std::invalid_argument("whitener: matrix must be square");
  Eigen::SelfAdjointEigenSolver<CMat> es(CMat(0.5 * (phi + phi.adjoint())));
  const RVec eig = es.eigenvalues();  // ascending
  const double largest = eig(eig.size() - 1);
  if (!(largest > 0.0) || eig(0) <= 1e-12 * largest)
    throw std::invalid_argument("whitener: matrix is not positive definite (eigenvalue " +
                                std::to_string(eig(0)) + ")");
  return es.eigenvectors() * eig.cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().adjoint();
}

struct TerminalBeams {
  CMat precoder;      // transmitter side, num_tx x num_streams, power-loaded
  CMat decoder;       // receiver side, num_rx x num_streams, whitening folded in
  RVec powers;        // per-stream transmit power, sums to the budget
  RVec stream_gains;  // singular values of the whitened effective channel
  double water_level = 0.0;
};

// SVD transceiver on the noise-whitened effective channel with water-filled
// power loading. The decoder folds the whitener in, so decoder^H phi decoder
// = I and decoder^H h_bar precoder = diag(stream_gains .* sqrt(powers)).
inline TerminalBeams design_beams(const CMat& h_bar, const CMat& phi, int num_streams,
                                  double p_ue, WaterfillForm form = WaterfillForm::capacity) {
  if (num_streams < 1 || num_streams > std::min(h_bar.rows(), h_bar.cols()))
    throw std::invalid_argument("design_beams: stream count outside [1, min(dim)]");
  const CMat q = whitener(phi);
  const SvdResult d = svd(q * h_bar);
  const RVec gains = d.s.head(num_streams);
  const WaterfillResult wf = water_fill(gains, p_ue, form);
  TerminalBeams b;
  b.precoder = d.v.leftCols(num_streams) * wf.powers.cwiseSqrt().asDiagonal();
  b.decoder = q * d.u.leftCols(num_streams);
  b.powers = wf.powers;
  b.stream_gains = gains;
  b.water_level = wf.water_level;
  return b;
}

}  // namespace twr
