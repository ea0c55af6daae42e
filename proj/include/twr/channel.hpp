#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "twr/linalg.hpp"
#include "twr/rng.hpp"

namespace twr {

// One geometric multipath realization: per-path complex gain, the normalized
// spatial frequency seen at each end of the link, and an integer tap delay.
struct PathSet {
  CVec gains;
  RVec relay_freqs;  // relay-side array, in [-1, 1)
  RVec ms_freqs;     // mobile-station side, in [-1, 1)
  Eigen::VectorXi delays;
  Index size() const { return gains.size(); }
};

// Uniform linear array response; entry m is exp(j*pi*m*f), all unit modulus.
inline CVec steering_vector(int num_antennas, double spatial_freq) {
  if (num_antennas < 1) throw std::invalid_argument("steering_vector: need at least one antenna");
  CVec a(num_antennas);
  for (int m = 0; m < num_antennas; ++m) a(m) = std::polar(1.0, M_PI * m * spatial_freq);
  return a;
}

// Draws num_paths paths: gains i.i.d. CN(0, 1/num_paths) so the total path
// power averages to one, spatial frequencies uniform on [-1, 1), delays
// uniform on {0, ..., num_taps-1}.
inline PathSet generate_paths(Rng& rng, int num_paths, int num_taps) {
  if (num_paths < 1) throw std::invalid_argument("generate_paths: need at least one path");
  if (num_taps < 1) throw std::invalid_argument("generate_paths: need at least one tap");
  PathSet p;
  p.gains = rng.complex_gaussian_vector(num_paths, 1.0 / num_paths);
  p.relay_freqs.resize(num_paths);
  for (int i = 0; i < num_paths; ++i) p.relay_freqs(i) = 2.0 * rng.uniform() - 1.0;
  p.ms_freqs.resize(num_paths);
  for (int i = 0; i < num_paths; ++i) p.ms_freqs(i) = 2.0 * rng.uniform() - 1.0;
  p.delays.resize(num_paths);
  for (int i = 0; i < num_paths; ++i)
    p.delays(i) = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(num_taps)));
  return p;
}

// Per-subcarrier frequency response of the path set,
//   H_k = sum_i gains_i * exp(-j*2*pi*k*delay_i/K) * a(num_rx, relay_f_i) * a(num_tx, ms_f_i)^T.
// With unit-modulus steering entries and total path power one, the ensemble
// satisfies E{||H_k||_F^2} = num_rx * num_tx.
inline CMat frequency_response(const PathSet& paths, int num_rx, int num_tx, int subcarrier,
                               int num_subcarriers) {
  if (num_subcarriers < 1)
    throw std::invalid_argument("frequency_response: need at least one subcarrier");
  if (subcarrier < 0 || subcarrier >= num_subcarriers)
    throw std::invalid_argument("frequency_response: subcarrier index out of range");
  if (paths.delays.size() > 0 && paths.delays.maxCoeff() >= num_subcarriers)
    throw std::invalid_argument("frequency_response: path delay exceeds the subcarrier count");
  CMat h = CMat::Zero(num_rx, num_tx);
  for (Index i = 0; i < paths.size(); ++i) {
    const double phase = -2.0 * M_PI * subcarrier * paths.delays(i) / num_subcarriers;
    const Complex c = paths.gains(i) * std::polar(1.0, phase);
    h.noalias() += c * (steering_vector(num_rx, paths.relay_freqs(i)) *
                        steering_vector(num_tx, paths.ms_freqs(i)).transpose());
  }
  return h;
}

// Uplink channels for both mobile stations on every subcarrier, plus the noise
// levels of the scenario. h[l][k] is the m_rs x m_l channel of station l+1 on
// subcarrier k; the downlink is its transpose (reciprocity).
struct ChannelSet {
  std::array<std::vector<CMat>, 2> h;
  double sigma2_rs = 0.0;
  double sigma2_ue = 0.0;
  std::uint64_t seed = 0;

  int num_subcarriers() const { return static_cast<int>(h[0].size()); }
  int relay_antennas() const { return static_cast<int>(h[0].at(0).rows()); }
  int ms_antennas(int station) const { return static_cast<int>(h.at(station).at(0).cols()); }
};

// Draws both stations' path sets from one seeded stream and expands them to
// per-subcarrier responses. The delay spread is capped at the subcarrier
// count, so single-carrier setups are frequency flat.
inline ChannelSet make_channel_set(std::uint64_t seed, int m_rs, int m1, int m2,
                                   int num_subcarriers, int num_paths, double sigma2_rs,
                                   double sigma2_ue, int num_taps = 8) {
  if (m_rs < 1 || m1 < 1 || m2 < 1)
    throw std::invalid_argument("make_channel_set: antenna counts must be positive");
  Rng rng(seed);
  const int taps = std::min(num_taps, num_subcarriers);
  const PathSet p1 = generate_paths(rng, num_paths, taps);
  const PathSet p2 = generate_paths(rng, num_paths, taps);
  ChannelSet ch;
  ch.sigma2_rs = sigma2_rs;
  ch.sigma2_ue = sigma2_ue;
  ch.seed = seed;
  ch.h[0].reserve(num_subcarriers);
  ch.h[1].reserve(num_subcarriers);
  for (int k = 0; k < num_subcarriers; ++k) {
    ch.h[0].push_back(frequency_response(p1, m_rs, m1, k, num_subcarriers));
    ch.h[1].push_back(frequency_response(p2, m_rs, m2, k, num_subcarriers));
  }
  return ch;
}

// Debug-replay dump: plain-text header (dims, seed, noise levels) followed by
// one "re,im" line per entry, column-major, slice by slice, station by station.
inline void save_channel_set(const ChannelSet& ch, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_channel_set: cannot open '" + path + "' for writing");
  char buf[80];
  out << "twr-channel-dump 1\n";
  out << "seed " << ch.seed << "\n";
  out << "dims " << ch.relay_antennas() << " " << ch.ms_antennas(0) << " " << ch.ms_antennas(1)
      << " " << ch.num_subcarriers() << "\n";
  std::snprintf(buf, sizeof buf, "noise %.17g %.17g\n", ch.sigma2_rs, ch.sigma2_ue);
  out << buf;
  for (int l = 0; l < 2; ++l)
    for (const CMat& m : ch.h[l])
      for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i) {
          std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", m(i, j).real(), m(i, j).imag());
          out << buf;
        }
  if (!out) throw std::runtime_error("save_channel_set: write to '" + path + "' failed");
}

inline ChannelSet load_channel_set(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_channel_set: cannot open '" + path + "'");
  std::string tag;
  int version = 0;
  in >> tag >> version;
  if (tag != "twr-channel-dump" || version != 1)
    throw std::runtime_error("load_channel_set: '" + path + "' is not a channel dump");
  ChannelSet ch;
  int m_rs = 0, m1 = 0, m2 = 0, k = 0;
  in >> tag >> ch.seed;
  in >> tag >> m_rs >> m1 >> m2 >> k;
  in >> tag >> ch.sigma2_rs >> ch.sigma2_ue;
  if (!in || m_rs < 1 || m1 < 1 || m2 < 1 || k < 1)
    throw std::runtime_error("load_channel_set: malformed header in '" + path + "'");
  const std::array<int, 2> cols{m1, m2};
  for (int l = 0; l < 2; ++l)
    for (int s = 0; s < k; ++s) {
      CMat m(m_rs, cols[l]);
      for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i) {
          std::string line;
          if (!(in >> line)) throw std::runtime_error("load_channel_set: truncated dump");
          const auto comma = line.find(',');
          if (comma == std::string::npos)
            throw std::runtime_error("load_channel_set: malformed entry '" + line + "'");
          m(i, j) = Complex(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
        }
      ch.h[l].push_back(std::move(m));
    }
  return ch;
}

}  // namespace twr
