#pragma once

#include <array>
#include <cmath>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "twr/channel.hpp"
#include "twr/fd_relay.hpp"
#include "twr/had_relay.hpp"
#include "twr/terminal.hpp"

namespace twr {

enum class Method { anomax, rr, err, had_hosvd, had_altmax };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::anomax: return "anomax";
    case Method::rr: return "rr";
    case Method::err: return "err";
    case Method::had_hosvd: return "had_hosvd";
    case Method::had_altmax: return "had_altmax";
  }
  throw std::logic_error("to_string: unhandled method");
}

inline Method parse_method(const std::string& name) {
  if (name == "anomax") return Method::anomax;
  if (name == "rr") return Method::rr;
  if (name == "err") return Method::err;
  if (name == "had_hosvd") return Method::had_hosvd;
  if (name == "had_altmax") return Method::had_altmax;
  throw std::invalid_argument("unknown method '" + name +
                              "' (expected anomax, rr, err, had_hosvd, or had_altmax)");
}

inline bool is_hybrid(Method m) { return m == Method::had_hosvd || m == Method::had_altmax; }

struct SimFlags {
  bool half_prelog = true;        // charge the two-phase protocol's 1/2 factor
  bool literal_waterfill = false; // terminal loading costs 1/gain instead of 1/gain^2
  bool altmax_deflation = true;
  bool outer_refine = false;      // one projected-ALS refinement cycle after altmax
};

inline WaterfillForm terminal_waterfill_form(const SimFlags& f) {
  return f.literal_waterfill ? WaterfillForm::literal : WaterfillForm::capacity;
}

// log2 det(I + (W^H Phi W)^-1 (W^H Hbar F)(W^H Hbar F)^H), halved when the
// two-phase factor is charged. Evaluated through Cholesky factors for
// stability; requires W^H Phi W to be positive definite.
inline double spectral_efficiency_general(const CMat& h_bar, const CMat& f, const CMat& w,
                                          const CMat& phi, bool half_prelog = true) {
  const CMat noise = w.adjoint() * phi * w;
  Eigen::LLT<CMat> noise_chol(noise);
  if (noise_chol.info() != Eigen::Success)
    throw std::runtime_error("spectral_efficiency: filtered noise covariance is singular");
  const CMat m = noise_chol.matrixL().solve(CMat(w.adjoint() * h_bar * f));
  const CMat grown = CMat::Identity(m.rows(), m.rows()) + m * m.adjoint();
  Eigen::LLT<CMat> grown_chol(grown);
  if (grown_chol.info() != Eigen::Success)
    throw std::runtime_error("spectral_efficiency: log-det factorization failed");
  double log2det = 0.0;
  const CMat l = grown_chol.matrixL();
  for (Index i = 0; i < l.rows(); ++i) log2det += 2.0 * std::log2(l(i, i).real());
  return (half_prelog ? 0.5 : 1.0) * log2det;
}

// Matched-transceiver form: sum of log2(1 + gain_i^2 * power_i).
inline double spectral_efficiency_closed(const RVec& stream_gains, const RVec& powers,
                                         bool half_prelog = true) {
  if (stream_gains.size() != powers.size())
    throw std::invalid_argument("spectral_efficiency_closed: gain/power length mismatch");
  double sum = 0.0;
  for (Index i = 0; i < stream_gains.size(); ++i)
    sum += std::log2(1.0 + stream_gains(i) * stream_gains(i) * powers(i));
  return (half_prelog ? 0.5 : 1.0) * sum;
}

// Covariance of the relay receive signal when both stations radiate their
// budget isotropically — the bootstrap used before precoders exist.
inline CMat relay_input_covariance_iso(const ChannelSet& ch, int k, double p_ue) {
  CMat cov = ch.sigma2_rs * CMat::Identity(ch.relay_antennas(), ch.relay_antennas());
  for (int l = 0; l < 2; ++l) {
    const CMat& h = ch.h[l].at(k);
    cov += (p_ue / h.cols()) * (h * h.adjoint());
  }
  return cov;
}

// Covariance of the relay receive signal under the designed precoders.
inline CMat relay_input_covariance(const ChannelSet& ch, int k, const CMat& f1, const CMat& f2) {
  const CMat& h1 = ch.h[0].at(k);
  const CMat& h2 = ch.h[1].at(k);
  return ch.sigma2_rs * CMat::Identity(ch.relay_antennas(), ch.relay_antennas()) +
         h1 * f1 * f1.adjoint() * h1.adjoint() + h2 * f2 * f2.adjoint() * h2.adjoint();
}

// Transceivers of both directions on one subcarrier. rx1 serves the link into
// station 1 (station 2 precodes, station 1 decodes); rx2 the reverse.
struct LinkBeams {
  TerminalBeams rx1;
  TerminalBeams rx2;
};

inline LinkBeams design_link_beams(const ChannelSet& ch, const CMat& g, int k, int num_streams,
                                   double p_ue, WaterfillForm form) {
  const CMat& h1 = ch.h[0].at(k);
  const CMat& h2 = ch.h[1].at(k);
  LinkBeams b;
  b.rx1 = design_beams(effective_channel(h1, g, h2),
                       noise_covariance(h1, g, ch.sigma2_rs, ch.sigma2_ue), num_streams, p_ue,
                       form);
  b.rx2 = design_beams(effective_channel(h2, g, h1),
                       noise_covariance(h2, g, ch.sigma2_rs, ch.sigma2_ue), num_streams, p_ue,
                       form);
  return b;
}

struct RelayEvaluation {
  double se_total = 0.0;                    // sum over stations of per-subcarrier mean SE
  std::array<std::vector<double>, 2> se;    // [station][subcarrier]
  std::vector<double> beta_first;           // isotropic-bootstrap scale per subcarrier
  std::vector<double> beta_final;           // scale under the designed precoders
  std::vector<CMat> gain;                   // final scaled relay gain per subcarrier
  std::vector<LinkBeams> beams;             // matched to `gain`
};

// Full per-subcarrier evaluation of a relay design (any scale): two-pass power
// normalization (bootstrap with isotropic input covariance, re-scale under the
// precoders that bootstrap produced), matched transceivers, closed-form SE.
inline RelayEvaluation evaluate_relay(const ChannelSet& ch, const std::vector<CMat>& g,
                                      int num_streams, double p_rs, double p_ue,
                                      const SimFlags& flags = {}) {
  const int num_k = ch.num_subcarriers();
  if (static_cast<int>(g.size()) != num_k)
    throw std::invalid_argument("evaluate_relay: one gain matrix per subcarrier required");
  const WaterfillForm form = terminal_waterfill_form(flags);

  RelayEvaluation ev;
  for (int k = 0; k < num_k; ++k) {
    const NormalizedGain boot = normalize_relay_gain(g[k], relay_input_covariance_iso(ch, k, p_ue), p_rs);
    const LinkBeams boot_beams = design_link_beams(ch, boot.gain, k, num_streams, p_ue, form);

    const CMat cov = relay_input_covariance(ch, k, boot_beams.rx2.precoder /* station 1 transmits */,
                                            boot_beams.rx1.precoder /* station 2 transmits */);
    const NormalizedGain fin = normalize_relay_gain(g[k], cov, p_rs);
    LinkBeams beams = design_link_beams(ch, fin.gain, k, num_streams, p_ue, form);

    ev.se[0].push_back(
        spectral_efficiency_closed(beams.rx1.stream_gains, beams.rx1.powers, flags.half_prelog));
    ev.se[1].push_back(
        spectral_efficiency_closed(beams.rx2.stream_gains, beams.rx2.powers, flags.half_prelog));
    ev.beta_first.push_back(boot.beta);
    ev.beta_final.push_back(fin.beta);
    ev.gain.push_back(fin.gain);
    ev.beams.push_back(std::move(beams));
  }
  for (int l = 0; l < 2; ++l) {
    double acc = 0.0;
    for (double v : ev.se[l]) acc += v;
    ev.se_total += acc / num_k;
  }
  return ev;
}

// One sampled two-phase exchange on subcarrier k: both stations transmit,
// the relay amplifies and forwards, each station filters and subtracts its
// own echo. All draws are returned for inspection.
struct TwoPhaseResult {
  CVec symbols1, symbols2;   // unit-power stream symbols of each station
  CVec relay_noise;
  CVec relay_rx;             // what the relay hears
  std::array<CVec, 2> station_noise;
  std::array<CVec, 2> received;           // after the decoder filter
  std::array<CVec, 2> self_interference;  // filtered echo of the own transmission
  std::array<CVec, 2> subtracted;         // received - self_interference
};

inline TwoPhaseResult simulate_two_phase(const ChannelSet& ch, const CMat& g,
                                         const LinkBeams& beams, Rng& rng, int k) {
  const CMat& h1 = ch.h[0].at(k);
  const CMat& h2 = ch.h[1].at(k);
  const CMat& f1 = beams.rx2.precoder;  // station 1 transmits toward station 2
  const CMat& f2 = beams.rx1.precoder;
  const CMat& w1 = beams.rx1.decoder;
  const CMat& w2 = beams.rx2.decoder;

  TwoPhaseResult r;
  r.symbols1 = rng.complex_gaussian_vector(f1.cols(), 1.0);
  r.symbols2 = rng.complex_gaussian_vector(f2.cols(), 1.0);
  r.relay_noise = rng.complex_gaussian_vector(h1.rows(), ch.sigma2_rs);
  r.station_noise[0] = rng.complex_gaussian_vector(h1.cols(), ch.sigma2_ue);
  r.station_noise[1] = rng.complex_gaussian_vector(h2.cols(), ch.sigma2_ue);

  r.relay_rx = h1 * f1 * r.symbols1 + h2 * f2 * r.symbols2 + r.relay_noise;

  const std::array<const CMat*, 2> h{&h1, &h2};
  const std::array<const CMat*, 2> w{&w1, &w2};
  const std::array<const CMat*, 2> f_own{&f1, &f2};
  const std::array<const CVec*, 2> s_own{&r.symbols1, &r.symbols2};
  for (int l = 0; l < 2; ++l) {
    r.received[l] = w[l]->adjoint() * (h[l]->transpose() * (g * r.relay_rx) + r.station_noise[l]);
    r.self_interference[l] =
        w[l]->adjoint() * (h[l]->transpose() * g * (*h[l]) * (*f_own[l]) * (*s_own[l]));
    r.subtracted[l] = r.received[l] - r.self_interference[l];
  }
  return r;
}

// One Monte Carlo scenario point.
struct TrialPoint {
  int m_rs = 16;
  int m1 = 4, m2 = 4;
  int num_subcarriers = 1;
  int ns = 1;
  int n_rs = 8;
  int paths = 6;
  int rank_terms = 2;
  double snr_db = 0.0;  // SNR = 1/sigma^2, shared by relay and stations
  double p_rs = 1.0, p_ue = 1.0;
  std::vector<Method> methods;
  Method had_fd_target = Method::err;  // tensor the hybrid factorizations approximate
  SimFlags flags;
};

inline std::vector<CMat> design_fd_gains(Method m, const ChannelSet& ch, int num_streams,
                                         int rank_terms) {
  std::vector<CMat> g;
  g.reserve(ch.num_subcarriers());
  for (int k = 0; k < ch.num_subcarriers(); ++k) {
    const CMat& h1 = ch.h[0][k];
    const CMat& h2 = ch.h[1][k];
    switch (m) {
      case Method::anomax: g.push_back(anomax(h1, h2)); break;
      case Method::rr: g.push_back(rr_anomax(h1, h2, num_streams)); break;
      case Method::err: g.push_back(err_anomax(h1, h2, rank_terms)); break;
      default: throw std::invalid_argument("design_fd_gains: not a fully-digital method");
    }
  }
  return g;
}

// Factors the given fully-digital per-subcarrier gains (any scale) into a
// hybrid design and recomposes the per-subcarrier matrices it realizes. The
// target tensor stacks the power-normalized gains so every subcarrier weighs
// in at its transmit scale.
inline std::vector<CMat> design_had_gains(Method m, const std::vector<CMat>& fd_gains,
                                          const ChannelSet& ch, const TrialPoint& pt) {
  std::vector<CMat> fd = fd_gains;
  for (int k = 0; k < ch.num_subcarriers(); ++k)
    fd[k] = normalize_relay_gain(fd[k], relay_input_covariance_iso(ch, k, pt.p_ue), pt.p_rs).gain;
  const Tensor3 target = stack_fd_tensor(fd);

  HadRelayDesign design;
  if (m == Method::had_hosvd) {
    design = had_hosvd(target, pt.n_rs);
  } else {
    HadOptions opts;
    opts.altmax.deflate = pt.flags.altmax_deflation;
    opts.outer_refine = pt.flags.outer_refine ? 1 : 0;
    design = had_altmax(target, pt.n_rs, opts);
  }
  std::vector<CMat> g;
  g.reserve(ch.num_subcarriers());
  for (int k = 0; k < ch.num_subcarriers(); ++k) g.push_back(compose_had(design, k));
  return g;
}

// Designs the relay per the requested method. Hybrid methods factor the
// power-normalized fully-digital target tensor shared across subcarriers.
inline std::vector<CMat> design_relay_gains(Method m, const ChannelSet& ch, const TrialPoint& pt) {
  if (!is_hybrid(m)) return design_fd_gains(m, ch, pt.ns, pt.rank_terms);
  return design_had_gains(m, design_fd_gains(pt.had_fd_target, ch, pt.ns, pt.rank_terms), ch, pt);
}

struct TrialResult {
  std::vector<double> se;  // aligned with TrialPoint::methods, NaN on failure
};

// One channel realization, every configured method evaluated on it. A method
// that fails records NaN and the cause on stderr rather than aborting the
// run. The hybrid methods' fully-digital target is designed once and shared,
// also serving the target method itself when it is evaluated alongside.
inline TrialResult run_trial(const TrialPoint& pt, std::uint64_t seed) {
  const double sigma2 = std::pow(10.0, -pt.snr_db / 10.0);
  const ChannelSet ch =
      make_channel_set(seed, pt.m_rs, pt.m1, pt.m2, pt.num_subcarriers, pt.paths, sigma2, sigma2);
  TrialResult out;
  out.se.reserve(pt.methods.size());
  std::vector<CMat> target_cache;
  const auto fd_target = [&]() -> const std::vector<CMat>& {
    if (target_cache.empty())
      target_cache = design_fd_gains(pt.had_fd_target, ch, pt.ns, pt.rank_terms);
    return target_cache;
  };
  for (Method m : pt.methods) {
    try {
      std::vector<CMat> g;
      if (is_hybrid(m))
        g = design_had_gains(m, fd_target(), ch, pt);
      else if (m == pt.had_fd_target)
        g = fd_target();
      else
        g = design_fd_gains(m, ch, pt.ns, pt.rank_terms);
      out.se.push_back(evaluate_relay(ch, g, pt.ns, pt.p_rs, pt.p_ue, pt.flags).se_total);
    } catch (const std::exception& e) {
      std::cerr << "run_trial: method " << to_string(m) << " failed on seed " << seed << ": "
                << e.what() << "\n";
      out.se.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return out;
}

}  // namespace twr
