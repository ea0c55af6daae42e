#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "twr/link_eval.hpp"

namespace twr {

// Invalid user input (config file, preset name, parameter bounds). The CLI
// maps this to its configuration-error exit code.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  int m_rs = 64;
  int m1 = 4, m2 = 4;
  int num_subcarriers = 32;
  int ns = 4;
  int n_rs = 8;
  int paths = 6;
  int rank_terms = 2;
  std::vector<double> snr_db_grid{0, 5, 10, 15, 20, 25, 30};
  std::vector<int> rank_grid;        // when non-empty, sweeps rank_terms
  std::vector<int> rf_grid;          // when non-empty, sweeps n_rs
  std::vector<int> subcarrier_grid;  // when non-empty, sweeps num_subcarriers
  std::vector<Method> methods{Method::anomax, Method::rr, Method::err};
  int trials = 200;
  std::uint64_t base_seed = 1;
  double p_rs = 1.0, p_ue = 1.0;
  Method had_fd_target = Method::err;
  SimFlags flags;
};

inline void validate_config(const ExperimentConfig& c) {
  const auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("invalid config: " + field + " " + why);
  };
  if (c.m_rs < 1) fail("m_rs", "must be at least 1");
  if (c.m1 < 1) fail("m1", "must be at least 1");
  if (c.m2 < 1) fail("m2", "must be at least 1");
  if (c.ns < 1) fail("ns", "must be at least 1");
  if (c.ns > std::min(c.m1, c.m2)) fail("ns", "cannot exceed min(m1, m2)");
  if (2 * c.ns > c.m_rs) fail("ns", "needs 2*ns relay antennas");
  if (c.paths < 1) fail("paths", "must be at least 1");
  if (c.trials < 1) fail("trials", "must be at least 1");
  if (!(c.p_rs > 0)) fail("p_rs", "must be positive");
  if (!(c.p_ue > 0)) fail("p_ue", "must be positive");
  if (c.snr_db_grid.empty()) fail("snr_db_grid", "must not be empty");
  if (c.methods.empty()) fail("methods", "must not be empty");
  const auto check_rf = [&](int v) {
    if (v < 1 || v > c.m_rs) fail("n_rs", "must lie in [1, m_rs]");
  };
  check_rf(c.n_rs);
  for (int v : c.rf_grid) check_rf(v);
  const auto check_rank = [&](int v) {
    if (v < 1 || v > 2 * c.m1 * c.m2) fail("r", "must lie in [1, 2*m1*m2]");
  };
  check_rank(c.rank_terms);
  for (int v : c.rank_grid) check_rank(v);
  const auto check_k = [&](int v) {
    if (v < 1) fail("k", "must be at least 1");
  };
  check_k(c.num_subcarriers);
  for (int v : c.subcarrier_grid) check_k(v);
  if (is_hybrid(c.had_fd_target)) fail("had_fd_target", "must be a fully-digital method");
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(trim(item));
  if (!s.empty() && s.back() == sep) parts.push_back("");
  return parts;
}

inline int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError("invalid config: " + key + " expects an integer, got '" + value + "'");
  }
}

inline double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError("invalid config: " + key + " expects a number, got '" + value + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("invalid config: " + key + " expects true/false, got '" + value + "'");
}

template <typename T, typename Fn>
inline std::vector<T> parse_list(const std::string& key, const std::string& value, Fn parse_one) {
  std::vector<T> out;
  for (const std::string& item : split(value, ',')) {
    if (item.empty())
      throw ConfigError("invalid config: " + key + " has an empty list entry");
    out.push_back(parse_one(key, item));
  }
  if (out.empty()) throw ConfigError("invalid config: " + key + " expects a non-empty list");
  return out;
}

}  // namespace detail

// Applies one key=value setting. Unknown keys are rejected so typos surface
// instead of silently running the wrong experiment.
inline void apply_config_entry(ExperimentConfig& c, const std::string& key,
                               const std::string& value) {
  using namespace detail;
  if (key == "m_rs") c.m_rs = parse_int(key, value);
  else if (key == "m1") c.m1 = parse_int(key, value);
  else if (key == "m2") c.m2 = parse_int(key, value);
  else if (key == "k") c.num_subcarriers = parse_int(key, value);
  else if (key == "ns") c.ns = parse_int(key, value);
  else if (key == "n_rs") c.n_rs = parse_int(key, value);
  else if (key == "l") c.paths = parse_int(key, value);
  else if (key == "r") c.rank_terms = parse_int(key, value);
  else if (key == "trials") c.trials = parse_int(key, value);
  else if (key == "seed") c.base_seed = static_cast<std::uint64_t>(parse_int(key, value));
  else if (key == "p_rs") c.p_rs = parse_double(key, value);
  else if (key == "p_ue") c.p_ue = parse_double(key, value);
  else if (key == "snr_db_grid") c.snr_db_grid = parse_list<double>(key, value, parse_double);
  else if (key == "r_grid") c.rank_grid = parse_list<int>(key, value, parse_int);
  else if (key == "nrs_grid") c.rf_grid = parse_list<int>(key, value, parse_int);
  else if (key == "k_grid") c.subcarrier_grid = parse_list<int>(key, value, parse_int);
  else if (key == "methods") {
    c.methods.clear();
    for (const std::string& name : split(value, ',')) {
      try {
        c.methods.push_back(parse_method(name));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid config: methods: ") + e.what());
      }
    }
  } else if (key == "had_fd_target") {
    try {
      c.had_fd_target = parse_method(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("invalid config: had_fd_target: ") + e.what());
    }
  }
  else if (key == "half_prelog") c.flags.half_prelog = parse_bool(key, value);
  else if (key == "literal_waterfill") c.flags.literal_waterfill = parse_bool(key, value);
  else if (key == "altmax_deflation") c.flags.altmax_deflation = parse_bool(key, value);
  else if (key == "outer_refine") c.flags.outer_refine = parse_bool(key, value);
  else throw ConfigError("invalid config: unknown key '" + key + "'");
}

// Flat key=value text; blank lines and '#' comments are ignored.
inline void apply_config_text(ExperimentConfig& c, const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const std::string stripped = detail::trim(line.substr(0, line.find('#')));
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("invalid config: line " + std::to_string(line_no) +
                        " is not key=value: '" + stripped + "'");
    apply_config_entry(c, detail::trim(stripped.substr(0, eq)),
                       detail::trim(stripped.substr(eq + 1)));
  }
}

inline void apply_config_file(ExperimentConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(c, ss.str());
}

inline std::vector<std::string> preset_names() {
  return {"fig1a", "fig1b", "fig2a", "fig2b"};
}

// Canned experiment shapes at desk scale (16 relay antennas, 50 trials);
// full_scale restores the 64-antenna setting.
inline void apply_preset(ExperimentConfig& c, const std::string& name, bool full_scale = false) {
  c.m_rs = full_scale ? 64 : 16;
  c.trials = 50;
  c.ns = 4;
  c.rank_terms = 2;
  if (name == "fig1a") {  // fully-digital designs across SNR, single carrier
    c.num_subcarriers = 1;
    c.methods = {Method::anomax, Method::rr, Method::err};
    c.snr_db_grid = {0, 5, 10, 15, 20, 25, 30};
  } else if (name == "fig1b") {  // seed-rank sweep at fixed SNR, single carrier
    c.num_subcarriers = 1;
    c.methods = {Method::err};
    c.snr_db_grid = {25};
    c.rank_grid = {1, 2, 3, 4, 5, 6};
  } else if (name == "fig2a") {  // hybrid vs fully-digital across SNR, OFDM
    c.num_subcarriers = 32;
    c.n_rs = 8;
    c.methods = {Method::err, Method::had_hosvd, Method::had_altmax};
    c.snr_db_grid = {0, 5, 10, 15, 20, 25, 30};
  } else if (name == "fig2b") {  // rf-chain and subcarrier sweeps
    c.n_rs = 8;
    c.methods = {Method::err, Method::had_hosvd, Method::had_altmax};
    c.snr_db_grid = {0, 10, 20, 30};
    c.rf_grid = {4, 8};
    c.subcarrier_grid = {32, 64};
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
}

inline unsigned worker_count(std::size_t tasks) {
  unsigned n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("TWR_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
  }
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(tasks, 1)));
}

// Runs fn(0..count-1) on a small worker pool. Work items must be independent;
// the first exception is rethrown after all workers finish.
template <typename Fn>
inline void parallel_for(std::size_t count, Fn&& fn) {
  const unsigned workers = worker_count(count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct SweepRow {
  std::string method;
  double snr_db = 0.0;
  int ns = 0, n_rs = 0, num_subcarriers = 0, rank_terms = 0;
  double se_mean = 0.0, se_std = 0.0;
  int trials = 0;
  std::uint64_t seed = 0;
};

// Cartesian sweep over the configured grids. Trial t of every point uses seed
// base_seed + t, so methods and points share channel realizations and reruns
// are bit-identical regardless of the worker count.
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& c) {
  validate_config(c);

  const std::vector<int> ks = c.subcarrier_grid.empty() ? std::vector<int>{c.num_subcarriers}
                                                        : c.subcarrier_grid;
  const std::vector<int> rfs = c.rf_grid.empty() ? std::vector<int>{c.n_rs} : c.rf_grid;
  const std::vector<int> ranks = c.rank_grid.empty() ? std::vector<int>{c.rank_terms} : c.rank_grid;

  std::vector<TrialPoint> points;
  for (int k : ks)
    for (int rf : rfs)
      for (int rank : ranks)
        for (double snr : c.snr_db_grid) {
          TrialPoint pt;
          pt.m_rs = c.m_rs;
          pt.m1 = c.m1;
          pt.m2 = c.m2;
          pt.num_subcarriers = k;
          pt.ns = c.ns;
          pt.n_rs = rf;
          pt.paths = c.paths;
          pt.rank_terms = rank;
          pt.snr_db = snr;
          pt.p_rs = c.p_rs;
          pt.p_ue = c.p_ue;
          pt.methods = c.methods;
          pt.had_fd_target = c.had_fd_target;
          pt.flags = c.flags;
          points.push_back(std::move(pt));
        }

  const std::size_t trials = static_cast<std::size_t>(c.trials);
  std::vector<std::vector<TrialResult>> results(points.size(),
                                                std::vector<TrialResult>(trials));
  parallel_for(points.size() * trials, [&](std::size_t idx) {
    const std::size_t p = idx / trials;
    const std::size_t t = idx % trials;
    results[p][t] = run_trial(points[p], c.base_seed + t);
  });

  std::vector<SweepRow> rows;
  for (std::size_t p = 0; p < points.size(); ++p)
    for (std::size_t m = 0; m < c.methods.size(); ++m) {
      double sum = 0.0;
      for (std::size_t t = 0; t < trials; ++t) sum += results[p][t].se[m];
      const double mean = sum / trials;
      double var = 0.0;
      for (std::size_t t = 0; t < trials; ++t) {
        const double d = results[p][t].se[m] - mean;
        var += d * d;
      }
      SweepRow row;
      row.method = to_string(c.methods[m]);
      row.snr_db = points[p].snr_db;
      row.ns = points[p].ns;
      row.n_rs = points[p].n_rs;
      row.num_subcarriers = points[p].num_subcarriers;
      row.rank_terms = points[p].rank_terms;
      row.se_mean = mean;
      row.se_std = trials > 1 ? std::sqrt(var / (trials - 1)) : 0.0;
      row.trials = c.trials;
      row.seed = c.base_seed;
      rows.push_back(std::move(row));
    }
  return rows;
}

namespace detail {

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace detail

inline std::string to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "method,snr_db,ns,nrs,k,r,se_mean,se_std,trials,seed\n";
  for (const SweepRow& r : rows) {
    out += r.method;
    out += ',';
    out += detail::format_double(r.snr_db);
    out += ',';
    out += std::to_string(r.ns);
    out += ',';
    out += std::to_string(r.n_rs);
    out += ',';
    out += std::to_string(r.num_subcarriers);
    out += ',';
    out += std::to_string(r.rank_terms);
    out += ',';
    out += detail::format_double(r.se_mean);
    out += ',';
    out += detail::format_double(r.se_std);
    out += ',';
    out += std::to_string(r.trials);
    out += ',';
    out += std::to_string(r.seed);
    out += '\n';
  }
  return out;
}

inline void emit_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary keeps line endings LF everywhere
  if (!out) throw std::runtime_error("emit_csv: cannot open '" + path + "' for writing");
  out << to_csv(rows);
  if (!out) throw std::runtime_error("emit_csv: write to '" + path + "' failed");
}

}  // namespace twr
