#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "pwav/error.hpp"
#include "pwav/random.hpp"

namespace pwav {

/// Shortest decimal text that parses back to the same double.
inline std::string shortest_repr(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// p ordered event-time sequences observed on (0, T].
class EventStream {
 public:
  EventStream() = default;

  /// Each component must be strictly increasing and inside (0, T].
  EventStream(double horizon, std::vector<std::vector<double>> events)
      : horizon_(horizon), events_(std::move(events)) {
    if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) {
      throw DataError("horizon T must be positive and finite");
    }
    if (events_.empty()) throw DataError("event stream needs p >= 1 components");
    for (std::size_t i = 0; i < events_.size(); ++i) {
      const auto& e = events_[i];
      for (std::size_t k = 0; k < e.size(); ++k) {
        if (!(e[k] > 0.0) || e[k] > horizon_) {
          throw DataError("stream " + std::to_string(i + 1) + ": event time " +
                          shortest_repr(e[k]) + " outside (0, T]");
        }
        if (k > 0 && !(e[k] > e[k - 1])) {
          throw DataError("stream " + std::to_string(i + 1) +
                          ": event times not strictly increasing");
        }
      }
    }
  }

  /// Sorts each component before validating.
  static EventStream from_unsorted(double horizon,
                                   std::vector<std::vector<double>> events) {
    for (auto& e : events) std::sort(e.begin(), e.end());
    return EventStream(horizon, std::move(events));
  }

  std::size_t dim() const noexcept { return events_.size(); }
  double horizon() const noexcept { return horizon_; }
  const std::vector<double>& events(std::size_t i) const { return events_.at(i); }
  std::size_t count(std::size_t i) const { return events_.at(i).size(); }

  std::size_t total_count() const {
    std::size_t n = 0;
    for (const auto& e : events_) n += e.size();
    return n;
  }

  /// Events of component i with lo <= t <= hi.
  std::span<const double> window(std::size_t i, double lo, double hi) const {
    const auto& e = events_.at(i);
    const auto first = std::lower_bound(e.begin(), e.end(), lo);
    const auto last = std::upper_bound(first, e.end(), hi);
    return {first, last};
  }

  bool operator==(const EventStream&) const = default;

 private:
  double horizon_ = 1.0;
  std::vector<std::vector<double>> events_;
};

/// Event CSV: optional header `# p=<int> T=<float>`, rows `stream,time`
/// with 1-based stream index. Without a header p is the largest index seen
/// and T the largest time rounded up.
inline EventStream read_events_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  long declared_p = -1;
  double declared_T = -1.0;
  std::vector<std::vector<double>> events;
  double max_time = 0.0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      std::istringstream ss(line.substr(first + 1));
      std::string tok;
      while (ss >> tok) {
        try {
          if (tok.rfind("p=", 0) == 0) declared_p = std::stol(tok.substr(2));
          if (tok.rfind("T=", 0) == 0) declared_T = std::stod(tok.substr(2));
        } catch (const std::exception&) {
          throw ParseError(lineno, "bad header token '" + tok + "'");
        }
      }
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(lineno, "expected 'stream,time'");
    long idx = 0;
    double t = 0.0;
    {
      const std::string a = line.substr(first, comma - first);
      const std::string b = line.substr(comma + 1);
      std::size_t used = 0;
      try {
        idx = std::stol(a, &used);
        if (a.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("");
        t = std::stod(b, &used);
        if (b.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ParseError(lineno, "malformed row '" + line + "'");
      }
    }
    if (idx < 1) throw ParseError(lineno, "stream index must be >= 1");
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw DataError("line " + std::to_string(lineno) + ": event time " +
                      shortest_repr(t) + " must be positive");
    }
    if (static_cast<std::size_t>(idx) > events.size()) events.resize(idx);
    events[idx - 1].push_back(t);
    max_time = std::max(max_time, t);
  }
  std::size_t p = events.size();
  if (declared_p >= 0) {
    if (declared_p < 1) throw DataError("header p must be >= 1");
    if (static_cast<std::size_t>(declared_p) < p) {
      throw DataError("stream index exceeds declared p=" + std::to_string(declared_p));
    }
    p = static_cast<std::size_t>(declared_p);
  }
  if (p == 0) throw DataError("no events and no header declaring p");
  events.resize(p);
  double T = declared_T > 0.0 ? declared_T : std::ceil(max_time);
  if (declared_T > 0.0 && max_time > declared_T) {
    throw DataError("event time exceeds declared T=" + shortest_repr(declared_T));
  }
  if (!(T > 0.0)) throw DataError("cannot infer a positive horizon T");
  return EventStream::from_unsorted(T, std::move(events));
}

inline EventStream load_events_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open event file " + path.string());
  return read_events_csv(in);
}

inline void write_events_csv(std::ostream& out, const EventStream& n) {
  out << "# p=" << n.dim() << " T=" << shortest_repr(n.horizon()) << "\n";
  for (std::size_t i = 0; i < n.dim(); ++i) {
    for (double t : n.events(i)) out << (i + 1) << ',' << shortest_repr(t) << '\n';
  }
}

inline void save_events_csv(const std::filesystem::path& path, const EventStream& n) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_events_csv(out, n);
}

/// Exponential-kernel Hawkes parameters. alpha(i, j) is the jump in the
/// intensity of component i caused by an event of component j; it decays at
/// rate beta(i, j).
struct HawkesParams {
  Eigen::VectorXd nu;
  Eigen::MatrixXd alpha;
  Eigen::MatrixXd beta;

  std::size_t dim() const { return static_cast<std::size_t>(nu.size()); }

  /// A = (alpha_ij / beta_ij), the mean offspring matrix.
  Eigen::MatrixXd branching_matrix() const { return alpha.cwiseQuotient(beta); }

  double spectral_radius() const {
    const Eigen::EigenSolver<Eigen::MatrixXd> es(branching_matrix(), false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }

  /// Validates shapes and signs; throws ConfigError carrying the spectral
  /// radius when the process is not stationary.
  void validate() const {
    const auto p = nu.size();
    if (p < 1) throw ConfigError("hawkes: nu must have at least one entry");
    if (alpha.rows() != p || alpha.cols() != p || beta.rows() != p || beta.cols() != p) {
      throw ConfigError("hawkes: alpha and beta must be " + std::to_string(p) + "x" +
                        std::to_string(p));
    }
    if ((nu.array() < 0.0).any()) throw ConfigError("hawkes: nu must be non-negative");
    if ((alpha.array() < 0.0).any()) throw ConfigError("hawkes: alpha must be non-negative");
    if (!(beta.array() > 0.0).all()) throw ConfigError("hawkes: beta must be positive");
    const double rho = spectral_radius();
    if (!(rho < 1.0)) {
      throw ConfigError("hawkes: unstable parameters, spectral radius of alpha/beta is " +
                        shortest_repr(rho) + " (must be < 1)");
    }
  }

  /// (I - A)^{-1} nu
  Eigen::VectorXd stationary_rate() const {
    const auto p = nu.size();
    const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(p, p) - branching_matrix();
    return m.partialPivLu().solve(nu);
  }

  static HawkesParams univariate(double nu, double alpha, double beta) {
    HawkesParams h;
    h.nu = Eigen::VectorXd::Constant(1, nu);
    h.alpha = Eigen::MatrixXd::Constant(1, 1, alpha);
    h.beta = Eigen::MatrixXd::Constant(1, 1, beta);
    return h;
  }
};

namespace detail {

inline Eigen::MatrixXd json_matrix(const nlohmann::json& j, Eigen::Index p,
                                   const std::string& key) {
  if (j.is_number()) return Eigen::MatrixXd::Constant(p, p, j.get<double>());
  if (!j.is_array()) throw ConfigError("hawkes: '" + key + "' must be a number or matrix");
  if (p == 1 && j.size() == 1 && j[0].is_number()) {
    return Eigen::MatrixXd::Constant(1, 1, j[0].get<double>());
  }
  if (static_cast<Eigen::Index>(j.size()) != p) {
    throw ConfigError("hawkes: '" + key + "' must have " + std::to_string(p) + " rows");
  }
  Eigen::MatrixXd m(p, p);
  for (Eigen::Index r = 0; r < p; ++r) {
    const auto& row = j[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != p) {
      throw ConfigError("hawkes: '" + key + "' row " + std::to_string(r + 1) +
                        " must have " + std::to_string(p) + " entries");
    }
    for (Eigen::Index c = 0; c < p; ++c) {
      if (!row[c].is_number()) throw ConfigError("hawkes: '" + key + "' entries must be numbers");
      m(r, c) = row[c].get<double>();
    }
  }
  return m;
}

}  // namespace detail

/// Keys nu, alpha, beta. Scalars broadcast; nu may be a scalar for p = 1.
inline HawkesParams hawkes_from_json(const nlohmann::json& j) {
  for (const char* key : {"nu", "alpha", "beta"}) {
    if (!j.contains(key)) throw ConfigError(std::string("hawkes: missing key '") + key + "'");
  }
  HawkesParams h;
  const auto& nu = j.at("nu");
  if (nu.is_number()) {
    h.nu = Eigen::VectorXd::Constant(1, nu.get<double>());
  } else if (nu.is_array() && !nu.empty()) {
    h.nu.resize(static_cast<Eigen::Index>(nu.size()));
    for (std::size_t i = 0; i < nu.size(); ++i) {
      if (!nu[i].is_number()) throw ConfigError("hawkes: 'nu' entries must be numbers");
      h.nu(static_cast<Eigen::Index>(i)) = nu[i].get<double>();
    }
  } else {
    throw ConfigError("hawkes: 'nu' must be a number or non-empty array");
  }
  h.alpha = detail::json_matrix(j.at("alpha"), h.nu.size(), "alpha");
  h.beta = detail::json_matrix(j.at("beta"), h.nu.size(), "beta");
  h.validate();
  return h;
}

inline nlohmann::json to_json(const HawkesParams& h) {
  nlohmann::json j;
  j["nu"] = std::vector<double>(h.nu.data(), h.nu.data() + h.nu.size());
  auto mat = [](const Eigen::MatrixXd& m) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(m.cols()));
      for (Eigen::Index c = 0; c < m.cols(); ++c) row[c] = m(r, c);
      out.push_back(row);
    }
    return out;
  };
  j["alpha"] = mat(h.alpha);
  j["beta"] = mat(h.beta);
  return j;
}

/// Independent homogeneous Poisson components.
inline EventStream simulate_poisson(std::span<const double> rates, double T,
                                    std::uint64_t seed) {
  if (rates.empty()) throw ConfigError("poisson: need at least one rate");
  if (!(T > 0.0)) throw ConfigError("poisson: T must be positive");
  for (double r : rates) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("poisson: rates must be non-negative");
  }
  Rng rng(seed);
  std::vector<std::vector<double>> events(rates.size());
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (rates[i] == 0.0) continue;
    double t = rng.exponential(rates[i]);
    while (t <= T) {
      events[i].push_back(t);
      t += rng.exponential(rates[i]);
    }
  }
  return EventStream(T, std::move(events));
}

inline EventStream simulate_poisson(std::initializer_list<double> rates, double T,
                                    std::uint64_t seed) {
  return simulate_poisson(std::span<const double>(rates.begin(), rates.size()), T, seed);
}

namespace detail {

// Ogata thinning on (t0, t1] starting from an empty history. Events are
// appended (shifted by `shift`) to `out` only when t > keep_after.
inline void simulate_hawkes_segment(const HawkesParams& h, double t0, double t1,
                                    double keep_after, Rng& rng,
                                    std::vector<std::vector<double>>& out) {
  const auto p = h.nu.size();
  // excitation(i, j): current contribution of component j's past to intensity i
  Eigen::MatrixXd excitation = Eigen::MatrixXd::Zero(p, p);
  double t = t0;
  while (true) {
    const double bound = h.nu.sum() + excitation.sum();
    if (!(bound > 0.0)) break;
    const double wait = rng.exponential(bound);
    t += wait;
    if (t > t1) break;
    excitation.array() *= (-h.beta.array() * wait).exp();
    const Eigen::VectorXd intensity = h.nu + excitation.rowwise().sum();
    const double total = intensity.sum();
    const double u = rng.uniform() * bound;
    if (u >= total) continue;
    Eigen::Index which = 0;
    double acc = intensity(0);
    while (u >= acc && which + 1 < p) acc += intensity(++which);
    if (t > keep_after) out[static_cast<std::size_t>(which)].push_back(t);
    excitation.col(which) += h.alpha.col(which);
  }
}

}  // namespace detail

/// One stationary-parameter piece of a piecewise Hawkes design.
struct HawkesSegment {
  double start = 0.0;
  double end = 0.0;
  HawkesParams params;
};

/// Independent Hawkes segments concatenated; excitation is reset to the
/// baseline at every boundary.
inline EventStream simulate_piecewise(std::span<const HawkesSegment> segments,
                                      std::uint64_t seed) {
  if (segments.empty()) throw DataError("piecewise: need at least one segment");
  const auto p = segments.front().params.dim();
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto& s = segments[k];
    s.params.validate();
    if (s.params.dim() != p) throw DataError("piecewise: all segments must share p");
    if (!(s.end > s.start)) throw DataError("piecewise: segment " + std::to_string(k + 1) + " is empty");
    const double expected_start = k == 0 ? 0.0 : segments[k - 1].end;
    const double tol = 1e-9 * std::max(1.0, std::abs(expected_start));
    if (std::abs(s.start - expected_start) > tol) {
      throw DataError("piecewise: segment " + std::to_string(k + 1) +
                      (s.start > expected_start ? " leaves a gap" : " overlaps") +
                      " (intervals must partition (0, T])");
    }
  }
  Rng rng(seed);
  std::vector<std::vector<double>> events(p);
  for (const auto& s : segments) {
    detail::simulate_hawkes_segment(s.params, s.start, s.end, s.start, rng, events);
  }
  return EventStream(segments.back().end, std::move(events));
}

/// Exact simulation by Ogata thinning. With burn_in > 0 the process is
/// started at -burn_in and only events in (0, T] are kept.
inline EventStream simulate_hawkes(const HawkesParams& params, double T,
                                   std::uint64_t seed, double burn_in = 0.0) {
  if (!(T > 0.0)) throw ConfigError("hawkes: T must be positive");
  if (burn_in <= 0.0) {
    const HawkesSegment seg{0.0, T, params};
    return simulate_piecewise(std::span<const HawkesSegment>(&seg, 1), seed);
  }
  params.validate();
  Rng rng(seed);
  std::vector<std::vector<double>> events(params.dim());
  detail::simulate_hawkes_segment(params, -burn_in, T, 0.0, rng, events);
  return EventStream(T, std::move(events));
}

/// Bartlett spectrum S(f) = (I - G(f))^{-1} diag(lambda) (I - G(f))^{-H},
/// G_ij(f) = alpha_ij / (beta_ij + i 2 pi f).
inline Eigen::MatrixXcd hawkes_spectrum(const HawkesParams& h, double f) {
  using std::numbers::pi;
  const auto p = h.nu.size();
  const Eigen::VectorXd rate = h.stationary_rate();
  Eigen::MatrixXcd g(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      g(i, j) = h.alpha(i, j) / std::complex<double>(h.beta(i, j), 2.0 * pi * f);
    }
  }
  const Eigen::MatrixXcd m =
      (Eigen::MatrixXcd::Identity(p, p) - g).inverse();
  Eigen::MatrixXcd s = m * rate.cast<std::complex<double>>().asDiagonal() * m.adjoint();
  return 0.5 * (s + s.adjoint());
}

/// |S_ij|^2 / (S_ii S_jj)
inline double coherence_theoretical(const HawkesParams& h, double f, std::size_t i,
                                    std::size_t j) {
  const auto s = hawkes_spectrum(h, f);
  const auto ii = static_cast<Eigen::Index>(i);
  const auto jj = static_cast<Eigen::Index>(j);
  if (ii >= s.rows() || jj >= s.rows()) throw ConfigError("coherence: component index out of range");
  const double sii = s(ii, ii).real();
  const double sjj = s(jj, jj).real();
  if (!(sii > 0.0) || !(sjj > 0.0)) {
    throw UndefinedCoherenceError("coherence undefined: zero spectral diagonal");
  }
  if (i == j) return 1.0;
  return std::clamp(std::norm(s(ii, jj)) / (sii * sjj), 0.0, 1.0);
}

/// Piecewise design from JSON: {"segments": [{"start", "end", "nu", "alpha", "beta"}, ...]}.
inline std::vector<HawkesSegment> segments_from_json(const nlohmann::json& j) {
  if (!j.contains("segments") || !j.at("segments").is_array()) {
    throw ConfigError("piecewise: missing 'segments' array");
  }
  std::vector<HawkesSegment> out;
  for (const auto& s : j.at("segments")) {
    if (!s.contains("start") || !s.contains("end")) {
      throw ConfigError("piecewise: each segment needs 'start' and 'end'");
    }
    out.push_back({s.at("start").get<double>(), s.at("end").get<double>(), hawkes_from_json(s)});
  }
  return out;
}

}  // namespace pwav
