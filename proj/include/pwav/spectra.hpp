#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "pwav/eigensys.hpp"
#include "pwav/error.hpp"
#include "pwav/kernel.hpp"
#include "pwav/parallel.hpp"
#include "pwav/pointproc.hpp"
#include "pwav/wavelet.hpp"

namespace pwav {

/// w_i(a,b) = Σ_k psi*_{a,b}(s_{i,k}); only events inside the support count.
inline Eigen::VectorXcd cwt(const EventStream& n, const Wavelet& psi, double a, double b) {
  if (!(a > 0.0)) throw ConfigError("scale a must be positive");
  const ScaledWavelet sw{psi, a, b};
  Eigen::VectorXcd w = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n.dim()));
  for (std::size_t i = 0; i < n.dim(); ++i) {
    cplx acc{0.0, 0.0};
    for (double s : n.window(i, sw.support_lo(), sw.support_hi())) acc += std::conj(sw(s));
    w(static_cast<Eigen::Index>(i)) = acc;
  }
  return w;
}

/// W = w w^H
inline Eigen::MatrixXcd periodogram(const EventStream& n, const Wavelet& psi, double a,
                                    double b) {
  const Eigen::VectorXcd w = cwt(n, psi, a, b);
  return w * w.adjoint();
}

namespace detail {

inline void require_valid(const EventStream& n, double alpha, double kappa, double a,
                          double b) {
  const ValidRegion region(alpha, kappa, n.horizon());
  if (!region.contains(a, b)) {
    throw RegionError("(a, b) = (" + shortest_repr(a) + ", " + shortest_repr(b) +
                      ") lies outside the valid triangle (a_max = " +
                      shortest_repr(region.a_max()) + ")");
  }
}

inline void hermitize(Eigen::MatrixXcd& m) {
  m = 0.5 * (m + m.adjoint()).eval();
}

}  // namespace detail

/// Ω_ij = Σ_k Σ_k' K_{a,b}(s_{j,k'}, s_{i,k}), the smoothed w w^H.
inline Eigen::MatrixXcd smoothed_periodogram_direct(const EventStream& n,
                                                    const SmoothedKernel& k, double a,
                                                    double b) {
  detail::require_valid(n, k.alpha(), k.kappa(), a, b);
  const auto p = static_cast<Eigen::Index>(n.dim());
  const double r = 0.5 * a * k.support_width();
  std::vector<std::vector<double>> local(n.dim());
  for (std::size_t i = 0; i < n.dim(); ++i) {
    for (double s : n.window(i, b - r, b + r)) local[i].push_back((s - b) / a);
  }
  Eigen::MatrixXcd omega = Eigen::MatrixXcd::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i; j < p; ++j) {
      cplx acc{0.0, 0.0};
      for (double x : local[i]) {
        for (double y : local[j]) acc += k(y, x);
      }
      omega(i, j) = acc / a;
      omega(j, i) = std::conj(acc / a);
    }
    omega(i, i) = omega(i, i).real();
  }
  return omega;
}

/// Multi-wavelet form Ω = Σ_l eta_l v_l v_l^H, v_l the CWT under eigen-wavelet l.
inline Eigen::MatrixXcd smoothed_periodogram_eigen(const EventStream& n,
                                                   const EigenSystem& e, double a,
                                                   double b) {
  detail::require_valid(n, e.kernel->alpha(), e.kernel->kappa(), a, b);
  const auto p = static_cast<Eigen::Index>(n.dim());
  const auto r = static_cast<Eigen::Index>(e.rank());
  const double half = 0.5 * a * e.kernel->support_width();
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(r, p);
  std::vector<cplx> phi(static_cast<std::size_t>(r));
  for (Eigen::Index i = 0; i < p; ++i) {
    for (double s : n.window(static_cast<std::size_t>(i), b - half, b + half)) {
      eigen_wavelets_at(e, (s - b) / a, phi.data());
      for (Eigen::Index l = 0; l < r; ++l) v(l, i) += std::conj(phi[static_cast<std::size_t>(l)]);
    }
  }
  v /= std::sqrt(a);
  Eigen::MatrixXcd omega = v.transpose() * e.eigenvalues.cast<cplx>().asDiagonal() * v.conjugate();
  detail::hermitize(omega);
  return omega;
}

/// |Ω_ij|² / (Ω_ii Ω_jj)
inline double coherence(const Eigen::MatrixXcd& omega, std::size_t i, std::size_t j) {
  const auto ii = static_cast<Eigen::Index>(i);
  const auto jj = static_cast<Eigen::Index>(j);
  if (ii >= omega.rows() || jj >= omega.rows()) throw ConfigError("component index out of range");
  const double d1 = omega(ii, ii).real();
  const double d2 = omega(jj, jj).real();
  if (!(d1 > 0.0) || !(d2 > 0.0)) {
    throw UndefinedCoherenceError("coherence undefined: zero diagonal in the spectrum");
  }
  if (i == j) return 1.0;
  return std::clamp(std::norm(omega(ii, jj)) / (d1 * d2), 0.0, 1.0);
}

/// Scale/translation normalised to the valid triangle: ã = a(α+κ)/T, b̃ = b/T.
struct NormalizedCoords {
  double a_tilde = 0.0;
  double b_tilde = 0.0;
  double frequency = 0.0;  // f0 / a
};

inline NormalizedCoords normalize_coords(double a, double b, double T, double alpha,
                                         double kappa, double f0 = 1.0) {
  if (!(T > 0.0)) throw ConfigError("horizon T must be positive");
  return {a * (alpha + kappa) / T, b / T, f0 / a};
}

struct RawCoords {
  double a = 0.0;
  double b = 0.0;
};

inline RawCoords denormalize_coords(double a_tilde, double b_tilde, double T, double alpha,
                                    double kappa) {
  if (!(T > 0.0)) throw ConfigError("horizon T must be positive");
  return {a_tilde * T / (alpha + kappa), b_tilde * T};
}

/// Ω and coherence over an (a, b) grid.
struct SpectralField {
  struct Point {
    double a = 0.0;
    double b = 0.0;
    bool valid = false;
    Eigen::MatrixXcd omega;  // empty when invalid
  };

  std::string wavelet;
  std::string window;
  double alpha = 0.0;
  double kappa = 0.0;
  double horizon = 0.0;
  double dof = 0.0;
  std::size_t dim = 0;
  std::vector<Point> points;

  std::size_t valid_count() const {
    return static_cast<std::size_t>(
        std::count_if(points.begin(), points.end(), [](const Point& q) { return q.valid; }));
  }
};

struct FieldConfig {
  std::vector<double> a_grid;  // empty -> default log grid
  std::vector<double> b_grid;  // empty -> default uniform grid
  std::size_t a_points = 32;
  std::size_t b_points = 128;
  double min_expected_count = 10.0;
};

/// Smallest scale whose kernel support holds at least `min_count` expected
/// events in every non-empty component.
inline double default_a_min(const EventStream& n, double width, double min_count) {
  double rate = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n.dim(); ++i) {
    if (n.count(i) > 0) rate = std::min(rate, static_cast<double>(n.count(i)) / n.horizon());
  }
  if (!std::isfinite(rate)) return n.horizon() / width;
  return min_count / (rate * width);
}

inline std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  std::vector<double> g(count);
  if (count == 1) {
    g[0] = hi;
    return g;
  }
  for (std::size_t k = 0; k < count; ++k) {
    g[k] = lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(count - 1));
  }
  return g;
}

inline std::vector<double> default_b_grid(double T, std::size_t count) {
  std::vector<double> g(count);
  for (std::size_t k = 0; k < count; ++k) {
    g[k] = T * (static_cast<double>(k) + 0.5) / static_cast<double>(count);
  }
  return g;
}

/// Evaluates Ω at each grid point inside the valid triangle (eigen path);
/// points outside are kept but marked invalid.
inline SpectralField field(const EventStream& n, const EigenSystem& e, FieldConfig cfg) {
  const double width = e.kernel->support_width();
  const double T = n.horizon();
  if (cfg.a_grid.empty()) {
    const double a_max = T / width;
    const double a_min = std::min(default_a_min(n, width, cfg.min_expected_count), a_max);
    cfg.a_grid = log_grid(a_min, a_max, cfg.a_points);
  }
  if (cfg.b_grid.empty()) cfg.b_grid = default_b_grid(T, cfg.b_points);
  for (auto* g : {&cfg.a_grid, &cfg.b_grid}) {
    if (!std::is_sorted(g->begin(), g->end())) throw ConfigError("grids must be sorted");
  }
  for (double a : cfg.a_grid) {
    if (!(a > 0.0)) throw ConfigError("scales must be positive");
  }
  SpectralField f;
  f.wavelet = e.kernel->wavelet().name();
  f.window = e.kernel->window().name();
  f.alpha = e.kernel->alpha();
  f.kappa = e.kernel->kappa();
  f.horizon = T;
  f.dof = degrees_of_freedom(e);
  f.dim = n.dim();
  const ValidRegion region(f.alpha, f.kappa, T);
  for (double a : cfg.a_grid) {
    for (double b : cfg.b_grid) f.points.push_back({a, b, region.contains(a, b), {}});
  }
  if (f.valid_count() == 0) throw ConfigError("no grid point lies inside the valid triangle");
  parallel_for(f.points.size(), [&](std::size_t k) {
    auto& q = f.points[k];
    if (q.valid) q.omega = smoothed_periodogram_eigen(n, e, q.a, q.b);
  });
  return f;
}

/// Long format: a,b,i,j,re,im,coherence,valid_flag (1-based i, j; i <= j).
/// Invalid points carry nan values. Coherence is nan where undefined.
inline void write_field_csv(std::ostream& out, const SpectralField& f) {
  out << "a,b,i,j,re,im,coherence,valid_flag\n";
  for (const auto& q : f.points) {
    for (std::size_t i = 0; i < f.dim; ++i) {
      for (std::size_t j = i; j < f.dim; ++j) {
        out << shortest_repr(q.a) << ',' << shortest_repr(q.b) << ',' << i + 1 << ','
            << j + 1 << ',';
        if (!q.valid) {
          out << "nan,nan,nan,0\n";
          continue;
        }
        const cplx v = q.omega(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        double g = std::numeric_limits<double>::quiet_NaN();
        try {
          g = coherence(q.omega, i, j);
        } catch (const UndefinedCoherenceError&) {
        }
        out << shortest_repr(v.real()) << ',' << shortest_repr(v.imag()) << ','
            << (std::isnan(g) ? std::string("nan") : shortest_repr(g)) << ",1\n";
      }
    }
  }
}

/// Parses write_field_csv output back into a field (metadata left empty).
inline SpectralField read_field_csv(std::istream& in) {
  SpectralField f;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw DataError("empty field file");
  ++lineno;
  auto num = [&](const std::string& tok) {
    if (tok == "nan") return std::numeric_limits<double>::quiet_NaN();
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw ParseError(lineno, "bad number '" + tok + "'");
    }
  };
  struct Row {
    double a, b;
    std::size_t i, j;
    cplx v;
    bool valid;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> tok;
    std::stringstream ss(line);
    std::string t;
    while (std::getline(ss, t, ',')) tok.push_back(t);
    if (tok.size() != 8) throw ParseError(lineno, "expected 8 fields");
    const Row r{num(tok[0]), num(tok[1]), static_cast<std::size_t>(num(tok[2])),
                static_cast<std::size_t>(num(tok[3])), {num(tok[4]), num(tok[5])},
                tok[7] == "1"};
    if (r.i < 1 || r.j < r.i) throw ParseError(lineno, "bad component indices");
    f.dim = std::max(f.dim, r.j);
    rows.push_back(r);
  }
  for (const auto& r : rows) {
    if (f.points.empty() || f.points.back().a != r.a || f.points.back().b != r.b) {
      f.points.push_back({r.a, r.b, r.valid, {}});
      if (r.valid) {
        const auto d = static_cast<Eigen::Index>(f.dim);
        f.points.back().omega = Eigen::MatrixXcd::Zero(d, d);
      }
    }
    auto& q = f.points.back();
    if (q.valid) {
      const auto i = static_cast<Eigen::Index>(r.i - 1);
      const auto j = static_cast<Eigen::Index>(r.j - 1);
      q.omega(i, j) = r.v;
      q.omega(j, i) = std::conj(r.v);
    }
  }
  return f;
}

inline nlohmann::json field_to_json(const SpectralField& f) {
  nlohmann::json j;
  j["meta"] = {{"wavelet", f.wavelet}, {"window", f.window}, {"alpha", f.alpha},
               {"kappa", f.kappa},     {"T", f.horizon},     {"dof", f.dof},
               {"p", f.dim},           {"points", f.points.size()},
               {"valid_points", f.valid_count()}};
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& q : f.points) {
    nlohmann::json pj{{"a", q.a}, {"b", q.b}, {"valid", q.valid}};
    if (q.valid) {
      nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
      for (Eigen::Index r = 0; r < q.omega.rows(); ++r) {
        std::vector<double> rr, ii;
        for (Eigen::Index c = 0; c < q.omega.cols(); ++c) {
          rr.push_back(q.omega(r, c).real());
          ii.push_back(q.omega(r, c).imag());
        }
        re.push_back(rr);
        im.push_back(ii);
      }
      pj["re"] = re;
      pj["im"] = im;
    }
    pts.push_back(pj);
  }
  j["points"] = pts;
  return j;
}

}  // namespace pwav
