#pragma once

// Subcommand implementations behind tools/pwav_cli.cpp. Each command takes a
// fully merged RunConfig, writes its files under cfg.out and a short summary
// to `log`. Library errors propagate; the front end maps them to exit codes.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "pwav/eigensys.hpp"
#include "pwav/inference.hpp"
#include "pwav/kernel.hpp"
#include "pwav/pointproc.hpp"
#include "pwav/spectra.hpp"
#include "pwav/studies.hpp"
#include "pwav/wavelet.hpp"

namespace pwav::cli {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunConfig {
  // simulate
  std::string process = "poisson";  // poisson | hawkes | piecewise
  std::vector<double> rates{1.0};
  std::optional<double> T;
  std::optional<HawkesParams> hawkes;
  std::vector<HawkesSegment> segments;
  double burn_in = 0.0;
  // analysis
  std::string wavelet = "morlet";
  std::optional<double> kappa;
  double c = 0.25;
  int J = 3;
  std::optional<double> energy_cutoff;
  std::size_t n_points = 512;
  std::vector<double> a_grid;
  std::vector<double> b_grid;
  std::size_t a_points = 32;
  std::size_t b_points = 128;
  double min_expected_count = 10.0;
  double percentile = 0.95;
  std::size_t samples = 401;  // eigs: eigen-wavelet sample count
  // run
  std::uint64_t seed = studies::kDefaultSeed;
  std::optional<std::size_t> replicates;
  std::string study;
  fs::path input;
  fs::path out = ".";
};

namespace detail {

template <typename T>
T get_field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config field '") + key + "' has the wrong type");
  }
}

}  // namespace detail

/// Reads a JSON config object. Unknown keys are rejected so typos surface.
inline RunConfig config_from_json(const json& j, RunConfig cfg = {}) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{
      "process", "rates",   "T",       "hawkes",   "segments",   "burn_in",
      "wavelet", "kappa",   "c",       "J",        "energy_cutoff", "n_points",
      "a_grid",  "b_grid",  "a_points", "b_points", "min_expected_count",
      "percentile", "samples", "seed", "replicates", "study",    "input",
      "out"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config field '" + key + "'");
  }
  using detail::get_field;
  if (j.contains("process")) cfg.process = get_field<std::string>(j, "process");
  if (j.contains("rates")) cfg.rates = get_field<std::vector<double>>(j, "rates");
  if (j.contains("T")) cfg.T = get_field<double>(j, "T");
  if (j.contains("hawkes")) cfg.hawkes = hawkes_from_json(j.at("hawkes"));
  if (j.contains("segments")) cfg.segments = segments_from_json(j);
  if (j.contains("burn_in")) cfg.burn_in = get_field<double>(j, "burn_in");
  if (j.contains("wavelet")) cfg.wavelet = get_field<std::string>(j, "wavelet");
  if (j.contains("kappa")) cfg.kappa = get_field<double>(j, "kappa");
  if (j.contains("c")) cfg.c = get_field<double>(j, "c");
  if (j.contains("J")) cfg.J = get_field<int>(j, "J");
  if (j.contains("energy_cutoff")) cfg.energy_cutoff = get_field<double>(j, "energy_cutoff");
  if (j.contains("n_points")) cfg.n_points = get_field<std::size_t>(j, "n_points");
  if (j.contains("a_grid")) cfg.a_grid = get_field<std::vector<double>>(j, "a_grid");
  if (j.contains("b_grid")) cfg.b_grid = get_field<std::vector<double>>(j, "b_grid");
  if (j.contains("a_points")) cfg.a_points = get_field<std::size_t>(j, "a_points");
  if (j.contains("b_points")) cfg.b_points = get_field<std::size_t>(j, "b_points");
  if (j.contains("min_expected_count")) {
    cfg.min_expected_count = get_field<double>(j, "min_expected_count");
  }
  if (j.contains("percentile")) cfg.percentile = get_field<double>(j, "percentile");
  if (j.contains("samples")) cfg.samples = get_field<std::size_t>(j, "samples");
  if (j.contains("seed")) cfg.seed = get_field<std::uint64_t>(j, "seed");
  if (j.contains("replicates")) cfg.replicates = get_field<std::size_t>(j, "replicates");
  if (j.contains("study")) cfg.study = get_field<std::string>(j, "study");
  if (j.contains("input")) cfg.input = get_field<std::string>(j, "input");
  if (j.contains("out")) cfg.out = get_field<std::string>(j, "out");
  return cfg;
}

inline RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

/// Command-line values; any that are set replace the config file's.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> wavelet;
  std::optional<double> kappa;
  std::optional<double> c;
  std::optional<std::size_t> replicates;
  std::optional<std::string> input;
  std::optional<int> J;
  std::optional<double> T;
  std::optional<std::string> process;
  std::optional<std::vector<double>> rates;
  std::optional<std::vector<double>> a_grid;
  std::optional<std::vector<double>> b_grid;
  std::optional<double> percentile;
  std::optional<double> energy_cutoff;
  std::optional<std::string> study;
};

inline void apply(RunConfig& cfg, const Overrides& o) {
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.out = *o.out;
  if (o.wavelet) cfg.wavelet = *o.wavelet;
  if (o.kappa) cfg.kappa = *o.kappa;
  if (o.c) cfg.c = *o.c;
  if (o.replicates) cfg.replicates = *o.replicates;
  if (o.input) cfg.input = *o.input;
  if (o.J) cfg.J = *o.J;
  if (o.T) cfg.T = *o.T;
  if (o.process) cfg.process = *o.process;
  if (o.rates) cfg.rates = *o.rates;
  if (o.a_grid) cfg.a_grid = *o.a_grid;
  if (o.b_grid) cfg.b_grid = *o.b_grid;
  if (o.percentile) cfg.percentile = *o.percentile;
  if (o.energy_cutoff) cfg.energy_cutoff = *o.energy_cutoff;
  if (o.study) cfg.study = *o.study;
}

inline Wavelet make_wavelet(const std::string& name) {
  if (name == "morlet") return Wavelet::morlet();
  if (name == "mexhat") return Wavelet::mexican_hat();
  throw ConfigError("wavelet: expected 'morlet' or 'mexhat', got '" + name + "'");
}

namespace detail {

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

inline void validate_common(const RunConfig& cfg) {
  make_wavelet(cfg.wavelet);
  require(!cfg.kappa || (std::isfinite(*cfg.kappa) && *cfg.kappa > 0.0), "kappa: must be > 0");
  require(!cfg.T || (std::isfinite(*cfg.T) && *cfg.T > 0.0), "T: must be > 0");
  require(!cfg.energy_cutoff || (*cfg.energy_cutoff > 0.0 && *cfg.energy_cutoff <= 1.0),
          "energy_cutoff: must lie in (0, 1]");
  require(cfg.n_points >= 64, "n_points: must be at least 64");
  require(cfg.percentile > 0.0 && cfg.percentile < 1.0, "percentile: must lie in (0, 1)");
  require(!cfg.replicates || *cfg.replicates > 0, "replicates: must be positive");
  require(cfg.a_points > 0 && cfg.b_points > 0, "a_points/b_points: must be positive");
  require(cfg.samples >= 2, "samples: must be at least 2");
}

inline std::ofstream open_out(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out);
  std::ofstream f(cfg.out / name);
  if (!f) throw DataError("cannot write " + (cfg.out / name).string());
  return f;
}

inline void write_json(const RunConfig& cfg, const std::string& name, const json& j) {
  auto f = open_out(cfg, name);
  f << j.dump(2) << '\n';
}

inline EventStream load_input(const RunConfig& cfg) {
  if (cfg.input.empty()) throw ConfigError("input: an event file is required");
  return load_events_csv(cfg.input);
}

inline EigenSystem decompose(const RunConfig& cfg, double default_kappa, double default_cutoff) {
  const double kappa = cfg.kappa.value_or(default_kappa);
  return nystrom_decompose(make_wavelet(cfg.wavelet), SmoothingWindow::rectangular(kappa),
                           cfg.n_points, cfg.energy_cutoff.value_or(default_cutoff));
}

inline FieldConfig field_config(const RunConfig& cfg) {
  FieldConfig fc;
  fc.a_grid = cfg.a_grid;
  fc.b_grid = cfg.b_grid;
  fc.a_points = cfg.a_points;
  fc.b_points = cfg.b_points;
  fc.min_expected_count = cfg.min_expected_count;
  return fc;
}

inline std::string fmt(double v) { return std::isfinite(v) ? shortest_repr(v) : "nan"; }

}  // namespace detail

// ---------------------------------------------------------------- simulate

/// events.csv plus events.json echoing the parameters and seed.
inline EventStream cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  detail::validate_common(cfg);
  json meta{{"process", cfg.process}, {"seed", cfg.seed}};
  EventStream n;
  if (cfg.process == "poisson") {
    detail::require(!cfg.rates.empty(), "rates: at least one rate is required");
    for (double r : cfg.rates) detail::require(std::isfinite(r) && r >= 0.0, "rates: must be >= 0");
    const double T = cfg.T.value_or(100.0);
    n = simulate_poisson(cfg.rates, T, cfg.seed);
    meta["rates"] = cfg.rates;
    meta["T"] = T;
  } else if (cfg.process == "hawkes") {
    if (!cfg.hawkes) throw ConfigError("hawkes: parameters are required for process 'hawkes'");
    cfg.hawkes->validate();
    detail::require(cfg.burn_in >= 0.0, "burn_in: must be >= 0");
    const double T = cfg.T.value_or(100.0);
    n = simulate_hawkes(*cfg.hawkes, T, cfg.seed, cfg.burn_in);
    meta["hawkes"] = to_json(*cfg.hawkes);
    meta["T"] = T;
    meta["burn_in"] = cfg.burn_in;
  } else if (cfg.process == "piecewise") {
    if (cfg.segments.empty()) throw ConfigError("segments: required for process 'piecewise'");
    n = simulate_piecewise(cfg.segments, cfg.seed);
    json segs = json::array();
    for (const auto& s : cfg.segments) {
      json sj = to_json(s.params);
      sj["start"] = s.start;
      sj["end"] = s.end;
      segs.push_back(sj);
    }
    meta["segments"] = segs;
    meta["T"] = n.horizon();
  } else {
    throw ConfigError("process: expected 'poisson', 'hawkes' or 'piecewise', got '" +
                      cfg.process + "'");
  }
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < n.dim(); ++i) counts.push_back(n.count(i));
  meta["counts"] = counts;
  {
    auto f = detail::open_out(cfg, "events.csv");
    write_events_csv(f, n);
  }
  detail::write_json(cfg, "events.json", meta);
  log << "simulated " << cfg.process << " p=" << n.dim() << " T=" << shortest_repr(n.horizon())
      << " events=" << n.total_count() << " -> " << (cfg.out / "events.csv").string() << '\n';
  return n;
}

// ---------------------------------------------------------------- eigs

/// eigenvalues.csv (l, eta, normalized, cumulative), eigenwavelets.csv
/// (x, l, re, im) over the kernel support, and eigs.json.
inline EigenSystem cmd_eigs(const RunConfig& cfg, std::ostream& log) {
  detail::validate_common(cfg);
  const auto e = detail::decompose(cfg, 10.0, 0.999);
  {
    auto f = detail::open_out(cfg, "eigenvalues.csv");
    f << "l,eta,normalized,cumulative\n";
    double cum = 0.0;
    for (std::size_t l = 0; l < e.rank(); ++l) {
      const double eta = e.eigenvalues(static_cast<Eigen::Index>(l));
      cum += eta / e.total;
      f << l + 1 << ',' << detail::fmt(eta) << ',' << detail::fmt(eta / e.total) << ','
        << detail::fmt(cum) << '\n';
    }
  }
  {
    auto f = detail::open_out(cfg, "eigenwavelets.csv");
    f << "x,l,re,im\n";
    const double h = e.half_width();
    for (std::size_t k = 0; k < cfg.samples; ++k) {
      const double x = -h + 2.0 * h * static_cast<double>(k) / static_cast<double>(cfg.samples - 1);
      for (std::size_t l = 0; l < e.rank(); ++l) {
        const cplx v = eigen_wavelet_value(e, l, x);
        f << detail::fmt(x) << ',' << l + 1 << ',' << detail::fmt(v.real()) << ','
          << detail::fmt(v.imag()) << '\n';
      }
    }
  }
  detail::write_json(cfg, "eigs.json",
                     {{"wavelet", cfg.wavelet},
                      {"kappa", e.kernel->kappa()},
                      {"n_points", cfg.n_points},
                      {"energy_cutoff", e.energy_cutoff},
                      {"rank", e.rank()},
                      {"retained_energy", e.retained_energy()},
                      {"dof", degrees_of_freedom(e)}});
  log << "rank " << e.rank() << ", retained energy " << e.retained_energy() << ", n = "
      << degrees_of_freedom(e) << '\n';
  return e;
}

// ---------------------------------------------------------------- periodogram / coherence

/// periodogram.csv (long format Ω field) and periodogram.json.
inline SpectralField cmd_periodogram(const RunConfig& cfg, std::ostream& log) {
  detail::validate_common(cfg);
  const auto n = detail::load_input(cfg);
  const auto e = detail::decompose(cfg, 10.0, kDefaultEnergyCutoff);
  const auto f = field(n, e, detail::field_config(cfg));
  {
    auto out = detail::open_out(cfg, "periodogram.csv");
    write_field_csv(out, f);
  }
  detail::write_json(cfg, "periodogram.json", field_to_json(f));
  log << f.valid_count() << " of " << f.points.size() << " grid points inside the valid region\n";
  return f;
}

/// field.csv (full Ω), coherence.csv (one row per pair i < j and grid point)
/// and coherence.json carrying n and the null percentile for contouring.
inline SpectralField cmd_coherence(const RunConfig& cfg, std::ostream& log) {
  detail::validate_common(cfg);
  const auto n = detail::load_input(cfg);
  if (n.dim() < 2) throw ConfigError("coherence requires p >= 2 (input has p = 1)");
  const auto e = detail::decompose(cfg, 10.0, kDefaultEnergyCutoff);
  const auto f = field(n, e, detail::field_config(cfg));
  const Flavor flavor = flavor_of(e.kernel->wavelet());
  const double level = null_percentile(flavor, f.dof, cfg.percentile);
  {
    auto out = detail::open_out(cfg, "field.csv");
    write_field_csv(out, f);
  }
  {
    auto out = detail::open_out(cfg, "coherence.csv");
    out << "a,b,i,j,coherence,valid_flag\n";
    for (const auto& q : f.points) {
      for (std::size_t i = 0; i < f.dim; ++i) {
        for (std::size_t j = i + 1; j < f.dim; ++j) {
          double g = std::numeric_limits<double>::quiet_NaN();
          if (q.valid && q.omega(i, i).real() > 0.0 && q.omega(j, j).real() > 0.0) {
            g = coherence(q.omega, i, j);
          }
          out << detail::fmt(q.a) << ',' << detail::fmt(q.b) << ',' << i + 1 << ',' << j + 1
              << ',' << detail::fmt(g) << ',' << (q.valid ? 1 : 0) << '\n';
        }
      }
    }
  }
  json meta = field_to_json(f)["meta"];
  meta["flavor"] = to_string(flavor);
  meta["null_percentile"] = {{"q", cfg.percentile}, {"level", level}};
  detail::write_json(cfg, "coherence.json", meta);
  log << "n = " << f.dof << ", " << cfg.percentile << " null percentile = " << level << '\n';
  return f;
}

// ---------------------------------------------------------------- test-stationarity

inline void print_report(const StationarityReport& r, std::ostream& out) {
  out << "stationarity test: " << r.wavelet << " (" << to_string(r.flavor) << "), kappa~ = "
      << r.kappa_tilde << ", n = " << r.n << ", p = " << r.p << '\n';
  out << std::setw(3) << "j" << std::setw(10) << "segments" << std::setw(12) << "a"
      << std::setw(14) << "statistic" << std::setw(8) << "dof" << std::setw(12) << "p-value"
      << '\n';
  for (const auto& s : r.scales) {
    out << std::setw(3) << s.j << std::setw(10) << s.segments << std::setw(12) << s.a;
    if (s.na) {
      out << std::setw(14) << "NA" << std::setw(8) << "-" << std::setw(12) << "NA";
    } else {
      out << std::setw(14) << s.statistic << std::setw(8) << s.dof << std::setw(12) << s.p_value;
    }
    out << '\n';
  }
  out << "combined: statistic " << r.statistic << ", dof " << r.dof << ", p-value "
      << (std::isfinite(r.p_value) ? detail::fmt(r.p_value) : std::string("NA")) << '\n';
  if (!r.note.empty()) out << "note: " << r.note << '\n';
}

/// report.json plus a table on `log`; NA scales produce warnings on `warn`.
inline StationarityReport cmd_test(const RunConfig& cfg, std::ostream& log, std::ostream& warn) {
  detail::validate_common(cfg);
  detail::require(cfg.J >= 1, "J: must be at least 1");
  detail::require(cfg.c > 0.0 && cfg.c < 0.5, "c: must satisfy 0 < c < 1/2");
  const auto n = detail::load_input(cfg);
  StationarityConfig sc;
  sc.wavelet = make_wavelet(cfg.wavelet);
  sc.kappa = cfg.kappa.value_or(10.0);
  sc.c = cfg.c;
  sc.J = cfg.J;
  if (cfg.energy_cutoff) sc.energy_cutoff = *cfg.energy_cutoff;
  const auto r = stationarity_test(n, sc);
  for (const auto& s : r.scales) {
    if (s.na) warn << "warning: scale j=" << s.j << " is NA: " << s.diagnostic << '\n';
  }
  detail::write_json(cfg, "report.json", to_json(r));
  print_report(r, log);
  return r;
}

// ---------------------------------------------------------------- reproduce

inline const std::vector<std::string>& study_names() {
  static const std::vector<std::string> names{"qq-cwt",         "qq-coherence",
                                              "dof-table",      "null-percentile",
                                              "piecewise-detection", "test-size"};
  return names;
}

/// Runs a canned Monte Carlo study; writes draws.csv (where applicable) and
/// summary.json with the statistics and pass/fail against the thresholds.
/// Returns the summary.
inline json cmd_reproduce(const RunConfig& cfg, std::ostream& log) {
  detail::validate_common(cfg);
  const auto& s = cfg.study;
  json summary{{"study", s}, {"seed", cfg.seed}};
  if (s == "qq-cwt") {
    const Wavelet psi = make_wavelet(cfg.wavelet);
    const double T = cfg.T.value_or(100.0);
    const std::size_t reps = cfg.replicates.value_or(2000);
    const double kappa = cfg.kappa.value_or(10.0);
    auto f = detail::open_out(cfg, "draws.csv");
    f << "process,replicate,re,im\n";
    bool pass = true;
    for (auto [proc, name] : {std::pair{studies::Process::Poisson, "poisson"},
                              std::pair{studies::Process::Hawkes, "hawkes"}}) {
      const auto r = studies::cwt_normality(psi, proc, T, kappa, reps, cfg.seed);
      for (std::size_t k = 0; k < reps; ++k) {
        f << name << ',' << k << ',' << detail::fmt(r.re[k]) << ','
          << (r.im.empty() ? std::string("nan") : detail::fmt(r.im[k])) << '\n';
      }
      summary[name] = {{"qq_re", r.qq_re},
                       {"qq_im", std::isnan(r.qq_im) ? json(nullptr) : json(r.qq_im)}};
      pass = pass && r.qq_min() >= 0.99;
      log << name << ": QQ correlation re " << r.qq_re;
      if (!std::isnan(r.qq_im)) log << ", im " << r.qq_im;
      log << '\n';
    }
    summary.update({{"wavelet", cfg.wavelet}, {"T", T}, {"replicates", reps},
                    {"threshold", 0.99}, {"pass", pass}});
  } else if (s == "qq-coherence") {
    const Wavelet psi = make_wavelet(cfg.wavelet);
    const double T = cfg.T.value_or(100.0);
    const std::size_t reps = cfg.replicates.value_or(1000);
    const auto r = studies::null_coherence(psi, cfg.kappa.value_or(20.0), T, reps, cfg.seed);
    auto f = detail::open_out(cfg, "draws.csv");
    f << "coherence\n";
    for (double v : r.draws) f << detail::fmt(v) << '\n';
    summary.update({{"wavelet", cfg.wavelet}, {"T", T}, {"replicates", reps},
                    {"undefined", r.undefined}, {"dof", r.dof}, {"flavor", to_string(r.flavor)},
                    {"ks_statistic", r.ks_statistic}, {"ks_p", r.ks_p},
                    {"qq_correlation", r.qq_correlation}, {"threshold_ks_p", 0.01},
                    {"pass", r.ks_p > 0.01}});
    log << "n = " << r.dof << ", KS p = " << r.ks_p << ", QQ correlation = " << r.qq_correlation
        << '\n';
  } else if (s == "dof-table") {
    auto f = detail::open_out(cfg, "dof.csv");
    f << "wavelet,kappa,eigen_sum,rectangular_exact,closed_form,rank\n";
    json rows = json::array();
    bool pass = true;
    const std::vector<double> kappas =
        cfg.kappa ? std::vector<double>{*cfg.kappa} : std::vector<double>{5.0, 10.0, 20.0, 40.0};
    for (const std::string w : {"morlet", "mexhat"}) {
      for (double k : kappas) {
        const auto r = studies::dof_row(make_wavelet(w), k);
        f << w << ',' << detail::fmt(k) << ',' << detail::fmt(r.eigen_sum) << ','
          << detail::fmt(r.rectangular_exact) << ',' << detail::fmt(r.closed_form) << ','
          << r.rank << '\n';
        rows.push_back({{"wavelet", w}, {"kappa", k}, {"eigen_sum", r.eigen_sum},
                        {"rectangular_exact", r.rectangular_exact},
                        {"closed_form", std::isnan(r.closed_form) ? json(nullptr)
                                                                  : json(r.closed_form)},
                        {"rank", r.rank}});
        if (k == 20.0) {
          const double target = w == "morlet" ? 8.31 : 11.57;
          pass = pass && std::abs(r.eigen_sum - target) <= 0.05;
        }
        log << w << " kappa=" << k << ": n = " << r.eigen_sum << '\n';
      }
    }
    summary.update({{"rows", rows}, {"pass", pass}});
  } else if (s == "null-percentile") {
    const auto e = detail::decompose(cfg, 10.0, kDefaultEnergyCutoff);
    const double n = degrees_of_freedom(e);
    const Flavor flavor = flavor_of(e.kernel->wavelet());
    const double level = null_percentile(flavor, n, cfg.percentile);
    summary.update({{"wavelet", cfg.wavelet}, {"kappa", e.kernel->kappa()}, {"dof", n},
                    {"flavor", to_string(flavor)}, {"q", cfg.percentile}, {"level", level}});
    if (cfg.wavelet == "morlet" && e.kernel->kappa() == 10.0 && cfg.percentile == 0.95) {
      summary["pass"] = std::abs(level - 0.593) <= 0.01;
    }
    log << "n = " << n << ", " << cfg.percentile << " percentile = " << level << '\n';
  } else if (s == "piecewise-detection" || s == "test-size") {
    const bool power = s == "piecewise-detection";
    const std::size_t reps = cfg.replicates.value_or(power ? 200 : 500);
    const auto st = power ? studies::test_power(reps, cfg.seed, cfg.J)
                          : studies::test_size(reps, cfg.seed, cfg.T.value_or(1500.0), cfg.J);
    auto f = detail::open_out(cfg, "draws.csv");
    f << "replicate,j,statistic,dof,p_value,na\n";
    for (std::size_t r = 0; r < st.reports.size(); ++r) {
      for (const auto& sc : st.reports[r].scales) {
        f << r << ',' << sc.j << ',' << detail::fmt(sc.statistic) << ',' << detail::fmt(sc.dof)
          << ',' << detail::fmt(sc.p_value) << ',' << (sc.na ? 1 : 0) << '\n';
      }
    }
    bool pass = true;
    if (power) {
      pass = st.rejection_rate.front() > 0.5 &&
             (st.rejection_rate.size() < 3 || st.rejection_rate[2] < 0.15);
    } else {
      for (double v : st.rejection_rate) pass = pass && v >= 0.028 && v <= 0.078;
    }
    summary.update({{"replicates", reps}, {"J", cfg.J}, {"level", 0.05},
                    {"rejection_rate", st.rejection_rate}, {"na_count", st.na_count},
                    {"pass", pass}});
    for (std::size_t j = 0; j < st.rejection_rate.size(); ++j) {
      log << "j=" << j + 1 << ": rejection rate " << st.rejection_rate[j] << '\n';
    }
  } else {
    std::string list;
    for (const auto& n : study_names()) list += (list.empty() ? "" : ", ") + n;
    throw ConfigError("study: unknown study '" + s + "' (expected one of " + list + ")");
  }
  detail::write_json(cfg, "summary.json", summary);
  if (summary.contains("pass")) log << (summary["pass"].get<bool>() ? "PASS" : "FAIL") << '\n';
  return summary;
}

}  // namespace pwav::cli
