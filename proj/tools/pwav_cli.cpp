// pwav: command-line front end. Exit codes: 0 ok, 2 config, 3 data, 4 numerical.

#include <iostream>

#include "CLI11.hpp"
#include "pwav/cli.hpp"

namespace {

struct Common {
  std::string config;
  pwav::cli::Overrides o;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
  sub->add_option("--seed", c.o.seed, "master seed");
  sub->add_option("--out", c.o.out, "output directory");
  sub->add_option("--wavelet", c.o.wavelet, "morlet | mexhat");
  sub->add_option("--kappa", c.o.kappa, "rectangular window width");
  sub->add_option("--energy-cutoff", c.o.energy_cutoff, "retained eigen-energy fraction");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wavelet spectral analysis for multivariate point processes"};
  app.require_subcommand(1);
  Common c;

  auto* sim = app.add_subcommand("simulate", "simulate Poisson / Hawkes / piecewise Hawkes events");
  add_common(sim, c);
  sim->add_option("--process", c.o.process, "poisson | hawkes | piecewise");
  sim->add_option("--rates", c.o.rates, "Poisson rates, one per component");
  sim->add_option("--T", c.o.T, "horizon");

  auto* eigs = app.add_subcommand("eigs", "eigenvalues and sampled eigen-wavelets");
  add_common(eigs, c);

  auto add_field = [&](CLI::App* sub) {
    add_common(sub, c);
    sub->add_option("--input", c.o.input, "event CSV");
    sub->add_option("--a-grid", c.o.a_grid, "scales (sorted)");
    sub->add_option("--b-grid", c.o.b_grid, "locations (sorted)");
  };
  auto* per = app.add_subcommand("periodogram", "smoothed periodogram field");
  add_field(per);
  auto* coh = app.add_subcommand("coherence", "coherence field with null percentile");
  add_field(coh);
  coh->add_option("--percentile", c.o.percentile, "null percentile for contours");

  auto* test = app.add_subcommand("test-stationarity", "dyadic likelihood-ratio test");
  add_common(test, c);
  test->add_option("--input", c.o.input, "event CSV");
  test->add_option("--c", c.o.c, "window growth exponent, 0 < c < 1/2");
  test->add_option("--J", c.o.J, "number of dyadic scales");

  auto* rep = app.add_subcommand("reproduce", "canned Monte Carlo studies");
  add_common(rep, c);
  rep->add_option("study", c.o.study, "study name")
      ->check(CLI::IsMember(pwav::cli::study_names()));
  rep->add_option("--replicates", c.o.replicates, "Monte Carlo replicates");
  rep->add_option("--T", c.o.T, "horizon");
  rep->add_option("--J", c.o.J, "number of dyadic scales");
  rep->add_option("--percentile", c.o.percentile, "percentile for null-percentile");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    pwav::cli::RunConfig cfg = c.config.empty() ? pwav::cli::RunConfig{}
                                                : pwav::cli::load_config(c.config);
    pwav::cli::apply(cfg, c.o);
    if (sim->parsed()) {
      pwav::cli::cmd_simulate(cfg, std::cout);
    } else if (eigs->parsed()) {
      pwav::cli::cmd_eigs(cfg, std::cout);
    } else if (per->parsed()) {
      pwav::cli::cmd_periodogram(cfg, std::cout);
    } else if (coh->parsed()) {
      pwav::cli::cmd_coherence(cfg, std::cout);
    } else if (test->parsed()) {
      pwav::cli::cmd_test(cfg, std::cout, std::cerr);
    } else if (rep->parsed()) {
      if (cfg.study.empty()) throw pwav::ConfigError("study: a study name is required");
      pwav::cli::cmd_reproduce(cfg, std::cout);
    }
  } catch (const pwav::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
