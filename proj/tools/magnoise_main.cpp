// magnoise: dephasing rates, noise-amplitude bounds, and interferometer
// contrast for a levitated Stern-Gerlach matter-wave interferometer subject
// to magnetic gradient noise.  JSON config in, CSV/JSON artifacts out.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "magnoise/dephasing.hpp"
#include "magnoise/format.hpp"
#include "magnoise/io.hpp"
#include "magnoise/physics.hpp"
#include "magnoise/reproduce.hpp"
#include "magnoise/spectra.hpp"
#include "magnoise/stochastic.hpp"
#include "magnoise/sweeps.hpp"
#include "magnoise/transfer.hpp"

namespace {

using namespace magnoise;

void print_kv(const char* key, const std::string& value,
              const char* unit = "") {
  std::printf("%-14s %s%s%s\n", key, value.c_str(), unit[0] ? "  " : "",
              unit);
}

void print_kv(const char* key, double value, const char* unit = "") {
  print_kv(key, format_sci(value), unit);
}

// State shared by every config-driven command: the config path, the --seed
// and --out overrides, and --emit-config.
struct Common {
  std::string config_path;
  std::string out_override;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  bool emit_config = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("config", c.config_path,
                  "Path to the JSON run configuration")
      ->required()
      ->check(CLI::ExistingFile);
  c.seed_opt = cmd->add_option(
      "--seed", c.seed, "Override simulation.seed (64-bit unsigned)");
  cmd->add_option("--out", c.out_override, "Override the output directory");
  cmd->add_flag("--emit-config", c.emit_config,
                "Print the effective configuration JSON to stdout and exit; "
                "feeding it back reproduces byte-identical outputs");
}

// Loads and validates the config, applies overrides, honors --emit-config.
RunConfig prepare(const Common& c) {
  RunConfig cfg = load_config(c.config_path);
  if (c.seed_opt != nullptr && c.seed_opt->count() > 0)
    cfg.simulation.seed = c.seed;
  if (!c.out_override.empty()) cfg.out_dir = c.out_override;
  if (c.emit_config) {
    std::fputs(effective_config_json(cfg).c_str(), stdout);
    std::fflush(stdout);
    std::exit(EXIT_SUCCESS);
  }
  return cfg;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

FlickerNoise flicker_from(const RunConfig& cfg) {
  FlickerNoise f;
  f.K = cfg.noise.K;
  f.alpha = cfg.noise.alpha;
  f.I = cfg.experiment.I;
  f.d = cfg.experiment.d;
  return f;
}

// ---------------------------------------------------------------- derive --
int cmd_derive(const Common& c) {
  const RunConfig cfg = prepare(c);
  const DerivedQuantities dq = derive_quantities(cfg.experiment);
  print_kv("eta0", dq.eta0, "T/m");
  print_kv("omega0", dq.omega0, "rad/s");
  print_kv("H", dq.H, "s^-3");
  print_kv("T_exp", dq.T_exp, "s");
  print_kv("dx_max", dq.dx_max, "m");
  print_kv("sigma_x", dq.sigma_x, "m");
  print_kv("sigma_p", dq.sigma_p, "kg m/s");
  print_kv("C_R", dq.C_R, "J s m^-1 T^-1");
  print_kv("C_L", dq.C_L, "J s m^-1 T^-1");
  return 0;
}

// ----------------------------------------------------------------- gamma --
struct GammaOpts {
  Common common;
  std::string noise_override;
  double ximin = 0.0;
  CLI::Option* ximin_opt = nullptr;
  bool with_dev = false;
};

int cmd_gamma(const GammaOpts& o) {
  RunConfig cfg = prepare(o.common);
  if (!o.noise_override.empty()) cfg.noise.type = o.noise_override;
  if (o.ximin_opt->count() > 0) cfg.integration.xi_min = o.ximin;
  validate(cfg.integration);
  const DerivedQuantities dq = derive_quantities(cfg.experiment);
  const NoiseSpectrum spec = make_spectrum(cfg);

  struct Row {
    const char* kind;
    DephasingResult res;
  };
  std::vector<Row> rows;
  rows.push_back({"ho", gamma(spec, dq, TransferKind::HO, cfg.integration)});
  if (o.with_dev) {
    rows.push_back(
        {"dev", gamma(spec, dq, TransferKind::Dev, cfg.integration)});
    rows.push_back({"total", gamma_total(spec, dq, cfg.integration)});
  }

  for (const Row& r : rows) {
    std::printf("[%s]\n", r.kind);
    print_kv("gamma", r.res.gamma, "1/s");
    print_kv("coherence", r.res.coherence, "(one loop)");
    print_kv("integral", r.res.integral_value);
    print_kv("tail", r.res.tail_estimate);
    print_kv("abs_error", r.res.abs_error);
    print_kv("panels", std::to_string(r.res.panels));
  }

  std::string csv =
      "kind,gamma,coherence,integral_value,tail_estimate,abs_error,panels\n";
  for (const Row& r : rows) {
    csv += std::string(r.kind) + "," + format_sci(r.res.gamma) + "," +
           format_sci(r.res.coherence) + "," +
           format_sci(r.res.integral_value) + "," +
           format_sci(r.res.tail_estimate) + "," +
           format_sci(r.res.abs_error) + "," + std::to_string(r.res.panels) +
           "\n";
  }
  const std::string path = out_path(cfg, "gamma.csv");
  write_file(path, csv);
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

// ----------------------------------------------------------------- bound --
struct BoundOpts {
  Common common;
  double target_gamma = 0.0;
  double target_coherence = 0.1;
  CLI::Option* gamma_opt = nullptr;
};

int cmd_bound(const BoundOpts& o) {
  const RunConfig cfg = prepare(o.common);
  const DerivedQuantities dq = derive_quantities(cfg.experiment);
  double target = 0.0;
  if (o.gamma_opt->count() > 0) {
    target = o.target_gamma;
  } else {
    if (!(o.target_coherence > 0.0 && o.target_coherence < 1.0))
      throw std::invalid_argument(
          "bound: target coherence must lie in (0, 1)");
    target = -std::log(o.target_coherence) / dq.T_exp;
  }
  const double A = bound_white(target, dq, cfg.integration);
  const double K =
      bound_flicker(target, dq, flicker_from(cfg), cfg.integration);
  const double di = current_noise_ratio(target, dq);
  print_kv("gamma_target", target, "1/s");
  print_kv("A_max", A, "T m^-1 s^1/2");
  print_kv("K_max", K, "T^2 m^-2 s^(1-alpha) @ reference current/distance");
  print_kv("dI_over_I", di, "(relative current noise)");
  return 0;
}

// -------------------------------------------------------------- contrast --
struct ContrastOpts {
  Common common;
  int mc = 0;
  CLI::Option* mc_opt = nullptr;
};

int cmd_contrast(const ContrastOpts& o) {
  const RunConfig cfg = prepare(o.common);
  const DerivedQuantities dq = derive_quantities(cfg.experiment);
  const NoiseSpectrum spec = make_spectrum(cfg);
  const SimulationGrid grid = SimulationGrid::for_system(
      dq, cfg.simulation.samples_per_loop, cfg.simulation.loops,
      cfg.simulation.seed);

  const NoiseRealization real = synthesize_noise(spec, grid, 0);
  const TrajectoryDeviation dev = deviations(real, dq, cfg.experiment);
  const ContrastResult single = contrast_single(dev, dq, dq.T_exp);
  const double gap = (dev.dx_R - dev.dx_L).abs().maxCoeff();

  print_kv("contrast", single.contrast, "(single run, t = T_exp)");
  print_kv("dx_final", single.dx_final, "m");
  print_kv("dp_final", single.dp_final, "kg m/s");
  print_kv("max_arm_gap", gap, "m  (max |dx_R - dx_L| over the run)");

  const std::string path = out_path(cfg, "trace.csv");
  write_file(path, trace_csv(real, dev));
  std::printf("wrote %s\n", path.c_str());

  if (o.mc_opt->count() > 0) {
    if (o.mc < 2)
      throw std::invalid_argument("contrast: --mc must be at least 2");
    const EnsembleContrastResult ens =
        contrast_ensemble(spec, dq, cfg.experiment, grid, o.mc, dq.T_exp);
    print_kv("mc_contrast", ens.contrast,
             "(ensemble, t = T_exp)");
    print_kv("mc_dx2_mean", ens.dx2_mean, "m^2");
    print_kv("mc_dx2_se", ens.dx2_standard_error, "m^2");
    if (cfg.noise.type == "white")
      print_kv("dx2_closed", ens.dx2_closed_form,
               "m^2  (white-noise closed form)");
  }
  return 0;
}

// ------------------------------------------------------------ sweep, fit --
struct SweepOpts {
  Common common;
  std::string axis = "white-amplitude";
  double from = 0.0;
  double to = 0.0;
  int points = 0;
  bool linear = false;
  CLI::Option* from_opt = nullptr;
  CLI::Option* to_opt = nullptr;
  CLI::Option* points_opt = nullptr;
  std::string x_col = "axis_value";
  std::string y_col;
  bool reference = false;
};

void add_sweep_axis(CLI::App* cmd, SweepOpts& o) {
  cmd->add_option("--axis", o.axis, "Swept quantity")
      ->check(CLI::IsMember({"distance", "white-amplitude", "flicker-k",
                             "flicker-alpha", "gamma-target"}))
      ->capture_default_str();
  o.from_opt = cmd->add_option("--from", o.from, "Sweep range start");
  o.to_opt = cmd->add_option("--to", o.to, "Sweep range end");
  o.points_opt =
      cmd->add_option("--points", o.points, "Number of sweep points (>= 2)");
  cmd->add_flag("--linear", o.linear,
                "Linear spacing (default is logarithmic)");
}

SweepSpec build_sweep_spec(const RunConfig& cfg, const SweepOpts& o) {
  SweepSpec s;
  s.base = cfg.experiment;
  s.integration = cfg.integration;
  s.white_A = cfg.noise.A;
  s.flicker_K = cfg.noise.K;
  s.flicker_alpha = cfg.noise.alpha;
  if (o.axis == "distance") s.axis = SweepAxis::Distance;
  else if (o.axis == "white-amplitude") s.axis = SweepAxis::WhiteAmplitude;
  else if (o.axis == "flicker-k") s.axis = SweepAxis::FlickerK;
  else if (o.axis == "flicker-alpha") s.axis = SweepAxis::FlickerAlpha;
  else s.axis = SweepAxis::GammaTarget;
  if (o.from_opt->count() > 0) s.range.lo = o.from;
  if (o.to_opt->count() > 0) s.range.hi = o.to;
  if (o.points_opt->count() > 0) s.range.points = o.points;
  s.range.log_spacing = !o.linear;
  // Defaults per axis when the range is not given explicitly.
  if (o.from_opt->count() == 0 && o.to_opt->count() == 0) {
    switch (s.axis) {
      case SweepAxis::Distance:
        s.range.lo = 1e-5; s.range.hi = 8e-5; break;
      case SweepAxis::WhiteAmplitude:
        s.range.lo = 1e-7; s.range.hi = 1e-5; break;
      case SweepAxis::FlickerK:
        s.range.lo = 1e-14; s.range.hi = 1e-12; break;
      case SweepAxis::FlickerAlpha:
        s.range.lo = 0.5; s.range.hi = 1.5; break;
      case SweepAxis::GammaTarget:
        s.range.lo = 1.0; s.range.hi = 1e3; break;
    }
  }
  return s;
}

int cmd_sweep(const SweepOpts& o) {
  const RunConfig cfg = prepare(o.common);
  const SweepTable table = run_sweep(build_sweep_spec(cfg, o));
  const std::string path = out_path(cfg, "sweep.csv");
  write_file(path, table.to_csv());
  std::printf("axis %s: %ld rows x %ld columns\n", o.axis.c_str(),
              static_cast<long>(table.size()),
              static_cast<long>(table.columns.size()));
  for (std::size_t i = 0; i < table.status.size(); ++i)
    if (table.status[i] != "ok")
      std::printf("row %ld flagged: %s\n", static_cast<long>(i),
                  table.status[i].c_str());
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

nlohmann::ordered_json fit_json(const FitResult& f) {
  return {{"slope", f.slope},
          {"intercept", f.intercept},
          {"residual_rms", f.residual_rms}};
}

int cmd_fit(const SweepOpts& o) {
  const RunConfig cfg = prepare(o.common);
  if (o.reference) {
    const ReferenceFits f = reference_fits(cfg.experiment, cfg.integration);
    std::printf("white amplitude   slope %s  intercept %s\n",
                format_sci(f.white_amplitude.slope).c_str(),
                format_sci(f.white_amplitude.intercept).c_str());
    std::printf("flicker amplitude slope %s  intercept %s\n",
                format_sci(f.flicker_amplitude.slope).c_str(),
                format_sci(f.flicker_amplitude.intercept).c_str());
    std::printf("white vs d        slope %s  intercept %s\n",
                format_sci(f.white_intercept_vs_d.slope).c_str(),
                format_sci(f.white_intercept_vs_d.intercept).c_str());
    std::printf("flicker vs d      slope %s  intercept %s\n",
                format_sci(f.flicker_intercept_vs_d.slope).c_str(),
                format_sci(f.flicker_intercept_vs_d.intercept).c_str());
    nlohmann::ordered_json j{
        {"white_amplitude", fit_json(f.white_amplitude)},
        {"flicker_amplitude", fit_json(f.flicker_amplitude)},
        {"white_intercept_vs_d", fit_json(f.white_intercept_vs_d)},
        {"flicker_intercept_vs_d", fit_json(f.flicker_intercept_vs_d)}};
    const std::string path = out_path(cfg, "fits.json");
    write_file(path, j.dump(2) + "\n");
    std::printf("wrote %s\n", path.c_str());
    return 0;
  }

  SweepOpts so = o;
  if (so.y_col.empty()) {
    if (so.axis == "flicker-k") so.y_col = "gamma_flicker";
    else so.y_col = "gamma_white";
  }
  const SweepTable table = run_sweep(build_sweep_spec(cfg, so));
  const FitResult fit = loglog_fit(table, so.x_col, so.y_col);
  std::printf("log10(%s) vs log10(%s)\n", so.y_col.c_str(), so.x_col.c_str());
  print_kv("slope", fit.slope);
  print_kv("intercept", fit.intercept);
  print_kv("residual_rms", fit.residual_rms);
  const std::string sweep_path = out_path(cfg, "sweep.csv");
  write_file(sweep_path, table.to_csv());
  nlohmann::ordered_json j{{"x", so.x_col}, {"y", so.y_col}};
  j["fit"] = fit_json(fit);
  const std::string fit_path = out_path(cfg, "fit.json");
  write_file(fit_path, j.dump(2) + "\n");
  std::printf("wrote %s and %s\n", sweep_path.c_str(), fit_path.c_str());
  return 0;
}

// ------------------------------------------------------------- noise-gen --
struct NoiseGenOpts {
  Common common;
  int count = 1;
};

int cmd_noise_gen(const NoiseGenOpts& o) {
  const RunConfig cfg = prepare(o.common);
  if (o.count < 1)
    throw std::invalid_argument("noise-gen: --count must be at least 1");
  const DerivedQuantities dq = derive_quantities(cfg.experiment);
  const NoiseSpectrum spec = make_spectrum(cfg);
  const SimulationGrid grid = SimulationGrid::for_system(
      dq, cfg.simulation.samples_per_loop, cfg.simulation.loops,
      cfg.simulation.seed);
  const Eigen::ArrayXd times = grid.times();
  for (int i = 0; i < o.count; ++i) {
    const NoiseRealization real = synthesize_noise(spec, grid, i);
    std::string csv = "t,deta\n";
    for (Eigen::Index k = 0; k < grid.n; ++k)
      csv += format_sci(times[k]) + "," + format_sci(real.values[k]) + "\n";
    char name[64];
    std::snprintf(name, sizeof(name), "noise_%03d.csv", i);
    const std::string path = out_path(cfg, name);
    write_file(path, csv);
    const double rms = std::sqrt(real.values.square().mean());
    std::printf("path %3d: n=%ld dt=%s rms=%s  -> %s\n", i,
                static_cast<long>(grid.n), format_sci(grid.dt, 6).c_str(),
                format_sci(rms, 6).c_str(), path.c_str());
  }
  return 0;
}

// ------------------------------------------------------------- reproduce --
int cmd_reproduce() {
  const std::vector<CheckResult> results = run_acceptance_suite();
  std::fputs(format_check_table(results).c_str(), stdout);
  int failures = 0;
  for (const CheckResult& r : results)
    if (!r.passed) ++failures;
  std::printf("%zu checks, %d failed\n", results.size(), failures);
  return failures;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Magnetic-gradient-noise dephasing, noise bounds, and contrast for a "
      "levitated Stern-Gerlach interferometer"};
  app.require_subcommand(1);
  int rc = 0;

  Common derive_c;
  CLI::App* derive =
      app.add_subcommand("derive", "Derived experiment quantities");
  add_common(derive, derive_c);
  derive->callback([&] { rc = cmd_derive(derive_c); });

  GammaOpts gamma_o;
  CLI::App* gammac = app.add_subcommand(
      "gamma", "Dephasing rate for the configured noise spectrum");
  add_common(gammac, gamma_o.common);
  gammac->add_option("--noise", gamma_o.noise_override,
                     "Override the noise type from the config")
      ->check(CLI::IsMember({"white", "flicker", "custom"}));
  gamma_o.ximin_opt = gammac->add_option(
      "--ximin", gamma_o.ximin,
      "Override the lower integration cutoff (in units of omega0)");
  gammac->add_flag("--with-dev", gamma_o.with_dev,
                   "Also report the deviation-term and combined rates");
  gammac->callback([&] { rc = cmd_gamma(gamma_o); });

  BoundOpts bound_o;
  CLI::App* bound = app.add_subcommand(
      "bound", "Noise amplitude bounds sustaining a coherence target");
  add_common(bound, bound_o.common);
  bound_o.gamma_opt = bound->add_option(
      "--target-gamma", bound_o.target_gamma, "Dephasing-rate target [1/s]");
  bound
      ->add_option("--target-coherence", bound_o.target_coherence,
                   "One-loop coherence target in (0, 1)")
      ->excludes(bound_o.gamma_opt)
      ->capture_default_str();
  bound->callback([&] { rc = cmd_bound(bound_o); });

  ContrastOpts contrast_o;
  CLI::App* contrast = app.add_subcommand(
      "contrast", "Single-run (and optionally ensemble) contrast at t = "
                  "T_exp, with a trajectory trace CSV");
  add_common(contrast, contrast_o.common);
  contrast_o.mc_opt = contrast->add_option(
      "--mc", contrast_o.mc, "Also run a Monte-Carlo ensemble of this size");
  contrast->callback([&] { rc = cmd_contrast(contrast_o); });

  SweepOpts sweep_o;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Parameter sweep over rates, bounds, and contrast inputs");
  add_common(sweep, sweep_o.common);
  add_sweep_axis(sweep, sweep_o);
  sweep->callback([&] { rc = cmd_sweep(sweep_o); });

  SweepOpts fit_o;
  CLI::App* fit = app.add_subcommand(
      "fit", "Log-log power-law fit of a sweep column (or --reference-fits for "
             "the bundled amplitude/distance fits)");
  add_common(fit, fit_o.common);
  add_sweep_axis(fit, fit_o);
  fit->add_option("--x", fit_o.x_col, "Abscissa column")
      ->capture_default_str();
  fit->add_option("--y", fit_o.y_col,
                  "Ordinate column (default gamma_white, or gamma_flicker "
                  "for --axis flicker-k)");
  fit->add_flag("--reference-fits", fit_o.reference,
                "Run the four reference amplitude/distance fits");
  fit->callback([&] { rc = cmd_fit(fit_o); });

  NoiseGenOpts noise_o;
  CLI::App* noisegen = app.add_subcommand(
      "noise-gen", "Synthesize seeded noise paths as CSV");
  add_common(noisegen, noise_o.common);
  noisegen->add_option("--count", noise_o.count, "Number of paths")
      ->capture_default_str();
  noisegen->callback([&] { rc = cmd_noise_gen(noise_o); });

  CLI::App* repro = app.add_subcommand(
      "reproduce",
      "Run the acceptance suite against the bundled reference targets");
  repro->callback([&] { rc = cmd_reproduce(); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return rc;
}
