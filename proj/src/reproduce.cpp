#include "magnoise/reproduce.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "magnoise/dephasing.hpp"
#include "magnoise/physics.hpp"
#include "magnoise/spectra.hpp"
#include "magnoise/stochastic.hpp"
#include "magnoise/sweeps.hpp"
#include "magnoise/transfer.hpp"

namespace magnoise {

namespace {

std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return std::string(buf);
}

bool within(double value, double target, double rel_tol) {
  return std::abs(value - target) <= rel_tol * std::abs(target);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// Unit-amplitude flicker spectrum: S(xi * omega0) = xi^-alpha exactly, so
// gamma()'s integral_value is the dimensionless transfer integral.
FlickerNoise unit_flicker_spectrum(const ExperimentParams& p,
                                   const DerivedQuantities& dq, double alpha) {
  FlickerNoise f;
  f.alpha = alpha;
  f.I = p.I;
  f.d = p.d;
  const double geometry =
      p.mu0 * p.I * p.I /
      (2.0 * std::numbers::pi * p.d * p.d * std::pow(dq.omega0, alpha));
  f.K = 1.0 / geometry;
  return f;
}

FlickerNoise flicker_at(const ExperimentParams& p, double K) {
  FlickerNoise f;
  f.K = K;
  f.alpha = 1.0;
  f.I = p.I;
  f.d = p.d;
  return f;
}

CheckResult check_derived(const DerivedQuantities& dq) {
  CheckResult r;
  r.name = "derived-quantities";
  const bool ok = within(dq.eta0, -6.0e3, 0.01) &&
                  std::abs(dq.omega0 - 424.0) <= 1.0 &&
                  within(dq.H, 4.23e12, 0.01) &&
                  within(dq.T_exp, 1.48e-2, 0.01) &&
                  within(dq.dx_max, 2.5e-9, 0.03);
  r.passed = ok;
  r.detail = fmt(
      "eta0=%.4e T/m (target -6.0e3 +-1%%), omega0=%.6g rad/s (424 +-1), "
      "H=%.4e s^-3 (4.23e12 +-1%%), T_exp=%.4e s (1.48e-2 +-1%%), "
      "dx_max=%.4e m (2.5e-9 +-3%%)",
      dq.eta0, dq.omega0, dq.H, dq.T_exp, dq.dx_max);
  return r;
}

CheckResult check_transfer_integrals(const DerivedQuantities& dq,
                                     const ExperimentParams& p) {
  CheckResult r;
  r.name = "transfer-integrals";
  struct Case {
    const char* label;
    double xi_min;
    bool over_xi;  // integrand f_ho/xi instead of f_ho
    double target;
    double tol;
  };
  const Case cases[] = {
      {"int_1 f_ho", 1.0, false, 1.8, 0.05},
      {"int_0 f_ho", 0.0, false, 4.3, 0.1},
      {"int_1 f_ho/xi", 1.0, true, 1.3, 0.05},
      {"int_1e-4 f_ho/xi", 1e-4, true, 24.0, 1.0},
      {"int_1e-6 f_ho/xi", 1e-6, true, 35.5, 1.0},
  };
  bool ok = true;
  std::string detail;
  for (const Case& c : cases) {
    IntegrationConfig cfg;
    cfg.xi_min = c.xi_min;
    const auto t0 = std::chrono::steady_clock::now();
    double value = 0.0;
    if (c.over_xi) {
      value = gamma(unit_flicker_spectrum(p, dq, 1.0), dq, TransferKind::HO,
                    cfg)
                  .integral_value;
    } else {
      value = gamma(WhiteNoise{1.0}, dq, TransferKind::HO, cfg).integral_value;
    }
    const double dt = seconds_since(t0);
    const bool this_ok = std::abs(value - c.target) <= c.tol && dt < 1.0;
    ok = ok && this_ok;
    detail += fmt("%s=%.6f (%.4g +-%.2g, %.3fs); ", c.label, value, c.target,
                  c.tol, dt);
  }
  r.passed = ok;
  r.detail = detail;
  return r;
}

CheckResult check_removable_singularities() {
  CheckResult r;
  r.name = "removable-singularities";
  const double pi = std::numbers::pi;
  const double v1 = f_ho(1.0);
  const double v2 = f_ho(2.0);
  const bool limits_ok = within(v1, pi * pi / 4.0, 1e-6) &&
                         within(v2, pi * pi / 16.0, 1e-6);

  // Compare the production evaluation against the equivalent algebraic form
  // that writes sin^2(pi xi) as (1 - cos(2 pi xi))/2.  Both forms are
  // ill-conditioned within a few 1e-3 of any integer (the subtraction
  // amplifies rounding as 1/(xi - n)^2), so the sample keeps a 5e-3 guard
  // band around every integer; see the repository docs for the arithmetic.
  std::mt19937_64 rng(20240817ull);
  std::uniform_real_distribution<double> u(std::log10(0.05), std::log10(10.0));
  double max_rel = 0.0;
  int accepted = 0;
  while (accepted < 1000) {
    const double xi = std::pow(10.0, u(rng));
    if (std::abs(xi - std::nearbyint(xi)) < 5e-3) continue;
    ++accepted;
    const double rational =
        (xi * xi + 2.0) / (xi * (xi * xi - 4.0) * (xi * xi - 1.0));
    const double alt =
        0.5 * (1.0 - std::cos(2.0 * pi * xi)) * rational * rational;
    const double ref = f_ho(xi);
    const double rel =
        std::abs(alt - ref) / std::max(std::abs(ref), std::abs(alt));
    max_rel = std::max(max_rel, rel);
  }
  const bool forms_ok = max_rel <= 1e-12;
  r.passed = limits_ok && forms_ok;
  r.detail = fmt(
      "f_ho(1)=%.9g (pi^2/4=%.9g), f_ho(2)=%.9g (pi^2/16=%.9g); two "
      "algebraic forms at 1000 points: max rel diff %.2e (<=1e-12)",
      v1, pi * pi / 4.0, v2, pi * pi / 16.0, max_rel);
  return r;
}

CheckResult check_noise_bounds(const ExperimentParams& p,
                               const DerivedQuantities& dq,
                               double gamma_target) {
  CheckResult r;
  r.name = "noise-bounds";
  IntegrationConfig cfg;
  const double A = bound_white(gamma_target, dq, cfg);
  const double K = bound_flicker(gamma_target, dq, flicker_at(p, 1.0), cfg);
  const double di = current_noise_ratio(gamma_target, dq);
  const SweepTable snr =
      snr_vs_distance(p, gamma_target, {p.d, p.d, 1, false}, cfg);
  const double spread = snr.rows[0][4];
  r.passed = within(A, 2.9e-6, 0.05) && within(K, 0.7e-13, 0.10) &&
             within(di, 1.3e-8, 0.10) && snr.status[0] == "ok" &&
             spread <= 0.05;
  r.detail = fmt(
      "gamma_target=%.4f 1/s -> A=%.4e (2.9e-6 +-5%%), K=%.4e (0.7e-13 "
      "+-10%%), dI/I=%.4e (1.3e-8 +-10%%), three-route spread %.2f%% (<=5%%)",
      gamma_target, A, K, di, 100.0 * spread);
  return r;
}

CheckResult check_loglog_fits(const ExperimentParams& p) {
  CheckResult r;
  r.name = "loglog-fits";
  const ReferenceFits f = reference_fits(p);
  r.passed = std::abs(f.white_amplitude.slope - 2.00) <= 0.01 &&
             std::abs(f.white_amplitude.intercept - 13.274) <= 0.02 &&
             std::abs(f.flicker_amplitude.slope - 1.00) <= 0.01 &&
             std::abs(f.flicker_amplitude.intercept - 15.363) <= 0.02 &&
             std::abs(f.white_intercept_vs_d.slope - 6.00) <= 0.05 &&
             std::abs(f.white_intercept_vs_d.intercept - 41.47) <= 0.05 &&
             std::abs(f.flicker_intercept_vs_d.slope - 6.00) <= 0.05 &&
             std::abs(f.flicker_intercept_vs_d.intercept - 43.56) <= 0.05;
  r.detail = fmt(
      "white: slope %.4f (2.00+-0.01) intercept %.4f (13.274+-0.02); "
      "flicker: slope %.4f (1.00+-0.01) intercept %.4f (15.363+-0.02); "
      "vs d: slopes %.4f/%.4f (6.00+-0.05) offsets %.4f (41.47+-0.05) / "
      "%.4f (43.56+-0.05)",
      f.white_amplitude.slope, f.white_amplitude.intercept,
      f.flicker_amplitude.slope, f.flicker_amplitude.intercept,
      f.white_intercept_vs_d.slope, f.flicker_intercept_vs_d.slope,
      f.white_intercept_vs_d.intercept, f.flicker_intercept_vs_d.intercept);
  return r;
}

CheckResult check_mc_phase_variance(const ExperimentParams& p,
                                    const DerivedQuantities& dq,
                                    double gamma_target) {
  CheckResult r;
  r.name = "mc-phase-variance";
  IntegrationConfig cfg;
  const double A = bound_white(gamma_target, dq, cfg);
  SimulationGrid grid = SimulationGrid::for_system(dq, 128, 64, 7);
  const auto t0 = std::chrono::steady_clock::now();
  const PhaseVarianceResult mc =
      phase_variance_mc(WhiteNoise{A}, dq, p, 1000, grid);
  const double elapsed = seconds_since(t0);
  // Analytic rate over the band the grid actually carries: bin spacing
  // omega0/64 up to the Nyquist frequency 64*omega0.
  IntegrationConfig band;
  band.xi_min = 1.0 / 64.0;
  band.xi_max = 64.0;
  const double analytic =
      gamma(WhiteNoise{A}, dq, TransferKind::HO, band).gamma;
  const double z = std::abs(mc.gamma - analytic) / mc.standard_error;
  r.passed = z <= 3.0 && elapsed < 60.0;
  r.detail = fmt(
      "MC gamma=%.2f +- %.2f 1/s (M=%d, 64 loops x 128 samples), analytic "
      "over the grid band %.2f 1/s, |z|=%.2f (<=3), %.1fs (<60s)",
      mc.gamma, mc.standard_error, mc.realizations, analytic, z, elapsed);
  return r;
}

CheckResult check_solver_equivalence(const ExperimentParams& p,
                                     const DerivedQuantities& dq,
                                     double gamma_target) {
  CheckResult r;
  r.name = "solver-equivalence";
  IntegrationConfig cfg;
  const double A = bound_white(gamma_target, dq, cfg);
  const double K = bound_flicker(gamma_target, dq, flicker_at(p, 1.0), cfg);
  const NoiseSpectrum families[] = {NoiseSpectrum{WhiteNoise{A}},
                                    NoiseSpectrum{flicker_at(p, K)}};
  const char* labels[] = {"white", "flicker"};
  bool ok = true;
  std::string detail;
  for (int fam = 0; fam < 2; ++fam) {
    SimulationGrid grid = SimulationGrid::for_system(dq, 8192, 2, 0);
    double worst_x = 0.0;
    double worst_p = 0.0;
    for (int s = 0; s < 20; ++s) {
      grid.seed = 1000 + static_cast<std::uint64_t>(s);
      const NoiseRealization real = synthesize_noise(families[fam], grid);
      const ArmDeviation freq = deviation_freq(real, dq, p, Arm::Right);
      const ArmDeviation oracle =
          deviation_time_oracle(real, dq, p, Arm::Right);
      double ex = 0.0, nx = 0.0, ep = 0.0, np = 0.0;
      for (Eigen::Index i = 0; i <= 8192; ++i) {
        const double dx = freq.dx[i] - oracle.dx[i];
        const double dp = freq.dp[i] - oracle.dp[i];
        ex += dx * dx;
        nx += oracle.dx[i] * oracle.dx[i];
        ep += dp * dp;
        np += oracle.dp[i] * oracle.dp[i];
      }
      worst_x = std::max(worst_x, std::sqrt(ex / nx));
      worst_p = std::max(worst_p, std::sqrt(ep / np));
    }
    ok = ok && worst_x < 1e-3 && worst_p < 1e-3;
    detail += fmt("%s: worst rel L2 dx %.2e, dp %.2e (<1e-3, 20 seeds); ",
                  labels[fam], worst_x, worst_p);
  }
  r.passed = ok;
  r.detail = detail;
  return r;
}

CheckResult check_psd_recovery(const ExperimentParams& p,
                               const DerivedQuantities& dq,
                               double gamma_target) {
  CheckResult r;
  r.name = "psd-recovery";
  IntegrationConfig cfg;
  const double A = bound_white(gamma_target, dq, cfg);
  const double K = bound_flicker(gamma_target, dq, flicker_at(p, 1.0), cfg);

  SimulationGrid grid = SimulationGrid::for_system(dq, 1024, 16, 5);
  const PsdEstimate west = estimate_psd_welch(WhiteNoise{A}, grid, 200, 1024);
  const double dw_seg = west.omega[1];
  const double nyquist = std::numbers::pi / grid.dt;
  double worst_flat = 0.0;
  for (Eigen::Index k = 0; k < west.omega.size(); ++k) {
    if (west.omega[k] < 10.0 * dw_seg || west.omega[k] > 0.25 * nyquist)
      continue;
    worst_flat =
        std::max(worst_flat, std::abs(west.psd[k] / (A * A) - 1.0));
  }

  const PsdEstimate fest =
      estimate_psd_welch(flicker_at(p, K), grid, 200, 4096);
  const double dwf = fest.omega[1];
  std::vector<double> lw, lp;
  for (Eigen::Index k = 0; k < fest.omega.size(); ++k) {
    if (fest.omega[k] < 4.0 * dwf || fest.omega[k] > 400.0 * dwf) continue;
    lw.push_back(std::log10(fest.omega[k]));
    lp.push_back(std::log10(fest.psd[k]));
  }
  Eigen::ArrayXd lx = Eigen::Map<Eigen::ArrayXd>(lw.data(), lw.size());
  Eigen::ArrayXd ly = Eigen::Map<Eigen::ArrayXd>(lp.data(), lp.size());
  const FitResult fit = linear_fit(lx, ly);

  r.passed = worst_flat <= 0.10 && std::abs(fit.slope + 1.0) <= 0.1;
  r.detail = fmt(
      "white periodogram flat within %.1f%% per bin (<=10%%, band "
      "[10 dw, Nyq/4], 200 paths); flicker log-log slope %.4f (-1.0+-0.1 "
      "over two decades, residual rms %.3f)",
      100.0 * worst_flat, fit.slope, fit.residual_rms);
  return r;
}

CheckResult check_contrast_closure(const ExperimentParams& p,
                                   const DerivedQuantities& dq,
                                   double gamma_target) {
  CheckResult r;
  r.name = "contrast-closure";
  IntegrationConfig cfg;
  const double A = bound_white(gamma_target, dq, cfg);
  const double K = bound_flicker(gamma_target, dq, flicker_at(p, 1.0), cfg);
  const NoiseSpectrum families[] = {NoiseSpectrum{WhiteNoise{A}},
                                    NoiseSpectrum{flicker_at(p, K)}};
  const char* labels[] = {"white", "flicker"};
  const SimulationGrid grid = SimulationGrid::for_system(dq, 8192, 2, 1);
  bool ok = true;
  std::string detail;
  for (int fam = 0; fam < 2; ++fam) {
    const NoiseRealization real = synthesize_noise(families[fam], grid);
    const TrajectoryDeviation dev = deviations(real, dq, p);
    const ContrastResult single = contrast_single(dev, dq, dq.T_exp);
    const double gap = (dev.dx_R - dev.dx_L).abs().maxCoeff();
    const EnsembleContrastResult ens =
        contrast_ensemble(families[fam], dq, p, grid, 500, dq.T_exp);
    const bool this_ok = single.contrast >= 0.99 && ens.contrast >= 0.99 &&
                         gap >= 1e-20 && gap <= 1e-16;
    ok = ok && this_ok;
    detail += fmt(
        "%s: single contrast %.6f, ensemble %.6f (>=0.99, M=500), max "
        "|dx_R-dx_L| %.2e m (in [1e-20,1e-16]); ",
        labels[fam], single.contrast, ens.contrast, gap);
  }
  r.passed = ok;
  r.detail = detail;
  return r;
}

CheckResult check_documented_discrepancies(const ExperimentParams& p,
                                           const DerivedQuantities& dq,
                                           double gamma_target) {
  CheckResult r;
  r.name = "documented-discrepancies";
  IntegrationConfig cfg;
  const double A = bound_white(gamma_target, dq, cfg);

  // The quoted ensemble spread 4e-70 m^2 is dimensionally inconsistent with
  // these inputs; the closed form for white noise is asserted against the
  // ensemble instead.
  const SimulationGrid grid = SimulationGrid::for_system(dq, 8192, 2, 1);
  const EnsembleContrastResult ens =
      contrast_ensemble(WhiteNoise{A}, dq, p, grid, 500, dq.T_exp);
  const double z = std::abs(ens.dx2_mean - ens.dx2_closed_form) /
                   ens.dx2_standard_error;
  const bool dx2_ok = z <= 3.0;

  // The quoted mean-square momentum gap 5.25e-22 equals the deterministic
  // kick amplitude (C_R - C_L)|eta0|/omega0, which vanishes at the closing
  // time; both facts are asserted.
  const double amp = (dq.C_R - dq.C_L) * std::abs(dq.eta0) / dq.omega0;
  const NoiseRealization quiet = synthesize_noise(WhiteNoise{0.0}, grid);
  const TrajectoryDeviation dev0 = deviations(quiet, dq, p);
  const ContrastResult closed0 = contrast_single(dev0, dq, dq.T_exp);
  const bool amp_ok = within(amp, 5.25e-22, 0.01) &&
                      std::abs(closed0.dp_final) <= 1e-30 &&
                      std::abs(closed0.contrast - 1.0) <= 1e-12;

  // The quoted material constant 0.3e-23 m^2 K^-2 does not follow from
  // K*area/temperature^2 with the stated inputs (which give ~3.1e-25); the
  // formula-level scalings are asserted instead.
  MaterialParams mat;
  mat.area = 7.85e-11;
  mat.temperature = 4.2;
  const double C1 = nb_material_constant(0.7e-13, mat);
  MaterialParams hot = mat;
  hot.temperature = 2.0 * mat.temperature;
  const bool mat_ok = within(C1, 0.7e-13 * 7.85e-11 / (4.2 * 4.2), 1e-12) &&
                      within(nb_material_constant(1.4e-13, mat), 2.0 * C1,
                             1e-12) &&
                      within(nb_material_constant(0.7e-13, hot), 0.25 * C1,
                             1e-12);

  r.passed = dx2_ok && amp_ok && mat_ok;
  r.detail = fmt(
      "<dx^2(T)>: closed form %.4e m^2 vs ensemble %.4e +- %.2e (|z|=%.2f "
      "<=3; supersedes the non-derivable 4e-70); momentum kick amplitude "
      "%.4e kg m/s (quoted 5.25e-22 is this amplitude, not a mean square; "
      "vanishes at T: |dp|=%.1e, contrast %.12f); material constant "
      "K*area/T^2 = %.4e m^2/K^2 (quoted 0.3e-23 is ~10x larger; linear-K "
      "and 1/T^2 scalings hold)",
      ens.dx2_closed_form, ens.dx2_mean, ens.dx2_standard_error, z, amp,
      std::abs(closed0.dp_final), closed0.contrast, C1);
  return r;
}

template <typename Fn>
CheckResult guarded(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    CheckResult r;
    r.name = name;
    r.passed = false;
    r.detail = std::string("unexpected exception: ") + e.what();
    return r;
  }
}

}  // namespace

std::vector<CheckResult> run_acceptance_suite() {
  const ExperimentParams params = reference_params(1e-15);
  const DerivedQuantities dq = derive_quantities(params);
  const double gamma_target = -std::log(0.1) / dq.T_exp;

  std::vector<CheckResult> out;
  out.push_back(guarded("derived-quantities", [&] { return check_derived(dq); }));
  out.push_back(guarded("transfer-integrals",
                        [&] { return check_transfer_integrals(dq, params); }));
  out.push_back(guarded("removable-singularities",
                        [&] { return check_removable_singularities(); }));
  out.push_back(guarded("noise-bounds", [&] {
    return check_noise_bounds(params, dq, gamma_target);
  }));
  out.push_back(
      guarded("loglog-fits", [&] { return check_loglog_fits(params); }));
  out.push_back(guarded("mc-phase-variance", [&] {
    return check_mc_phase_variance(params, dq, gamma_target);
  }));
  out.push_back(guarded("solver-equivalence", [&] {
    return check_solver_equivalence(params, dq, gamma_target);
  }));
  out.push_back(guarded("psd-recovery", [&] {
    return check_psd_recovery(params, dq, gamma_target);
  }));
  out.push_back(guarded("contrast-closure", [&] {
    return check_contrast_closure(params, dq, gamma_target);
  }));
  out.push_back(guarded("documented-discrepancies", [&] {
    return check_documented_discrepancies(params, dq, gamma_target);
  }));
  return out;
}

std::string format_check_table(const std::vector<CheckResult>& results) {
  std::size_t width = 0;
  for (const CheckResult& r : results) width = std::max(width, r.name.size());
  std::string out;
  for (const CheckResult& r : results) {
    out += r.passed ? "PASS  " : "FAIL  ";
    out += r.name;
    out.append(width - r.name.size() + 2, ' ');
    out += r.detail;
    out += '\n';
  }
  return out;
}

}  // namespace magnoise
