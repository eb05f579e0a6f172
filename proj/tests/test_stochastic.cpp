#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Core>

#include "doctest.h"
#include "magnoise/dephasing.hpp"
#include "magnoise/physics.hpp"
#include "magnoise/spectra.hpp"
#include "magnoise/stochastic.hpp"

using namespace magnoise;
using doctest::Approx;

namespace {

const ExperimentParams kParams = reference_params(1e-15);
const DerivedQuantities kDq = derive_quantities(kParams);
const double kA = 2.9e-6;

double rel_l2(const Eigen::ArrayXd& got, const Eigen::ArrayXd& want) {
  return std::sqrt((got - want).square().sum() / want.square().sum());
}

// A pure-cosine gradient path delta_eta = eps * cos(ws t) on the grid; the
// solvers only read `values` and `grid`.
NoiseRealization tone_path(const SimulationGrid& grid, double ws, double eps) {
  NoiseRealization real;
  real.grid = grid;
  real.values = eps * (ws * grid.times()).cos();
  return real;
}

// Exact from-rest response of x'' + omega0^2 x = -(C/m)(2 cos(omega0 t) - 1)
// eps cos(ws t): the modulation splits the tone into omega0 +- ws and ws, and
// each off-resonant tone a cos(w t) responds as a (cos(w t) - cos(omega0 t))
// / (omega0^2 - w^2).
void closed_tone_response(const SimulationGrid& grid, double ws, double eps,
                          Arm arm, Eigen::ArrayXd& x, Eigen::ArrayXd& p) {
  const double C = arm_coefficient(kParams, arm);
  const double w0 = kDq.omega0;
  const Eigen::ArrayXd t = grid.times();
  x = Eigen::ArrayXd::Zero(grid.n);
  p = Eigen::ArrayXd::Zero(grid.n);
  const double amps[3] = {-C * eps / kParams.m, -C * eps / kParams.m,
                          C * eps / kParams.m};
  const double freqs[3] = {w0 + ws, std::abs(w0 - ws), ws};
  for (int i = 0; i < 3; ++i) {
    const double den = w0 * w0 - freqs[i] * freqs[i];
    x += amps[i] * ((freqs[i] * t).cos() - (w0 * t).cos()) / den;
    p += kParams.m * amps[i] *
         (-freqs[i] * (freqs[i] * t).sin() + w0 * (w0 * t).sin()) / den;
  }
}

}  // namespace

TEST_CASE("simulation grid construction and invariants") {
  const SimulationGrid grid = SimulationGrid::for_system(kDq, 128, 2, 7);
  CHECK(grid.n == 256);
  CHECK(grid.dt == Approx(kDq.T_exp / 128.0).epsilon(1e-15));
  CHECK(grid.seed == 7);
  CHECK(grid.total_time() == Approx(2.0 * kDq.T_exp).epsilon(1e-14));
  // omega0 sits exactly on frequency bin `loops`.
  const double dw = 2.0 * std::numbers::pi / grid.total_time();
  CHECK(2.0 * dw == Approx(kDq.omega0).epsilon(1e-12));
  CHECK_NOTHROW(grid.validate(kDq));

  const Eigen::ArrayXd t = grid.times();
  CHECK(t.size() == grid.n);
  CHECK(t[0] == 0.0);
  CHECK(t[1] == Approx(grid.dt).epsilon(1e-15));

  CHECK_THROWS_WITH_AS(SimulationGrid::for_system(kDq, 96, 2, 0),
                       doctest::Contains("power of two"),
                       std::invalid_argument);
  CHECK_THROWS_AS(SimulationGrid::for_system(kDq, 32, 2, 0),
                  std::invalid_argument);  // under-resolves the trap period
  CHECK_THROWS_WITH_AS(SimulationGrid::for_system(kDq, 128, 0, 0),
                       doctest::Contains("loops"), std::invalid_argument);
}

TEST_CASE("noise synthesis is deterministic and mean-free") {
  const SimulationGrid grid = SimulationGrid::for_system(kDq, 128, 2, 99);
  const WhiteNoise spec{kA};
  const NoiseRealization a = synthesize_noise(spec, grid, 3);
  const NoiseRealization b = synthesize_noise(spec, grid, 3);
  const NoiseRealization c = synthesize_noise(spec, grid, 4);
  CHECK((a.values == b.values).all());
  CHECK(!(a.values == c.values).all());
  CHECK(a.realization_seed == realization_seed(grid.seed, 3));
  CHECK(c.realization_seed == realization_seed(grid.seed, 4));
  CHECK(a.realization_seed != c.realization_seed);

  const double rms = std::sqrt(a.values.square().mean());
  CHECK(std::abs(a.values.mean()) < 1e-12 * rms);  // DC bin is zeroed
  CHECK_THROWS_AS(synthesize_noise(spec, grid, -1), std::invalid_argument);
}

TEST_CASE("white-noise paths carry the prescribed power") {
  const SimulationGrid grid = SimulationGrid::for_system(kDq, 8192, 2, 1);
  // Deterministic regression: this path is reproducible bit-for-bit.
  const NoiseRealization first = synthesize_noise(WhiteNoise{kA}, grid, 0);
  CHECK(std::sqrt(first.values.square().mean()) ==
        Approx(2.147904028306165e-3).epsilon(1e-12));

  // With the DC bin zeroed, E[mean(values^2)] = A^2 (n-1) / T.
  const double expected =
      kA * kA * static_cast<double>(grid.n - 1) / grid.total_time();
  double acc = 0.0;
  for (int i = 0; i < 20; ++i) {
    acc += synthesize_noise(WhiteNoise{kA}, grid, i).values.square().mean();
  }
  acc /= 20.0;
  CHECK(acc == Approx(expected).epsilon(1e-2));
}

TEST_CASE("frequency-domain solver reproduces the exact tone response") {
  // Tone at 3 omega0: the modulation forces 4, 2, and 3 omega0, all on-grid
  // and off-resonant, so the solver is exact up to rounding.
  const SimulationGrid grid = SimulationGrid::for_system(kDq, 256, 2, 42);
  const double eps = 1e-6;
  const NoiseRealization real = tone_path(grid, 3.0 * kDq.omega0, eps);
  Eigen::ArrayXd xc, pc;
  closed_tone_response(grid, 3.0 * kDq.omega0, eps, Arm::Left, xc, pc);
  const ArmDeviation dev = deviation_freq(real, kDq, kParams, Arm::Left);
  CHECK(rel_l2(dev.dx, xc) < 1e-12);
  CHECK(rel_l2(dev.dp, pc) < 1e-12);
  CHECK(dev.dx[0] == Approx(0.0));
  CHECK(dev.dp[0] == Approx(0.0));
}

TEST_CASE("time-domain oracle reproduces a quasi-static tone") {
  // Tone at omega0/32 over 32 loops; the oracle carries O(dt^2) quadrature
  // error, the frequency solver stays exact.
  const SimulationGrid grid = SimulationGrid::for_system(kDq, 64, 32, 1);
  const double ws = kDq.omega0 / 32.0;
  const double eps = 1e-6;
  const NoiseRealization real = tone_path(grid, ws, eps);
  Eigen::ArrayXd xc, pc;
  closed_tone_response(grid, ws, eps, Arm::Right, xc, pc);

  const ArmDeviation oracle = deviation_time_oracle(real, kDq, kParams,
                                                    Arm::Right);
  CHECK(rel_l2(oracle.dx, xc) < 1e-4);  // measured 1.3e-5
  CHECK(rel_l2(oracle.dp, pc) < 1e-4);

  const ArmDeviation freq = deviation_freq(real, kDq, kParams, Arm::Right);
  CHECK(rel_l2(freq.dx, xc) < 1e-12);
  CHECK(rel_l2(freq.dp, pc) < 1e-12);
}

TEST_CASE("solved deviations satisfy the equation of motion") {
  const SimulationGrid grid = SimulationGrid::for_system(kDq, 512, 2, 0);
  const double eps = 1e-6;
  const NoiseRealization real = tone_path(grid, 3.0 * kDq.omega0, eps);
  const ArmDeviation dev = deviation_freq(real, kDq, kParams, Arm::Right);
  const double C = arm_coefficient(kParams, Arm::Right);
  const Eigen::ArrayXd t = grid.times();
  const Eigen::ArrayXd g =
      -(C / kParams.m) * (2.0 * (kDq.omega0 * t).cos() - 1.0) * real.values;
  double num = 0.0;
  double den = 0.0;
  for (Eigen::Index i = 1; i + 1 < grid.n; ++i) {
    const double lhs =
        (dev.dx[i + 1] - 2.0 * dev.dx[i] + dev.dx[i - 1]) / (grid.dt * grid.dt) +
        kDq.omega0 * kDq.omega0 * dev.dx[i];
    num += (lhs - g[i]) * (lhs - g[i]);
    den += g[i] * g[i];
  }
  // Central-difference truncation is (omega dt)^2 / 12 ~ 2e-4 at 4 omega0.
  CHECK(std::sqrt(num / den) < 1e-3);
}

TEST_CASE("deviations helper matches the per-arm solver") {
  const SimulationGrid grid = SimulationGrid::for_system(kDq, 128, 2, 5);
  const NoiseRealization real = synthesize_noise(WhiteNoise{kA}, grid, 0);
  const TrajectoryDeviation both = deviations(real, kDq, kParams);
  const ArmDeviation right = deviation_freq(real, kDq, kParams, Arm::Right);
  const ArmDeviation left = deviation_freq(real, kDq, kParams, Arm::Left);
  CHECK(rel_l2(both.dx_R, right.dx) < 1e-12);
  CHECK(rel_l2(both.dp_R, right.dp) < 1e-12);
  CHECK(rel_l2(both.dx_L, left.dx) < 1e-12);
  CHECK(rel_l2(both.dp_L, left.dp) < 1e-12);
}

TEST_CASE("size and grid mismatches are rejected") {
  const SimulationGrid grid = SimulationGrid::for_system(kDq, 128, 2, 5);
  NoiseRealization bad;
  bad.grid = grid;
  bad.values = Eigen::ArrayXd::Zero(grid.n - 1);
  CHECK_THROWS_WITH_AS(deviation_freq(bad, kDq, kParams, Arm::Right),
                       doctest::Contains("sizes disagree"),
                       std::invalid_argument);

  // A grid that does not span an integer number of loops has no exact
  // resonant bin.
  NoiseRealization off;
  off.grid = grid;
  off.grid.dt *= 1.01;
  off.values = Eigen::ArrayXd::Zero(grid.n);
  CHECK_THROWS_WITH_AS(deviation_freq(off, kDq, kParams, Arm::Right),
                       doctest::Contains("integer number"),
                       std::invalid_argument);
}

TEST_CASE("zero noise leaves the loops unperturbed") {
  const SimulationGrid grid = SimulationGrid::for_system(kDq, 128, 2, 0);
  NoiseRealization real;
  real.grid = grid;
  real.values = Eigen::ArrayXd::Zero(grid.n);
  const TrajectoryDeviation dev = deviations(real, kDq, kParams);
  const ContrastResult c = contrast_single(dev, kDq, kDq.T_exp);
  CHECK(c.contrast == Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(c.dx_final) < 1e-25);
  CHECK(std::abs(c.dp_final) < 1e-30);

  CHECK_THROWS_WITH_AS(contrast_single(dev, kDq, 0.37 * grid.dt),
                       doctest::Contains("not on the simulation grid"),
                       std::invalid_argument);
}

TEST_CASE("ensemble spread matches the white-noise closed form") {
  const SimulationGrid grid = SimulationGrid::for_system(kDq, 128, 2, 9);
  const EnsembleContrastResult r =
      contrast_ensemble(WhiteNoise{kA}, kDq, kParams, grid, 100, kDq.T_exp);
  CHECK(r.realizations == 100);
  CHECK(r.dx2_closed_form ==
        Approx(white_dx2_closed_form(kDq, kParams, kA)).epsilon(1e-14));
  const double z =
      (r.dx2_mean - r.dx2_closed_form) / r.dx2_standard_error;
  CHECK(std::abs(z) < 3.5);  // measured z = +0.35 for this seed
  CHECK(r.contrast > 0.0);
  CHECK(r.contrast <= 1.0);
  CHECK_THROWS_WITH_AS(
      contrast_ensemble(WhiteNoise{kA}, kDq, kParams, grid, 1, kDq.T_exp),
      doctest::Contains("need M >= 2"), std::invalid_argument);
}

TEST_CASE("closed-form spread formula") {
  const double amp =
      2.0 * kParams.hbar * kParams.gamma_e * kA / (kParams.m * kDq.omega0);
  CHECK(white_dx2_closed_form(kDq, kParams, kA) ==
        Approx(amp * amp * 2.0 * std::numbers::pi / kDq.omega0)
            .epsilon(1e-14));
  CHECK(white_dx2_closed_form(kDq, kParams, kA) ==
        Approx(9.539077317128885e-34).epsilon(1e-12));
}

TEST_CASE("Monte-Carlo phase variance agrees with quadrature") {
  const SimulationGrid grid = SimulationGrid::for_system(kDq, 128, 16, 11);
  IntegrationConfig cfg;
  cfg.xi_min = 1.0 / 16.0;  // realized low-frequency cutoff T_exp / total
  cfg.xi_max = 64.0;        // Nyquist of the 128-sample loop
  const DephasingResult ref = gamma(WhiteNoise{kA}, kDq, TransferKind::HO,
                                    cfg);
  const PhaseVarianceResult mc =
      phase_variance_mc(WhiteNoise{kA}, kDq, kParams, 150, grid);
  const double z = (mc.gamma - ref.gamma) / mc.standard_error;
  CHECK(std::abs(z) < 3.0);  // measured z = +0.54 for this seed
  CHECK(mc.realizations == 150);
  CHECK(mc.standard_error ==
        Approx(mc.gamma * std::sqrt(2.0 / 149.0)).epsilon(1e-12));
  CHECK_THROWS_WITH_AS(
      phase_variance_mc(WhiteNoise{kA}, kDq, kParams, 50, grid),
      doctest::Contains("need M >= 100"), std::invalid_argument);
}

TEST_CASE("Welch estimate recovers a white spectrum") {
  const SimulationGrid grid = SimulationGrid::for_system(kDq, 1024, 4, 3);
  const PsdEstimate est = estimate_psd_welch(WhiteNoise{kA}, grid, 50, 1024);
  CHECK(est.segments == 350);  // 7 half-overlapping segments x 50 paths
  CHECK(est.omega.size() == est.psd.size());

  double worst = 0.0;
  double mean = 0.0;
  int nb = 0;
  for (int k = 10; k <= 128; ++k) {
    const double rel = est.psd[k] / (kA * kA) - 1.0;
    worst = std::max(worst, std::abs(rel));
    mean += rel;
    ++nb;
  }
  mean /= nb;
  CHECK(worst < 0.25);            // measured 0.141
  CHECK(std::abs(mean) < 0.05);   // measured -0.005

  CHECK_THROWS_WITH_AS(estimate_psd_welch(WhiteNoise{kA}, grid, 0, 1024),
                       doctest::Contains("need M >= 1"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(estimate_psd_welch(WhiteNoise{kA}, grid, 2, 1000),
                       doctest::Contains("power of two"),
                       std::invalid_argument);
  CHECK_THROWS_AS(estimate_psd_welch(WhiteNoise{kA}, grid, 2, 2 * grid.n),
                  std::invalid_argument);
}
