#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "doctest.h"
#include "magnoise/dephasing.hpp"
#include "magnoise/physics.hpp"
#include "magnoise/quadrature.hpp"
#include "magnoise/spectra.hpp"

using namespace magnoise;
using doctest::Approx;

namespace {

const ExperimentParams kParams = reference_params(1e-15);
const DerivedQuantities kDq = derive_quantities(kParams);

// Rate sustaining a per-loop coherence of 0.1: -ln(0.1) / T_exp.
const double kGammaTarget = 1.555139409104173e2;

// A flicker spectrum whose value at xi * omega0 is exactly xi^-alpha, so
// DephasingResult::integral_value equals the dimensionless transfer integral.
FlickerNoise unit_flicker(double alpha) {
  FlickerNoise f;
  f.alpha = alpha;
  f.I = kParams.I;
  f.d = kParams.d;
  const double geometry = kParams.mu0 * kParams.I * kParams.I /
                          (2.0 * std::numbers::pi * kParams.d * kParams.d *
                           std::pow(kDq.omega0, alpha));
  f.K = 1.0 / geometry;
  return f;
}

}  // namespace

TEST_CASE("rate prefactor") {
  const double pref = dephasing_prefactor(kDq);
  CHECK(pref == Approx(1.039328090657084e13).epsilon(1e-9));
  CHECK(pref ==
        Approx(8.0 * kDq.H * kDq.H / std::pow(kDq.omega0, 5)).epsilon(1e-12));
}

TEST_CASE("unit-amplitude transfer integrals") {
  const WhiteNoise unit_white{1.0};

  SUBCASE("oscillator transfer from one loop frequency up") {
    const DephasingResult r = gamma(unit_white, kDq, TransferKind::HO);
    CHECK(r.integral_value == Approx(1.787300271355801).epsilon(1e-6));
    CHECK(r.abs_error < 1e-5 * r.gamma);
    CHECK(r.panels >= 1);
  }
  SUBCASE("oscillator transfer from DC") {
    IntegrationConfig cfg;
    cfg.xi_min = 0.0;
    const DephasingResult r = gamma(unit_white, kDq, TransferKind::HO, cfg);
    CHECK(r.integral_value == Approx(4.317951925621671).epsilon(1e-6));
  }
  SUBCASE("flicker-weighted oscillator transfer") {
    const DephasingResult r =
        gamma(unit_flicker(1.0), kDq, TransferKind::HO);
    CHECK(r.integral_value == Approx(1.278563116).epsilon(1e-6));
  }
  SUBCASE("flicker-weighted transfer with low-frequency cutoffs") {
    IntegrationConfig cfg;
    cfg.xi_min = 1e-4;
    DephasingResult r = gamma(unit_flicker(1.0), kDq, TransferKind::HO, cfg);
    CHECK(r.integral_value == Approx(24.125278883).epsilon(1e-6));
    cfg.xi_min = 1e-6;
    r = gamma(unit_flicker(1.0), kDq, TransferKind::HO, cfg);
    CHECK(r.integral_value == Approx(35.488080869).epsilon(1e-6));
  }
  SUBCASE("deviation transfer outside the resonance notch") {
    const DephasingResult r = gamma(unit_white, kDq, TransferKind::Dev);
    CHECK(r.integral_value == Approx(6154.966).epsilon(1e-6));
  }
  SUBCASE("combined amplitudes exceed the oscillator rate alone") {
    IntegrationConfig cfg;
    cfg.xi_min = 1.0001;
    const DephasingResult tot = gamma_total(unit_white, kDq, cfg);
    CHECK(tot.integral_value == Approx(6177.420).epsilon(1e-6));
    const DephasingResult ho = gamma(unit_white, kDq, TransferKind::HO, cfg);
    // (sqrt(f_ho) + sqrt(f_dev))^2 >= f_ho pointwise.
    CHECK(tot.gamma > ho.gamma);
  }
}

TEST_CASE("rate is quadratic in the white-noise amplitude") {
  const double A = 1.7e-6;
  const DephasingResult r1 = gamma(WhiteNoise{A}, kDq, TransferKind::HO);
  const DephasingResult r2 = gamma(WhiteNoise{2.0 * A}, kDq, TransferKind::HO);
  // The adaptive refinement is scale-invariant, so the ratio is exact.
  CHECK(r2.gamma == Approx(4.0 * r1.gamma).epsilon(1e-12));
  CHECK(r1.coherence == Approx(std::exp(-r1.gamma * kDq.T_exp)).epsilon(1e-14));
}

TEST_CASE("flicker noise rejects a DC lower cutoff") {
  IntegrationConfig cfg;
  cfg.xi_min = 0.0;
  CHECK_THROWS_WITH_AS(
      gamma(unit_flicker(1.0), kDq, TransferKind::HO, cfg),
      doctest::Contains("non-integrable at DC"), std::domain_error);
  CHECK_THROWS_AS(gamma_total(unit_flicker(1.0), kDq, cfg), std::domain_error);
}

TEST_CASE("integration config invariants") {
  IntegrationConfig cfg;
  cfg.xi_min = 2.0;
  cfg.xi_max = 1.0;
  CHECK_THROWS_WITH_AS(validate(cfg), doctest::Contains("xi_min < xi_max"),
                       std::invalid_argument);
  cfg = IntegrationConfig{};
  cfg.rel_tol = 0.0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = IntegrationConfig{};
  cfg.resonance_halfwidth = 0.7;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  CHECK_NOTHROW(validate(IntegrationConfig{}));
}

TEST_CASE("noise-amplitude bounds at the target rate") {
  const double a_max = bound_white(kGammaTarget, kDq);
  CHECK(a_max == Approx(2.893407282253105e-6).epsilon(1e-9));

  FlickerNoise tmpl = unit_flicker(1.0);
  const double k_max = bound_flicker(kGammaTarget, kDq, tmpl);
  CHECK(k_max == Approx(6.897560209873976e-14).epsilon(1e-9));

  CHECK(current_noise_ratio(kGammaTarget, kDq) ==
        Approx(1.328078768302645e-8).epsilon(1e-12));

  SUBCASE("forward rate at the bound recovers the target") {
    const DephasingResult rw = gamma(WhiteNoise{a_max}, kDq, TransferKind::HO);
    CHECK(rw.gamma == Approx(kGammaTarget).epsilon(1e-6));
    CHECK(rw.coherence == Approx(0.1).epsilon(1e-5));

    tmpl.K = k_max;
    const DephasingResult rf = gamma(tmpl, kDq, TransferKind::HO);
    CHECK(rf.gamma == Approx(kGammaTarget).epsilon(1e-6));
    CHECK(rf.coherence == Approx(0.1).epsilon(1e-5));
  }
  SUBCASE("bounds scale as the square root of the target rate") {
    CHECK(bound_white(4.0 * kGammaTarget, kDq) ==
          Approx(2.0 * a_max).epsilon(1e-9));
    CHECK(bound_flicker(4.0 * kGammaTarget, kDq, tmpl) ==
          Approx(4.0 * k_max).epsilon(1e-9));
  }
  SUBCASE("non-positive targets are rejected") {
    CHECK_THROWS_WITH_AS(bound_white(0.0, kDq),
                         doctest::Contains("target must be positive"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(bound_flicker(-1.0, kDq, tmpl),
                         doctest::Contains("target must be positive"),
                         std::invalid_argument);
    CHECK_THROWS_AS(current_noise_ratio(-1.0, kDq), std::invalid_argument);
  }
}

TEST_CASE("coherence helper") {
  CHECK(coherence(0.0, 1.0) == Approx(1.0));
  CHECK(coherence(kGammaTarget, kDq.T_exp) == Approx(0.1).epsilon(1e-12));
  CHECK_THROWS_AS(coherence(-1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(coherence(1.0, -1.0), std::invalid_argument);
}

TEST_CASE("generic rate reduces to the standard oscillator rate") {
  const Eigen::Index n = 1025;
  ArmTrajectories traj;
  traj.t = Eigen::ArrayXd::LinSpaced(n, 0.0, kDq.T_exp);
  traj.x_R.resize(n);
  traj.x_L.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    traj.x_R[i] = classical_trajectory(kDq, kParams, Arm::Right, traj.t[i]);
    traj.x_L[i] = classical_trajectory(kDq, kParams, Arm::Left, traj.t[i]);
  }
  const TimeWindow window{0.0, kDq.T_exp};
  const GenericNoiseCoupling c = standard_couplings(kParams, kDq);
  const WhiteNoise spec{2.9e-6};

  IntegrationConfig cfg;
  cfg.xi_max = 32.0;  // 1024 samples/loop resolve 32 omega0 with 32/period
  const DephasingResult generic =
      generic_gamma(spec, c, traj, window, kDq, cfg);
  const DephasingResult reference = gamma(spec, kDq, TransferKind::HO, cfg);
  CHECK(generic.gamma ==
        Approx(reference.gamma).epsilon(1e-3));

  SUBCASE("window endpoints must lie on the grid") {
    const double dt = traj.t[1] - traj.t[0];
    const TimeWindow off{0.0, kDq.T_exp - 0.3 * dt};
    CHECK_THROWS_WITH_AS(generic_gamma(spec, c, traj, off, kDq, cfg),
                         doctest::Contains("not aligned"),
                         std::invalid_argument);
    const TimeWindow empty{kDq.T_exp, kDq.T_exp};
    CHECK_THROWS_WITH_AS(generic_gamma(spec, c, traj, empty, kDq, cfg),
                         doctest::Contains("positive duration"),
                         std::invalid_argument);
  }
  SUBCASE("under-resolved truncation frequency is rejected") {
    IntegrationConfig coarse;
    coarse.xi_max = 128.0;  // only 8 samples per period at 128 omega0
    CHECK_THROWS_WITH_AS(generic_gamma(spec, c, traj, window, kDq, coarse),
                         doctest::Contains("under-resolves"),
                         std::runtime_error);
  }
}

TEST_CASE("material figure of merit") {
  MaterialParams mat;
  mat.area = 7.85e-11;
  mat.temperature = 4.2;
  CHECK(nb_material_constant(0.7e-13, mat) ==
        Approx(0.7e-13 * 7.85e-11 / (4.2 * 4.2)).epsilon(1e-14));
  CHECK(nb_material_constant(0.7e-13, mat) ==
        Approx(3.115079365079365e-25).epsilon(1e-12));

  MaterialParams bad = mat;
  bad.area = 0.0;
  CHECK_THROWS_WITH_AS(nb_material_constant(1e-13, bad),
                       doctest::Contains("area and temperature"),
                       std::invalid_argument);
  bad = mat;
  bad.temperature = -1.0;
  CHECK_THROWS_AS(nb_material_constant(1e-13, bad), std::invalid_argument);
}

TEST_CASE("adaptive quadrature building block") {
  const QuadResult r = integrate_adaptive(
      [](double x) { return x * x; }, std::vector<double>{0.0, 1.0});
  CHECK(r.value == Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(r.panels >= 1);

  CHECK_THROWS_WITH_AS(
      integrate_adaptive([](double) { return 1.0; }, std::vector<double>{0.5}),
      doctest::Contains("two breakpoints"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(integrate_adaptive([](double) { return 1.0; },
                                          std::vector<double>{1.0, 0.5}),
                       doctest::Contains("strictly increasing"),
                       std::invalid_argument);
}
