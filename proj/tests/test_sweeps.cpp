#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "doctest.h"
#include "magnoise/physics.hpp"
#include "magnoise/sweeps.hpp"

using namespace magnoise;
using doctest::Approx;

namespace {
const ExperimentParams kParams = reference_params(1e-15);
}

TEST_CASE("sweep ranges generate log and linear grids") {
  SweepRange log_range{1e-7, 1e-5, 3, true};
  const Eigen::ArrayXd lg = log_range.values();
  REQUIRE(lg.size() == 3);
  CHECK(lg[0] == Approx(1e-7).epsilon(1e-12));
  CHECK(lg[1] == Approx(1e-6).epsilon(1e-12));
  CHECK(lg[2] == Approx(1e-5).epsilon(1e-12));

  SweepRange lin_range{0.0, 4.0, 5, false};
  const Eigen::ArrayXd ln = lin_range.values();
  REQUIRE(ln.size() == 5);
  CHECK(ln[0] == Approx(0.0));
  CHECK(ln[3] == Approx(3.0).epsilon(1e-14));

  SweepRange single{2.5, 0.0, 1, false};
  const Eigen::ArrayXd sv = single.values();
  REQUIRE(sv.size() == 1);
  CHECK(sv[0] == Approx(2.5));

  CHECK_THROWS_WITH_AS((SweepRange{1.0, 2.0, 0, false}.values()),
                       doctest::Contains("points must be >= 1"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS((SweepRange{2.0, 1.0, 4, false}.values()),
                       doctest::Contains("hi must exceed lo"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS((SweepRange{0.0, 1.0, 4, true}.values()),
                       doctest::Contains("positive endpoints"),
                       std::invalid_argument);
}

TEST_CASE("amplitude sweep scales quadratically and keeps bounds fixed") {
  SweepSpec spec;
  spec.base = kParams;
  spec.axis = SweepAxis::WhiteAmplitude;
  spec.range = SweepRange{1e-7, 1e-5, 5, true};
  const SweepTable table = run_sweep(spec);
  REQUIRE(table.size() == 5);
  for (const std::string& s : table.status) CHECK(s == "ok");

  const Eigen::ArrayXd a = table.column("axis_value");
  const Eigen::ArrayXd gw = table.column("gamma_white");
  const Eigen::ArrayXd cw = table.column("coherence_white");
  const Eigen::ArrayXd gf = table.column("gamma_flicker");
  const Eigen::ArrayXd ab = table.column("a_bound");
  const Eigen::ArrayXd kb = table.column("k_bound");
  const Eigen::ArrayXd te = table.column("T_exp");
  for (Eigen::Index i = 0; i < table.size(); ++i) {
    const double ratio = (a[i] / a[0]) * (a[i] / a[0]);
    CHECK(gw[i] == Approx(gw[0] * ratio).epsilon(1e-9));
    CHECK(cw[i] == Approx(std::exp(-gw[i] * te[i])).epsilon(1e-12));
    // The flicker column and both bounds do not depend on the white
    // amplitude being swept.
    CHECK(gf[i] == Approx(gf[0]).epsilon(1e-12));
    CHECK(ab[i] == Approx(2.893407282253105e-6).epsilon(1e-9));
    CHECK(kb[i] == Approx(6.897560209873976e-14).epsilon(1e-9));
  }

  SUBCASE("white power-law fit against the amplitude") {
    const FitResult f = loglog_fit(table, "axis_value", "gamma_white");
    CHECK(f.slope == Approx(2.0).epsilon(1e-9));
    CHECK(std::abs(f.intercept - 13.268950186731) < 1e-6);
    CHECK(f.residual_rms < 1e-12);
  }
  SUBCASE("unknown columns are rejected") {
    CHECK_THROWS_WITH_AS(table.column("bogus"),
                         doctest::Contains("unknown column"),
                         std::invalid_argument);
  }
  SUBCASE("csv rendering") {
    const std::string csv = table.to_csv();
    CHECK(csv.rfind("axis_value,", 0) == 0);
    CHECK(csv.find(",status\n") != std::string::npos);
    CHECK(csv.find(",ok\n") != std::string::npos);
  }
}

TEST_CASE("invalid rows are flagged and do not poison their neighbours") {
  SweepSpec spec;
  spec.base = kParams;
  spec.axis = SweepAxis::Distance;
  spec.range = SweepRange{-1e-5, 2e-5, 4, false};  // includes d <= 0
  const SweepTable table = run_sweep(spec);
  REQUIRE(table.size() == 4);
  CHECK(table.status[0].find("d > 0") != std::string::npos);
  CHECK(table.status[1].find("d > 0") != std::string::npos);
  CHECK(table.status[2] == "ok");
  CHECK(table.status[3] == "ok");

  const Eigen::ArrayXd w0 = table.column("omega0");
  CHECK(std::isnan(w0[0]));
  CHECK(std::isnan(w0[1]));
  CHECK(std::isfinite(w0[2]));
  CHECK(std::isfinite(w0[3]));

  // Fitting across the poisoned rows names the offender.
  CHECK_THROWS_WITH_AS(
      loglog_fit(table, "axis_value", "gamma_white"),
      doctest::Contains("non-positive value in column 'axis_value' at row 0"),
      std::invalid_argument);
}

TEST_CASE("flicker exponent sweep is strongly decreasing") {
  SweepSpec spec;
  spec.base = kParams;
  spec.axis = SweepAxis::FlickerAlpha;
  spec.range = SweepRange{0.5, 1.5, 5, false};
  const SweepTable table = run_sweep(spec);
  const Eigen::ArrayXd gf = table.column("gamma_flicker");
  for (Eigen::Index i = 1; i < table.size(); ++i) {
    CHECK(gf[i] < gf[i - 1]);
  }
  // Steeper spectra drain the band above omega0: two orders of magnitude
  // across one unit of alpha.
  CHECK(gf[0] / gf[4] > 100.0);
}

TEST_CASE("target-rate axis drives the bound columns") {
  SweepSpec spec;
  spec.base = kParams;
  spec.axis = SweepAxis::GammaTarget;
  spec.range = SweepRange{10.0, 1000.0, 3, true};
  const SweepTable table = run_sweep(spec);
  const Eigen::ArrayXd ab = table.column("a_bound");
  const Eigen::ArrayXd kb = table.column("k_bound");
  const Eigen::ArrayXd di = table.column("di_over_i");
  const Eigen::ArrayXd gw = table.column("gamma_white");
  // A ~ sqrt(target), K ~ target, dI/I ~ sqrt(target).
  CHECK(ab[2] == Approx(10.0 * ab[0]).epsilon(1e-9));
  CHECK(kb[2] == Approx(100.0 * kb[0]).epsilon(1e-9));
  CHECK(di[2] == Approx(10.0 * di[0]).epsilon(1e-12));
  // The forward rates ignore the target.
  CHECK(gw[2] == Approx(gw[0]).epsilon(1e-12));
}

TEST_CASE("current-noise routes agree along the distance sweep") {
  const double target = 1.555139409104173e2;
  const SweepTable table =
      snr_vs_distance(kParams, target, SweepRange{1e-5, 4e-5, 3, true});
  REQUIRE(table.size() == 3);
  const Eigen::ArrayXd spread = table.column("spread");
  for (Eigen::Index i = 0; i < table.size(); ++i) {
    CHECK(table.status[i] == "ok");
    CHECK(spread[i] < 0.02);  // measured 0.83% on every row
  }
  // At the reference distance the closed form reproduces the frozen ratio.
  CHECK(table.column("di_closed")[1] ==
        Approx(1.328078768302645e-8).epsilon(1e-12));

  // At fixed target rate the tolerable ratio falls as d^-2.
  const FitResult f = loglog_fit(table, "d", "di_closed");
  CHECK(f.slope == Approx(-2.0).epsilon(1e-9));

  CHECK_THROWS_WITH_AS(
      snr_vs_distance(kParams, -1.0, SweepRange{1e-5, 4e-5, 3, true}),
      doctest::Contains("gamma_target must be positive"),
      std::invalid_argument);
}

TEST_CASE("plain least-squares line fit") {
  const Eigen::ArrayXd x = Eigen::ArrayXd::LinSpaced(5, 0.0, 4.0);
  const Eigen::ArrayXd y = 3.0 * x - 2.0;
  const FitResult f = linear_fit(x, y);
  CHECK(f.slope == Approx(3.0).epsilon(1e-14));
  CHECK(f.intercept == Approx(-2.0).epsilon(1e-14));
  CHECK(f.residual_rms < 1e-14);

  CHECK_THROWS_WITH_AS(linear_fit(x.head(2), y.head(2)),
                       doctest::Contains("need at least 3 points"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(linear_fit(x, y.head(3)),
                       doctest::Contains("size mismatch"),
                       std::invalid_argument);
  const Eigen::ArrayXd flat = Eigen::ArrayXd::Constant(5, 1.0);
  CHECK_THROWS_WITH_AS(linear_fit(flat, y),
                       doctest::Contains("degenerate abscissae"),
                       std::invalid_argument);
}

TEST_CASE("reference power-law fits") {
  const ReferenceFits f = reference_fits(kParams);
  CHECK(f.white_amplitude.slope == Approx(2.0).epsilon(1e-9));
  CHECK(std::abs(f.white_amplitude.intercept - 13.268950186731) < 1e-6);
  CHECK(f.flicker_amplitude.slope == Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(f.flicker_amplitude.intercept - 15.353073826900) < 1e-6);
  CHECK(f.white_intercept_vs_d.slope == Approx(6.0).epsilon(1e-9));
  CHECK(std::abs(f.white_intercept_vs_d.intercept - 41.462770212747) < 1e-6);
  CHECK(f.flicker_intercept_vs_d.slope == Approx(6.0).epsilon(1e-9));
  CHECK(std::abs(f.flicker_intercept_vs_d.intercept - 43.546893852916) <
        1e-6);
  CHECK(f.white_amplitude.residual_rms < 1e-12);
  CHECK(f.flicker_amplitude.residual_rms < 1e-12);
}

TEST_CASE("axis names render for diagnostics") {
  CHECK(to_string(SweepAxis::Distance) == "d");
  CHECK(to_string(SweepAxis::WhiteAmplitude) == "A");
  CHECK(to_string(SweepAxis::FlickerK) == "K");
  CHECK(to_string(SweepAxis::FlickerAlpha) == "alpha");
  CHECK(to_string(SweepAxis::GammaTarget) == "gamma_target");
}
