#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "magnoise/dephasing.hpp"
#include "magnoise/physics.hpp"

namespace magnoise {

// Quantity varied along a one-dimensional parameter sweep.
enum class SweepAxis {
  Distance,        // wire-particle distance d [m]
  WhiteAmplitude,  // white-noise amplitude A [T m^-1 s^1/2]
  FlickerK,        // flicker proportionality constant K
  FlickerAlpha,    // flicker exponent alpha (dimensionless)
  GammaTarget,     // target dephasing rate [1/s] for the bound columns
};

std::string to_string(SweepAxis axis);

struct SweepRange {
  double lo = 0.0;
  double hi = 0.0;
  Eigen::Index points = 0;
  bool log_spacing = true;

  // Grid values, low to high.  Throws std::invalid_argument if the range is
  // empty or if log spacing is requested with non-positive endpoints.
  Eigen::ArrayXd values() const;
};

// One-axis sweep description.  The fixed noise amplitudes supply the columns
// that are not being swept; the per-row dephasing target for the bound and
// delta-I/I columns is -ln(target_coherence)/T_exp evaluated at that row's
// geometry (except on the GammaTarget axis, where the axis value is the
// target itself).
struct SweepSpec {
  ExperimentParams base;
  SweepAxis axis = SweepAxis::WhiteAmplitude;
  SweepRange range{1e-7, 1e-5, 7, true};
  double white_A = 2.9e-6;
  double flicker_K = 0.7e-13;
  double flicker_alpha = 1.0;
  double target_coherence = 0.1;
  IntegrationConfig integration{};
};

// Column-labelled numeric table with a status string per row.  Rows whose
// evaluation failed an invariant keep NaN cells and carry the diagnostic in
// their status; successful rows carry "ok".
struct SweepTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> status;

  Eigen::Index size() const { return static_cast<Eigen::Index>(rows.size()); }
  // Values of a named column.  Throws std::invalid_argument for unknown
  // names.
  Eigen::ArrayXd column(const std::string& name) const;
  // Deterministic CSV rendering (header row, fixed scientific notation,
  // status as the last column).
  std::string to_csv() const;
};

// Least-squares line fit; all quantities in the (possibly transformed)
// coordinates handed in.
struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
};

// Evaluates the sweep row by row.  Rows violating parameter or spectrum
// invariants are flagged and skipped; every other row carries white and
// flicker dephasing rates, coherences after one loop, the superposition
// size, the noise bounds at the row target rate, and delta-I/I.
SweepTable run_sweep(const SweepSpec& spec);

// Plain least-squares fit of y against x.  Requires >= 3 points.
FitResult linear_fit(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y);

// Least squares in log10-log10 space on two table columns.  Non-positive or
// NaN entries are rejected with the offending row index in the message.
FitResult loglog_fit(const SweepTable& table, const std::string& x_col,
                     const std::string& y_col);

// Relative current-noise tolerance versus wire distance at a fixed target
// dephasing rate, computed through three routes (closed form, white-bound,
// flicker-bound) that must agree; the spread column records the maximum
// relative deviation from the closed form.
SweepTable snr_vs_distance(const ExperimentParams& base, double gamma_target,
                           const SweepRange& d_range,
                           const IntegrationConfig& cfg = {});

// The four empirical power-law fits quoted for this system: dephasing rate
// versus noise amplitude for both families at the base distance, and the
// fitted intercept versus distance for both families.
struct ReferenceFits {
  FitResult white_amplitude;        // log10 Gamma_W vs log10 A
  FitResult flicker_amplitude;      // log10 Gamma_F vs log10 K
  FitResult white_intercept_vs_d;   // c_W(d) vs log10 d
  FitResult flicker_intercept_vs_d; // c_F(d) vs log10 d
};

ReferenceFits reference_fits(const ExperimentParams& base,
                           const IntegrationConfig& cfg = {});

}  // namespace magnoise
