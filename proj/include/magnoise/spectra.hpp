#pragma once

// Two-sided power spectral density models for magnetic-gradient noise, in
// angular frequency (rad/s), plus their dimensionless normalization
// S(xi) with xi = omega/omega0.
//
// Conventions: S is even, a function of |omega| only, with the normalization
// S(omega) = integral R(u) e^{i omega u} du of the autocovariance R.  For white
// noise S = A^2 at every frequency; a sampled path then has variance A^2/dt.

#include <string>
#include <variant>

#include <Eigen/Core>

#include "magnoise/physics.hpp"

namespace magnoise {

struct WhiteNoise {
  double A;  // gradient-noise amplitude [T m^-1 Hz^-1/2]; S = A^2
};

// S(omega) = mu0*K*I^2 / (2*pi*d^2*|omega|^alpha).  For alpha = 1 the source
// constant K carries [T m^-1 A^-1]; for general alpha its numeric value is
// interpreted with omega in rad/s (units of K then carry an extra s^(1-alpha)).
struct FlickerNoise {
  double K;
  double alpha = 1.0;
  double I;  // DC current [A]
  double d;  // particle-wire distance [m]
};

// Tabulated (omega [rad/s], S [T^2 m^-2 s]) pairs, strictly increasing in
// omega; evaluated by log-log linear interpolation inside the table and
// rejected outside it.
struct CustomSpectrum {
  Eigen::ArrayXd omega;
  Eigen::ArrayXd S;
};

using NoiseSpectrum = std::variant<WhiteNoise, FlickerNoise, CustomSpectrum>;

// Throws std::invalid_argument naming the violated invariant
// (A >= 0; K >= 0; alpha in [0,2]; custom table strictly increasing, S >= 0).
void validate(const NoiseSpectrum& spec);

// S(|omega|).  Throws std::domain_error for flicker at omega = 0 (divergent
// PSD at DC) and std::out_of_range outside a custom table.
double evaluate_psd(const NoiseSpectrum& spec, double omega);

// Evaluation rule in the dimensionless variable xi = omega/omega0, satisfying
// (*this)(xi) == evaluate_psd(spec, xi*omega0) identically.  For flicker,
// ktilde = sqrt(mu0*K*I^2 / (2*pi*d^2*omega0^alpha)) so that S(xi) =
// ktilde^2/|xi|^alpha; for white, ktilde = A (the alpha = 0 degenerate case).
struct NormalizedSpectrum {
  NoiseSpectrum spec;
  double omega0 = 0.0;
  double ktilde = 0.0;
  double alpha = 0.0;

  double operator()(double xi) const { return evaluate_psd(spec, xi * omega0); }
};

NormalizedSpectrum normalize(const NoiseSpectrum& spec, const DerivedQuantities& dq);

// Two-column CSV (omega,S) with a header row.
CustomSpectrum load_custom_table(const std::string& csv_path);

}  // namespace magnoise
