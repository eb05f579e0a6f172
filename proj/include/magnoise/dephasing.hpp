#pragma once

// Dephasing rates by adaptive quadrature of PSD-weighted transfer functions,
// the inverse problem (noise-amplitude bounds for a target rate), the
// current-noise ratio, and the generic multi-coupling rate assembled from
// sampled trajectories.

#include <cstddef>

#include <Eigen/Core>

#include "magnoise/physics.hpp"
#include "magnoise/spectra.hpp"

namespace magnoise {

// Which transfer function weights the spectrum.
enum class TransferKind {
  HO,   // f_ho: harmonic-oscillator trajectory transfer
  Dev,  // f_dev: trajectory-deviation transfer (second-order pole at xi = 1)
};

struct IntegrationConfig {
  double xi_min = 1.0;   // lower cutoff omega_min / omega0 (1 = single loop)
  double xi_max = 1e4;   // truncation; remainder bounded analytically
  double rel_tol = 1e-6;
  // Half-width of the notch excluded around xi = 1 when the integrand
  // involves f_dev (non-removable pole; the resonant response is treated
  // exactly by the time-domain solvers instead).
  double resonance_halfwidth = 1e-4;
  std::size_t max_panels = 4000;
};

// Throws std::invalid_argument when the cutoffs, tolerance, or notch width
// are out of range.
void validate(const IntegrationConfig& cfg);

struct DephasingResult {
  double gamma = 0.0;          // dephasing rate [1/s]
  double coherence = 1.0;      // exp(-gamma * T_exp)
  double integral_value = 0.0; // integral S(xi) F(xi) dxi over [xi_min, xi_max]
  double tail_estimate = 0.0;  // analytic bound on the xi > xi_max remainder,
                               // expressed in rate units [1/s]
  double abs_error = 0.0;      // quadrature error in rate units [1/s]
  std::size_t panels = 0;      // final quadrature panels
  double worst_lo = 0.0;       // panel with the largest error estimate
  double worst_hi = 0.0;
};

// 8 H^2 / omega0^5 — multiplies the spectral integral to give the rate.
double dephasing_prefactor(const DerivedQuantities& dq);

// Gamma = (8H^2/omega0^5) * integral_{xi_min} S(xi) F(xi) dxi, with the tail
// beyond xi_max bounded analytically (both transfers decay like xi^-6) and
// reported as tail_estimate.  Throws std::domain_error for flicker noise with
// xi_min = 0 (non-integrable at DC) and std::runtime_error naming the worst
// subinterval if the tolerance cannot be met.
DephasingResult gamma(const NoiseSpectrum& spec, const DerivedQuantities& dq,
                      TransferKind kind, const IntegrationConfig& cfg = {});

// Combined-amplitude rate: integrand S(xi) (sqrt(f_ho) + sqrt(f_dev))^2.
// Amplitudes add before squaring, so this is not gamma(HO) + gamma(Dev).
DephasingResult gamma_total(const NoiseSpectrum& spec,
                            const DerivedQuantities& dq,
                            const IntegrationConfig& cfg = {});

// exp(-rate * t); requires rate >= 0 and t >= 0.
double coherence(double rate, double t);

// Largest white-noise amplitude A with gamma(White{A}) <= gamma_max.  When
// `integral` > 0 it is used directly (e.g. a quoted rounded value such as
// 1.8); otherwise the transfer integral over [cfg.xi_min, cfg.xi_max] is
// computed, which makes the forward/inverse round trip close to rel_tol.
double bound_white(double gamma_max, const DerivedQuantities& dq,
                   const IntegrationConfig& cfg = {}, double integral = 0.0);

// Largest flicker amplitude K (in the spec_template's alpha, I, d) with
// gamma(Flicker{K}) <= gamma_max.  `integral` as in bound_white (quoted
// rounded value 1.3 for alpha = 1, xi_min = 1).
double bound_flicker(double gamma_max, const DerivedQuantities& dq,
                     const FlickerNoise& spec_template,
                     const IntegrationConfig& cfg = {}, double integral = 0.0);

// Relative current-noise level delta_I / I = sqrt(rate/2) omega0^3 /
// (2 H |eta0|) sustaining the given dephasing rate.
double current_noise_ratio(double rate, const DerivedQuantities& dq);

// Coupling coefficients of the noise Lagrangian decomposition
//   w(t) = D_An (x_R^2 - x_L^2) + D_As (x_R^2 + x_L^2)
//        + D_Bn (x_R - x_L)     + D_Bs (x_R + x_L) + (D_CR - D_CL),
// where w(t) multiplies the shared gradient fluctuation in the phase
// difference (1/hbar) integral w(t) delta_eta(t) dt.
struct GenericNoiseCoupling {
  double D_An = 0.0;
  double D_As = 0.0;
  double D_Bn = 0.0;
  double D_Bs = 0.0;
  double D_CR = 0.0;
  double D_CL = 0.0;
};

// Arm positions sampled on a common uniform time grid.
struct ArmTrajectories {
  Eigen::ArrayXd t;
  Eigen::ArrayXd x_R;
  Eigen::ArrayXd x_L;
};

// Closed integration window [t_start, t_end]; both endpoints must lie on the
// trajectory grid.
struct TimeWindow {
  double t_start = 0.0;
  double t_end = 0.0;
};

// Generic single-source rate: Gamma = (2/hbar^2) integral_{omega >= omega_min}
// S(omega) |V(omega)|^2 domega with V(omega) = integral_window w(t) e^{i
// omega t} dt evaluated by trapezoid on the trajectory grid.  The coupling
// amplitudes are summed inside |.|^2 (coherent addition).  The factor 2
// folds negative frequencies onto the positive half-axis (S and |V|^2 are
// even).  Throws std::invalid_argument when the window is not aligned with
// the trajectory grid and std::runtime_error when the grid under-resolves
// cfg.xi_max * omega0 (needs >= 16 samples per period).  tail_estimate is 0:
// no analytic envelope exists for arbitrary couplings, so xi_max is an
// explicit truncation choice here.
DephasingResult generic_gamma(const NoiseSpectrum& spec,
                              const GenericNoiseCoupling& couplings,
                              const ArmTrajectories& trajectories,
                              const TimeWindow& window,
                              const DerivedQuantities& dq,
                              const IntegrationConfig& cfg = {});

// The couplings that reduce the generic rate to the standard system: the
// spin term enters symmetrically (opposite spins on opposite displacements),
// the induced-moment terms antisymmetrically.
GenericNoiseCoupling standard_couplings(const ExperimentParams& p,
                                        const DerivedQuantities& dq);

struct MaterialParams {
  double area = 0.0;         // wire cross-section [m^2]
  double temperature = 0.0;  // [K]
};

// Material figure of merit C = K * area / temperature^2 [m^2 K^-2].
double nb_material_constant(double K, const MaterialParams& mat);

}  // namespace magnoise
