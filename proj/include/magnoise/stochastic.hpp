#pragma once

// Noise-path synthesis with prescribed PSD, propagation to trajectory and
// momentum deviations (frequency-domain solver plus an independent
// Green's-function time-domain oracle), single-run and ensemble contrast,
// Monte-Carlo phase variance, and Welch PSD re-estimation.

#include <cstdint>

#include <Eigen/Core>
#include <Eigen/Dense>

#include "magnoise/physics.hpp"
#include "magnoise/spectra.hpp"

namespace magnoise {

// Uniform time grid for noise paths.  n is a power of two; the grid must
// resolve the trap frequency (>= 64 samples per period) and span at least one
// full loop.  Built via for_system so that omega0 falls exactly on a
// frequency bin (total time = loops * T_exp), which the deviation solver
// requires for its exact resonant treatment.
struct SimulationGrid {
  Eigen::Index n = 0;
  double dt = 0.0;
  std::uint64_t seed = 0;

  double total_time() const { return static_cast<double>(n) * dt; }
  Eigen::ArrayXd times() const;

  // samples_per_loop and loops must be powers of two, samples_per_loop >= 64,
  // loops >= 1.  Throws std::invalid_argument otherwise.
  static SimulationGrid for_system(const DerivedQuantities& dq,
                                   Eigen::Index samples_per_loop,
                                   Eigen::Index loops, std::uint64_t seed);

  void validate(const DerivedQuantities& dq) const;
};

// One synthesized gradient-noise path delta_eta(t_k) together with the
// frequency coefficients it was built from.  Convention: values =
// Re(IDFT(coefficients)) * n / total_time, i.e. coefficients approximate the
// finite-time Fourier integral of the path; the DC coefficient is zero, so
// every path is exactly mean-free.
struct NoiseRealization {
  Eigen::ArrayXd values;          // delta_eta(t_k) [T/m]
  Eigen::VectorXcd coefficients;  // Hermitian-symmetric bin coefficients
  SimulationGrid grid;
  std::uint64_t realization_seed = 0;
};

// Deviations of one arm from its unperturbed trajectory, starting at rest:
// dx(0) = dp(0) = 0.
struct ArmDeviation {
  Eigen::ArrayXd dx;  // [m]
  Eigen::ArrayXd dp;  // [kg m/s]
};

// Both arms on the common grid.
struct TrajectoryDeviation {
  SimulationGrid grid;
  Eigen::ArrayXd dx_R;
  Eigen::ArrayXd dx_L;
  Eigen::ArrayXd dp_R;
  Eigen::ArrayXd dp_L;
};

struct ContrastResult {
  double contrast = 1.0;   // in (0, 1]
  double dx_final = 0.0;   // arm separation Delta x(t) [m]
  double dp_final = 0.0;   // arm momentum difference Delta p(t) [kg m/s]
};

struct EnsembleContrastResult {
  double contrast = 1.0;
  double dx2_mean = 0.0;          // <Delta x^2(t)> over the ensemble [m^2]
  double dp2_mean = 0.0;          // <Delta p^2(t)> [kg^2 m^2/s^2]
  double dx2_standard_error = 0.0;
  // White-noise closed form for <Delta x^2(T_exp)>; NaN for other spectra.
  double dx2_closed_form = 0.0;
  int realizations = 0;
};

struct PhaseVarianceResult {
  double gamma = 0.0;           // 2*pi*Var(delta_phi) over one loop [1/s]
  double standard_error = 0.0;  // plug-in SE: gamma * sqrt(2/(M-1))
  int realizations = 0;
};

struct PsdEstimate {
  Eigen::ArrayXd omega;  // one-sided bin frequencies [rad/s]
  Eigen::ArrayXd psd;    // Welch-averaged estimate of S(omega)
  int segments = 0;      // total segments averaged
};

// Deterministic per-realization RNG seed (splitmix64 of grid seed and index),
// so ensembles are reproducible and order-independent.
std::uint64_t realization_seed(std::uint64_t grid_seed, int index);

// Draws Hermitian-symmetric Gaussian bin coefficients weighted by
// sqrt(S(omega_k)), zeroes DC (paths are mean-free; flicker is DC-divergent),
// and inverse-transforms to a real path.  Deterministic given (grid.seed,
// index); bit-identical across platforms (explicit Box-Muller on mt19937_64,
// not std::normal_distribution, whose algorithm is implementation-defined).
NoiseRealization synthesize_noise(const NoiseSpectrum& spec,
                                  const SimulationGrid& grid, int index = 0);

// Frequency-domain solution of
//   ddot(dx) + omega0^2 dx = -(C_j/m) (2 cos(omega0 t) - 1) delta_eta(t)
// with dx(0) = dp(0) = 0.  The two resonant bins (omega = +-omega0, exactly
// on-grid) are removed from the spectral division and replaced by the exact
// secular particular solution, so no notch bias is introduced.
ArmDeviation deviation_freq(const NoiseRealization& real,
                            const DerivedQuantities& dq,
                            const ExperimentParams& params, Arm arm);

// Independent Green's-function oracle: direct convolution quadrature
//   dx(t) = (1/omega0) integral_0^t sin(omega0 (t - t')) g(t') dt'
// by running trapezoid sums.  Slowly accumulates O(dt^2) error; used to
// cross-validate deviation_freq.
ArmDeviation deviation_time_oracle(const NoiseRealization& real,
                                   const DerivedQuantities& dq,
                                   const ExperimentParams& params, Arm arm);

// Both arms via the frequency-domain solver (single solve, scaled by each
// arm's coefficient: the equation is linear in C_j).
TrajectoryDeviation deviations(const NoiseRealization& real,
                               const DerivedQuantities& dq,
                               const ExperimentParams& params);

// Contrast of a single run at time t (must lie on the grid):
//   C = exp(-0.5 [ (Dx/sigma_x)^2 + (Dp/sigma_p)^2 ]),
// where Dx and Dp include the deterministic arm mismatch of the unperturbed
// loops, which closes at multiples of T_exp.
ContrastResult contrast_single(const TrajectoryDeviation& dev,
                               const DerivedQuantities& dq, double t);

// Ensemble contrast from M seeded realizations:
//   C = exp(-0.5 [ <Dx^2>/sigma_x^2 + <Dp^2>/sigma_p^2 ]).
// Also evaluates the white-noise closed form
//   <Dx^2(T_exp)> = (2 hbar gamma_e A / (m omega0))^2 * (2 pi / omega0)
// for comparison when spec is white.
EnsembleContrastResult contrast_ensemble(const NoiseSpectrum& spec,
                                         const DerivedQuantities& dq,
                                         const ExperimentParams& params,
                                         const SimulationGrid& grid, int M,
                                         double t);

// The white-noise closed form above on its own.
double white_dx2_closed_form(const DerivedQuantities& dq,
                             const ExperimentParams& params, double A);

// Monte-Carlo dephasing rate: for each realization the phase difference
// accumulated over one loop,
//   delta_phi = (1/hbar) integral_0^{T_exp} w(t) delta_eta(t) dt
// with w from the standard couplings along the unperturbed trajectories, and
// gamma = 2 pi Var(delta_phi).  The grid length sets the realized low-
// frequency cutoff xi_min = T_exp / total_time; compare against gamma() with
// the same cutoff.  Requires M >= 100.
PhaseVarianceResult phase_variance_mc(const NoiseSpectrum& spec,
                                      const DerivedQuantities& dq,
                                      const ExperimentParams& params, int M,
                                      const SimulationGrid& grid);

// Welch PSD estimate over M realizations: Hann window, 50% overlap,
// periodogram |FFT(w . x)|^2 dt / sum(w^2) averaged over all segments.
// segment_len must be a power of two <= grid.n.
PsdEstimate estimate_psd_welch(const NoiseSpectrum& spec,
                               const SimulationGrid& grid, int M,
                               Eigen::Index segment_len);

}  // namespace magnoise
