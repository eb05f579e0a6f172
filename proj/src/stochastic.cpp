#include "magnoise/stochastic.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "magnoise/dephasing.hpp"

namespace magnoise {

namespace {

using std::numbers::pi;

bool is_power_of_two(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

// splitmix64: decorrelates consecutive realization indices into full-entropy
// mt19937_64 seeds.
std::uint64_t splitmix64_mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Standard normals via explicit Box-Muller so the byte stream is identical
// on every platform (std::normal_distribution's algorithm is
// implementation-defined).
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform_open();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * pi * u2;
    spare_ = r * std::sin(th);
    have_spare_ = true;
    return r * std::cos(th);
  }

 private:
  // Uniform on (0, 1), never exactly 0 (log-safe): top 53 bits plus half an
  // ulp offset.
  double uniform_open() {
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  std::mt19937_64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

Eigen::VectorXcd fft_forward(const Eigen::VectorXcd& in) {
  Eigen::FFT<double> fft;
  Eigen::VectorXcd out;
  fft.fwd(out, in);
  return out;
}

Eigen::VectorXcd fft_inverse(const Eigen::VectorXcd& in) {
  Eigen::FFT<double> fft;
  Eigen::VectorXcd out;
  fft.inv(out, in);  // scaled by 1/n
  return out;
}

Eigen::VectorXcd to_complex(const Eigen::ArrayXd& in) {
  return in.matrix().cast<std::complex<double>>();
}

// Index of t on the grid; throws if t does not coincide with a sample.
Eigen::Index locate_time(const SimulationGrid& grid, double t) {
  const double pos = t / grid.dt;
  const double idx = std::nearbyint(pos);
  if (idx < 0.0 || idx > static_cast<double>(grid.n - 1) ||
      std::abs(pos - idx) > 1e-6) {
    throw std::invalid_argument("time t = " + std::to_string(t) +
                                " s is not on the simulation grid");
  }
  return static_cast<Eigen::Index>(idx);
}

// Frequency-domain solution per unit arm coefficient:
//   x'' + omega0^2 x = -(1/m) (2 cos(omega0 t) - 1) delta_eta(t),  x(0)=x'(0)=0.
// An arm's deviation is C_j times this (the equation is linear in C_j).
struct UnitDeviation {
  Eigen::ArrayXd x;  // position per unit C [m / (J/T)]
  Eigen::ArrayXd v;  // velocity per unit C
};

UnitDeviation unit_deviation_freq(const NoiseRealization& real,
                                  const DerivedQuantities& dq,
                                  const ExperimentParams& params) {
  const Eigen::Index n = real.grid.n;
  if (real.values.size() != n) {
    throw std::invalid_argument(
        "deviation: realization and grid sizes disagree");
  }
  const double T = real.grid.total_time();
  const double w0 = dq.omega0;
  // The resonant bins must fall exactly on the grid for the secular
  // treatment below, i.e. the grid spans an integer number of loops.
  const double loops_f = T / dq.T_exp;
  const double loops_r = std::nearbyint(loops_f);
  if (loops_r < 1.0 || std::abs(loops_f - loops_r) > 1e-6) {
    throw std::invalid_argument(
        "deviation: grid must span an integer number of trap periods");
  }
  const Eigen::Index k0 = static_cast<Eigen::Index>(loops_r);

  const Eigen::ArrayXd t = real.grid.times();
  const Eigen::ArrayXd drive = (2.0 * (w0 * t).cos() - 1.0) * real.values;
  const Eigen::VectorXcd ut = fft_forward(to_complex(drive));

  // Non-resonant bins: X_k = (1/m) u_k / (omega_k^2 - omega0^2), V_k = i
  // omega_k X_k.  Resonant bins +-k0 are excluded and replaced by the exact
  // secular particular solution, which removes the notch bias entirely.
  Eigen::VectorXcd X = Eigen::VectorXcd::Zero(n);
  Eigen::VectorXcd V = Eigen::VectorXcd::Zero(n);
  const std::complex<double> iunit(0.0, 1.0);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k == k0 || k == n - k0) continue;
    const double kt = (k < n / 2) ? static_cast<double>(k)
                                  : static_cast<double>(k - n);
    const double w = 2.0 * pi * kt / T;
    X[k] = (1.0 / params.m) * ut[k] / (w * w - w0 * w0);
    V[k] = iunit * w * X[k];
  }

  // Resonant drive component reconstructed from the +-k0 bins:
  //   -(1/m) u_res(t) = f0c cos(omega0 t) + f0s sin(omega0 t)
  const std::complex<double> uk0 = ut[k0];
  const double a = 2.0 * uk0.real() / static_cast<double>(n);
  const double b = -2.0 * uk0.imag() / static_cast<double>(n);
  const double f0c = -a / params.m;
  const double f0s = -b / params.m;
  const Eigen::ArrayXd sn = (w0 * t).sin();
  const Eigen::ArrayXd cs = (w0 * t).cos();
  // Particular solutions with x(0) = x'(0) = 0:
  //   cos drive: t sin(omega0 t) / (2 omega0)
  //   sin drive: (sin(omega0 t) - omega0 t cos(omega0 t)) / (2 omega0^2)
  const Eigen::ArrayXd x_sec =
      f0c * t * sn / (2.0 * w0) + f0s * (sn - w0 * t * cs) / (2.0 * w0 * w0);
  const Eigen::ArrayXd v_sec =
      f0c * (sn + w0 * t * cs) / (2.0 * w0) + f0s * t * sn / 2.0;

  const Eigen::ArrayXd x_raw = fft_inverse(X).real().array();
  const Eigen::ArrayXd v_raw = fft_inverse(V).real().array();
  // Homogeneous correction enforcing zero initial conditions.
  const double x0 = x_raw[0];
  const double v0 = v_raw[0];

  UnitDeviation u;
  u.x = x_raw + x_sec - x0 * cs - (v0 / w0) * sn;
  u.v = v_raw + v_sec + x0 * w0 * sn - v0 * cs;
  return u;
}

}  // namespace

Eigen::ArrayXd SimulationGrid::times() const {
  return Eigen::ArrayXd::LinSpaced(n, 0.0, static_cast<double>(n - 1)) * dt;
}

SimulationGrid SimulationGrid::for_system(const DerivedQuantities& dq,
                                          Eigen::Index samples_per_loop,
                                          Eigen::Index loops,
                                          std::uint64_t seed) {
  if (samples_per_loop < 64 || !is_power_of_two(samples_per_loop)) {
    throw std::invalid_argument(
        "SimulationGrid: samples_per_loop must be a power of two >= 64");
  }
  if (loops < 1 || !is_power_of_two(loops)) {
    throw std::invalid_argument(
        "SimulationGrid: loops must be a power of two >= 1");
  }
  SimulationGrid g;
  g.n = samples_per_loop * loops;
  g.dt = dq.T_exp / static_cast<double>(samples_per_loop);
  g.seed = seed;
  return g;
}

void SimulationGrid::validate(const DerivedQuantities& dq) const {
  if (n < 2 || !is_power_of_two(n)) {
    throw std::invalid_argument(
        "SimulationGrid: n must be a power of two >= 2");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("SimulationGrid: dt must be positive");
  }
  if (dt > dq.T_exp / 64.0 * (1.0 + 1e-9)) {
    throw std::invalid_argument(
        "SimulationGrid: dt must give >= 64 samples per trap period");
  }
  if (total_time() < dq.T_exp * (1.0 - 1e-9)) {
    throw std::invalid_argument(
        "SimulationGrid: total time must cover at least one loop");
  }
}

std::uint64_t realization_seed(std::uint64_t grid_seed, int index) {
  return splitmix64_mix(grid_seed + 0x9E3779B97F4A7C15ull *
                                        (static_cast<std::uint64_t>(index) + 1));
}

NoiseRealization synthesize_noise(const NoiseSpectrum& spec,
                                  const SimulationGrid& grid, int index) {
  validate(spec);
  if (grid.n < 2 || !is_power_of_two(grid.n) || !(grid.dt > 0.0)) {
    throw std::invalid_argument("synthesize_noise: malformed grid");
  }
  if (index < 0) {
    throw std::invalid_argument("synthesize_noise: index must be >= 0");
  }
  const Eigen::Index n = grid.n;
  const double T = grid.total_time();
  const double dw = 2.0 * pi / T;

  NoiseRealization r;
  r.grid = grid;
  r.realization_seed = realization_seed(grid.seed, index);
  GaussianStream gauss(r.realization_seed);

  // Interior bins get sqrt(S T / 2) (a + i b); the Nyquist bin is real with
  // variance S T; DC is zero.  This makes Var(path) = integral S domega /
  // (2 pi) = S/dt for white noise and the Welch periodogram an unbiased
  // estimate of S.
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(n);
  for (Eigen::Index k = 1; k < n / 2; ++k) {
    const double S = evaluate_psd(spec, static_cast<double>(k) * dw);
    const double mag = std::sqrt(S * T / 2.0);
    const double a = gauss.next();
    const double b = gauss.next();
    c[k] = std::complex<double>(mag * a, mag * b);
    c[n - k] = std::conj(c[k]);
  }
  {
    const double S = evaluate_psd(spec, static_cast<double>(n / 2) * dw);
    c[n / 2] = std::sqrt(S * T) * gauss.next();
  }
  r.coefficients = c;
  r.values = fft_inverse(c).real().array() * (static_cast<double>(n) / T);
  return r;
}

ArmDeviation deviation_freq(const NoiseRealization& real,
                            const DerivedQuantities& dq,
                            const ExperimentParams& params, Arm arm) {
  const UnitDeviation u = unit_deviation_freq(real, dq, params);
  const double C = arm_coefficient(params, arm);
  ArmDeviation d;
  d.dx = C * u.x;
  d.dp = params.m * C * u.v;
  return d;
}

namespace {

// Band-limited reconstruction of a sampled signal on a grid refined by the
// factor `R`: zero-pad the DFT (splitting the Nyquist coefficient between
// the two mirror bins to keep the signal real) and transform back.  The
// result interpolates the input samples exactly and agrees off-grid with
// the trigonometric polynomial the frequency-domain solver acts on.
Eigen::ArrayXd upsample_band_limited(const Eigen::ArrayXd& samples,
                                     Eigen::Index R) {
  const Eigen::Index n = samples.size();
  const Eigen::Index nR = n * R;
  const Eigen::VectorXcd spec = fft_forward(to_complex(samples));
  Eigen::VectorXcd padded = Eigen::VectorXcd::Zero(nR);
  padded.head(n / 2) = spec.head(n / 2);
  padded.tail(n / 2 - 1) = spec.tail(n / 2 - 1);
  padded[n / 2] = 0.5 * spec[n / 2];
  padded[nR - n / 2] = 0.5 * spec[n / 2];
  return fft_inverse(padded).real().array() * static_cast<double>(R);
}

}  // namespace

ArmDeviation deviation_time_oracle(const NoiseRealization& real,
                                   const DerivedQuantities& dq,
                                   const ExperimentParams& params, Arm arm) {
  const Eigen::Index n = real.grid.n;
  if (real.values.size() != n) {
    throw std::invalid_argument(
        "deviation: realization and grid sizes disagree");
  }
  const double dt = real.grid.dt;
  const double w0 = dq.omega0;
  const double w2 = w0 * w0;
  const double C = arm_coefficient(params, arm);
  const Eigen::ArrayXd t = real.grid.times();

  // Duhamel convolution of the oscillator Green's function with the drive
  // g(t) = -(C/m)(2 cos(w0 t) - 1) deta(t).  The drive is reconstructed on
  // an R-fold refined grid from its spectral coefficients (the noise path
  // is band-limited by construction), and each fine step applies the exact
  // kernel integral for a linear drive segment.  Marching causally from
  // rest makes this an independent check on the spectral solver.
  constexpr Eigen::Index kOversample = 8;
  const Eigen::ArrayXd u_coarse =
      (2.0 * (w0 * t).cos() - 1.0) * real.values;
  const Eigen::ArrayXd g =
      -(C / params.m) * upsample_band_limited(u_coarse, kOversample);

  const Eigen::Index nR = n * kOversample;
  const double h = dt / static_cast<double>(kOversample);
  const double ch = std::cos(w0 * h);
  const double sh = std::sin(w0 * h);

  ArmDeviation d;
  d.dx = Eigen::ArrayXd::Zero(n);
  d.dp = Eigen::ArrayXd::Zero(n);
  double x = 0.0;
  double v = 0.0;
  for (Eigen::Index j = 0; j + 1 < nR; ++j) {
    const double a = g[j];
    const double b = (g[j + 1] - g[j]) / h;
    const double xc = x - a / w2;
    const double vred = v - b / w2;
    x = xc * ch + (vred / w0) * sh + (a + b * h) / w2;
    v = -w0 * xc * sh + vred * ch + b / w2;
    if ((j + 1) % kOversample == 0) {
      const Eigen::Index i = (j + 1) / kOversample;
      d.dx[i] = x;
      d.dp[i] = params.m * v;
    }
  }
  return d;
}

TrajectoryDeviation deviations(const NoiseRealization& real,
                               const DerivedQuantities& dq,
                               const ExperimentParams& params) {
  const UnitDeviation u = unit_deviation_freq(real, dq, params);
  TrajectoryDeviation dev;
  dev.grid = real.grid;
  dev.dx_R = dq.C_R * u.x;
  dev.dx_L = dq.C_L * u.x;
  dev.dp_R = params.m * dq.C_R * u.v;
  dev.dp_L = params.m * dq.C_L * u.v;
  return dev;
}

ContrastResult contrast_single(const TrajectoryDeviation& dev,
                               const DerivedQuantities& dq, double t) {
  const Eigen::Index i = locate_time(dev.grid, t);
  const double w0 = dq.omega0;
  // Deterministic arm mismatch of the unperturbed loops (closes at t =
  // multiples of T_exp).  eta0 < 0 always, so the position term equals
  // +dx_max (1 - cos)/2.
  const double dx_det = 0.5 * dq.dx_max * (1.0 - std::cos(w0 * t));
  const double dp_det =
      -(dq.C_R - dq.C_L) * dq.eta0 / w0 * std::sin(w0 * t);
  const double Dx = dev.dx_R[i] - dev.dx_L[i] + dx_det;
  const double Dp = dev.dp_R[i] - dev.dp_L[i] + dp_det;
  ContrastResult r;
  r.dx_final = Dx;
  r.dp_final = Dp;
  const double ex = Dx / dq.sigma_x;
  const double ep = Dp / dq.sigma_p;
  r.contrast = std::exp(-0.5 * (ex * ex + ep * ep));
  return r;
}

double white_dx2_closed_form(const DerivedQuantities& dq,
                             const ExperimentParams& params, double A) {
  // <Dx^2(T_exp)> = (2 hbar gamma_e A / (m omega0))^2 (2 pi / omega0); the
  // spin part of the coupling is C_R - C_L = 2 hbar gamma_e.
  const double amp = (dq.C_R - dq.C_L) * A / (params.m * dq.omega0);
  return amp * amp * (2.0 * pi / dq.omega0);
}

EnsembleContrastResult contrast_ensemble(const NoiseSpectrum& spec,
                                         const DerivedQuantities& dq,
                                         const ExperimentParams& params,
                                         const SimulationGrid& grid, int M,
                                         double t) {
  if (M < 2) {
    throw std::invalid_argument("contrast_ensemble: need M >= 2");
  }
  grid.validate(dq);
  const Eigen::Index idx = locate_time(grid, t);
  const double w0 = dq.omega0;
  const double Cdiff = dq.C_R - dq.C_L;
  const double dx_det = 0.5 * dq.dx_max * (1.0 - std::cos(w0 * t));
  const double dp_det = -Cdiff * dq.eta0 / w0 * std::sin(w0 * t);

  double sum_dx2 = 0.0;
  double sum_dx4 = 0.0;
  double sum_dp2 = 0.0;
  for (int i = 0; i < M; ++i) {
    const NoiseRealization real = synthesize_noise(spec, grid, i);
    const UnitDeviation u = unit_deviation_freq(real, dq, params);
    const double Dx = Cdiff * u.x[idx] + dx_det;
    const double Dp = params.m * Cdiff * u.v[idx] + dp_det;
    sum_dx2 += Dx * Dx;
    sum_dx4 += Dx * Dx * Dx * Dx;
    sum_dp2 += Dp * Dp;
  }
  EnsembleContrastResult r;
  r.realizations = M;
  r.dx2_mean = sum_dx2 / M;
  r.dp2_mean = sum_dp2 / M;
  const double var_dx2 =
      std::max(0.0, (sum_dx4 / M - r.dx2_mean * r.dx2_mean)) *
      static_cast<double>(M) / static_cast<double>(M - 1);
  r.dx2_standard_error = std::sqrt(var_dx2 / M);
  const double ex = r.dx2_mean / (dq.sigma_x * dq.sigma_x);
  const double ep = r.dp2_mean / (dq.sigma_p * dq.sigma_p);
  r.contrast = std::exp(-0.5 * (ex + ep));
  if (const auto* white = std::get_if<WhiteNoise>(&spec)) {
    r.dx2_closed_form = white_dx2_closed_form(dq, params, white->A);
  } else {
    r.dx2_closed_form = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

PhaseVarianceResult phase_variance_mc(const NoiseSpectrum& spec,
                                      const DerivedQuantities& dq,
                                      const ExperimentParams& params, int M,
                                      const SimulationGrid& grid) {
  if (M < 100) {
    throw std::invalid_argument("phase_variance_mc: need M >= 100");
  }
  grid.validate(dq);
  const double spp_f = dq.T_exp / grid.dt;
  const Eigen::Index spp = static_cast<Eigen::Index>(std::nearbyint(spp_f));
  if (std::abs(spp_f - static_cast<double>(spp)) > 1e-6) {
    throw std::invalid_argument(
        "phase_variance_mc: T_exp must be an integer number of grid steps");
  }

  // Phase weight w(t)/hbar over one loop, assembled from the standard
  // couplings along the unperturbed trajectories.
  const GenericNoiseCoupling c = standard_couplings(params, dq);
  const Eigen::ArrayXd tt =
      Eigen::ArrayXd::LinSpaced(spp + 1, 0.0, static_cast<double>(spp)) *
      grid.dt;
  const Eigen::ArrayXd xr = classical_trajectory(dq, params, Arm::Right, tt);
  const Eigen::ArrayXd xl = classical_trajectory(dq, params, Arm::Left, tt);
  const Eigen::ArrayXd w =
      (c.D_An * (xr.square() - xl.square()) +
       c.D_As * (xr.square() + xl.square()) + c.D_Bn * (xr - xl) +
       c.D_Bs * (xr + xl) + (c.D_CR - c.D_CL)) /
      params.hbar;

  std::vector<double> phases(M);
  for (int i = 0; i < M; ++i) {
    const NoiseRealization real = synthesize_noise(spec, grid, i);
    double acc = 0.0;
    for (Eigen::Index j = 0; j <= spp; ++j) {
      const double weight = (j == 0 || j == spp) ? 0.5 : 1.0;
      acc += weight * w[j] * real.values[j % grid.n];  // wraps for 1 loop
    }
    phases[i] = acc * grid.dt;
  }
  double mean = 0.0;
  for (double p : phases) mean += p;
  mean /= M;
  double var = 0.0;
  for (double p : phases) var += (p - mean) * (p - mean);
  var /= (M - 1);

  PhaseVarianceResult r;
  r.realizations = M;
  r.gamma = 2.0 * pi * var;
  r.standard_error = r.gamma * std::sqrt(2.0 / static_cast<double>(M - 1));
  return r;
}

PsdEstimate estimate_psd_welch(const NoiseSpectrum& spec,
                               const SimulationGrid& grid, int M,
                               Eigen::Index segment_len) {
  if (M < 1) {
    throw std::invalid_argument("estimate_psd_welch: need M >= 1");
  }
  if (segment_len < 4 || !is_power_of_two(segment_len) ||
      segment_len > grid.n) {
    throw std::invalid_argument(
        "estimate_psd_welch: segment_len must be a power of two in [4, n]");
  }
  const Eigen::Index N = segment_len;
  const Eigen::Index half = N / 2;
  Eigen::ArrayXd window(N);
  for (Eigen::Index j = 0; j < N; ++j) {
    window[j] = 0.5 * (1.0 - std::cos(2.0 * pi * static_cast<double>(j) /
                                      static_cast<double>(N)));
  }
  const double U = window.square().sum();

  Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(half + 1);
  int segments = 0;
  for (int i = 0; i < M; ++i) {
    const NoiseRealization real = synthesize_noise(spec, grid, i);
    for (Eigen::Index start = 0; start + N <= grid.n; start += half) {
      const Eigen::ArrayXd seg =
          window * real.values.segment(start, N);
      const Eigen::VectorXcd Y = fft_forward(to_complex(seg));
      for (Eigen::Index k = 0; k <= half; ++k) {
        acc[k] += std::norm(Y[k]) * grid.dt / U;
      }
      ++segments;
    }
  }
  PsdEstimate e;
  e.segments = segments;
  e.psd = acc / static_cast<double>(segments);
  e.omega = Eigen::ArrayXd::LinSpaced(half + 1, 0.0,
                                      static_cast<double>(half)) *
            (2.0 * pi / (static_cast<double>(N) * grid.dt));
  return e;
}

}  // namespace magnoise
