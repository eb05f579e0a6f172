#include "magnoise/transfer.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace magnoise {

namespace {

// sin(pi x) computed without catastrophic cancellation near integers:
// reduce x to its nearest integer n with exact remainder r = x - n, then
// sin(pi x) = (-1)^n sin(pi r).
double sinpi(double x) {
  const double n = std::nearbyint(x);
  const double r = x - n;  // exact: n is within 0.5 of x
  double s = std::sin(std::numbers::pi * r);
  if (std::fmod(n, 2.0) != 0.0) s = -s;
  return s;
}

// sin(pi u) / (pi u), continuous through u = 0.
double sinc_pi(double u) {
  if (u == 0.0) return 1.0;
  return sinpi(u) / (std::numbers::pi * u);
}

// sin(pi xi) / (xi^2 - 1), continuous through xi = 1 (value -pi/2 there).
// Used only for |xi - 1| < 1/2 where the factored form is exact:
//   sin(pi xi) = -sin(pi (xi-1)), so
//   sin(pi xi)/(xi^2-1) = -pi sinc_pi(xi-1) / (xi+1).
double sin_over_xi2m1(double xi) {
  return -std::numbers::pi * sinc_pi(xi - 1.0) / (xi + 1.0);
}

// sin(pi xi) / (xi^2 - 4), continuous through xi = 2 (value pi/4... times
// sign):  sin(pi xi) = sin(pi (xi-2)), so
//   sin(pi xi)/(xi^2-4) = pi sinc_pi(xi-2) / (xi+2).
double sin_over_xi2m4(double xi) {
  return std::numbers::pi * sinc_pi(xi - 2.0) / (xi + 2.0);
}

}  // namespace

double f_ho(double xi) {
  xi = std::abs(xi);  // even function
  if (xi == 0.0) {
    throw std::domain_error("f_ho: xi = 0 is outside the domain (DC)");
  }
  // f_ho = [ sin(pi xi) (xi^2+2) / (xi (xi^2-4)(xi^2-1)) ]^2.  Pair the sine
  // with whichever denominator factor vanishes nearby.
  const double num = xi * xi + 2.0;
  double g;  // sin(pi xi) / ((xi^2-1)(xi^2-4)), stable form
  if (std::abs(xi - 1.0) < 0.5) {
    g = sin_over_xi2m1(xi) / (xi * xi - 4.0);
  } else if (std::abs(xi - 2.0) < 0.5) {
    g = sin_over_xi2m4(xi) / (xi * xi - 1.0);
  } else {
    g = sinpi(xi) / ((xi * xi - 1.0) * (xi * xi - 4.0));
  }
  const double amp = g * num / xi;
  return amp * amp;
}

double f_dev(double xi) {
  xi = std::abs(xi);  // even function
  if (xi == 0.0) {
    throw std::domain_error("f_dev: xi = 0 is outside the domain (DC)");
  }
  if (xi == 1.0) {
    throw std::domain_error(
        "f_dev: xi = 1 is a non-removable second-order pole");
  }
  // f_dev = [ sin(pi xi) (xi^4-2xi^2+4) / (xi (xi^2-1)^2 (xi^2-4)) ]^2.
  // Only the xi = 2 zero of sin cancels; one factor of (xi^2-1)^2 survives
  // as a genuine pole at xi = 1.
  const double xi2 = xi * xi;
  const double num = (xi2 - 2.0) * xi2 + 4.0;  // xi^4 - 2 xi^2 + 4 > 0
  double g;  // sin(pi xi) / (xi^2 - 4), stable form
  if (std::abs(xi - 2.0) < 0.5) {
    g = sin_over_xi2m4(xi);
  } else {
    g = sinpi(xi) / (xi2 - 4.0);
  }
  const double d1 = xi2 - 1.0;
  const double amp = g * num / (xi * d1 * d1);
  return amp * amp;
}

double numeric_transfer(const NumericTransfer& kind, double omega) {
  const Eigen::Index n = kind.t.size();
  if (n < 2 || kind.x_R.size() != n || kind.x_L.size() != n) {
    throw std::invalid_argument(
        "numeric_transfer: t, x_R, x_L must share a common size >= 2");
  }
  const double dt = kind.t[1] - kind.t[0];
  if (!(dt > 0.0)) {
    throw std::invalid_argument("numeric_transfer: t must be increasing");
  }
  // Uniformity check (trapezoid weights below assume it).
  for (Eigen::Index i = 2; i < n; ++i) {
    const double step = kind.t[i] - kind.t[i - 1];
    if (std::abs(step - dt) > 1e-9 * dt) {
      throw std::invalid_argument("numeric_transfer: t must be uniform");
    }
  }
  // Aliasing guard: require >= 16 samples per period of the requested omega.
  const double samples_per_period =
      (omega == 0.0) ? std::numeric_limits<double>::infinity()
                     : 2.0 * std::numbers::pi / (std::abs(omega) * dt);
  if (samples_per_period < 16.0) {
    throw std::runtime_error(
        "numeric_transfer: omega = " + std::to_string(omega) +
        " rad/s under-resolved (" + std::to_string(samples_per_period) +
        " samples per period; need >= 16)");
  }

  Eigen::ArrayXd w;
  const bool diff = (kind.sign == NumericTransfer::Sign::Difference);
  if (kind.power == NumericTransfer::Power::Linear) {
    w = diff ? (kind.x_R - kind.x_L).eval() : (kind.x_R + kind.x_L).eval();
  } else {
    const Eigen::ArrayXd r2 = kind.x_R.square();
    const Eigen::ArrayXd l2 = kind.x_L.square();
    w = diff ? (r2 - l2).eval() : (r2 + l2).eval();
  }

  // Trapezoid rule for integral w(t) e^{i omega t} dt.
  std::complex<double> acc(0.0, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double weight = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    const double phase = omega * kind.t[i];
    acc += weight * w[i] * std::complex<double>(std::cos(phase),
                                                std::sin(phase));
  }
  acc *= dt;
  return std::norm(acc);
}

}  // namespace magnoise
