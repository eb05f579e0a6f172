#pragma once

// Dimensionless transfer functions weighting the noise PSD in the dephasing
// integral, and numeric transfer functions built from sampled trajectories.
//
// f_ho(xi)  = sin^2(pi xi) * [(xi^2+2) / (xi (xi^2-4)(xi^2-1))]^2
// f_dev(xi) = sin^2(pi xi) * (xi^4-2xi^2+4)^2 / (xi^2 (xi^2-1)^4 (xi^2-4)^2)
//
// Both are even in xi and non-negative.  f_ho has removable singularities at
// xi = 1 (limit pi^2/4) and xi = 2 (limit pi^2/16), evaluated here exactly via
// factored forms that pair each vanishing sin(pi xi) with its cancelling
// denominator zero (no patch radius, ~1e-15 relative accuracy throughout).
// f_dev is removable at xi = 2 (limit pi^2/36) but has a genuine second-order
// pole at xi = 1: f_dev(1+e)*e^2 -> pi^2/16.  Integrals over f_dev therefore
// exclude a notch around xi = 1 (see dephasing::IntegrationConfig).

#include <Eigen/Core>

namespace magnoise {

// Throws std::domain_error at xi = 0 (the DC contract for PSD-weighted use).
double f_ho(double xi);

// Throws std::domain_error at xi = 0 and at the non-removable pole xi = 1.
double f_dev(double xi);

// Windowed Fourier magnitude of a trajectory combination:
//   |integral_{t_i}^{t_f} w(t) e^{i omega t} dt|^2,
// with w = x_R -/+ x_L (linear) or x_R^2 -/+ x_L^2 (quadratic), evaluated by
// trapezoid quadrature on the stored uniform grid so that arbitrary (off-grid)
// omega may be requested.  Units: m^2 s^2 (linear) or m^4 s^2 (quadratic).
struct NumericTransfer {
  enum class Sign { Difference, Sum };
  enum class Power { Linear, Quadratic };

  Eigen::ArrayXd t;    // uniform samples spanning [t_i, t_f]
  Eigen::ArrayXd x_R;  // right-arm positions on t
  Eigen::ArrayXd x_L;  // left-arm positions on t
  Sign sign = Sign::Difference;
  Power power = Power::Linear;
};

// Throws std::invalid_argument for inconsistent/non-uniform sampling and
// std::runtime_error (naming omega) when the grid has fewer than 16 samples
// per period of the requested frequency.
double numeric_transfer(const NumericTransfer& kind, double omega);

}  // namespace magnoise
