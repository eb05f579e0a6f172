#include "magnoise/physics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace magnoise {

ExperimentParams reference_params(double mass_kg) {
  ExperimentParams p;
  p.gamma_e = 1.761e11;
  p.B0 = 0.2;
  p.I = 12.0;
  p.d = 2.0e-5;
  p.rho = 3.5e3;
  p.chi_rho = -6.286e-9;
  p.m = mass_kg;
  return p;
}

void validate(const ExperimentParams& p) {
  if (!(p.d > 0.0)) throw std::invalid_argument("ExperimentParams: d > 0 violated");
  if (!(p.I > 0.0)) throw std::invalid_argument("ExperimentParams: I > 0 violated");
  if (!(p.m > 0.0)) throw std::invalid_argument("ExperimentParams: m > 0 violated");
  if (!(p.B0 >= 0.0)) throw std::invalid_argument("ExperimentParams: B0 >= 0 violated");
  if (!(p.chi_rho < 0.0))
    throw std::invalid_argument("ExperimentParams: chi_rho < 0 violated (diamagnetic particle required)");
  if (!(p.gamma_e > 0.0)) throw std::invalid_argument("ExperimentParams: gamma_e > 0 violated");
  if (!(p.rho > 0.0)) throw std::invalid_argument("ExperimentParams: rho > 0 violated");
  if (!(p.mu0 > 0.0)) throw std::invalid_argument("ExperimentParams: mu0 > 0 violated");
  if (!(p.hbar > 0.0)) throw std::invalid_argument("ExperimentParams: hbar > 0 violated");
}

double arm_coefficient(const ExperimentParams& p, Arm arm) {
  return spin(arm) * p.hbar * p.gamma_e - p.chi_rho * p.m * p.B0 / p.mu0;
}

DerivedQuantities derive_quantities(const ExperimentParams& p) {
  validate(p);
  DerivedQuantities dq;
  dq.eta0 = -p.mu0 * p.I / (2.0 * std::numbers::pi * p.d * p.d);
  dq.omega0 = std::abs(std::sqrt(-p.chi_rho / p.mu0) * dq.eta0);
  dq.H = 4.0 * p.gamma_e * p.B0 * dq.eta0 * p.chi_rho / p.mu0;
  dq.T_exp = 2.0 * std::numbers::pi / dq.omega0;
  dq.C_R = arm_coefficient(p, Arm::Right);
  dq.C_L = arm_coefficient(p, Arm::Left);
  dq.dx_max = std::abs(4.0 * p.hbar * p.gamma_e * dq.eta0 / (p.m * dq.omega0 * dq.omega0));
  dq.sigma_x = std::sqrt(p.hbar / (2.0 * p.m * dq.omega0));
  dq.sigma_p = p.hbar / (2.0 * dq.sigma_x);
  return dq;
}

double classical_trajectory(const DerivedQuantities& dq, const ExperimentParams& p, Arm arm, double t) {
  const double C = arm_coefficient(p, arm);
  return C * dq.eta0 / (p.m * dq.omega0 * dq.omega0) * (std::cos(dq.omega0 * t) - 1.0);
}

double classical_momentum(const DerivedQuantities& dq, const ExperimentParams& p, Arm arm, double t) {
  const double C = arm_coefficient(p, arm);
  return -C * dq.eta0 / dq.omega0 * std::sin(dq.omega0 * t);
}

Eigen::ArrayXd classical_trajectory(const DerivedQuantities& dq, const ExperimentParams& p, Arm arm,
                                    const Eigen::ArrayXd& t) {
  const double C = arm_coefficient(p, arm);
  const double amp = C * dq.eta0 / (p.m * dq.omega0 * dq.omega0);
  return amp * ((dq.omega0 * t).cos() - 1.0);
}

Eigen::ArrayXd classical_momentum(const DerivedQuantities& dq, const ExperimentParams& p, Arm arm,
                                  const Eigen::ArrayXd& t) {
  const double C = arm_coefficient(p, arm);
  const double amp = -C * dq.eta0 / dq.omega0;
  return amp * (dq.omega0 * t).sin();
}

}  // namespace magnoise
