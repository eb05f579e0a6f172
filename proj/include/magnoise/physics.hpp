#pragma once

// Physical parameters of the chip-based Stern-Gerlach interferometer, the
// derived trap/interferometer quantities, and the closed-form unperturbed
// trajectories and momenta of the two arms.
//
// All quantities are SI throughout; angular frequency (rad/s) is the canonical
// frequency variable.  The gradient eta0 is stored *signed* (negative for the
// canonical parameter set); only omega0 is stored as a magnitude.

#include <Eigen/Core>

namespace magnoise {

namespace constants {
inline constexpr double mu0 = 1.25663706143591730e-6;  // vacuum permeability 4*pi*1e-7 [T m / A]
inline constexpr double hbar = 1.054571817e-34;        // reduced Planck constant [J s]
}  // namespace constants

// Raw inputs.  D_zfs is carried for completeness only: it contributes an equal
// constant to both arms and cancels in every phase difference.
struct ExperimentParams {
  double gamma_e;   // electron gyromagnetic ratio [1/(s T)]
  double B0;        // bias magnetic field [T]
  double I;         // wire current [A]
  double d;         // particle-wire distance [m]
  double rho;       // particle mass density [kg/m^3]
  double chi_rho;   // mass magnetic susceptibility [m^3/kg]; negative (diamagnetic)
  double m;         // particle mass [kg]
  double mu0 = constants::mu0;
  double hbar = constants::hbar;
  double D_zfs = 2.87e9;  // zero-field splitting [Hz]; spin-symmetric, never enters dynamics
};

// Canonical chip-trap parameter set (nanodiamond levitated near a wire).
// The particle mass is not part of the canonical set and must be given.
ExperimentParams reference_params(double mass_kg);

// Throws std::invalid_argument naming the violated invariant.
void validate(const ExperimentParams& p);

// The two interferometer arms, identified by the x-basis spin eigenvalue.
enum class Arm : int { Right = +1, Left = -1 };
inline int spin(Arm a) { return static_cast<int>(a); }

struct DerivedQuantities {
  double eta0;     // signed field gradient -mu0*I/(2*pi*d^2) [T/m]
  double omega0;   // trap frequency |sqrt(-chi_rho/mu0)*eta0| [rad/s], positive
  double H;        // phase-noise coupling 4*gamma_e*B0*eta0*chi_rho/mu0 [m/(T s^3)]
  double T_exp;    // one-loop time 2*pi/omega0 [s]
  double C_R;      // right-arm force coefficient  hbar*gamma_e - chi_rho*m*B0/mu0 [J/T]
  double C_L;      // left-arm force coefficient  -hbar*gamma_e - chi_rho*m*B0/mu0 [J/T]
  double dx_max;   // maximal arm separation |4*hbar*gamma_e*eta0/(m*omega0^2)| [m]
  double sigma_x;  // ground-state width sqrt(hbar/(2 m omega0)) [m]
  double sigma_p;  // momentum width hbar/(2 sigma_x) [kg m/s] (minimum uncertainty)
};

// Populates every derived quantity; validates the inputs first.
DerivedQuantities derive_quantities(const ExperimentParams& p);

// C_j = S_xj*hbar*gamma_e - chi_rho*m*B0/mu0 for arm j.
double arm_coefficient(const ExperimentParams& p, Arm arm);

// Unperturbed closed-loop trajectory x_j(t) = (C_j*eta0/(m*omega0^2))*(cos(omega0 t) - 1)
// and its momentum p_j(t) = -(C_j*eta0/omega0)*sin(omega0 t).
double classical_trajectory(const DerivedQuantities& dq, const ExperimentParams& p, Arm arm, double t);
double classical_momentum(const DerivedQuantities& dq, const ExperimentParams& p, Arm arm, double t);

Eigen::ArrayXd classical_trajectory(const DerivedQuantities& dq, const ExperimentParams& p, Arm arm,
                                    const Eigen::ArrayXd& t);
Eigen::ArrayXd classical_momentum(const DerivedQuantities& dq, const ExperimentParams& p, Arm arm,
                                  const Eigen::ArrayXd& t);

}  // namespace magnoise
