#pragma once

// Coupling functionals between the particle wave function psi(x) and the
// classical phonon amplitude phi(k):
//
//   V_phi(x)     = sum_k [e^{-ik.x} phi(k) + e^{ik.x} conj phi(k)] w(k) dk
//   sigma_psi(k) = w(k) sum_x |psi(x)|^2 e^{ik.x} dx
//   E(psi, phi)  = ||grad psi||^2 + <|psi|^2, V_phi> + ||phi||^2
//
// with w(k) the regularised 1/|k| table. Field equation:
//   i alpha^2 d_t phi = phi + sigma_psi.

#include "lp/spectral_core.hpp"

#include <array>

namespace lp {

struct EnergyReport {
  double kinetic = 0.0;
  double interaction = 0.0;
  double field = 0.0;
  double total = 0.0;
};

/// Real polarization P(x) and the auxiliary Q(x) built from |k| phi(k).
struct PolarizationPair {
  GridPtr grid;
  RealField P;
  RealField Q;
};

struct PotentialResult {
  RealField values;
  /// max |Im V| / max |V| before truncation to real.
  double imaginary_ratio = 0.0;
};

PotentialResult effective_potential_checked(const PhononField& phi, const InvKWeights& weights);
RealField effective_potential(const PhononField& phi, const InvKWeights& weights);

PhononField sigma(const WaveFunction& psi, const InvKWeights& weights);
/// sigma from a density |psi|^2 given directly.
PhononField sigma_of_density(GridPtr grid, const RealField& density, const InvKWeights& weights);

double kinetic_energy(const WaveFunction& psi);
EnergyReport energy(const WaveFunction& psi, const PhononField& phi, const InvKWeights& weights);

/// d_t phi from the right side of the field equation: -i alpha^{-2} (phi + sigma_psi).
PhononField field_time_derivative(const WaveFunction& psi, const PhononField& phi, double alpha,
                                  const InvKWeights& weights);

struct OmegaReport {
  /// alpha^2 Im(phi, d_t phi) + ||phi||^2.
  double definition = 0.0;
  /// -Re(phi, sigma_psi).
  double reduced = 0.0;
};

/// Phase rate omega; throws NumericalError if the two routes differ by more than
/// 1e-10 (1 + |omega|).
OmegaReport omega_both(const WaveFunction& psi, const PhononField& phi, double alpha,
                       const InvKWeights& weights);
double omega(const WaveFunction& psi, const PhononField& phi, double alpha,
             const InvKWeights& weights);
double omega_reduced(const WaveFunction& psi, const PhononField& phi, const InvKWeights& weights);

/// Spectral -Laplacian.
ComplexField apply_negative_laplacian(const SpatialGrid& grid, const ComplexField& psi);
/// (-Laplace + V_phi + ||phi||^2) psi.
ComplexField apply_h_eff(const WaveFunction& psi, const PhononField& phi, const InvKWeights& weights);
/// Same with a precomputed potential and constant.
ComplexField apply_h_eff(const WaveFunction& psi, const RealField& potential, double constant);

PolarizationPair to_polarization(const PhononField& phi, const InvKWeights& weights);
PhononField from_polarization(const PolarizationPair& pq, const InvKWeights& weights);

/// Fourier weight of |x|^{-1} on the lattice: 4 pi / k^2, with the origin set so
/// that |x|^{-1} * P reproduces V_phi for the same InvKWeights.
RealField coulomb_kernel(const InvKWeights& weights);
/// (|x|^{-1} * P)(x) evaluated spectrally.
RealField coulomb_convolution(const RealField& P, const InvKWeights& weights);

struct AuxiliaryFunction {
  ComplexField values;
  double sup_norm = 0.0;
};

/// g_{s,t}(x) = sum_k [conj phi_t - conj phi_s] e^{ik.x} w dk.
AuxiliaryFunction g_pair(const PhononField& phi_s, const PhononField& phi_t,
                         const InvKWeights& weights);
/// g_s(x) = sum_k e^{ik.x} conj(d phi)(k) w dk.
AuxiliaryFunction g_inst(const PhononField& dphi, const InvKWeights& weights);

/// (sum_k w(k)^2 / (1 + k^2) dk)^{1/2}: the lattice Cauchy-Schwarz constant with
/// ||g_{s,t}||_inf <= C ||phi_t - phi_s||_{L^2_(1)}.
double g_bound_constant(const InvKWeights& weights);

/// Spectral partial derivative of a real field.
RealField spectral_derivative(const SpatialGrid& grid, const RealField& f, int axis);

struct CouplingDiagnostics {
  double potential_l6 = 0.0;            // ||V_phi||_6
  double field_l2 = 0.0;                // ||phi||_2
  double potential_sup = 0.0;           // ||V_phi||_inf
  std::array<double, 3> gradient_sup{};  // ||d_j V_phi||_inf
  std::array<double, 4> field_weighted{};  // ||phi||_(m), m = 0..3
  double sigma_weighted1 = 0.0;         // ||sigma_psi||_(1)
  double sigma_weighted3 = 0.0;         // ||sigma_psi||_(3)
  double psi_h1_squared = 0.0;          // ||psi||_{H^1}^2
  double psi_h2_squared = 0.0;          // ||psi||_{H^2}^2

  // Ratios that stay bounded by the Hardy-Littlewood-Sobolev type estimates.
  double hls_ratio = 0.0;               // ||V||_6 / ||phi||_2
  double sup_ratio = 0.0;               // ||V||_inf / ||phi||_(1)
  double gradient_ratio = 0.0;          // max_j ||d_j V||_inf / ||phi||_(2)
  double sigma_h1_ratio = 0.0;          // ||sigma||_(1) / ||psi||_{H^1}^2
  double sigma_h2_ratio = 0.0;          // ||sigma||_(3) / ||psi||_{H^2}^2
};

CouplingDiagnostics coupling_diagnostics(const WaveFunction& psi, const PhononField& phi,
                                         const InvKWeights& weights);

}  // namespace lp
