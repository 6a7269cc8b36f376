#pragma once

// Time integration of the coupled particle/field system
//
//   i d_t psi        = (-Laplace + V_phi) psi
//   i alpha^2 d_t phi = phi + sigma_psi
//
// by a symmetric (Strang) composition of exact sub-flows: a field half step at
// frozen sigma, a split-step Fourier particle step at frozen phi, and a second
// field half step. The same scheme is available on the polarization pair
// (P, Q), where the field equation becomes a rotation of P + iQ.

#include "lp/couplings.hpp"
#include "lp/spectral_core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lp {

struct SimState {
  WaveFunction psi;
  PhononField phi;
  double t = 0.0;
  /// Accumulated integral of omega over [0, t].
  double phase = 0.0;
  double alpha = 1.0;
};

struct PolarizationState {
  WaveFunction psi;
  PolarizationPair pq;
  double t = 0.0;
  double phase = 0.0;
  double alpha = 1.0;
};

// ---- initial data ---------------------------------------------------------

/// Normalised Gaussian (pi s^2)^{-3/4} e^{-x^2 / (2 s^2)} e^{i p.x}, renormalised on the grid.
WaveFunction gaussian_wavefunction(GridPtr grid, double width,
                                   const Eigen::Vector3d& momentum = Eigen::Vector3d::Zero());

enum class FieldRecipe { zero, minus_sigma, perturbed };

std::string to_string(FieldRecipe recipe);
FieldRecipe parse_field_recipe(const std::string& text);

/// amplitude * e^{-k^2/2} / (1 + |k|).
PhononField smooth_perturbation(GridPtr grid, double amplitude);

/// zero; -sigma_psi; or -sigma_psi + smooth_perturbation(amplitude).
PhononField make_field(FieldRecipe recipe, const WaveFunction& psi, const InvKWeights& weights,
                       double perturbation_amplitude = 0.2);

SimState make_state(WaveFunction psi, PhononField phi, double alpha);

// ---- stepping -------------------------------------------------------------

/// Exact solution of the field equation over time dt at frozen sigma:
/// phi <- e^{-i dt / alpha^2} (phi + sigma) - sigma.
ComplexField frozen_field_flow(const ComplexField& phi, const ComplexField& sigma, double dt,
                               double alpha);

/// One Strang step of size dt > 0. Warns when dt > alpha^2 / 10.
SimState step(const SimState& state, double dt, const InvKWeights& weights);

/// One step backwards in time (every sub-flow run with -dt).
SimState step_backward(const SimState& state, double dt, const InvKWeights& weights);

struct DiagnosticSample {
  double t = 0.0;
  double norm = 0.0;
  double energy_total = 0.0;
  double energy_kinetic = 0.0;
  double energy_interaction = 0.0;
  double energy_field = 0.0;
  double omega = 0.0;
  double phase = 0.0;
  double field_drift = 0.0;   // ||phi_t - phi_0||
  double field_rate = 0.0;    // ||d_t phi_t||
  double g_sup = 0.0;         // ||g_{0,t}||_inf
  double psi_h4 = 0.0;        // ||psi_t||_{H^4}
  double phi_weighted3 = 0.0; // ||phi_t||_(3)
};

struct DiagnosticsSeries {
  std::vector<DiagnosticSample> samples;
};

DiagnosticSample sample_diagnostics(const SimState& state, const PhononField& phi0,
                                    const InvKWeights& weights);

struct EvolveResult {
  SimState final_state;
  DiagnosticsSeries series;
};

/// Round(T / dt) steps, sampling at step 0 and every sample_every steps (and
/// at the final step). T must be an integer multiple of dt.
EvolveResult evolve(const SimState& initial, double T, double dt, int sample_every,
                    const InvKWeights& weights);

/// Number of steps for horizon T at step dt; throws if T is not a multiple of dt.
long step_count(double T, double dt);

// ---- polarization form ----------------------------------------------------

PolarizationState to_polarization_state(const SimState& state, const InvKWeights& weights);
SimState from_polarization_state(const PolarizationState& state, const InvKWeights& weights);

PolarizationState step_polarization(const PolarizationState& state, double dt,
                                    const InvKWeights& weights);

struct PolarizationTrajectory {
  PolarizationState final_state;
  std::vector<PolarizationState> samples;
};

PolarizationTrajectory evolve_polarization(const PolarizationState& initial, double T, double dt,
                                           int sample_every, const InvKWeights& weights);

// ---- ground state ---------------------------------------------------------

struct GroundStateOptions {
  double tol = 1e-8;
  int max_iter = 20000;
  double step = 5e-3;
  double seed_width = 1.0;
};

struct GroundState {
  WaveFunction psi;
  PhononField phi;  // -sigma_psi
  double lambda = 0.0;
  EnergyReport energy;
  double residual = 0.0;
  int iterations = 0;
  std::vector<double> energy_history;
};

/// ||H_phi psi - <psi, H_phi psi> psi|| at phi = -sigma_psi.
double ground_state_residual(const WaveFunction& psi, const InvKWeights& weights);

/// Normalised gradient flow of E(psi, -sigma_psi) from a Gaussian seed. Throws
/// NumericalError (with the last residual) if tol is not reached in max_iter steps.
GroundState pekar_ground_state(GridPtr grid, const InvKWeights& weights,
                               const GroundStateOptions& options = {});

// ---- phase bookkeeping ----------------------------------------------------

/// Trapezoidal integral of the omega samples.
double accumulated_phase(const DiagnosticsSeries& series);
/// e^{-i phase} psi.
WaveFunction gauge_transform(const WaveFunction& psi, double phase);

}  // namespace lp
