#include "lp/dynamics.hpp"

#include "lp/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace lp {

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI(0.0, 1.0);

void require_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ValidationError("alpha must be positive and finite");
  }
}

// e^{-i dt k^2}, cached per thread for the most recent (grid, dt).
const ComplexField& kinetic_phase(const SpatialGrid& grid, double dt) {
  struct Cache {
    const SpatialGrid* grid = nullptr;
    int n = 0;
    double L = 0.0;
    double dt = 0.0;
    ComplexField phase;
  };
  thread_local Cache cache;
  // Address, shape and dt together guard against a freed grid's address being reused.
  if (cache.grid != &grid || cache.n != grid.n() || cache.L != grid.box_length() ||
      cache.dt != dt || cache.phase.size() == 0) {
    cache.phase = (-kI * dt * grid.k_squared().cast<Complex>()).exp();
    cache.grid = &grid;
    cache.n = grid.n();
    cache.L = grid.box_length();
    cache.dt = dt;
  }
  return cache.phase;
}

// Split-step Fourier flow of i d_t psi = (-Laplace + V) psi over signed dt.
ComplexField particle_flow(const SpatialGrid& grid, const ComplexField& psi, const RealField& V,
                           double dt) {
  const ComplexField half_phase = (-kI * (0.5 * dt) * V.cast<Complex>()).exp();
  ComplexField out = half_phase * psi;
  grid.dft_forward(out);
  out *= kinetic_phase(grid, dt);
  grid.dft_backward(out);
  out /= static_cast<double>(grid.size());
  out *= half_phase;
  return out;
}

SimState advance(const SimState& state, double dt, const InvKWeights& weights) {
  const auto& grid = *state.psi.grid;
  const PhononField s0 = sigma(state.psi, weights);
  const double omega0 = -inner_fourier(grid, state.phi.values, s0.values).real();

  const ComplexField phi_half = frozen_field_flow(state.phi.values, s0.values, 0.5 * dt, state.alpha);
  const RealField V = effective_potential({state.phi.grid, phi_half}, weights);

  SimState next;
  next.alpha = state.alpha;
  next.psi = {state.psi.grid, particle_flow(grid, state.psi.values, V, dt)};
  const PhononField s1 = sigma(next.psi, weights);
  next.phi = {state.phi.grid, frozen_field_flow(phi_half, s1.values, 0.5 * dt, state.alpha)};
  const double omega1 = -inner_fourier(grid, next.phi.values, s1.values).real();

  next.t = state.t + dt;
  next.phase = state.phase + 0.5 * dt * (omega0 + omega1);
  return next;
}

void check_step(const SimState& state, double dt) {
  require_alpha(state.alpha);
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ValidationError("step: dt must be positive and finite");
  }
  require_same_grid(*state.psi.grid, *state.phi.grid, "step");
}

void warn_if_coarse(double dt, double alpha) {
  if (dt > alpha * alpha / 10.0) {
    std::ostringstream msg;
    msg << "dt = " << dt << " exceeds alpha^2/10 = " << alpha * alpha / 10.0
        << "; the field rotation per step is under-resolved";
    warn(msg.str());
  }
}

RealField density_source(const WaveFunction& psi) {
  return (4.0 * kPi * kPi) * psi.values.abs2();
}

ComplexField rotate_polarization(const ComplexField& S, const RealField& source, double dt,
                                 double alpha) {
  const Complex rot = std::exp(-kI * dt / (alpha * alpha));
  return rot * (S + source.cast<Complex>()) - source.cast<Complex>();
}

double polarization_omega(const WaveFunction& psi, const RealField& P,
                          const InvKWeights& weights) {
  // -Re(phi, sigma) = -(1/2) <|psi|^2, V_phi> with V_phi = |x|^{-1} * P.
  const RealField V = coulomb_convolution(P, weights);
  return -0.5 * (psi.values.abs2() * V).sum() * psi.grid->dx();
}

PolarizationState advance_polarization(const PolarizationState& state, double dt,
                                       const InvKWeights& weights) {
  const auto& grid = *state.psi.grid;
  ComplexField S(state.pq.P.size());
  S.real() = state.pq.P;
  S.imag() = state.pq.Q;

  const double omega0 = polarization_omega(state.psi, state.pq.P, weights);
  const ComplexField S_half = rotate_polarization(S, density_source(state.psi), 0.5 * dt, state.alpha);
  const RealField V = coulomb_convolution(S_half.real(), weights);

  PolarizationState next;
  next.alpha = state.alpha;
  next.psi = {state.psi.grid, particle_flow(grid, state.psi.values, V, dt)};
  const ComplexField S_next = rotate_polarization(S_half, density_source(next.psi), 0.5 * dt, state.alpha);
  next.pq = {state.pq.grid, S_next.real(), S_next.imag()};
  const double omega1 = polarization_omega(next.psi, next.pq.P, weights);
  next.t = state.t + dt;
  next.phase = state.phase + 0.5 * dt * (omega0 + omega1);
  return next;
}

}  // namespace

WaveFunction gaussian_wavefunction(GridPtr grid, double width, const Eigen::Vector3d& momentum) {
  if (!(width > 0.0)) throw ValidationError("gaussian: width must be positive");
  WaveFunction psi = zero_wavefunction(grid);
  const double amp = std::pow(kPi * width * width, -0.75);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const Eigen::Vector3d x = grid->position(i);
    psi.values(static_cast<Eigen::Index>(i)) =
        amp * std::exp(-x.squaredNorm() / (2.0 * width * width)) * std::exp(kI * momentum.dot(x));
  }
  psi.values /= norm(psi);
  const double edge = boundary_ratio(*grid, psi.values);
  if (edge > 1e-8) {
    std::ostringstream msg;
    msg << "gaussian seed reaches the box boundary (edge/peak = " << edge << ")";
    warn(msg.str());
  }
  return psi;
}

std::string to_string(FieldRecipe recipe) {
  switch (recipe) {
    case FieldRecipe::zero: return "zero";
    case FieldRecipe::minus_sigma: return "minus_sigma";
    case FieldRecipe::perturbed: return "perturbed";
  }
  return "unknown";
}

FieldRecipe parse_field_recipe(const std::string& text) {
  if (text == "zero") return FieldRecipe::zero;
  if (text == "minus_sigma") return FieldRecipe::minus_sigma;
  if (text == "perturbed") return FieldRecipe::perturbed;
  throw ValidationError("unknown field recipe '" + text +
                        "' (expected zero, minus_sigma or perturbed)");
}

PhononField smooth_perturbation(GridPtr grid, double amplitude) {
  const RealField& k2 = grid->k_squared();
  ComplexField values = (amplitude * (-0.5 * k2).exp() / (1.0 + k2.sqrt())).cast<Complex>();
  return {std::move(grid), std::move(values)};
}

PhononField make_field(FieldRecipe recipe, const WaveFunction& psi, const InvKWeights& weights,
                       double perturbation_amplitude) {
  switch (recipe) {
    case FieldRecipe::zero: return zero_field(psi.grid);
    case FieldRecipe::minus_sigma: {
      PhononField s = sigma(psi, weights);
      s.values = -s.values;
      return s;
    }
    case FieldRecipe::perturbed: {
      PhononField s = sigma(psi, weights);
      s.values = -s.values + smooth_perturbation(psi.grid, perturbation_amplitude).values;
      return s;
    }
  }
  throw ValidationError("unknown field recipe");
}

SimState make_state(WaveFunction psi, PhononField phi, double alpha) {
  require_alpha(alpha);
  require_same_grid(*psi.grid, *phi.grid, "make_state");
  SimState s;
  s.psi = std::move(psi);
  s.phi = std::move(phi);
  s.alpha = alpha;
  return s;
}

ComplexField frozen_field_flow(const ComplexField& phi, const ComplexField& sig, double dt,
                               double alpha) {
  const Complex rot = std::exp(-kI * dt / (alpha * alpha));
  return rot * (phi + sig) - sig;
}

SimState step(const SimState& state, double dt, const InvKWeights& weights) {
  check_step(state, dt);
  warn_if_coarse(dt, state.alpha);
  return advance(state, dt, weights);
}

SimState step_backward(const SimState& state, double dt, const InvKWeights& weights) {
  check_step(state, dt);
  warn_if_coarse(dt, state.alpha);
  return advance(state, -dt, weights);
}

DiagnosticSample sample_diagnostics(const SimState& state, const PhononField& phi0,
                                    const InvKWeights& weights) {
  const auto& grid = *state.phi.grid;
  DiagnosticSample d;
  d.t = state.t;
  d.norm = norm(state.psi);
  const EnergyReport e = energy(state.psi, state.phi, weights);
  d.energy_total = e.total;
  d.energy_kinetic = e.kinetic;
  d.energy_interaction = e.interaction;
  d.energy_field = e.field;
  d.omega = omega(state.psi, state.phi, state.alpha, weights);
  d.phase = state.phase;
  d.field_drift = std::sqrt((state.phi.values - phi0.values).abs2().sum() * grid.dk());
  d.field_rate = norm(field_time_derivative(state.psi, state.phi, state.alpha, weights));
  d.g_sup = g_pair(phi0, state.phi, weights).sup_norm;
  d.psi_h4 = sobolev_norm(state.psi, 4);
  d.phi_weighted3 = weighted_norm(state.phi, 3);
  return d;
}

long step_count(double T, double dt) {
  if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("evolve: T must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("evolve: dt must be positive");
  const double ratio = T / dt;
  const long steps = std::lround(ratio);
  if (steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-9 * ratio) {
    std::ostringstream msg;
    msg << "evolve: T = " << T << " is not an integer multiple of dt = " << dt;
    throw ValidationError(msg.str());
  }
  return steps;
}

EvolveResult evolve(const SimState& initial, double T, double dt, int sample_every,
                    const InvKWeights& weights) {
  if (sample_every < 1) throw ValidationError("evolve: sample_every must be at least 1");
  const long steps = step_count(T, dt);
  check_step(initial, dt);
  warn_if_coarse(dt, initial.alpha);

  EvolveResult out;
  const PhononField phi0 = initial.phi;
  SimState state = initial;
  const double t0 = initial.t;
  out.series.samples.push_back(sample_diagnostics(state, phi0, weights));
  for (long n = 1; n <= steps; ++n) {
    state = advance(state, dt, weights);
    // Keep sample times on the lattice t0 + n dt rather than accumulating round-off.
    state.t = t0 + static_cast<double>(n) * dt;
    if (n % sample_every == 0 || n == steps) {
      out.series.samples.push_back(sample_diagnostics(state, phi0, weights));
    }
  }
  out.final_state = std::move(state);
  return out;
}

PolarizationState to_polarization_state(const SimState& state, const InvKWeights& weights) {
  PolarizationState p;
  p.psi = state.psi;
  p.pq = to_polarization(state.phi, weights);
  p.t = state.t;
  p.phase = state.phase;
  p.alpha = state.alpha;
  return p;
}

SimState from_polarization_state(const PolarizationState& state, const InvKWeights& weights) {
  SimState s;
  s.psi = state.psi;
  s.phi = from_polarization(state.pq, weights);
  s.t = state.t;
  s.phase = state.phase;
  s.alpha = state.alpha;
  return s;
}

PolarizationState step_polarization(const PolarizationState& state, double dt,
                                    const InvKWeights& weights) {
  require_alpha(state.alpha);
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("step: dt must be positive");
  require_same_grid(*state.psi.grid, *state.pq.grid, "step_polarization");
  warn_if_coarse(dt, state.alpha);
  return advance_polarization(state, dt, weights);
}

PolarizationTrajectory evolve_polarization(const PolarizationState& initial, double T, double dt,
                                           int sample_every, const InvKWeights& weights) {
  if (sample_every < 1) throw ValidationError("evolve: sample_every must be at least 1");
  const long steps = step_count(T, dt);
  require_alpha(initial.alpha);
  require_same_grid(*initial.psi.grid, *initial.pq.grid, "evolve_polarization");
  warn_if_coarse(dt, initial.alpha);

  PolarizationTrajectory out;
  PolarizationState state = initial;
  const double t0 = initial.t;
  out.samples.push_back(state);
  for (long n = 1; n <= steps; ++n) {
    state = advance_polarization(state, dt, weights);
    state.t = t0 + static_cast<double>(n) * dt;
    if (n % sample_every == 0 || n == steps) out.samples.push_back(state);
  }
  out.final_state = std::move(state);
  return out;
}

double ground_state_residual(const WaveFunction& psi, const InvKWeights& weights) {
  PhononField phi = sigma(psi, weights);
  phi.values = -phi.values;
  const ComplexField h = apply_h_eff(psi, phi, weights);
  const double lambda = inner_spatial(*psi.grid, psi.values, h).real();
  return std::sqrt((h - lambda * psi.values).abs2().sum() * psi.grid->dx());
}

GroundState pekar_ground_state(GridPtr grid, const InvKWeights& weights,
                               const GroundStateOptions& options) {
  if (!(options.tol > 0.0)) throw ValidationError("ground state: tol must be positive");
  if (options.max_iter < 1) throw ValidationError("ground state: max_iter must be positive");
  if (!(options.step > 0.0)) throw ValidationError("ground state: step must be positive");
  require_same_grid(*grid, *weights.grid, "pekar_ground_state");

  const SpatialGrid& g = *grid;
  const double dx = g.dx();
  auto pekar_energy = [&](const WaveFunction& psi) {
    PhononField phi = sigma(psi, weights);
    phi.values = -phi.values;
    return energy(psi, phi, weights).total;
  };

  GroundState out;
  WaveFunction psi = gaussian_wavefunction(grid, options.seed_width);
  double residual = 0.0;
  for (int it = 0;; ++it) {
    PhononField phi = sigma(psi, weights);
    phi.values = -phi.values;
    const RealField V = effective_potential(phi, weights);
    const double constant = phi.values.abs2().sum() * g.dk();
    const ComplexField h = apply_h_eff(psi, V, constant);
    const double lambda = inner_spatial(g, psi.values, h).real();
    const ComplexField r = h - lambda * psi.values;
    residual = std::sqrt(r.abs2().sum() * dx);
    const EnergyReport e = energy(psi, phi, weights);
    out.energy_history.push_back(e.total);

    if (residual <= options.tol) {
      out.psi = std::move(psi);
      out.phi = std::move(phi);
      out.lambda = lambda;
      out.energy = e;
      out.residual = residual;
      out.iterations = it;
      return out;
    }
    if (it >= options.max_iter) break;

    // Kinetic-preconditioned gradient step: psi - tau (1 + tau K)^{-1} (H - lambda) psi.
    double tau = options.step;
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving, tau *= 0.5) {
      ComplexField hat = r;
      g.dft_forward(hat);
      hat /= (1.0 + tau * g.k_squared()) * static_cast<double>(g.size());
      g.dft_backward(hat);
      WaveFunction trial{grid, psi.values - tau * hat};
      trial.values /= norm(trial);
      if (pekar_energy(trial) <= e.total + 1e-12 * std::abs(e.total)) {
        psi = std::move(trial);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  std::ostringstream msg;
  msg << "pekar ground state did not converge: residual " << residual << " after "
      << out.energy_history.size() - 1 << " iterations (tol " << options.tol << ")";
  throw NumericalError(msg.str());
}

double accumulated_phase(const DiagnosticsSeries& series) {
  double total = 0.0;
  for (std::size_t i = 1; i < series.samples.size(); ++i) {
    const auto& a = series.samples[i - 1];
    const auto& b = series.samples[i];
    total += 0.5 * (b.t - a.t) * (a.omega + b.omega);
  }
  return total;
}

WaveFunction gauge_transform(const WaveFunction& psi, double phase) {
  return {psi.grid, std::exp(-kI * phase) * psi.values};
}

}  // namespace lp
