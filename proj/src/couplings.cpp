#include "lp/couplings.hpp"

#include "lp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace lp {

namespace {

constexpr double kPi = std::numbers::pi;

double two_pi_cubed() { return std::pow(2.0 * kPi, 3); }

ComplexField to_complex(const RealField& f) { return f.cast<Complex>(); }

// sum_x f(x) e^{+ik.x} dx on the lattice.
ComplexField spatial_sum_plus(const SpatialGrid& grid, const ComplexField& f) {
  ComplexField out = f;
  grid.dft_backward(out);
  out *= grid.parity() * grid.dx();
  return out;
}

void check_weights(const SpatialGrid& grid, const InvKWeights& weights, const char* where) {
  require_same_grid(grid, *weights.grid, where);
}

}  // namespace

PotentialResult effective_potential_checked(const PhononField& phi, const InvKWeights& weights) {
  const auto& grid = *phi.grid;
  check_weights(grid, weights, "effective_potential");
  const ComplexField weighted = phi.values * weights.w;
  const ComplexField minus = lattice_sum_minus(grid, weighted);
  const ComplexField plus = lattice_sum_plus(grid, weighted.conjugate());
  const ComplexField total = minus + plus;

  PotentialResult out;
  out.values = total.real();
  const double peak = out.values.abs().maxCoeff();
  const double imag = total.imag().abs().maxCoeff();
  out.imaginary_ratio = peak > 0.0 ? imag / peak : imag;
  return out;
}

RealField effective_potential(const PhononField& phi, const InvKWeights& weights) {
  // The e^{+ik.x} sum of conj(phi w) is the conjugate of the e^{-ik.x} sum of phi w.
  const auto& grid = *phi.grid;
  check_weights(grid, weights, "effective_potential");
  return 2.0 * lattice_sum_minus(grid, phi.values * weights.w).real();
}

PhononField sigma_of_density(GridPtr grid, const RealField& density, const InvKWeights& weights) {
  check_weights(*grid, weights, "sigma");
  ComplexField hat = spatial_sum_plus(*grid, to_complex(density));
  hat *= weights.w;
  return {std::move(grid), std::move(hat)};
}

PhononField sigma(const WaveFunction& psi, const InvKWeights& weights) {
  return sigma_of_density(psi.grid, psi.values.abs2(), weights);
}

double kinetic_energy(const WaveFunction& psi) {
  const auto& grid = *psi.grid;
  const ComplexField hat = fourier(grid, psi.values);
  return (grid.k_squared() * hat.abs2()).sum() * grid.dk() / two_pi_cubed();
}

EnergyReport energy(const WaveFunction& psi, const PhononField& phi, const InvKWeights& weights) {
  require_same_grid(*psi.grid, *phi.grid, "energy");
  EnergyReport e;
  e.kinetic = kinetic_energy(psi);
  const RealField V = effective_potential(phi, weights);
  e.interaction = (psi.values.abs2() * V).sum() * psi.grid->dx();
  e.field = phi.values.abs2().sum() * phi.grid->dk();
  e.total = e.kinetic + e.interaction + e.field;
  return e;
}

PhononField field_time_derivative(const WaveFunction& psi, const PhononField& phi, double alpha,
                                  const InvKWeights& weights) {
  require_same_grid(*psi.grid, *phi.grid, "field_time_derivative");
  const PhononField s = sigma(psi, weights);
  const Complex factor(0.0, -1.0 / (alpha * alpha));
  return {phi.grid, factor * (phi.values + s.values)};
}

double omega_reduced(const WaveFunction& psi, const PhononField& phi, const InvKWeights& weights) {
  const PhononField s = sigma(psi, weights);
  return -inner_fourier(*phi.grid, phi.values, s.values).real();
}

OmegaReport omega_both(const WaveFunction& psi, const PhononField& phi, double alpha,
                       const InvKWeights& weights) {
  if (!(alpha > 0.0)) throw ValidationError("omega: alpha must be positive");
  require_same_grid(*psi.grid, *phi.grid, "omega");
  const PhononField s = sigma(psi, weights);
  const Complex factor(0.0, -1.0 / (alpha * alpha));
  const ComplexField dphi = factor * (phi.values + s.values);
  const auto& grid = *phi.grid;

  OmegaReport out;
  const double phi_sq = phi.values.abs2().sum() * grid.dk();
  out.definition = alpha * alpha * inner_fourier(grid, phi.values, dphi).imag() + phi_sq;
  out.reduced = -inner_fourier(grid, phi.values, s.values).real();
  const double gap = std::abs(out.definition - out.reduced);
  if (gap > 1e-10 * (1.0 + std::abs(out.reduced))) {
    std::ostringstream msg;
    msg << "omega: definition " << out.definition << " and reduced form " << out.reduced
        << " disagree by " << gap;
    throw NumericalError(msg.str());
  }
  return out;
}

double omega(const WaveFunction& psi, const PhononField& phi, double alpha,
             const InvKWeights& weights) {
  return omega_both(psi, phi, alpha, weights).definition;
}

ComplexField apply_negative_laplacian(const SpatialGrid& grid, const ComplexField& psi) {
  ComplexField hat = psi;
  grid.dft_forward(hat);
  hat *= grid.k_squared();
  grid.dft_backward(hat);
  hat /= static_cast<double>(grid.size());
  return hat;
}

ComplexField apply_h_eff(const WaveFunction& psi, const RealField& potential, double constant) {
  return apply_negative_laplacian(*psi.grid, psi.values) + (potential + constant) * psi.values;
}

ComplexField apply_h_eff(const WaveFunction& psi, const PhononField& phi,
                         const InvKWeights& weights) {
  require_same_grid(*psi.grid, *phi.grid, "apply_h_eff");
  const RealField V = effective_potential(phi, weights);
  const double constant = phi.values.abs2().sum() * phi.grid->dk();
  return apply_h_eff(psi, V, constant);
}

PolarizationPair to_polarization(const PhononField& phi, const InvKWeights& weights) {
  const auto& grid = *phi.grid;
  check_weights(grid, weights, "to_polarization");
  const ComplexField F =
      lattice_sum_minus(grid, phi.values * weights.inverse) / (2.0 * kPi);
  return {phi.grid, F.real(), F.imag()};
}

PhononField from_polarization(const PolarizationPair& pq, const InvKWeights& weights) {
  const auto& grid = *pq.grid;
  check_weights(grid, weights, "from_polarization");
  if (pq.P.size() != pq.Q.size() || static_cast<std::size_t>(pq.P.size()) != grid.size()) {
    throw ValidationError("from_polarization: P and Q must match the grid");
  }
  ComplexField F(pq.P.size());
  F.real() = pq.P;
  F.imag() = pq.Q;
  ComplexField phi = spatial_sum_plus(grid, F);
  phi *= weights.w / std::pow(2.0 * kPi, 2);
  return {pq.grid, std::move(phi)};
}

RealField coulomb_kernel(const InvKWeights& weights) {
  // 4 pi / k^2 = 4 pi w^2 away from 0; at 0 the same product keeps
  // |x|^{-1} * P identical to V_phi (and drops the mode when w(0) = 0).
  return 4.0 * kPi * weights.w.square();
}

RealField coulomb_convolution(const RealField& P, const InvKWeights& weights) {
  const auto& grid = *weights.grid;
  ComplexField hat = fourier(grid, to_complex(P));
  hat *= coulomb_kernel(weights);
  return inverse_fourier(grid, hat).real();
}

AuxiliaryFunction g_pair(const PhononField& phi_s, const PhononField& phi_t,
                         const InvKWeights& weights) {
  require_same_grid(*phi_s.grid, *phi_t.grid, "g_pair");
  check_weights(*phi_s.grid, weights, "g_pair");
  AuxiliaryFunction g;
  g.values = lattice_sum_plus(*phi_s.grid, (phi_t.values - phi_s.values).conjugate() * weights.w);
  g.sup_norm = g.values.abs().maxCoeff();
  return g;
}

AuxiliaryFunction g_inst(const PhononField& dphi, const InvKWeights& weights) {
  check_weights(*dphi.grid, weights, "g_inst");
  AuxiliaryFunction g;
  g.values = lattice_sum_plus(*dphi.grid, dphi.values.conjugate() * weights.w);
  g.sup_norm = g.values.abs().maxCoeff();
  return g;
}

double g_bound_constant(const InvKWeights& weights) {
  const auto& grid = *weights.grid;
  return std::sqrt((weights.w.square() / (1.0 + grid.k_squared())).sum() * grid.dk());
}

RealField spectral_derivative(const SpatialGrid& grid, const RealField& f, int axis) {
  if (axis < 0 || axis > 2) throw ValidationError("spectral_derivative: axis must be 0, 1 or 2");
  ComplexField hat = fourier(grid, to_complex(f));
  RealField kj = grid.k_component(axis);
  // The Nyquist plane has no partner at +n/2; drop it so the derivative stays real.
  const double nyquist = -grid.k_unit() * (grid.n() / 2);
  kj = (kj == nyquist).select(0.0, kj);
  hat *= Complex(0.0, 1.0) * kj.cast<Complex>();
  return inverse_fourier(grid, hat).real();
}

CouplingDiagnostics coupling_diagnostics(const WaveFunction& psi, const PhononField& phi,
                                         const InvKWeights& weights) {
  require_same_grid(*psi.grid, *phi.grid, "coupling_diagnostics");
  const auto& grid = *psi.grid;
  CouplingDiagnostics d;
  const RealField V = effective_potential(phi, weights);
  d.potential_l6 = std::pow(V.abs().pow(6).sum() * grid.dx(), 1.0 / 6.0);
  d.field_l2 = norm(phi);
  d.potential_sup = V.abs().maxCoeff();
  for (int axis = 0; axis < 3; ++axis) {
    d.gradient_sup[axis] = spectral_derivative(grid, V, axis).abs().maxCoeff();
  }
  for (int m = 0; m <= 3; ++m) d.field_weighted[m] = weighted_norm(phi, m);
  const PhononField s = sigma(psi, weights);
  d.sigma_weighted1 = weighted_norm(s, 1);
  d.sigma_weighted3 = weighted_norm(s, 3);
  d.psi_h1_squared = std::pow(sobolev_norm(psi, 1), 2);
  d.psi_h2_squared = std::pow(sobolev_norm(psi, 2), 2);

  auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
  d.hls_ratio = ratio(d.potential_l6, d.field_l2);
  d.sup_ratio = ratio(d.potential_sup, d.field_weighted[1]);
  const double grad_max = *std::max_element(d.gradient_sup.begin(), d.gradient_sup.end());
  d.gradient_ratio = ratio(grad_max, d.field_weighted[2]);
  d.sigma_h1_ratio = ratio(d.sigma_weighted1, d.psi_h1_squared);
  d.sigma_h2_ratio = ratio(d.sigma_weighted3, d.psi_h2_squared);
  return d;
}

}  // namespace lp
