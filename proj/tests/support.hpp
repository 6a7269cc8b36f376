#pragma once

// Shared fixtures for the unit suites: seeded random fields and small helpers.

#include "lp/spectral_core.hpp"

#include <random>

namespace lp::testing {

inline ComplexField random_field(std::size_t size, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  ComplexField f(static_cast<Eigen::Index>(size));
  for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = Complex(gauss(rng), gauss(rng));
  return f;
}

/// Random normalised wave function with a Gaussian envelope so it is smooth enough
/// for the couplings.
inline WaveFunction random_wavefunction(const GridPtr& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double width = 1.0 + 0.5 * (u(rng) + 1.0);
  const Eigen::Vector3d centre(0.5 * u(rng), 0.5 * u(rng), 0.5 * u(rng));
  const Eigen::Vector3d p(u(rng), u(rng), u(rng));
  const Complex mix(u(rng), u(rng));
  WaveFunction psi{grid, ComplexField(static_cast<Eigen::Index>(grid->size()))};
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const Eigen::Vector3d x = grid->position(i) - centre;
    const double r2 = x.squaredNorm();
    psi.values(static_cast<Eigen::Index>(i)) =
        std::exp(-r2 / (2 * width * width)) * (1.0 + mix * x(0)) * std::exp(Complex(0.0, p.dot(x)));
  }
  psi.values /= norm(psi);
  return psi;
}

/// Random smooth phonon field: complex Gaussian noise under e^{-k^2/4}.
inline PhononField random_phonon(const GridPtr& grid, std::mt19937_64& rng, double scale = 0.3) {
  PhononField phi{grid, random_field(grid->size(), rng, scale)};
  phi.values *= (-grid->k_squared() / 4.0).exp();
  return phi;
}

inline double max_abs(const ComplexField& f) { return f.abs().maxCoeff(); }

}  // namespace lp::testing
