#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lp/couplings.hpp"
#include "lp/errors.hpp"
#include "support.hpp"

#include <cmath>
#include <numbers>

using namespace lp;
using lp::testing::random_phonon;
using lp::testing::random_wavefunction;

namespace {

constexpr double pi = std::numbers::pi;

WaveFunction unit_gaussian(const GridPtr& g, double width = 1.0) {
  WaveFunction psi{g, ComplexField(static_cast<Eigen::Index>(g->size()))};
  const double c = std::pow(pi * width * width, -0.75);
  for (std::size_t i = 0; i < g->size(); ++i) {
    psi.values(static_cast<Eigen::Index>(i)) = c * std::exp(-0.5 * g->position(i).squaredNorm() / (width * width));
  }
  return psi;
}

PhononField gaussian_field(const GridPtr& g, double scale = 1.0) {
  return {g, (scale * (-0.5 * g->k_squared()).exp()).cast<Complex>()};
}

}  // namespace

TEST_CASE("effective potential") {
  SUBCASE("vanishes for the zero field") {
    const GridPtr g = make_grid(16, 12.0);
    const InvKWeights w = inv_k_weights(g, InvKMode::cell_average);
    CHECK(effective_potential(zero_field(g), w).abs().maxCoeff() == 0.0);
  }

  SUBCASE("value at the origin for a Gaussian field") {
    // V(0) = 2 * 4 pi int_0^inf k e^{-k^2/2} dk = 8 pi.
    const GridPtr g = make_grid(64, 32.0);
    const InvKWeights w = inv_k_weights(g, InvKMode::cell_average);
    const RealField V = effective_potential(gaussian_field(g), w);
    const auto origin = static_cast<Eigen::Index>(g->index(32, 32, 32));
    CHECK(g->position(static_cast<std::size_t>(origin)).norm() == 0.0);
    CHECK(std::abs(V(origin) - 8 * pi) <= 2e-3 * 8 * pi);
  }

  SUBCASE("real for random fields, and the one-transform route matches two transforms") {
    const GridPtr g = make_grid(16, 12.0);
    const InvKWeights w = inv_k_weights(g, InvKMode::cell_average);
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
      const PhononField phi = random_phonon(g, rng);
      const PotentialResult checked = effective_potential_checked(phi, w);
      REQUIRE(checked.imaginary_ratio <= 1e-12);
      const RealField fast = effective_potential(phi, w);
      REQUIRE((fast - checked.values).abs().maxCoeff() <= 1e-12 * checked.values.abs().maxCoeff());
    }
  }

  SUBCASE("grid mismatch is rejected") {
    const GridPtr g = make_grid(16, 12.0);
    const InvKWeights other = inv_k_weights(make_grid(8, 12.0), InvKMode::zero);
    CHECK_THROWS_AS(effective_potential(zero_field(g), other), ValidationError);
  }
}

TEST_CASE("sigma") {
  const GridPtr g = make_grid(32, 16.0);

  SUBCASE("unit-width Gaussian density") {
    // |psi|^2 = (2 pi)^{-3/2} e^{-x^2/2} gives sigma(k) = e^{-k^2/2} / |k|.
    const InvKWeights w = inv_k_weights(g, InvKMode::cell_average);
    const PhononField s = sigma(unit_gaussian(g, std::sqrt(2.0)), w);
    double worst = 0.0;
    for (Eigen::Index i = 1; i < s.values.size(); ++i) {
      const double k2 = g->k_squared()(i);
      if (k2 > 16.0) continue;  // aliasing near the Nyquist plane is ~e^{-(4 pi - k)^2/2}
      const double exact = std::exp(-0.5 * k2) / std::sqrt(k2);
      worst = std::max(worst, std::abs(s.values(i) - exact));
    }
    CHECK(worst <= 1e-10);
  }

  SUBCASE("constant density keeps only the zero mode") {
    const double L = 16.0;
    WaveFunction psi{g, ComplexField::Constant(static_cast<Eigen::Index>(g->size()), std::pow(L, -1.5))};
    const PhononField cell = sigma(psi, inv_k_weights(g, InvKMode::cell_average));
    CHECK(cell.values.tail(cell.values.size() - 1).abs().maxCoeff() <= 1e-12);
    CHECK(std::abs(cell.values(0)) > 0.0);
    const PhononField none = sigma(psi, inv_k_weights(g, InvKMode::zero));
    CHECK(none.values.abs().maxCoeff() <= 1e-12);
  }

  SUBCASE("Hermitian symmetry for random wave functions") {
    const GridPtr small = make_grid(16, 12.0);
    const InvKWeights w = inv_k_weights(small, InvKMode::cell_average);
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
      const PhononField s = sigma(random_wavefunction(small, rng), w);
      double worst = 0.0;
      for (std::size_t i = 0; i < small->size(); ++i) {
        const auto [ix, iy, iz] = small->unpack(i);
        if (ix == 8 || iy == 8 || iz == 8) continue;  // Nyquist planes are their own mirror
        worst = std::max(worst, std::abs(s.values(static_cast<Eigen::Index>(small->reflected(i))) -
                                         std::conj(s.values(static_cast<Eigen::Index>(i)))));
      }
      REQUIRE(worst <= 1e-12);
    }
  }
}

TEST_CASE("energy") {
  const GridPtr g = make_grid(32, 16.0);
  const InvKWeights w = inv_k_weights(g, InvKMode::cell_average);

  SUBCASE("free Gaussian") {
    const EnergyReport e = energy(unit_gaussian(g), zero_field(g), w);
    CHECK(e.kinetic == doctest::Approx(1.5).epsilon(1e-6));
    CHECK(e.interaction == 0.0);
    CHECK(e.field == 0.0);
    CHECK(e.total == e.kinetic);
  }

  SUBCASE("field at minus sigma") {
    const WaveFunction psi = unit_gaussian(g);
    const PhononField s = sigma(psi, w);
    const PhononField phi{g, -s.values};
    const double s2 = std::pow(norm(s), 2);
    const EnergyReport e = energy(psi, phi, w);
    CHECK(e.interaction == doctest::Approx(-2 * s2).epsilon(1e-12));
    CHECK(e.field == doctest::Approx(s2).epsilon(1e-14));
    CHECK(e.total == doctest::Approx(e.kinetic - s2).epsilon(1e-12));
  }

  SUBCASE("total is the sum of the parts, and the phase does not matter") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
      const WaveFunction psi = random_wavefunction(g, rng);
      const PhononField phi = random_phonon(g, rng);
      const EnergyReport e = energy(psi, phi, w);
      CHECK(e.total == e.kinetic + e.interaction + e.field);
      const WaveFunction rotated{g, psi.values * std::exp(Complex(0.0, 0.7 + trial))};
      const EnergyReport r = energy(rotated, phi, w);
      CHECK(std::abs(r.total - e.total) <= 1e-13 * std::abs(e.total));
      CHECK(std::abs(r.kinetic - e.kinetic) <= 1e-13 * e.kinetic);
    }
  }
}

TEST_CASE("omega") {
  const GridPtr g = make_grid(16, 12.0);
  const InvKWeights w = inv_k_weights(g, InvKMode::cell_average);
  std::mt19937_64 rng(17);

  SUBCASE("zero field") {
    const OmegaReport o = omega_both(random_wavefunction(g, rng), zero_field(g), 3.0, w);
    CHECK(o.definition == 0.0);
    CHECK(o.reduced == 0.0);
  }

  SUBCASE("stationary field gives ||sigma||^2") {
    const WaveFunction psi = random_wavefunction(g, rng);
    const PhononField s = sigma(psi, w);
    const double o = omega(psi, {g, -s.values}, 2.0, w);
    CHECK(o == doctest::Approx(std::pow(norm(s), 2)).epsilon(1e-12));
    CHECK(omega_reduced(psi, {g, -s.values}, w) == doctest::Approx(o).epsilon(1e-12));
  }

  SUBCASE("definition agrees with the reduced form on random pairs") {
    std::uniform_real_distribution<double> a(1.0, 40.0);
    for (int trial = 0; trial < 100; ++trial) {
      const WaveFunction psi = random_wavefunction(g, rng);
      const PhononField phi = random_phonon(g, rng);
      const OmegaReport o = omega_both(psi, phi, a(rng), w);
      REQUIRE(std::abs(o.definition - o.reduced) <= 1e-10 * (1.0 + std::abs(o.reduced)));
    }
  }

  SUBCASE("field derivative comes from the field equation") {
    const WaveFunction psi = random_wavefunction(g, rng);
    const PhononField phi = random_phonon(g, rng);
    const PhononField s = sigma(psi, w);
    const PhononField d = field_time_derivative(psi, phi, 2.0, w);
    // i alpha^2 d_t phi = phi + sigma.
    CHECK((Complex(0.0, 4.0) * d.values - phi.values - s.values).abs().maxCoeff() <= 1e-14);
  }

  SUBCASE("alpha must be positive") {
    CHECK_THROWS_AS(omega(random_wavefunction(g, rng), zero_field(g), 0.0, w), ValidationError);
  }
}

TEST_CASE("effective Hamiltonian") {
  const double L = 10.0;
  const GridPtr g = make_grid(16, L);
  const InvKWeights w = inv_k_weights(g, InvKMode::cell_average);

  SUBCASE("plane wave eigenfunction of the free part") {
    const std::size_t at = g->index(2, 14, 1);
    const Eigen::Vector3d k0 = g->wavevector(at);
    WaveFunction psi{g, ComplexField(static_cast<Eigen::Index>(g->size()))};
    for (std::size_t i = 0; i < g->size(); ++i) {
      psi.values(static_cast<Eigen::Index>(i)) = std::exp(Complex(0.0, k0.dot(g->position(i)))) * std::pow(L, -1.5);
    }
    const ComplexField h = apply_h_eff(psi, zero_field(g), w);
    CHECK((h - k0.squaredNorm() * psi.values).abs().maxCoeff() <= 1e-12);
  }

  SUBCASE("linearity") {
    std::mt19937_64 rng(23);
    const WaveFunction a = random_wavefunction(g, rng);
    const WaveFunction b = random_wavefunction(g, rng);
    const PhononField phi = random_phonon(g, rng);
    const Complex ca(0.3, -1.2);
    const Complex cb(2.0, 0.5);
    const ComplexField lhs = apply_h_eff({g, ca * a.values + cb * b.values}, phi, w);
    const ComplexField rhs = ca * apply_h_eff(a, phi, w) + cb * apply_h_eff(b, phi, w);
    CHECK((lhs - rhs).abs().maxCoeff() <= 1e-12 * rhs.abs().maxCoeff());
  }

  SUBCASE("constant shift is ||phi||^2") {
    std::mt19937_64 rng(29);
    const WaveFunction psi = random_wavefunction(g, rng);
    const PhononField phi = random_phonon(g, rng);
    const RealField V = effective_potential(phi, w);
    const ComplexField expected = apply_negative_laplacian(*g, psi.values) + V * psi.values +
                                  std::pow(norm(phi), 2) * psi.values;
    CHECK((apply_h_eff(psi, phi, w) - expected).abs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("polarization form") {
  const GridPtr g = make_grid(16, 12.0);
  std::mt19937_64 rng(31);

  SUBCASE("round trip on k != 0") {
    for (InvKMode mode : {InvKMode::zero, InvKMode::cell_average}) {
      const InvKWeights w = inv_k_weights(g, mode);
      for (int trial = 0; trial < 20; ++trial) {
        const PhononField phi = random_phonon(g, rng);
        const PhononField back = from_polarization(to_polarization(phi, w), w);
        const double worst = (back.values.tail(phi.values.size() - 1) - phi.values.tail(phi.values.size() - 1))
                                 .abs()
                                 .maxCoeff();
        REQUIRE(worst <= 1e-10);
        if (mode == InvKMode::cell_average) REQUIRE(std::abs(back.values(0) - phi.values(0)) <= 1e-10);
      }
    }
  }

  SUBCASE("real even |k| phi gives Q = 0") {
    const InvKWeights w = inv_k_weights(g, InvKMode::cell_average);
    const PolarizationPair pq = to_polarization(gaussian_field(g), w);
    CHECK(pq.Q.abs().maxCoeff() <= 1e-12 * pq.P.abs().maxCoeff());
    CHECK(pq.P.abs().maxCoeff() > 0.0);
  }

  SUBCASE("potential equals |x|^{-1} * P") {
    for (InvKMode mode : {InvKMode::zero, InvKMode::cell_average}) {
      const InvKWeights w = inv_k_weights(g, mode);
      for (int trial = 0; trial < 10; ++trial) {
        const PhononField phi = random_phonon(g, rng);
        const RealField V = effective_potential(phi, w);
        const RealField C = coulomb_convolution(to_polarization(phi, w).P, w);
        REQUIRE((V - C).abs().maxCoeff() <= 1e-8 * V.abs().maxCoeff());
      }
    }
  }

  SUBCASE("Coulomb kernel is 4 pi / k^2 off the origin") {
    const InvKWeights w = inv_k_weights(g, InvKMode::cell_average);
    const RealField K = coulomb_kernel(w);
    for (Eigen::Index i = 1; i < K.size(); ++i) {
      REQUIRE(K(i) == doctest::Approx(4 * pi / g->k_squared()(i)).epsilon(1e-14));
    }
  }

  SUBCASE("mismatched pair is rejected") {
    const InvKWeights w = inv_k_weights(g, InvKMode::cell_average);
    PolarizationPair bad{g, RealField::Zero(10), RealField::Zero(10)};
    CHECK_THROWS_AS(from_polarization(bad, w), ValidationError);
  }
}

TEST_CASE("auxiliary g functions") {
  const GridPtr g = make_grid(16, 12.0);
  const InvKWeights w = inv_k_weights(g, InvKMode::cell_average);
  std::mt19937_64 rng(37);

  SUBCASE("equal fields give zero") {
    const PhononField phi = random_phonon(g, rng);
    CHECK(g_pair(phi, phi, w).sup_norm == 0.0);
  }

  SUBCASE("antisymmetry and agreement with g_inst") {
    const PhononField a = random_phonon(g, rng);
    const PhononField b = random_phonon(g, rng);
    const AuxiliaryFunction ab = g_pair(a, b, w);
    const AuxiliaryFunction ba = g_pair(b, a, w);
    CHECK((ab.values + ba.values).abs().maxCoeff() <= 1e-14 * ab.sup_norm);
    const AuxiliaryFunction inst = g_inst({g, b.values - a.values}, w);
    CHECK((inst.values - ab.values).abs().maxCoeff() <= 1e-12 * ab.sup_norm);
  }

  SUBCASE("Cauchy-Schwarz bound with the lattice constant") {
    const double C = g_bound_constant(w);
    // Continuum value over the cube |k_j| <= 2 pi by adaptive quadrature, frozen;
    // the lattice sum differs through the singular origin cell.
    const GridPtr ref = make_grid(32, 16.0);
    CHECK(std::abs(g_bound_constant(inv_k_weights(ref, InvKMode::cell_average)) - 4.252861521343942) <= 0.05 * 4.25);
    for (int trial = 0; trial < 50; ++trial) {
      const PhononField a = random_phonon(g, rng);
      const PhononField b = random_phonon(g, rng);
      const double sup = g_pair(a, b, w).sup_norm;
      REQUIRE(sup <= C * weighted_norm({g, b.values - a.values}, 1) * (1 + 1e-12));
    }
  }
}

TEST_CASE("coupling diagnostics") {
  const GridPtr g = make_grid(32, 16.0);
  const InvKWeights w = inv_k_weights(g, InvKMode::cell_average);
  const WaveFunction psi = unit_gaussian(g);

  SUBCASE("zero field") {
    const CouplingDiagnostics d = coupling_diagnostics(psi, zero_field(g), w);
    CHECK(d.hls_ratio == 0.0);
    CHECK(d.sup_ratio == 0.0);
    CHECK(d.gradient_ratio == 0.0);
    CHECK(d.potential_l6 == 0.0);
  }

  SUBCASE("ratios are homogeneous in the field scale") {
    const CouplingDiagnostics base = coupling_diagnostics(psi, gaussian_field(g), w);
    for (double lambda : {0.01, 0.5, 3.0, 100.0}) {
      const CouplingDiagnostics d = coupling_diagnostics(psi, gaussian_field(g, lambda), w);
      CHECK(std::abs(d.hls_ratio - base.hls_ratio) <= 1e-10 * base.hls_ratio);
      CHECK(std::abs(d.sup_ratio - base.sup_ratio) <= 1e-10 * base.sup_ratio);
      CHECK(std::abs(d.gradient_ratio - base.gradient_ratio) <= 1e-10 * base.gradient_ratio);
    }
  }

  SUBCASE("sigma over H1 ratio for the unit Gaussian") {
    // ||sigma||_(1)^2 = 4 pi int (1 + k^2) e^{-k^2/2} dk and ||psi||_{H^1}^2 = 5/2, frozen.
    const double continuum = 2.2449666328547453;
    const CouplingDiagnostics d = coupling_diagnostics(psi, zero_field(g), w);
    CHECK(d.psi_h1_squared == doctest::Approx(2.5).epsilon(1e-10));
    CHECK(std::isfinite(d.sigma_h2_ratio));
    // The 1/k^2 integrand makes the lattice sum first order in the k spacing:
    // a few percent at L = 16, halving when L doubles.
    const double err16 = std::abs(d.sigma_h1_ratio - continuum);
    CHECK(err16 <= 3e-2 * continuum);
    const GridPtr big = make_grid(64, 32.0);
    const CouplingDiagnostics d32 =
        coupling_diagnostics(unit_gaussian(big), zero_field(big), inv_k_weights(big, InvKMode::cell_average));
    const double err32 = std::abs(d32.sigma_h1_ratio - continuum);
    CHECK(err32 <= 0.6 * err16);
  }

  SUBCASE("spectral derivative of a Gaussian") {
    RealField f(static_cast<Eigen::Index>(g->size()));
    RealField exact(static_cast<Eigen::Index>(g->size()));
    for (std::size_t i = 0; i < g->size(); ++i) {
      const Eigen::Vector3d x = g->position(i);
      f(static_cast<Eigen::Index>(i)) = std::exp(-0.5 * x.squaredNorm());
      exact(static_cast<Eigen::Index>(i)) = -x(1) * std::exp(-0.5 * x.squaredNorm());
    }
    CHECK((spectral_derivative(*g, f, 1) - exact).abs().maxCoeff() <= 1e-8);
    CHECK_THROWS_AS(spectral_derivative(*g, f, 3), ValidationError);
  }
}
