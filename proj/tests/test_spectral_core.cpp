#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lp/errors.hpp"
#include "lp/spectral_core.hpp"
#include "support.hpp"

#include <cmath>
#include <numbers>

using namespace lp;
using lp::testing::random_field;

namespace {

constexpr double pi = std::numbers::pi;

double parseval_defect(const SpatialGrid& grid, const ComplexField& f) {
  const double lhs = f.abs2().sum() * grid.dx();
  const double rhs = fourier(grid, f).abs2().sum() * grid.dk() / std::pow(2 * pi, 3);
  return std::abs(lhs - rhs) / lhs;
}

}  // namespace

TEST_CASE("grid construction and quadrature weights") {
  const GridPtr g = make_grid(8, 10.0);
  CHECK(g->spacing() == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(g->dx() == doctest::Approx(1.25 * 1.25 * 1.25).epsilon(1e-15));
  CHECK(g->dk() == doctest::Approx(std::pow(2 * pi / 10.0, 3)).epsilon(1e-15));
  CHECK(g->size() == 512u);
  // The origin sits on a node and the k lattice runs over -n/2 .. n/2-1.
  CHECK(g->coordinate(4) == 0.0);
  CHECK(g->lattice_integer(5) == -3);
  CHECK(g->wavenumber(1) == doctest::Approx(2 * pi / 10.0));
}

TEST_CASE("grid rejects bad shapes") {
  CHECK_THROWS_AS(make_grid(7, 10.0), ValidationError);
  CHECK_THROWS_AS(make_grid(4, 10.0), ValidationError);
  CHECK_THROWS_AS(make_grid(12, 10.0), ValidationError);
  CHECK_THROWS_AS(make_grid(8, 0.0), ValidationError);
  CHECK_THROWS_AS(make_grid(8, -1.0), ValidationError);
  CHECK_THROWS_AS(make_grid(8, std::nan("")), ValidationError);
}

TEST_CASE("index reflection maps k to -k") {
  const GridPtr g = make_grid(8, 6.0);
  for (std::size_t i = 0; i < g->size(); ++i) {
    const auto [ix, iy, iz] = g->unpack(i);
    REQUIRE(g->index(ix, iy, iz) == i);
    const Eigen::Vector3d k = g->wavevector(i);
    const Eigen::Vector3d kr = g->wavevector(g->reflected(i));
    for (int a = 0; a < 3; ++a) {
      // Nyquist components map to themselves.
      const bool nyquist = g->unpack(i)[a] == 4;
      CHECK(kr(a) == doctest::Approx(nyquist ? k(a) : -k(a)));
    }
  }
}

TEST_CASE("transforms of the zero field vanish") {
  const GridPtr g = make_grid(8, 10.0);
  const ComplexField z = ComplexField::Zero(static_cast<Eigen::Index>(g->size()));
  CHECK(fourier(*g, z).abs().maxCoeff() == 0.0);
  CHECK(inverse_fourier(*g, z).abs().maxCoeff() == 0.0);
}

TEST_CASE("Parseval and round trips on random fields") {
  std::mt19937_64 rng(2024);
  for (int n : {8, 16, 32}) {
    const GridPtr g = make_grid(n, 12.0);
    double worst_parseval = 0.0;
    double worst_trip = 0.0;
    double worst_back = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const ComplexField f = random_field(g->size(), rng);
      worst_parseval = std::max(worst_parseval, parseval_defect(*g, f));
      const ComplexField back = inverse_fourier(*g, fourier(*g, f));
      worst_trip = std::max(worst_trip, (back - f).abs().maxCoeff() / f.abs().maxCoeff());
      const ComplexField fwd = fourier(*g, inverse_fourier(*g, f));
      worst_back = std::max(worst_back, (fwd - f).abs().maxCoeff() / f.abs().maxCoeff());
    }
    INFO("n = " << n);
    CHECK(worst_parseval <= 1e-12);
    CHECK(worst_trip <= 1e-12);
    CHECK(worst_back <= 1e-12);
  }
}

TEST_CASE("transforms reject fields of the wrong size") {
  const GridPtr g = make_grid(8, 10.0);
  const ComplexField f = ComplexField::Zero(10);
  CHECK_THROWS_AS(fourier(*g, f), ValidationError);
  CHECK_THROWS_AS(inverse_fourier(*g, f), ValidationError);
}

TEST_CASE("on-lattice plane wave transforms to a single spike of height L^3") {
  const double L = 10.0;
  const GridPtr g = make_grid(16, L);
  const std::size_t target = g->index(3, 15, 1);  // m = (3, -1, 1)
  const Eigen::Vector3d k0 = g->wavevector(target);
  ComplexField f(static_cast<Eigen::Index>(g->size()));
  for (std::size_t i = 0; i < g->size(); ++i) {
    f(static_cast<Eigen::Index>(i)) = std::exp(Complex(0.0, k0.dot(g->position(i))));
  }
  ComplexField hat = fourier(*g, f);
  CHECK(std::abs(hat(static_cast<Eigen::Index>(target)) - L * L * L) <= 1e-9 * L * L * L);
  hat(static_cast<Eigen::Index>(target)) = 0.0;
  CHECK(hat.abs().maxCoeff() <= 1e-9 * L * L * L);
}

TEST_CASE("Gaussian transform matches the radial quadrature oracle") {
  // L = 8 pi puts |k| = 0.5, 1, 2, 3, 4 on the lattice axis (k unit 1/4).
  const GridPtr g = make_grid(64, 8 * pi);
  ComplexField f(static_cast<Eigen::Index>(g->size()));
  for (std::size_t i = 0; i < g->size(); ++i) {
    f(static_cast<Eigen::Index>(i)) = std::exp(-0.5 * g->position(i).squaredNorm());
  }
  const ComplexField hat = fourier(*g, f);

  // 4 pi int_0^inf r^2 e^{-r^2/2} sinc(kr) dr by adaptive quadrature (scipy), frozen.
  struct Oracle {
    int m;
    double value;
  };
  const Oracle oracle[] = {{2, 13.898981994015573},
                           {4, 9.552621310595672},
                           {8, 2.1314779228705154},
                           {12, 0.17496236236569748},
                           {16, 0.005283405540831533}};
  for (const auto& o : oracle) {
    const Complex v = hat(static_cast<Eigen::Index>(g->index(o.m, 0, 0)));
    INFO("m = " << o.m);
    CHECK(std::abs(v - o.value) <= 1e-6 * o.value);
  }

  // Every lattice point with |k| <= 4 against the closed form.
  double worst = 0.0;
  for (std::size_t i = 0; i < g->size(); ++i) {
    const double k2 = g->k_squared()(static_cast<Eigen::Index>(i));
    if (k2 > 16.0) continue;
    const double exact = std::pow(2 * pi, 1.5) * std::exp(-0.5 * k2);
    worst = std::max(worst, std::abs(hat(static_cast<Eigen::Index>(i)) - exact) / exact);
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("weighted norms") {
  const GridPtr g = make_grid(16, 10.0);
  const auto sz = static_cast<Eigen::Index>(g->size());

  SUBCASE("zero field") {
    const PhononField z = zero_field(g);
    for (int m = 0; m <= 3; ++m) CHECK(weighted_norm(z, m) == 0.0);
  }

  SUBCASE("single lattice point") {
    PhononField phi{g, ComplexField::Zero(sz)};
    const std::size_t at = g->index(2, 1, 15);
    phi.values(static_cast<Eigen::Index>(at)) = 1.0;
    const double k2 = g->k_squared()(static_cast<Eigen::Index>(at));
    for (int m = 0; m <= 3; ++m) {
      CHECK(weighted_norm(phi, m) == doctest::Approx(std::sqrt(std::pow(1 + k2, m) * g->dk())).epsilon(1e-14));
    }
  }

  SUBCASE("order out of range") {
    const PhononField z = zero_field(g);
    CHECK_THROWS_AS(weighted_norm(z, 4), ValidationError);
    CHECK_THROWS_AS(weighted_norm(z, -1), ValidationError);
  }

  SUBCASE("monotone in the order") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
      const PhononField phi{g, random_field(g->size(), rng)};
      for (int m = 0; m < 3; ++m) CHECK(weighted_norm(phi, m) <= weighted_norm(phi, m + 1));
    }
  }
}

TEST_CASE("weighted norm of e^{-k^2/2} approaches the continuum value") {
  // sqrt(4 pi int k^2 e^{-k^2} dk) = pi^{3/4} by quadrature, frozen.
  const double continuum = 2.359730492414697;
  const GridPtr g = make_grid(32, 16.0);
  const PhononField phi{g, (-0.5 * g->k_squared()).exp().cast<Complex>()};
  CHECK(weighted_norm(phi, 0) == doctest::Approx(continuum).epsilon(1e-10));
  CHECK(norm(phi) == doctest::Approx(weighted_norm(phi, 0)).epsilon(1e-15));
}

TEST_CASE("inverse-|k| weights") {
  const double L = 10.0;
  const GridPtr g = make_grid(16, L);
  const InvKWeights zero = inv_k_weights(g, InvKMode::zero);
  const InvKWeights cell = inv_k_weights(g, InvKMode::cell_average);

  CHECK(zero.w(0) == 0.0);
  CHECK(zero.inverse(0) == 0.0);
  const auto first = static_cast<Eigen::Index>(g->index(1, 0, 0));
  CHECK(cell.w(first) == doctest::Approx(L / (2 * pi)).epsilon(1e-15));

  // (1/dk) int_cell |k|^{-1} dk by adaptive 3D quadrature (scipy tplquad), frozen.
  CHECK(cell.w(0) == doctest::Approx(3.78801077418474).epsilon(1e-12));
  CHECK(unit_cube_inverse_radius_integral() == doctest::Approx(2.380077363979553).epsilon(1e-13));

  CHECK(cell.w(0) > 0.0);
  for (Eigen::Index i = 1; i < cell.w.size(); ++i) {
    REQUIRE(cell.w(i) == zero.w(i));
    REQUIRE(cell.w(i) == doctest::Approx(1.0 / std::sqrt(g->k_squared()(i))).epsilon(1e-15));
  }
}

TEST_CASE("inverse-|k| mode parsing") {
  CHECK(parse_inv_k_mode("zero") == InvKMode::zero);
  CHECK(parse_inv_k_mode("cell_average") == InvKMode::cell_average);
  CHECK(to_string(parse_inv_k_mode("cell_average")) == "cell_average");
  CHECK_THROWS_AS(parse_inv_k_mode("average"), ValidationError);
}

TEST_CASE("norms and Sobolev norms") {
  const GridPtr g = make_grid(32, 16.0);
  WaveFunction psi{g, ComplexField(static_cast<Eigen::Index>(g->size()))};
  for (std::size_t i = 0; i < g->size(); ++i) {
    psi.values(static_cast<Eigen::Index>(i)) = std::pow(pi, -0.75) * std::exp(-0.5 * g->position(i).squaredNorm());
  }
  CHECK(norm(psi) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sobolev_norm(psi, 0) == doctest::Approx(1.0).epsilon(1e-12));
  // ||psi||_{H^1}^2 = 1 + ||grad psi||^2 = 5/2 for the unit Gaussian.
  CHECK(std::pow(sobolev_norm(psi, 1), 2) == doctest::Approx(2.5).epsilon(1e-10));
}

TEST_CASE("boundary diagnostic") {
  const GridPtr g = make_grid(16, 16.0);
  ComplexField wide(static_cast<Eigen::Index>(g->size()));
  ComplexField narrow(static_cast<Eigen::Index>(g->size()));
  for (std::size_t i = 0; i < g->size(); ++i) {
    const double r2 = g->position(i).squaredNorm();
    wide(static_cast<Eigen::Index>(i)) = std::exp(-r2 / 50.0);
    narrow(static_cast<Eigen::Index>(i)) = std::exp(-r2);
  }
  CHECK(boundary_ratio(*g, narrow) < 1e-8);
  CHECK(boundary_ratio(*g, wide) > 1e-2);
}

TEST_CASE("warning sink can be redirected") {
  std::string seen;
  set_warning_sink([&](const std::string& m) { seen = m; });
  warn("hello");
  CHECK(seen == "hello");
  set_warning_sink(nullptr);
  warn("dropped");
  CHECK(seen == "hello");
}
