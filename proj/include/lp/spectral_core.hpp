#pragma once

// Periodic N^3 box standing in for R^3, its dual Fourier lattice, and the
// transform pair used by every coupling functional:
//
//   fourier(f)(k)      = sum_x f(x) e^{-ik.x} dx
//   inverse(g)(x)      = (2 pi)^{-3} sum_k g(k) e^{ik.x} dk
//
// Spatial points are x_j = (j - n/2) h, so the origin sits on a grid node.
// Lattice fields are stored in FFT index order. Linear layout is
// i = ix + n (iy + n iz) for both, x fastest.

#include <Eigen/Core>

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>

namespace lp {

using Complex = std::complex<double>;
using ComplexField = Eigen::ArrayXcd;
using RealField = Eigen::ArrayXd;

class SpatialGrid;
using GridPtr = std::shared_ptr<const SpatialGrid>;

class SpatialGrid {
 public:
  SpatialGrid(int n, double box_length);
  ~SpatialGrid();
  SpatialGrid(const SpatialGrid&) = delete;
  SpatialGrid& operator=(const SpatialGrid&) = delete;

  int n() const { return n_; }
  double box_length() const { return length_; }
  double spacing() const { return length_ / n_; }
  /// Spatial quadrature weight h^3.
  double dx() const { return dx_; }
  /// Fourier quadrature weight (2 pi / L)^3.
  double dk() const { return dk_; }
  /// Lattice spacing 2 pi / L of the dual lattice.
  double k_unit() const { return k_unit_; }
  std::size_t size() const { return size_; }

  double coordinate(int j) const { return (j - n_ / 2) * spacing(); }
  /// Signed lattice integer m in {-n/2, ..., n/2 - 1} at FFT index j.
  int lattice_integer(int j) const { return j < n_ / 2 ? j : j - n_; }
  double wavenumber(int j) const { return k_unit_ * lattice_integer(j); }

  std::size_t index(int ix, int iy, int iz) const {
    return static_cast<std::size_t>(ix) +
           static_cast<std::size_t>(n_) * (static_cast<std::size_t>(iy) +
                                            static_cast<std::size_t>(n_) * iz);
  }
  std::array<int, 3> unpack(std::size_t i) const;

  Eigen::Vector3d position(std::size_t i) const;
  Eigen::Vector3d wavevector(std::size_t i) const;

  const RealField& k_squared() const { return k2_; }
  /// (-1)^{m_x + m_y + m_z}: the phase relating the centred spatial grid to a plain DFT.
  const RealField& parity() const { return parity_; }
  /// Component j of the wavevector at every lattice point.
  const RealField& k_component(int axis) const { return kcomp_[axis]; }

  /// Lattice index of -k (index reflection; the Nyquist plane maps to itself).
  std::size_t reflected(std::size_t i) const;

  bool same_as(const SpatialGrid& other) const {
    return n_ == other.n_ && length_ == other.length_;
  }

  /// Unnormalised in-place DFTs: forward uses e^{-2 pi i m j / n}, backward e^{+...}.
  void dft_forward(ComplexField& data) const;
  void dft_backward(ComplexField& data) const;

 private:
  struct Plans;
  int n_;
  double length_;
  double dx_;
  double dk_;
  double k_unit_;
  std::size_t size_;
  RealField k2_;
  RealField parity_;
  std::array<RealField, 3> kcomp_;
  std::unique_ptr<Plans> plans_;
};

GridPtr make_grid(int n, double box_length);

void require_same_grid(const SpatialGrid& a, const SpatialGrid& b, const char* where);

/// fourier(f)(k) = sum_x f(x) e^{-ik.x} dx.
ComplexField fourier(const SpatialGrid& grid, const ComplexField& f);
/// inverse(g)(x) = (2 pi)^{-3} sum_k g(k) e^{ik.x} dk.
ComplexField inverse_fourier(const SpatialGrid& grid, const ComplexField& g);

/// Plain sums over the lattice with the opposite sign conventions, used by the
/// couplings: sum_k g(k) e^{-ik.x} dk and sum_k g(k) e^{+ik.x} dk.
ComplexField lattice_sum_minus(const SpatialGrid& grid, const ComplexField& g);
ComplexField lattice_sum_plus(const SpatialGrid& grid, const ComplexField& g);

struct WaveFunction {
  GridPtr grid;
  ComplexField values;
};

struct PhononField {
  GridPtr grid;
  ComplexField values;
};

WaveFunction zero_wavefunction(GridPtr grid);
PhononField zero_field(GridPtr grid);

Complex inner_spatial(const SpatialGrid& grid, const ComplexField& a, const ComplexField& b);
Complex inner_fourier(const SpatialGrid& grid, const ComplexField& a, const ComplexField& b);

double norm(const WaveFunction& psi);
double norm(const PhononField& phi);
/// ||phi||_{L^2_(m)} = (sum_k (1+k^2)^m |phi(k)|^2 dk)^{1/2}, m in {0,1,2,3}.
double weighted_norm(const PhononField& phi, int m);

/// Discrete Sobolev norm ||psi||_{H^s} = (sum_k (1+k^2)^s |psi^(k)|^2 dk / (2 pi)^3)^{1/2}.
double sobolev_norm(const WaveFunction& psi, int s);

enum class InvKMode { zero, cell_average };

std::string to_string(InvKMode mode);
InvKMode parse_inv_k_mode(const std::string& text);

/// Lattice table approximating 1/|k|. w(k) = 1/|k| away from the origin;
/// w(0) is 0 (mode zero) or the average of 1/|k| over the origin's cell.
struct InvKWeights {
  GridPtr grid;
  InvKMode mode = InvKMode::cell_average;
  RealField w;
  /// Pointwise inverse of w where w > 0, else 0 (|k| with the same rule at the origin).
  RealField inverse;
};

InvKWeights inv_k_weights(GridPtr grid, InvKMode mode);

/// Integral of 1/|u| over the unit cube [-1/2, 1/2]^3 (closed form).
double unit_cube_inverse_radius_integral();

/// Largest |f| on the outer faces of the box divided by max |f|.
double boundary_ratio(const SpatialGrid& grid, const ComplexField& f);
double boundary_ratio(const SpatialGrid& grid, const RealField& f);

/// Runtime diagnostics that are not errors go through this sink (stderr by default).
void set_warning_sink(std::function<void(const std::string&)> sink);
void warn(const std::string& message);

}  // namespace lp
