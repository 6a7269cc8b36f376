#include "lp/spectral_core.hpp"

#include "lp/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <iostream>
#include <mutex>
#include <numbers>
#include <string>

namespace lp {

namespace {

// FFTW planning is not thread-safe; execution of an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

std::function<void(const std::string&)>& sink() {
  static std::function<void(const std::string&)> s = [](const std::string& msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return s;
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

fftw_complex* as_fftw(ComplexField& data) {
  return reinterpret_cast<fftw_complex*>(data.data());
}

}  // namespace

struct SpatialGrid::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  explicit Plans(int n) {
    ComplexField scratch(static_cast<Eigen::Index>(n) * n * n);
    std::lock_guard lock(planner_mutex());
    // ESTIMATE keeps plans (and hence round-off) identical from run to run.
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward = fftw_plan_dft_3d(n, n, n, as_fftw(scratch), as_fftw(scratch), FFTW_FORWARD, flags);
    backward = fftw_plan_dft_3d(n, n, n, as_fftw(scratch), as_fftw(scratch), FFTW_BACKWARD, flags);
    if (forward == nullptr || backward == nullptr) {
      throw NumericalError("FFTW planning failed");
    }
  }
  ~Plans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;
};

SpatialGrid::SpatialGrid(int n, double box_length) : n_(n), length_(box_length) {
  if (n % 2 != 0) throw ValidationError("grid: n must be even, got " + std::to_string(n));
  if (n < 8) throw ValidationError("grid: n must be at least 8, got " + std::to_string(n));
  if (!is_power_of_two(n)) {
    throw ValidationError("grid: n must be a power of two, got " + std::to_string(n));
  }
  if (!(box_length > 0.0) || !std::isfinite(box_length)) {
    throw ValidationError("grid: box length must be positive and finite");
  }
  const double h = length_ / n_;
  dx_ = h * h * h;
  k_unit_ = 2.0 * std::numbers::pi / length_;
  dk_ = k_unit_ * k_unit_ * k_unit_;
  size_ = static_cast<std::size_t>(n_) * n_ * n_;

  const auto sz = static_cast<Eigen::Index>(size_);
  k2_.resize(sz);
  parity_.resize(sz);
  for (auto& c : kcomp_) c.resize(sz);
  for (int iz = 0; iz < n_; ++iz) {
    for (int iy = 0; iy < n_; ++iy) {
      for (int ix = 0; ix < n_; ++ix) {
        const auto i = static_cast<Eigen::Index>(index(ix, iy, iz));
        const int mx = lattice_integer(ix);
        const int my = lattice_integer(iy);
        const int mz = lattice_integer(iz);
        kcomp_[0](i) = k_unit_ * mx;
        kcomp_[1](i) = k_unit_ * my;
        kcomp_[2](i) = k_unit_ * mz;
        k2_(i) = k_unit_ * k_unit_ * (double(mx) * mx + double(my) * my + double(mz) * mz);
        parity_(i) = ((mx + my + mz) % 2 == 0) ? 1.0 : -1.0;
      }
    }
  }
  plans_ = std::make_unique<Plans>(n_);
}

SpatialGrid::~SpatialGrid() = default;

std::array<int, 3> SpatialGrid::unpack(std::size_t i) const {
  const auto n = static_cast<std::size_t>(n_);
  return {static_cast<int>(i % n), static_cast<int>((i / n) % n), static_cast<int>(i / (n * n))};
}

Eigen::Vector3d SpatialGrid::position(std::size_t i) const {
  const auto [ix, iy, iz] = unpack(i);
  return {coordinate(ix), coordinate(iy), coordinate(iz)};
}

Eigen::Vector3d SpatialGrid::wavevector(std::size_t i) const {
  const auto [ix, iy, iz] = unpack(i);
  return {wavenumber(ix), wavenumber(iy), wavenumber(iz)};
}

std::size_t SpatialGrid::reflected(std::size_t i) const {
  const auto [ix, iy, iz] = unpack(i);
  auto r = [this](int j) { return (n_ - j) % n_; };
  return index(r(ix), r(iy), r(iz));
}

void SpatialGrid::dft_forward(ComplexField& data) const {
  if (static_cast<std::size_t>(data.size()) != size_) {
    throw ValidationError("dft: field size does not match grid");
  }
  fftw_execute_dft(plans_->forward, as_fftw(data), as_fftw(data));
}

void SpatialGrid::dft_backward(ComplexField& data) const {
  if (static_cast<std::size_t>(data.size()) != size_) {
    throw ValidationError("dft: field size does not match grid");
  }
  fftw_execute_dft(plans_->backward, as_fftw(data), as_fftw(data));
}

GridPtr make_grid(int n, double box_length) {
  return std::make_shared<const SpatialGrid>(n, box_length);
}

void require_same_grid(const SpatialGrid& a, const SpatialGrid& b, const char* where) {
  if (!a.same_as(b)) throw ValidationError(std::string(where) + ": grid mismatch");
}

ComplexField fourier(const SpatialGrid& grid, const ComplexField& f) {
  ComplexField out = f;
  grid.dft_forward(out);
  out *= grid.parity() * grid.dx();
  return out;
}

ComplexField inverse_fourier(const SpatialGrid& grid, const ComplexField& g) {
  if (static_cast<std::size_t>(g.size()) != grid.size()) {
    throw ValidationError("inverse_fourier: field size does not match grid");
  }
  ComplexField out = g * grid.parity();
  grid.dft_backward(out);
  const double L = grid.box_length();
  out /= L * L * L;
  return out;
}

ComplexField lattice_sum_minus(const SpatialGrid& grid, const ComplexField& g) {
  if (static_cast<std::size_t>(g.size()) != grid.size()) {
    throw ValidationError("lattice sum: field size does not match grid");
  }
  ComplexField out = g * grid.parity();
  grid.dft_forward(out);
  out *= grid.dk();
  return out;
}

ComplexField lattice_sum_plus(const SpatialGrid& grid, const ComplexField& g) {
  if (static_cast<std::size_t>(g.size()) != grid.size()) {
    throw ValidationError("lattice sum: field size does not match grid");
  }
  ComplexField out = g * grid.parity();
  grid.dft_backward(out);
  out *= grid.dk();
  return out;
}

WaveFunction zero_wavefunction(GridPtr grid) {
  const auto sz = static_cast<Eigen::Index>(grid->size());
  return {std::move(grid), ComplexField::Zero(sz)};
}

PhononField zero_field(GridPtr grid) {
  const auto sz = static_cast<Eigen::Index>(grid->size());
  return {std::move(grid), ComplexField::Zero(sz)};
}

Complex inner_spatial(const SpatialGrid& grid, const ComplexField& a, const ComplexField& b) {
  return (a.conjugate() * b).sum() * grid.dx();
}

Complex inner_fourier(const SpatialGrid& grid, const ComplexField& a, const ComplexField& b) {
  return (a.conjugate() * b).sum() * grid.dk();
}

double norm(const WaveFunction& psi) {
  return std::sqrt(psi.values.abs2().sum() * psi.grid->dx());
}

double norm(const PhononField& phi) {
  return std::sqrt(phi.values.abs2().sum() * phi.grid->dk());
}

double weighted_norm(const PhononField& phi, int m) {
  if (m < 0 || m > 3) {
    throw ValidationError("weighted_norm: m must be in 0..3, got " + std::to_string(m));
  }
  const RealField weight = (1.0 + phi.grid->k_squared()).pow(m);
  return std::sqrt((weight * phi.values.abs2()).sum() * phi.grid->dk());
}

double sobolev_norm(const WaveFunction& psi, int s) {
  const auto& grid = *psi.grid;
  const ComplexField hat = fourier(grid, psi.values);
  const RealField weight = (1.0 + grid.k_squared()).pow(s);
  const double two_pi_cubed = std::pow(2.0 * std::numbers::pi, 3);
  return std::sqrt((weight * hat.abs2()).sum() * grid.dk() / two_pi_cubed);
}

std::string to_string(InvKMode mode) {
  return mode == InvKMode::zero ? "zero" : "cell_average";
}

InvKMode parse_inv_k_mode(const std::string& text) {
  if (text == "zero") return InvKMode::zero;
  if (text == "cell_average") return InvKMode::cell_average;
  throw ValidationError("unknown inv-k mode '" + text + "' (expected zero or cell_average)");
}

double unit_cube_inverse_radius_integral() {
  // Over [0,1]^3 from a corner: (3/2) ln((sqrt3+1)/(sqrt3-1)) - pi/4. The
  // centred half-width cube is eight corner cubes of side 1/2.
  const double s3 = std::sqrt(3.0);
  const double corner = 1.5 * std::log((s3 + 1.0) / (s3 - 1.0)) - std::numbers::pi / 4.0;
  return 2.0 * corner;
}

InvKWeights inv_k_weights(GridPtr grid, InvKMode mode) {
  InvKWeights out;
  out.mode = mode;
  const auto& k2 = grid->k_squared();
  out.w = RealField::Zero(k2.size());
  out.inverse = RealField::Zero(k2.size());
  for (Eigen::Index i = 0; i < k2.size(); ++i) {
    if (k2(i) > 0.0) {
      const double k = std::sqrt(k2(i));
      out.w(i) = 1.0 / k;
      out.inverse(i) = k;
    }
  }
  if (mode == InvKMode::cell_average) {
    // (1/dk) * integral of 1/|k| over the cube of side c = 2 pi / L = c^2 I / c^3.
    out.w(0) = unit_cube_inverse_radius_integral() / grid->k_unit();
    out.inverse(0) = 1.0 / out.w(0);
  }
  out.grid = std::move(grid);
  return out;
}

namespace {

template <typename Magnitude>
double boundary_ratio_impl(const SpatialGrid& grid, Magnitude&& mag) {
  double face = 0.0;
  double peak = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = mag(static_cast<Eigen::Index>(i));
    peak = std::max(peak, v);
    const auto [ix, iy, iz] = grid.unpack(i);
    if (ix == 0 || iy == 0 || iz == 0) face = std::max(face, v);
  }
  return peak > 0.0 ? face / peak : 0.0;
}

}  // namespace

double boundary_ratio(const SpatialGrid& grid, const ComplexField& f) {
  return boundary_ratio_impl(grid, [&](Eigen::Index i) { return std::abs(f(i)); });
}

double boundary_ratio(const SpatialGrid& grid, const RealField& f) {
  return boundary_ratio_impl(grid, [&](Eigen::Index i) { return std::abs(f(i)); });
}

void set_warning_sink(std::function<void(const std::string&)> s) {
  std::lock_guard lock(sink_mutex());
  sink() = std::move(s);
}

void warn(const std::string& message) {
  std::lock_guard lock(sink_mutex());
  if (sink()) sink()(message);
}

}  // namespace lp
