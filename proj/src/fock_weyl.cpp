#include "lp/fock_weyl.hpp"

#include "lp/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace lp::fock {

namespace {

constexpr double kTailLimit = 1e-10;

Eigen::Index ipow(Eigen::Index base, int exp) {
  Eigen::Index out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

void require_amplitudes(const FockSpace& space, const Amplitudes& f, const char* where) {
  if (static_cast<int>(f.size()) != space.modes) {
    std::ostringstream msg;
    msg << where << ": expected " << space.modes << " amplitudes, got " << f.size();
    throw ValidationError(msg.str());
  }
}

// P(N > k) for N ~ Poisson(mu), summed from the tail side.
double poisson_tail(double mu, int k) {
  if (mu <= 0.0) return 0.0;
  if (k < 0) return 1.0;
  double log_term = -mu + (k + 1) * std::log(mu) - std::lgamma(k + 2.0);
  double term = std::exp(log_term);
  double sum = 0.0;
  for (int n = k + 1; n < k + 400; ++n) {
    sum += term;
    term *= mu / (n + 1);
    if (term < 1e-18 * sum) break;
  }
  return std::min(sum, 1.0);
}

Matrix sub_block(const Matrix& m, const std::vector<Eigen::Index>& levels) {
  const auto s = static_cast<Eigen::Index>(levels.size());
  Matrix out(s, s);
  for (Eigen::Index c = 0; c < s; ++c) {
    for (Eigen::Index r = 0; r < s; ++r) out(r, c) = m(levels[r], levels[c]);
  }
  return out;
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

Vector outer_product(const Vector& f, const Vector& g) {
  Vector out(f.size() * g.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) out.segment(i * g.size(), g.size()) = f(i) * g;
  return out;
}

Matrix as_matrix(const Vector& psi, Eigen::Index d1, Eigen::Index d2) {
  if (d1 <= 0 || d2 <= 0 || psi.size() != d1 * d2) {
    throw ValidationError("partial_trace: vector length must equal d1 * d2");
  }
  if (d1 * d2 > 10000) throw ValidationError("partial_trace: d1 * d2 exceeds 1e4");
  return Eigen::Map<const Matrix>(psi.data(), d2, d1).transpose();
}

}  // namespace

FockSpace make_fock_space(int modes, int cutoff, double alpha) {
  if (modes < 1 || modes > 4) throw ValidationError("fock space: mode count must be in 1..4");
  if (cutoff < 1 || cutoff > 24) throw ValidationError("fock space: cutoff must be in 1..24");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ValidationError("fock space: alpha must be positive");
  const Eigen::Index dim = ipow(cutoff + 1, modes);
  if (dim > 20000) {
    std::ostringstream msg;
    msg << "fock space: dimension " << dim << " exceeds 2e4";
    throw ValidationError(msg.str());
  }
  return {modes, cutoff, alpha, dim};
}

int occupation(const FockSpace& space, Eigen::Index index, int mode) {
  const Eigen::Index stride = ipow(space.cutoff + 1, mode);
  return static_cast<int>((index / stride) % (space.cutoff + 1));
}

std::vector<Eigen::Index> low_levels(const FockSpace& space, int max_level) {
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < space.dimension; ++i) {
    bool keep = true;
    for (int j = 0; j < space.modes && keep; ++j) keep = occupation(space, i, j) <= max_level;
    if (keep) out.push_back(i);
  }
  return out;
}

Ladder ladder(const FockSpace& space, int mode) {
  if (mode < 0 || mode >= space.modes) throw ValidationError("ladder: mode out of range");
  const Eigen::Index stride = ipow(space.cutoff + 1, mode);
  Matrix b = Matrix::Zero(space.dimension, space.dimension);
  for (Eigen::Index i = 0; i < space.dimension; ++i) {
    const int n = occupation(space, i, mode);
    if (n > 0) b(i - stride, i) = std::sqrt(static_cast<double>(n)) / space.alpha;
  }
  Matrix b_dag = b.adjoint();
  return {std::move(b), std::move(b_dag)};
}

Matrix weyl_generator(const FockSpace& space, const Amplitudes& f) {
  require_amplitudes(space, f, "weyl");
  Matrix gen = Matrix::Zero(space.dimension, space.dimension);
  for (int j = 0; j < space.modes; ++j) {
    if (f[j] == Complex(0.0)) continue;
    const Ladder l = ladder(space, j);
    gen += f[j] * l.b_dag - std::conj(f[j]) * l.b;
  }
  return gen;
}

TruncationGuard weyl_guard(const FockSpace& space, const Amplitudes& f) {
  require_amplitudes(space, f, "weyl");
  TruncationGuard g;
  g.amplitude_ratio = norm(f) / space.alpha;
  for (const Complex& fj : f) {
    const double mean = std::norm(fj) / (space.alpha * space.alpha);
    g.tail_mass = std::max(g.tail_mass, poisson_tail(mean, space.cutoff - 2));
  }
  g.ok = g.amplitude_ratio <= space.cutoff / 4.0 && g.tail_mass <= kTailLimit;
  return g;
}

Matrix weyl(const FockSpace& space, const Amplitudes& f) {
  const TruncationGuard g = weyl_guard(space, f);
  if (!g.ok) {
    std::ostringstream msg;
    msg << "weyl: truncation guard violated (alpha^-1 ||f|| = " << g.amplitude_ratio
        << ", occupation tail " << g.tail_mass << ", cutoff " << space.cutoff << ")";
    throw NumericalError(msg.str());
  }
  return weyl_generator(space, f).exp();
}

Vector vacuum(const FockSpace& space) {
  Vector v = Vector::Zero(space.dimension);
  v(0) = 1.0;
  return v;
}

Complex inner(const Amplitudes& f, const Amplitudes& g) {
  if (f.size() != g.size()) throw ValidationError("inner: amplitude lengths differ");
  Complex s(0.0);
  for (std::size_t j = 0; j < f.size(); ++j) s += std::conj(f[j]) * g[j];
  return s;
}

double norm(const Amplitudes& f) { return std::sqrt(inner(f, f).real()); }

double block_norm(const Matrix& m, const std::vector<Eigen::Index>& levels) {
  return spectral_norm(sub_block(m, levels));
}

double CommutationReport::max() const {
  return std::max({annihilation, creation, pair_annihilation, pair_creation});
}

namespace {

// Identities involving W are observed on levels <= cutoff - 2, but entries of
// the truncated exponential next to the top level carry O(1) edge errors that
// reach that block. Operators for checks are therefore built on a padded
// cutoff where the edge contribution to the observed block is negligible.
FockSpace padded_workspace(const FockSpace& space, const std::vector<Amplitudes>& amps) {
  double peak = 0.0;
  for (const auto& f : amps) {
    for (const Complex& fj : f) peak = std::max(peak, std::abs(fj) / space.alpha);
  }
  // Empirical: the observed-block error falls by roughly four decades per two
  // padding levels at |f|/alpha = 0.3, reaching round-off by eight.
  const int pad = 8 + static_cast<int>(std::ceil(2.0 * peak * peak * space.cutoff));
  FockSpace work{space.modes, space.cutoff + pad, space.alpha, ipow(space.cutoff + pad + 1, space.modes)};
  if (work.dimension > 20000) {
    std::ostringstream msg;
    msg << "fock checks: padded workspace dimension " << work.dimension << " exceeds 2e4";
    throw ValidationError(msg.str());
  }
  return work;
}

// Basis indices of the padded space whose occupations are all <= max_level.
std::vector<Eigen::Index> observed_levels(const FockSpace& work, int max_level) {
  return low_levels(work, max_level);
}

void require_guard(const FockSpace& space, const Amplitudes& f, const char* where) {
  const TruncationGuard g = weyl_guard(space, f);
  if (!g.ok) {
    std::ostringstream msg;
    msg << where << ": truncation guard violated (alpha^-1 ||f|| = " << g.amplitude_ratio
        << ", occupation tail " << g.tail_mass << ")";
    throw NumericalError(msg.str());
  }
}
}  // namespace

CommutationReport check_commutation(const FockSpace& space, const Amplitudes& f,
                                    const Amplitudes& g) {
  require_guard(space, f, "check_commutation");
  require_guard(space, g, "check_commutation");
  const FockSpace work = padded_workspace(space, {f, g});
  const Matrix Wf = weyl(work, f);
  const Matrix Wg = weyl(work, g);
  const Matrix pair = Wf.adjoint() * Wg;
  const auto levels = observed_levels(work, space.cutoff - 2);
  const double inv_a2 = 1.0 / (space.alpha * space.alpha);
  const Matrix I = Matrix::Identity(work.dimension, work.dimension);

  CommutationReport r;
  for (int k = 0; k < space.modes; ++k) {
    const Ladder l = ladder(work, k);
    const Matrix d1 = l.b * Wf - Wf * (l.b + inv_a2 * f[k] * I);
    const Matrix d2 = l.b_dag * Wf - Wf * (l.b_dag + inv_a2 * std::conj(f[k]) * I);
    const Matrix d3 = (l.b * pair - pair * l.b) - inv_a2 * (g[k] - f[k]) * pair;
    const Matrix d4 =
        (l.b_dag * pair - pair * l.b_dag) + inv_a2 * (std::conj(f[k]) - std::conj(g[k])) * pair;
    r.annihilation = std::max(r.annihilation, block_norm(d1, levels));
    r.creation = std::max(r.creation, block_norm(d2, levels));
    r.pair_annihilation = std::max(r.pair_annihilation, block_norm(d3, levels));
    r.pair_creation = std::max(r.pair_creation, block_norm(d4, levels));
  }
  return r;
}

double pair_annihilation_deviation_flipped(const FockSpace& space, const Amplitudes& f,
                                           const Amplitudes& g) {
  require_guard(space, f, "pair_annihilation_deviation_flipped");
  require_guard(space, g, "pair_annihilation_deviation_flipped");
  const FockSpace work = padded_workspace(space, {f, g});
  const Matrix pair = weyl(work, f).adjoint() * weyl(work, g);
  const auto levels = observed_levels(work, space.cutoff - 2);
  const double inv_a2 = 1.0 / (space.alpha * space.alpha);
  double worst = 0.0;
  for (int k = 0; k < space.modes; ++k) {
    const Ladder l = ladder(work, k);
    const Matrix d = (l.b * pair - pair * l.b) - inv_a2 * (f[k] - g[k]) * pair;
    worst = std::max(worst, block_norm(d, levels));
  }
  return worst;
}

double check_weyl_derivative(const FockSpace& space, const AmplitudePath& path, double t,
                             double delta, const AmplitudePath& velocity) {
  if (!path) throw ValidationError("check_weyl_derivative: path is empty");
  if (!(delta > 0.0)) throw ValidationError("check_weyl_derivative: delta must be positive");
  const Amplitudes f = path(t);
  const Amplitudes fp_plus = path(t + delta);
  const Amplitudes fp_minus = path(t - delta);
  Amplitudes df;
  if (velocity) {
    df = velocity(t);
  } else {
    df.resize(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) df[j] = (fp_plus[j] - fp_minus[j]) / (2.0 * delta);
  }
  require_amplitudes(space, df, "check_weyl_derivative");

  for (const auto* a : {&f, &fp_plus, &fp_minus}) require_guard(space, *a, "check_weyl_derivative");
  const FockSpace work = padded_workspace(space, {f, fp_plus, fp_minus, df});
  const Matrix W = weyl(work, f);
  const Matrix fd = (weyl(work, fp_plus) - weyl(work, fp_minus)) / (2.0 * delta);
  const Complex c = 0.5 / (space.alpha * space.alpha) * (inner(f, df) - inner(df, f));
  const Matrix rhs = c * W + W * weyl_generator(work, df);
  return block_norm(fd - rhs, observed_levels(work, space.cutoff - 2));
}

Complex coherent_overlap(const Amplitudes& f, const Amplitudes& g, double alpha) {
  if (!(alpha > 0.0)) throw ValidationError("coherent_overlap: alpha must be positive");
  const double inv_a2 = 1.0 / (alpha * alpha);
  Amplitudes diff(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) diff[j] = f[j] - g.at(j);
  const double d2 = inner(diff, diff).real();
  return std::exp(Complex(-0.5 * inv_a2 * d2, inv_a2 * inner(g, f).imag()));
}

Complex coherent_overlap_truncated(const FockSpace& space, const Amplitudes& f,
                                   const Amplitudes& g) {
  const Vector omega = vacuum(space);
  const Vector vf = weyl(space, f) * omega;
  const Vector vg = weyl(space, g) * omega;
  return vg.dot(vf);
}

double trace_distance_rank_one(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw ValidationError("trace_distance_rank_one: dimensions differ");
  if (std::abs(a.norm() - 1.0) > 1e-10 || std::abs(b.norm() - 1.0) > 1e-10) {
    throw ValidationError("trace_distance_rank_one: inputs must be normalised");
  }
  const double overlap = std::norm(a.dot(b));
  return 2.0 * std::sqrt(std::max(0.0, 1.0 - overlap));
}

double trace_norm_hermitian(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

double trace_norm(const Matrix& m) {
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues().sum();
}

Matrix partial_trace(const Vector& psi, Eigen::Index d1, Eigen::Index d2, TraceSide traced) {
  const Matrix M = as_matrix(psi, d1, d2);
  if (traced == TraceSide::second) return M * M.adjoint();
  return M.transpose() * M.conjugate();
}

Matrix partial_trace_outer(const Vector& psi1, const Vector& psi2, Eigen::Index d1,
                           Eigen::Index d2) {
  return as_matrix(psi1, d1, d2) * as_matrix(psi2, d1, d2).adjoint();
}

DensityCheck inspect_density(const Matrix& rho) {
  DensityCheck c;
  c.hermiticity = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
  c.min_eigenvalue = es.eigenvalues().minCoeff();
  c.trace_error = std::abs(rho.trace() - Complex(1.0));
  return c;
}

namespace {

struct LemmaNorms {
  double f, g, phi, g_phi, f_phi;
};

LemmaNorms lemma_norms(const Vector& f, const Vector& g, const Vector& Phi) {
  const Matrix M = as_matrix(Phi, f.size(), g.size());
  return {f.norm(), g.norm(), Phi.norm(), (M * g.conjugate()).norm(),
          (M.transpose() * f.conjugate()).norm()};
}

}  // namespace

double minimal_lemma_constant(const Vector& f, const Vector& g, const Vector& Phi, double eps) {
  if (!(eps > 0.0)) throw ValidationError("minimal_lemma_constant: eps must be positive");
  const LemmaNorms n = lemma_norms(f, g, Phi);
  return std::max({n.f, n.g, n.phi / eps, n.g_phi / (eps * eps), n.f_phi / (eps * eps)});
}

ReducedLemmaReport check_reduced_lemma(const Vector& f, const Vector& g, const Vector& Phi,
                                       double C, double eps) {
  if (!(C > 0.0) || !(eps > 0.0)) throw ValidationError("check_reduced_lemma: C and eps must be positive");
  const Eigen::Index d1 = f.size();
  const Eigen::Index d2 = g.size();
  const LemmaNorms n = lemma_norms(f, g, Phi);
  ReducedLemmaReport r;
  r.bound = 3.0 * C * C * eps * eps;

  const double slack = 1.0 + 1e-12;
  std::ostringstream why;
  if (n.f > C * slack) why << "||f|| = " << n.f << " > C; ";
  if (n.g > C * slack) why << "||g|| = " << n.g << " > C; ";
  if (n.phi > C * eps * slack) why << "||Phi|| = " << n.phi << " > C eps; ";
  if (n.g_phi > C * eps * eps * slack) why << "||<g,Phi>_2|| = " << n.g_phi << " > C eps^2; ";
  if (n.f_phi > C * eps * eps * slack) why << "||<f,Phi>_1|| = " << n.f_phi << " > C eps^2; ";

  const Vector psi = outer_product(f, g) + Phi;
  const Matrix gamma1 = partial_trace(psi, d1, d2, TraceSide::second);
  const Matrix gamma2 = partial_trace(psi, d1, d2, TraceSide::first);
  r.first_distance = trace_norm_hermitian(gamma1 - g.squaredNorm() * (f * f.adjoint()));
  r.second_distance = trace_norm_hermitian(gamma2 - f.squaredNorm() * (g * g.adjoint()));

  if (!why.str().empty()) {
    r.status = ReducedLemmaReport::Status::hypothesis_violated;
    r.detail = why.str();
  } else if (r.first_distance > r.bound * slack || r.second_distance > r.bound * slack) {
    r.status = ReducedLemmaReport::Status::bound_violated;
    std::ostringstream msg;
    msg << "distances " << r.first_distance << ", " << r.second_distance << " exceed " << r.bound;
    r.detail = msg.str();
  }
  return r;
}

TraceInequality trace_inequality(const Vector& psi1, const Vector& psi2, Eigen::Index d1,
                                 Eigen::Index d2) {
  return {trace_norm(partial_trace_outer(psi1, psi2, d1, d2)), psi1.norm() * psi2.norm()};
}

double coherent_rdm_distance(double field_distance, double alpha) {
  const double x = alpha * alpha * field_distance * field_distance;
  return 2.0 * std::sqrt(-std::expm1(-x));
}

double coherent_rdm_distance(const PhononField& phi_a, const PhononField& phi_b, double alpha) {
  require_same_grid(*phi_a.grid, *phi_b.grid, "coherent_rdm_distance");
  const PhononField diff{phi_a.grid, phi_a.values - phi_b.values};
  return coherent_rdm_distance(lp::norm(diff), alpha);
}

Amplitudes mode_amplitudes(const PhononField& phi, const std::vector<std::size_t>& lattice_indices) {
  const double scale = std::sqrt(phi.grid->dk());
  Amplitudes out;
  out.reserve(lattice_indices.size());
  for (std::size_t i : lattice_indices) {
    if (i >= phi.grid->size()) throw ValidationError("mode_amplitudes: lattice index out of range");
    out.push_back(phi.values(static_cast<Eigen::Index>(i)) * scale);
  }
  return out;
}

// ---- suites ---------------------------------------------------------------

namespace {

CheckRow row(std::string name, double value, double threshold) {
  return {std::move(name), value, threshold, value <= threshold};
}

Amplitudes random_amplitudes(std::mt19937_64& rng, int modes, double max_abs) {
  std::uniform_real_distribution<double> radius(0.0, max_abs);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * 3.14159265358979323846);
  Amplitudes f(modes);
  for (auto& fj : f) fj = std::polar(radius(rng), angle(rng));
  return f;
}

Vector random_vector(std::mt19937_64& rng, Eigen::Index dim) {
  std::normal_distribution<double> gauss;
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = Complex(gauss(rng), gauss(rng));
  return v;
}

}  // namespace

std::vector<CheckRow> weyl_suite() {
  std::mt19937_64 rng(20240601);
  const double alphas[] = {1.0, 2.0, 4.0};
  struct Shape {
    int modes, cutoff;
  };
  const Shape shapes[] = {{1, 16}, {2, 8}};

  double unitarity = 0.0, inverse = 0.0, ladder_comm = 0.0, shift = 0.0, pair = 0.0;
  for (double a : alphas) {
    for (const Shape& s : shapes) {
      const FockSpace space = make_fock_space(s.modes, s.cutoff, a);
      const auto below_top = low_levels(space, s.cutoff - 1);
      for (int k = 0; k < s.modes; ++k) {
        const Ladder l = ladder(space, k);
        const Matrix c = l.b * l.b_dag - l.b_dag * l.b -
                         Matrix::Identity(space.dimension, space.dimension) / (a * a);
        ladder_comm = std::max(ladder_comm, block_norm(c, below_top));
      }
      for (int trial = 0; trial < 3; ++trial) {
        const Amplitudes f = random_amplitudes(rng, s.modes, 0.3);
        const Amplitudes g = random_amplitudes(rng, s.modes, 0.3);
        Amplitudes minus_f(f);
        for (auto& x : minus_f) x = -x;
        const Matrix W = weyl(space, f);
        const Matrix I = Matrix::Identity(space.dimension, space.dimension);
        unitarity = std::max(unitarity, spectral_norm(W.adjoint() * W - I));
        inverse = std::max(inverse, spectral_norm(W * weyl(space, minus_f) - I));
        const CommutationReport r = check_commutation(space, f, g);
        shift = std::max({shift, r.annihilation, r.creation});
        pair = std::max({pair, r.pair_annihilation, r.pair_creation});
      }
    }
  }

  // Parameter derivative along a straight and a curved path.
  double derivative = 0.0, order_gap = 0.0;
  for (double a : {1.0, 2.0}) {
    const FockSpace one = make_fock_space(1, 16, a);
    const AmplitudePath line = [](double t) { return Amplitudes{Complex(0.3 * t, 0.0)}; };
    const AmplitudePath line_v = [](double) { return Amplitudes{Complex(0.3, 0.0)}; };
    derivative = std::max(derivative, check_weyl_derivative(one, line, 0.5, 1e-4, line_v));

    const FockSpace two = make_fock_space(2, 8, a);
    const AmplitudePath curve = [](double t) {
      return Amplitudes{Complex(0.2 * std::cos(t), 0.1 * t), Complex(0.0, 0.15 * std::sin(2 * t))};
    };
    const AmplitudePath curve_v = [](double t) {
      return Amplitudes{Complex(-0.2 * std::sin(t), 0.1), Complex(0.0, 0.3 * std::cos(2 * t))};
    };
    derivative = std::max(derivative, check_weyl_derivative(two, curve, 0.7, 1e-4, curve_v));

    const double coarse = check_weyl_derivative(one, line, 0.5, 1e-3, line_v);
    const double fine = check_weyl_derivative(one, line, 0.5, 5e-4, line_v);
    order_gap = std::max(order_gap, std::abs(coarse / fine - 4.0));
  }

  // Closed-form vacuum overlap against the truncated matrices.
  double overlap = 0.0;
  for (double a : {1.0, 2.0}) {
    const FockSpace one = make_fock_space(1, 16, a);
    const FockSpace two = make_fock_space(2, 8, a);
    const Amplitudes fixed_f{Complex(0.0, 0.3)};
    const Amplitudes fixed_g{Complex(0.3, 0.0)};
    overlap = std::max(overlap, std::abs(coherent_overlap(fixed_f, fixed_g, a) -
                                         coherent_overlap_truncated(one, fixed_f, fixed_g)));
    for (int trial = 0; trial < 4; ++trial) {
      const Amplitudes f = random_amplitudes(rng, 2, 0.3);
      const Amplitudes g = random_amplitudes(rng, 2, 0.3);
      overlap = std::max(overlap, std::abs(coherent_overlap(f, g, a) -
                                           coherent_overlap_truncated(two, f, g)));
    }
  }

  // Coherent-state trace distance: closed form against truncated vectors.
  double rdm = 0.0;
  for (double a : {1.0, 2.0}) {
    const FockSpace one = make_fock_space(1, 16, a);
    for (double d : {0.05, 0.1, 0.2}) {
      const double phi_a = 0.1, phi_b = 0.1 + d / a;
      const Vector va = weyl(one, {Complex(a * a * phi_a)}) * vacuum(one);
      const Vector vb = weyl(one, {Complex(a * a * phi_b)}) * vacuum(one);
      rdm = std::max(rdm, std::abs(trace_distance_rank_one(va.normalized(), vb.normalized()) -
                                   coherent_rdm_distance(std::abs(phi_a - phi_b), a)));
    }
  }

  return {
      row("ladder commutator [b,b*] = alpha^-2", ladder_comm, 1e-12),
      row("weyl unitarity ||W*W - I||", unitarity, 1e-9),
      row("weyl inverse ||W(f)W(-f) - I||", inverse, 1e-9),
      row("shift relations b W, b* W", shift, 1e-8),
      row("pair commutators [b, W*(f)W(g)]", pair, 1e-8),
      row("weyl derivative deviation (delta 1e-4)", derivative, 1e-6),
      row("weyl derivative order |ratio - 4|", order_gap, 0.5),
      row("vacuum overlap closed form vs matrix", overlap, 1e-9),
      row("coherent trace distance closed form", rdm, 1e-9),
  };
}

std::vector<CheckRow> reduced_density_suite(std::uint64_t seed, int lemma_instances,
                                            int rank_one_instances) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.2, 1.0);
  constexpr Eigen::Index d1 = 3, d2 = 4;

  int hypothesis_failures = 0, bound_failures = 0, ineq_failures = 0;
  double worst_ratio = 0.0, worst_ineq = 0.0, density_defect = 0.0;
  for (int i = 0; i < lemma_instances; ++i) {
    const double eps = (i % 2 == 0) ? 0.1 : 0.01;
    const Vector f = random_vector(rng, d1).normalized() * unit(rng);
    const Vector g = random_vector(rng, d2).normalized() * unit(rng);
    // Phi = eps * (component orthogonal to f and g) + eps^2 * (generic remainder).
    const Matrix Pf = Matrix::Identity(d1, d1) - f * f.adjoint() / f.squaredNorm();
    const Matrix Pg = Matrix::Identity(d2, d2) - g * g.adjoint() / g.squaredNorm();
    Matrix big = as_matrix(random_vector(rng, d1 * d2), d1, d2);
    big = Pf * big * Pg.transpose();
    const Matrix small = as_matrix(random_vector(rng, d1 * d2), d1, d2);
    const Matrix M = eps * big / big.norm() + eps * eps * small / small.norm();
    Vector Phi(d1 * d2);
    for (Eigen::Index a = 0; a < d1; ++a) {
      for (Eigen::Index b = 0; b < d2; ++b) Phi(a * d2 + b) = M(a, b);
    }

    const double C = minimal_lemma_constant(f, g, Phi, eps);
    const ReducedLemmaReport r = check_reduced_lemma(f, g, Phi, C, eps);
    if (r.status == ReducedLemmaReport::Status::hypothesis_violated) ++hypothesis_failures;
    if (r.status == ReducedLemmaReport::Status::bound_violated) ++bound_failures;
    worst_ratio = std::max({worst_ratio, r.first_distance / r.bound, r.second_distance / r.bound});

    const Vector psi = outer_product(f, g) + Phi;
    const Vector unit_psi = psi.normalized();
    for (TraceSide side : {TraceSide::first, TraceSide::second}) {
      const DensityCheck dc = inspect_density(partial_trace(unit_psi, d1, d2, side));
      density_defect = std::max({density_defect, dc.hermiticity, std::max(0.0, -dc.min_eigenvalue),
                                 dc.trace_error});
    }

    const Vector other = random_vector(rng, d1 * d2) * unit(rng);
    for (const TraceInequality& t :
         {trace_inequality(psi, other, d1, d2), trace_inequality(psi, psi, d1, d2)}) {
      if (t.lhs > t.rhs * (1.0 + 1e-12)) ++ineq_failures;
      worst_ineq = std::max(worst_ineq, t.lhs / t.rhs);
    }
  }

  double rank_one = 0.0;
  for (int i = 0; i < rank_one_instances; ++i) {
    const Vector a = random_vector(rng, 8).normalized();
    Vector b;
    if (i % 4 == 0) {
      // Prescribed overlap |<a, b>| = 0.6.
      Vector perp = random_vector(rng, 8);
      perp -= a * a.dot(perp);
      b = 0.6 * a + 0.8 * perp.normalized();
    } else {
      b = random_vector(rng, 8).normalized();
    }
    const Matrix diff = a * a.adjoint() - b * b.adjoint();
    rank_one = std::max(rank_one, std::abs(trace_distance_rank_one(a, b) - trace_norm_hermitian(diff)));
  }

  std::vector<CheckRow> rows;
  rows.push_back(row("reduced lemma hypothesis violations", hypothesis_failures, 0));
  rows.push_back(row("reduced lemma bound violations", bound_failures, 0));
  rows.push_back(row("reduced lemma worst distance / bound", worst_ratio, 1.0));
  rows.push_back(row("reduced density hermitian psd unit trace", density_defect, 1e-10));
  rows.push_back(row("trace inequality violations", ineq_failures, 0));
  rows.push_back(row("rank-one trace distance vs eigensolver", rank_one, 1e-10));
  return rows;
}

}  // namespace lp::fock
