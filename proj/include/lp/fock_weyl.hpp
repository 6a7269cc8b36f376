#pragma once

// Dense truncated Fock space with alpha-scaled ladder operators
// [b, b*] = alpha^{-2}, Weyl operators W(f) = exp(b*(f) - b(f)), and the
// finite-dimensional reduced-density-matrix toolkit used to check coherent
// state and partial-trace identities numerically.

#include "lp/spectral_core.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace lp::fock {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Amplitudes = std::vector<Complex>;

struct FockSpace {
  int modes = 1;
  int cutoff = 8;  // per-mode occupation cutoff N_max
  double alpha = 1.0;
  Eigen::Index dimension = 9;
};

/// Validates 1 <= modes <= 4, 1 <= cutoff <= 24, alpha > 0 and (cutoff+1)^modes <= 2e4.
FockSpace make_fock_space(int modes, int cutoff, double alpha);

/// Occupation of `mode` in basis state `index` (mode 0 varies fastest).
int occupation(const FockSpace& space, Eigen::Index index, int mode);
/// Basis indices whose occupations are all <= max_level.
std::vector<Eigen::Index> low_levels(const FockSpace& space, int max_level);

struct Ladder {
  Matrix b;      // alpha^{-1} a
  Matrix b_dag;  // alpha^{-1} a*
};

Ladder ladder(const FockSpace& space, int mode);

/// b*(f) - b(f) = sum_j (f_j b_j* - conj(f_j) b_j).
Matrix weyl_generator(const FockSpace& space, const Amplitudes& f);

struct TruncationGuard {
  double amplitude_ratio = 0.0;  // alpha^{-1} ||f||
  double tail_mass = 0.0;        // largest per-mode coherent occupation tail above cutoff - 2
  bool ok = true;
};

TruncationGuard weyl_guard(const FockSpace& space, const Amplitudes& f);

/// exp(b*(f) - b(f)) by scaling and squaring; throws NumericalError when the
/// truncation guard fails.
Matrix weyl(const FockSpace& space, const Amplitudes& f);

/// Vacuum vector (all occupations zero).
Vector vacuum(const FockSpace& space);

/// (f, g) = sum_j conj(f_j) g_j.
Complex inner(const Amplitudes& f, const Amplitudes& g);
double norm(const Amplitudes& f);

/// Largest singular value of the sub-block on rows/cols `levels`.
double block_norm(const Matrix& m, const std::vector<Eigen::Index>& levels);

struct CommutationReport {
  double annihilation = 0.0;   // max_k || b_k W(f) - W(f)(b_k + alpha^{-2} f_k) ||
  double creation = 0.0;       // max_k || b*_k W(f) - W(f)(b*_k + alpha^{-2} conj f_k) ||
  double pair_annihilation = 0.0;  // max_k || [b_k, W*(f)W(g)] - alpha^{-2}(g_k - f_k) W*(f)W(g) ||
  double pair_creation = 0.0;      // max_k || [b*_k, W*(f)W(g)] + alpha^{-2}(conj f_k - conj g_k) W*(f)W(g) ||
  double max() const;
};

/// Shift relations of W(f) and of the pair W*(f) W(g), measured on levels <= cutoff - 2.
CommutationReport check_commutation(const FockSpace& space, const Amplitudes& f,
                                    const Amplitudes& g);

/// Deviation of the pair commutator from the alternative coefficient
/// alpha^{-2}(f_k - g_k); equals 2 alpha^{-2}|f_k - g_k| ||W*(f)W(g)|| when the
/// identity above holds.
double pair_annihilation_deviation_flipped(const FockSpace& space, const Amplitudes& f,
                                           const Amplitudes& g);

using AmplitudePath = std::function<Amplitudes(double)>;

/// Central difference (W(f_{t+d}) - W(f_{t-d})) / 2d against
/// alpha^{-2}/2 ((f, f') - (f', f)) W(f) + W(f)(b*(f') - b(f')), on levels <= cutoff - 2.
/// The velocity f' comes from `velocity` when given, else from a central difference of the path.
double check_weyl_derivative(const FockSpace& space, const AmplitudePath& path, double t,
                             double delta, const AmplitudePath& velocity = nullptr);

/// <Omega, W*(g) W(f) Omega> = exp(i alpha^{-2} Im(g, f) - alpha^{-2} ||f - g||^2 / 2).
Complex coherent_overlap(const Amplitudes& f, const Amplitudes& g, double alpha);
/// Same quantity from truncated matrices.
Complex coherent_overlap_truncated(const FockSpace& space, const Amplitudes& f,
                                   const Amplitudes& g);

/// tr | |a><a| - |b><b| | = 2 (1 - |<a, b>|^2)^{1/2} for unit vectors.
double trace_distance_rank_one(const Vector& a, const Vector& b);

/// Sum of |eigenvalues| (Hermitian input) or of singular values (general input).
double trace_norm_hermitian(const Matrix& m);
double trace_norm(const Matrix& m);

enum class TraceSide { first, second };

/// Reduced density matrix of the pure state psi on H1 (x) H2 (index i1 * d2 + i2),
/// tracing out the factor named by `traced`.
Matrix partial_trace(const Vector& psi, Eigen::Index d1, Eigen::Index d2, TraceSide traced);

/// tr_2 |psi1><psi2| as a d1 x d1 operator.
Matrix partial_trace_outer(const Vector& psi1, const Vector& psi2, Eigen::Index d1,
                           Eigen::Index d2);

struct DensityCheck {
  double hermiticity = 0.0;  // ||rho - rho*||_max
  double min_eigenvalue = 0.0;
  double trace_error = 0.0;  // |tr rho - 1|
};
DensityCheck inspect_density(const Matrix& rho);

struct ReducedLemmaReport {
  enum class Status { holds, hypothesis_violated, bound_violated };
  Status status = Status::holds;
  std::string detail;
  double first_distance = 0.0;   // tr | gamma_1 - ||g||^2 |f><f| |
  double second_distance = 0.0;  // tr | gamma_2 - ||f||^2 |g><g| |
  double bound = 0.0;            // 3 C^2 eps^2
};

/// Forms psi = f (x) g + Phi and checks both reduced-density bounds under the
/// hypotheses ||f||, ||g|| <= C, ||Phi|| <= C eps, ||<g,Phi>_2||, ||<f,Phi>_1|| <= C eps^2.
ReducedLemmaReport check_reduced_lemma(const Vector& f, const Vector& g, const Vector& Phi,
                                       double C, double eps);

/// Smallest C satisfying every hypothesis above for the given triple.
double minimal_lemma_constant(const Vector& f, const Vector& g, const Vector& Phi, double eps);

struct TraceInequality {
  double lhs = 0.0;  // tr | tr_2 |psi1><psi2| |
  double rhs = 0.0;  // ||psi1|| ||psi2||
};
TraceInequality trace_inequality(const Vector& psi1, const Vector& psi2, Eigen::Index d1,
                                 Eigen::Index d2);

/// Trace distance between the coherent states W(alpha^2 phi_a) Omega and
/// W(alpha^2 phi_b) Omega: 2 (1 - exp(-alpha^2 ||phi_a - phi_b||^2))^{1/2}.
double coherent_rdm_distance(double field_distance, double alpha);
double coherent_rdm_distance(const PhononField& phi_a, const PhononField& phi_b, double alpha);

/// f_j = phi(k_j) dk^{1/2} for the listed lattice indices.
Amplitudes mode_amplitudes(const PhononField& phi, const std::vector<std::size_t>& lattice_indices);

// ---- suites ---------------------------------------------------------------

struct CheckRow {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// Weyl unitarity, shift relations, parameter derivative (with refinement
/// order), and closed-form overlap, over alpha in {1, 2, 4} and amplitudes <= 0.3.
std::vector<CheckRow> weyl_suite();

/// Randomised reduced-density bound, trace inequality and rank-one formula checks.
std::vector<CheckRow> reduced_density_suite(std::uint64_t seed, int lemma_instances = 200,
                                            int rank_one_instances = 100);

}  // namespace lp::fock
