#pragma once

// Alpha- and t-scaling experiments on the coupled dynamics: per-alpha
// trajectories, log-log slope fits with confidence intervals, and verdicts.

#include "lp/dynamics.hpp"
#include "lp/spectral_core.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <vector>

namespace lp {

enum class InitialParticle { gaussian, pekar };

std::string to_string(InitialParticle p);
InitialParticle parse_initial_particle(const std::string& text);

struct ScanConfig {
  std::vector<double> alphas{2.0, 4.0, 8.0, 16.0, 32.0};
  double T_max = 1.0;    // per-alpha horizon min(T_max, alpha / 4)
  double dt_max = 1e-3;  // per-alpha step min(dt_max, alpha^2 / 100)
  InitialParticle particle = InitialParticle::gaussian;
  double width = 1.0;
  Eigen::Vector3d momentum = Eigen::Vector3d::Zero();
  FieldRecipe recipe = FieldRecipe::perturbed;
  double amplitude = 0.2;
  int n = 32;
  double L = 16.0;
  InvKMode mode = InvKMode::cell_average;
  /// Times at which the drift residual M3(t) is recorded and fitted.
  std::vector<double> drift_times{0.1, 0.2, 0.3, 0.5, 0.7, 1.0};
  /// Times at which the coherent-state distance M4(t) is recorded and fitted.
  std::vector<double> distance_times{0.1, 0.2, 0.3, 0.4, 0.5};
  /// Energy and norm drift are sampled every this many steps.
  int sample_every = 10;
  /// Worker threads; 0 means LP_THREADS or the hardware count.
  int threads = 0;
};

/// Throws ValidationError on distinct/positive alphas, grid, horizon or time-grid problems.
void validate(const ScanConfig& config);

double scan_horizon(const ScanConfig& config, double alpha);
double scan_step(const ScanConfig& config, double alpha);

struct AlphaRow {
  double alpha = 0.0;
  double T = 0.0;
  double dt = 0.0;
  double M1 = 0.0;  // max_t ||d_t phi_t||
  double M2 = 0.0;  // ||phi_T - phi_0||
  double M3 = 0.0;  // ||phi_T - phi_0 + i alpha^-2 T (phi_0 + sigma_0)||
  double M4 = 0.0;  // coherent-state trace distance at T
  double energy_drift = 0.0;  // max relative |E_t - E_0|
  double norm_drift = 0.0;    // max | ||psi_t|| - 1 |
  bool ok = true;
  std::string error;
};

struct TimePoint {
  double t = 0.0;
  double field_drift = 0.0;  // M2(t)
  double residual = 0.0;     // M3(t)
  double distance = 0.0;     // M4(t)
};

struct AlphaTrajectory {
  AlphaRow row;
  std::vector<TimePoint> points;  // sorted by t, one per recorded time <= T

  /// Point recorded at t (within half a step); throws if absent.
  const TimePoint& at(double t) const;
};

/// Evolves one alpha and records the metrics.
AlphaTrajectory run_trajectory(const ScanConfig& config, double alpha);

/// All alphas of the config, in parallel, returned in config order.
std::vector<AlphaTrajectory> run_trajectories(const ScanConfig& config);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double ci_low = 0.0;   // 95% interval for the slope
  double ci_high = 0.0;
  int points = 0;
};

/// Least-squares fit of log y against log x. Requires >= 4 positive points.
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

enum class Verdict { pass, fail, inconclusive };
std::string to_string(Verdict v);

/// pass if |slope - target| <= tolerance and R^2 >= min_r2; inconclusive if R^2 < min_r2.
Verdict judge(const SlopeFit& fit, double target, double tolerance, double min_r2 = 0.99);

struct MetricVerdict {
  std::string metric;
  SlopeFit fit;
  double target = 0.0;
  double tolerance = 0.0;
  Verdict verdict = Verdict::inconclusive;
  std::string note;
};

struct ScanReport {
  std::vector<AlphaRow> rows;
  std::vector<MetricVerdict> verdicts;
};

/// Rows for every alpha plus alpha-slope verdicts for M1 and M2. M2 is fitted
/// at the shortest common horizon so every alpha contributes the same t.
ScanReport run_scan(const ScanConfig& config);
ScanReport scan_report(const ScanConfig& config, const std::vector<AlphaTrajectory>& runs);

struct DriftStudy {
  std::vector<MetricVerdict> t_fits;  // one per alpha with enough recorded times
  MetricVerdict alpha_fit;            // at the largest drift time reached by every alpha
  double fixed_t = 0.0;
  double max_ratio = 0.0;             // max over alpha, t of alpha^2 M3(t) / t^2
  double min_t_ratio = 0.0;           // alpha^2 M3 / t^2 at the smallest t, largest alpha
};

/// M3(t) slope in t (target 2 +- 0.1) per alpha and in alpha (target -2 +- 0.1).
DriftStudy drift_expansion_study(const ScanConfig& config, const std::vector<AlphaTrajectory>& runs);
DriftStudy drift_expansion_study(const ScanConfig& config);

struct DistanceStudy {
  std::vector<MetricVerdict> t_fits;
  MetricVerdict alpha_fit;  // at the largest distance time reached by every alpha
  double fixed_t = 0.0;
  double c_low = 0.0;       // min of alpha M4 / t
  double c_high = 0.0;      // max of alpha M4 / t
  bool degenerate = false;  // every distance below 1e-12
};

/// M4(t) slope in t (target 1 +- 0.1) per alpha and in alpha (target -1 +- 0.1).
DistanceStudy trace_distance_growth(const ScanConfig& config,
                                    const std::vector<AlphaTrajectory>& runs);
DistanceStudy trace_distance_growth(const ScanConfig& config);

/// CSV with header alpha,T,M1,M2,M3,M4,E_drift,norm_drift.
void write_scan_csv(std::ostream& out, const std::vector<AlphaRow>& rows);
/// JSON lines {metric, slope, ci_low, ci_high, verdict} plus r_squared, target, tolerance.
void write_verdicts(std::ostream& out, const std::vector<MetricVerdict>& verdicts);

/// LP_THREADS if set and positive, else the hardware count (at least 1).
int default_thread_count();

}  // namespace lp
