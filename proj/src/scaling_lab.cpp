#include "lp/scaling_lab.hpp"

#include "lp/couplings.hpp"
#include "lp/errors.hpp"
#include "lp/fock_weyl.hpp"

#include <boost/math/distributions/students_t.hpp>
#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <locale>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace lp {

namespace {

constexpr double kMinR2 = 0.99;

double field_distance(const SpatialGrid& grid, const ComplexField& a, const ComplexField& b) {
  return std::sqrt((a - b).abs2().sum() * grid.dk());
}

// Step index for time t on the dt lattice, or -1 when t is not on it.
long lattice_step(double t, double dt) {
  const double ratio = t / dt;
  const long n = std::lround(ratio);
  return std::abs(ratio - static_cast<double>(n)) <= 1e-9 * std::max(1.0, ratio) ? n : -1;
}

std::vector<double> recorded_times(const ScanConfig& c) {
  std::set<double> times(c.drift_times.begin(), c.drift_times.end());
  times.insert(c.distance_times.begin(), c.distance_times.end());
  for (double a : c.alphas) times.insert(scan_horizon(c, a));
  return {times.begin(), times.end()};
}

AlphaTrajectory trajectory(const ScanConfig& c, double alpha, const GridPtr& grid,
                           const InvKWeights& weights, const WaveFunction& psi0) {
  AlphaTrajectory out;
  AlphaRow& row = out.row;
  row.alpha = alpha;
  row.T = scan_horizon(c, alpha);
  row.dt = scan_step(c, alpha);
  try {
    const long steps = step_count(row.T, row.dt);
    std::map<long, double> marks;
    for (double t : recorded_times(c)) {
      if (t > row.T * (1.0 + 1e-12)) continue;
      const long n = lattice_step(t, row.dt);
      if (n < 0) {
        std::ostringstream msg;
        msg << "scan: recorded time " << t << " is not a multiple of dt = " << row.dt;
        throw ValidationError(msg.str());
      }
      marks[n] = t;
    }

    const PhononField phi0 = make_field(c.recipe, psi0, weights, c.amplitude);
    const PhononField s0 = sigma(psi0, weights);
    const ComplexField d0 = phi0.values + s0.values;
    const Complex drift_coeff(0.0, 1.0 / (alpha * alpha));
    const double e0 = energy(psi0, phi0, weights).total;
    const double e_scale = std::max(std::abs(e0), std::numeric_limits<double>::min());

    SimState state = make_state(psi0, phi0, alpha);
    for (long n = 0; n <= steps; ++n) {
      if (n > 0) {
        state = step(state, row.dt, weights);
        state.t = static_cast<double>(n) * row.dt;
      }
      row.M1 = std::max(row.M1, norm(field_time_derivative(state.psi, state.phi, alpha, weights)));
      if (n % c.sample_every == 0 || n == steps) {
        const double e = energy(state.psi, state.phi, weights).total;
        row.energy_drift = std::max(row.energy_drift, std::abs(e - e0) / e_scale);
        row.norm_drift = std::max(row.norm_drift, std::abs(norm(state.psi) - 1.0));
      }
      const auto mark = marks.find(n);
      if (mark != marks.end()) {
        TimePoint p;
        p.t = mark->second;
        p.field_drift = field_distance(*grid, state.phi.values, phi0.values);
        const ComplexField linear = phi0.values - drift_coeff * p.t * d0;
        p.residual = field_distance(*grid, state.phi.values, linear);
        p.distance = fock::coherent_rdm_distance(p.field_drift, alpha);
        out.points.push_back(p);
      }
      if (!state.psi.values.allFinite() || !state.phi.values.allFinite()) {
        throw NumericalError("scan: trajectory produced non-finite values");
      }
    }
    const TimePoint& last = out.points.back();
    row.M2 = last.field_drift;
    row.M3 = last.residual;
    row.M4 = last.distance;
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
  }
  return out;
}

struct Shared {
  GridPtr grid;
  InvKWeights weights;
  WaveFunction psi0;
};

Shared prepare(const ScanConfig& c) {
  Shared s;
  s.grid = make_grid(c.n, c.L);
  s.weights = inv_k_weights(s.grid, c.mode);
  if (c.particle == InitialParticle::pekar) {
    WaveFunction gs = pekar_ground_state(s.grid, s.weights).psi;
    // A boost on the ground state is applied as a plane-wave factor.
    if (c.momentum.squaredNorm() > 0.0) {
      for (std::size_t i = 0; i < s.grid->size(); ++i) {
        gs.values(static_cast<Eigen::Index>(i)) *=
            std::exp(Complex(0.0, c.momentum.dot(s.grid->position(i))));
      }
    }
    s.psi0 = std::move(gs);
  } else {
    s.psi0 = gaussian_wavefunction(s.grid, c.width, c.momentum);
  }
  return s;
}

MetricVerdict make_verdict(std::string metric, const std::vector<double>& x,
                           const std::vector<double>& y, double target, double tolerance) {
  MetricVerdict v;
  v.metric = std::move(metric);
  v.target = target;
  v.tolerance = tolerance;
  try {
    v.fit = fit_loglog(x, y);
    v.verdict = judge(v.fit, target, tolerance, kMinR2);
  } catch (const ValidationError& e) {
    v.verdict = Verdict::inconclusive;
    v.note = e.what();
  }
  return v;
}

std::string format_alpha(double a) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s << a;
  return s.str();
}

// Largest time in `times` reached by every successful run.
double common_time(const std::vector<double>& times, const std::vector<AlphaTrajectory>& runs) {
  double horizon = std::numeric_limits<double>::infinity();
  for (const auto& r : runs) {
    if (r.row.ok) horizon = std::min(horizon, r.row.T);
  }
  double best = 0.0;
  for (double t : times) {
    if (t <= horizon * (1.0 + 1e-12)) best = std::max(best, t);
  }
  return best;
}

const TimePoint* find_point(const AlphaTrajectory& r, double t) {
  for (const auto& p : r.points) {
    if (std::abs(p.t - t) <= 0.5 * r.row.dt) return &p;
  }
  return nullptr;
}

}  // namespace

std::string to_string(InitialParticle p) { return p == InitialParticle::pekar ? "pekar" : "gaussian"; }

InitialParticle parse_initial_particle(const std::string& text) {
  if (text == "gaussian") return InitialParticle::gaussian;
  if (text == "pekar") return InitialParticle::pekar;
  throw ValidationError("unknown initial particle state '" + text + "' (expected gaussian or pekar)");
}

void validate(const ScanConfig& c) {
  if (c.alphas.empty()) throw ValidationError("scan: alpha list is empty");
  std::set<double> seen;
  for (double a : c.alphas) {
    if (!(a >= 1.0) || !std::isfinite(a)) throw ValidationError("scan: alpha values must be >= 1");
    if (!seen.insert(a).second) throw ValidationError("scan: alpha values must be distinct");
  }
  if (!(c.T_max > 0.0)) throw ValidationError("scan: T_max must be positive");
  if (!(c.dt_max > 0.0)) throw ValidationError("scan: dt_max must be positive");
  if (!(c.width > 0.0)) throw ValidationError("scan: width must be positive");
  if (!(c.amplitude >= 0.0)) throw ValidationError("scan: amplitude must be non-negative");
  if (c.sample_every < 1) throw ValidationError("scan: sample_every must be at least 1");
  if (c.threads < 0) throw ValidationError("scan: threads must be non-negative");
  for (const auto* list : {&c.drift_times, &c.distance_times}) {
    for (double t : *list) {
      if (!(t > 0.0)) throw ValidationError("scan: recorded times must be positive");
    }
  }
  // Grid arguments are validated by the grid constructor.
  SpatialGrid probe(c.n, c.L);
  (void)probe;
}

double scan_horizon(const ScanConfig& c, double alpha) { return std::min(c.T_max, alpha / 4.0); }

double scan_step(const ScanConfig& c, double alpha) { return std::min(c.dt_max, alpha * alpha / 100.0); }

const TimePoint& AlphaTrajectory::at(double t) const {
  if (const TimePoint* p = find_point(*this, t)) return *p;
  std::ostringstream msg;
  msg << "trajectory for alpha " << row.alpha << " has no point at t = " << t;
  throw ValidationError(msg.str());
}

AlphaTrajectory run_trajectory(const ScanConfig& config, double alpha) {
  validate(config);
  const Shared s = prepare(config);
  return trajectory(config, alpha, s.grid, s.weights, s.psi0);
}

int default_thread_count() {
  if (const char* env = std::getenv("LP_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<AlphaTrajectory> run_trajectories(const ScanConfig& config) {
  validate(config);
  const Shared s = prepare(config);
  const std::size_t count = config.alphas.size();
  std::vector<AlphaTrajectory> out(count);
  const int threads = std::min<int>(config.threads > 0 ? config.threads : default_thread_count(),
                                    static_cast<int>(count));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      out[i] = trajectory(config, config.alphas[i], s.grid, s.weights, s.psi0);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return out;
}

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ValidationError("fit: x and y lengths differ");
  if (x.size() < 4) throw ValidationError("fit: at least 4 points are required");
  const auto n = static_cast<double>(x.size());
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(y[i])) {
      throw ValidationError("fit: log-log fit needs positive finite values");
    }
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw ValidationError("fit: x values must not all coincide");

  SlopeFit f;
  f.points = static_cast<int>(lx.size());
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (f.intercept + f.slope * lx[i]);
    ssr += r * r;
  }
  f.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  const double se = std::sqrt(ssr / (n - 2.0) / sxx);
  const boost::math::students_t dist(n - 2.0);
  const double q = boost::math::quantile(boost::math::complement(dist, 0.025));
  f.ci_low = f.slope - q * se;
  f.ci_high = f.slope + q * se;
  return f;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

Verdict judge(const SlopeFit& fit, double target, double tolerance, double min_r2) {
  if (!(fit.r_squared >= min_r2)) return Verdict::inconclusive;
  return std::abs(fit.slope - target) <= tolerance ? Verdict::pass : Verdict::fail;
}

ScanReport scan_report(const ScanConfig& config, const std::vector<AlphaTrajectory>& runs) {
  ScanReport report;
  std::vector<double> a, m1, m2;
  const double t_common = common_time(recorded_times(config), runs);
  for (const auto& r : runs) {
    report.rows.push_back(r.row);
    if (!r.row.ok) continue;
    a.push_back(r.row.alpha);
    m1.push_back(r.row.M1);
    const TimePoint* p = find_point(r, t_common);
    m2.push_back(p ? p->field_drift : 0.0);
  }
  report.verdicts.push_back(make_verdict("M1_vs_alpha", a, m1, -2.0, 0.05));
  MetricVerdict v2 = make_verdict("M2_vs_alpha", a, m2, -2.0, 0.05);
  v2.note = v2.note.empty() ? "at t = " + format_alpha(t_common) : v2.note;
  report.verdicts.push_back(std::move(v2));
  return report;
}

ScanReport run_scan(const ScanConfig& config) { return scan_report(config, run_trajectories(config)); }

DriftStudy drift_expansion_study(const ScanConfig& config, const std::vector<AlphaTrajectory>& runs) {
  if (config.recipe == FieldRecipe::minus_sigma) {
    throw ValidationError("drift study: the initial field must differ from -sigma_psi0");
  }
  DriftStudy s;
  s.fixed_t = common_time(config.drift_times, runs);
  std::vector<double> a, m3;
  for (const auto& r : runs) {
    if (!r.row.ok) continue;
    std::vector<double> t, y;
    for (double tt : config.drift_times) {
      if (const TimePoint* p = find_point(r, tt)) {
        t.push_back(tt);
        y.push_back(p->residual);
        s.max_ratio = std::max(s.max_ratio, r.row.alpha * r.row.alpha * p->residual / (tt * tt));
      }
    }
    s.t_fits.push_back(make_verdict("M3_vs_t@alpha=" + format_alpha(r.row.alpha), t, y, 2.0, 0.1));
    if (const TimePoint* p = find_point(r, s.fixed_t)) {
      a.push_back(r.row.alpha);
      m3.push_back(p->residual);
    }
  }
  if (s.t_fits.empty()) throw ValidationError("drift study: no successful trajectories");
  s.alpha_fit = make_verdict("M3_vs_alpha", a, m3, -2.0, 0.1);
  s.alpha_fit.note = "at t = " + format_alpha(s.fixed_t);

  // Bound on alpha^2 M3 / t^2 as t -> 0, taken at the largest successful alpha.
  const double t_min = *std::min_element(config.drift_times.begin(), config.drift_times.end());
  for (auto it = runs.rbegin(); it != runs.rend(); ++it) {
    if (!it->row.ok) continue;
    if (const TimePoint* p = find_point(*it, t_min)) {
      s.min_t_ratio = it->row.alpha * it->row.alpha * p->residual / (t_min * t_min);
      break;
    }
  }
  return s;
}

DriftStudy drift_expansion_study(const ScanConfig& config) {
  return drift_expansion_study(config, run_trajectories(config));
}

DistanceStudy trace_distance_growth(const ScanConfig& config,
                                    const std::vector<AlphaTrajectory>& runs) {
  if (config.recipe == FieldRecipe::minus_sigma) {
    throw ValidationError("trace distance study: the initial field must differ from -sigma_psi0");
  }
  DistanceStudy s;
  s.fixed_t = common_time(config.distance_times, runs);
  s.c_low = std::numeric_limits<double>::infinity();
  s.c_high = 0.0;
  bool any_signal = false;
  std::vector<double> a, m4;
  for (const auto& r : runs) {
    if (!r.row.ok) continue;
    std::vector<double> t, y;
    for (double tt : config.distance_times) {
      if (const TimePoint* p = find_point(r, tt)) {
        t.push_back(tt);
        y.push_back(p->distance);
        any_signal = any_signal || p->distance >= 1e-12;
        const double c = r.row.alpha * p->distance / tt;
        s.c_low = std::min(s.c_low, c);
        s.c_high = std::max(s.c_high, c);
      }
    }
    s.t_fits.push_back(make_verdict("M4_vs_t@alpha=" + format_alpha(r.row.alpha), t, y, 1.0, 0.1));
    if (const TimePoint* p = find_point(r, s.fixed_t)) {
      a.push_back(r.row.alpha);
      m4.push_back(p->distance);
    }
  }
  if (s.t_fits.empty()) throw ValidationError("trace distance study: no successful trajectories");
  s.degenerate = !any_signal;
  if (!std::isfinite(s.c_low)) s.c_low = 0.0;
  s.alpha_fit = make_verdict("M4_vs_alpha", a, m4, -1.0, 0.1);
  s.alpha_fit.note = "at t = " + format_alpha(s.fixed_t);
  if (s.degenerate) {
    s.alpha_fit.verdict = Verdict::inconclusive;
    s.alpha_fit.note += "; all distances below 1e-12";
  }
  return s;
}

DistanceStudy trace_distance_growth(const ScanConfig& config) {
  return trace_distance_growth(config, run_trajectories(config));
}

void write_scan_csv(std::ostream& out, const std::vector<AlphaRow>& rows) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s.precision(17);
  s << "alpha,T,M1,M2,M3,M4,E_drift,norm_drift\n";
  for (const auto& r : rows) {
    if (!r.ok) {
      s << r.alpha << ',' << r.T << ",nan,nan,nan,nan,nan,nan\n";
      continue;
    }
    s << r.alpha << ',' << r.T << ',' << r.M1 << ',' << r.M2 << ',' << r.M3 << ',' << r.M4 << ','
      << r.energy_drift << ',' << r.norm_drift << '\n';
  }
  out << s.str();
}

void write_verdicts(std::ostream& out, const std::vector<MetricVerdict>& verdicts) {
  for (const auto& v : verdicts) {
    nlohmann::ordered_json j;
    j["metric"] = v.metric;
    j["slope"] = v.fit.slope;
    j["ci_low"] = v.fit.ci_low;
    j["ci_high"] = v.fit.ci_high;
    j["verdict"] = to_string(v.verdict);
    j["r_squared"] = v.fit.r_squared;
    j["target"] = v.target;
    j["tolerance"] = v.tolerance;
    j["points"] = v.fit.points;
    if (!v.note.empty()) j["note"] = v.note;
    out << j.dump() << '\n';
  }
}

}  // namespace lp
