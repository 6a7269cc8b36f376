#include "lp/commands.hpp"

#include "lp/couplings.hpp"
#include "lp/errors.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <locale>
#include <sstream>

namespace lp {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ValidationError("cannot create output directory '" + dir + "'");
  return dir;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ValidationError("failed writing '" + path + "'");
}

std::ostringstream csv_stream() {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s.precision(17);
  return s;
}

WaveFunction boosted(WaveFunction psi, const Eigen::Vector3d& p) {
  if (p.squaredNorm() == 0.0) return psi;
  const auto& grid = *psi.grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    psi.values(static_cast<Eigen::Index>(i)) *= std::exp(Complex(0.0, p.dot(grid.position(i))));
  }
  return psi;
}

GroundState solve_ground_state(const RunConfig& c, const GridPtr& grid, const InvKWeights& w) {
  return pekar_ground_state(grid, w, c.ground);
}

// Initial Fourier-form state from the init.* keys.
SimState initial_state(const RunConfig& c, GridPtr& grid, InvKWeights& weights) {
  if (c.particle == ParticleSource::snapshot) {
    const Snapshot snap = read_snapshot(c.snapshot);
    grid = make_grid(snap.n, snap.L);
    weights = inv_k_weights(grid, c.mode);
    if (snap.kind == SnapshotKind::polarization) {
      return from_polarization_state(to_polarization_state(snap, grid), weights);
    }
    return to_sim_state(snap, grid);
  }
  grid = make_grid(c.n, c.L);
  weights = inv_k_weights(grid, c.mode);
  WaveFunction psi = c.particle == ParticleSource::pekar
                         ? boosted(solve_ground_state(c, grid, weights).psi, c.momentum)
                         : gaussian_wavefunction(grid, c.width, c.momentum);
  PhononField phi = make_field(c.field, psi, weights, c.amplitude);
  return make_state(std::move(psi), std::move(phi), c.alpha);
}

void write_diagnostics_csv(const std::string& path, const DiagnosticsSeries& series) {
  auto s = csv_stream();
  s << "t,norm,energy,kinetic,interaction,field,omega,phase,field_drift,field_rate,g_sup,psi_h4,"
       "phi_weighted3\n";
  for (const auto& d : series.samples) {
    s << d.t << ',' << d.norm << ',' << d.energy_total << ',' << d.energy_kinetic << ','
      << d.energy_interaction << ',' << d.energy_field << ',' << d.omega << ',' << d.phase << ','
      << d.field_drift << ',' << d.field_rate << ',' << d.g_sup << ',' << d.psi_h4 << ','
      << d.phi_weighted3 << '\n';
  }
  write_text(path, s.str());
}

Json verdict_json(const MetricVerdict& v) {
  Json j;
  j["metric"] = v.metric;
  j["slope"] = v.fit.slope;
  j["r_squared"] = v.fit.r_squared;
  j["verdict"] = to_string(v.verdict);
  return j;
}

}  // namespace

ConvertDirection parse_convert_direction(const std::string& text) {
  if (text == "to-polarization") return ConvertDirection::to_polarization;
  if (text == "to-fourier") return ConvertDirection::to_fourier;
  throw ValidationError("unknown conversion '" + text + "' (expected to-polarization or to-fourier)");
}

GroundStateSummary cmd_ground_state(const RunConfig& c) {
  const std::string dir = prepare_dir(c.out_dir);
  const GridPtr grid = make_grid(c.n, c.L);
  const InvKWeights weights = inv_k_weights(grid, c.mode);

  GroundStateSummary out;
  out.state = solve_ground_state(c, grid, weights);
  SimState state = make_state(out.state.psi, out.state.phi, c.alpha);
  out.snapshot_path = join_path(dir, "ground_state.lpsnap");
  write_snapshot(out.snapshot_path, snapshot_of(state));

  Json j;
  j["n"] = c.n;
  j["L"] = c.L;
  j["inv_k_mode"] = to_string(c.mode);
  j["lambda"] = out.state.lambda;
  j["energy"] = {{"kinetic", out.state.energy.kinetic},
                 {"interaction", out.state.energy.interaction},
                 {"field", out.state.energy.field},
                 {"total", out.state.energy.total}};
  j["residual"] = out.state.residual;
  j["iterations"] = out.state.iterations;
  out.report_path = join_path(dir, "ground_state.json");
  write_text(out.report_path, j.dump(2) + "\n");
  return out;
}

EvolveSummary cmd_evolve(const RunConfig& c) {
  const std::string dir = prepare_dir(c.out_dir);
  GridPtr grid;
  InvKWeights weights;
  const SimState initial = initial_state(c, grid, weights);

  EvolveSummary out;
  DiagnosticsSeries series;
  out.snapshot_path = join_path(dir, "final.lpsnap");
  if (c.form == Form::fourier) {
    EvolveResult r = evolve(initial, c.T, c.dt, c.sample_every, weights);
    series = std::move(r.series);
    write_snapshot(out.snapshot_path, snapshot_of(r.final_state));
  } else {
    const PolarizationState p0 = to_polarization_state(initial, weights);
    const PolarizationTrajectory r = evolve_polarization(p0, c.T, c.dt, c.sample_every, weights);
    // Diagnostics are evaluated on the equivalent Fourier-form field.
    const PhononField phi0 = from_polarization_state(p0, weights).phi;
    for (const auto& s : r.samples) {
      series.samples.push_back(sample_diagnostics(from_polarization_state(s, weights), phi0, weights));
    }
    write_snapshot(out.snapshot_path, snapshot_of(r.final_state));
  }
  out.csv_path = join_path(dir, "diagnostics.csv");
  write_diagnostics_csv(out.csv_path, series);

  out.samples = series.samples.size();
  const auto& first = series.samples.front();
  out.final_t = series.samples.back().t;
  for (const auto& d : series.samples) {
    out.max_field_drift = std::max(out.max_field_drift, d.field_drift);
    out.max_norm_drift = std::max(out.max_norm_drift, std::abs(d.norm - first.norm));
    const double scale = std::max(std::abs(first.energy_total), 1e-300);
    out.max_energy_drift = std::max(out.max_energy_drift, std::abs(d.energy_total - first.energy_total) / scale);
  }
  return out;
}

ScanSummary cmd_scan(const RunConfig& c) {
  const std::string dir = prepare_dir(c.out_dir);
  ScanSummary out;
  const std::vector<AlphaTrajectory> runs = run_trajectories(c.scan);
  out.report = scan_report(c.scan, runs);
  std::vector<MetricVerdict> all = out.report.verdicts;
  if (c.scan.recipe != FieldRecipe::minus_sigma) {
    out.drift = drift_expansion_study(c.scan, runs);
    out.distance = trace_distance_growth(c.scan, runs);
    for (const auto& v : out.drift->t_fits) all.push_back(v);
    all.push_back(out.drift->alpha_fit);
    for (const auto& v : out.distance->t_fits) all.push_back(v);
    all.push_back(out.distance->alpha_fit);
  }
  out.csv_path = join_path(dir, "scan.csv");
  out.verdict_path = join_path(dir, "verdicts.jsonl");
  std::ostringstream csv, jl;
  write_scan_csv(csv, out.report.rows);
  write_verdicts(jl, all);
  write_text(out.csv_path, csv.str());
  write_text(out.verdict_path, jl.str());
  return out;
}

FockCheckSummary cmd_fock_check(const RunConfig& c) {
  const std::string dir = prepare_dir(c.out_dir);
  FockCheckSummary out;
  out.rows = fock::weyl_suite();
  for (auto& r : fock::reduced_density_suite(c.seed, c.fock_instances, c.fock_rank_one)) {
    out.rows.push_back(std::move(r));
  }
  auto s = csv_stream();
  s << "check,value,threshold,pass\n";
  for (const auto& r : out.rows) {
    out.all_pass = out.all_pass && r.pass;
    s << '"' << r.name << "\"," << r.value << ',' << r.threshold << ',' << (r.pass ? "PASS" : "FAIL") << '\n';
  }
  out.csv_path = join_path(dir, "fock_check.csv");
  write_text(out.csv_path, s.str());
  return out;
}

Snapshot cmd_convert(const std::string& input, const std::string& output,
                     ConvertDirection direction, InvKMode mode) {
  const Snapshot in = read_snapshot(input);
  const GridPtr grid = make_grid(in.n, in.L);
  const InvKWeights weights = inv_k_weights(grid, mode);
  Snapshot out;
  if (direction == ConvertDirection::to_polarization) {
    out = snapshot_of(to_polarization_state(to_sim_state(in, grid), weights));
  } else {
    out = snapshot_of(from_polarization_state(to_polarization_state(in, grid), weights));
  }
  write_snapshot(output, out);
  return out;
}

std::string summary_json(const GroundStateSummary& s) {
  Json j;
  j["command"] = "ground-state";
  j["lambda"] = s.state.lambda;
  j["energy"] = s.state.energy.total;
  j["residual"] = s.state.residual;
  j["iterations"] = s.state.iterations;
  j["snapshot"] = s.snapshot_path;
  j["report"] = s.report_path;
  return j.dump();
}

std::string summary_json(const EvolveSummary& s) {
  Json j;
  j["command"] = "evolve";
  j["samples"] = s.samples;
  j["final_t"] = s.final_t;
  j["max_field_drift"] = s.max_field_drift;
  j["max_norm_drift"] = s.max_norm_drift;
  j["max_energy_drift"] = s.max_energy_drift;
  j["diagnostics"] = s.csv_path;
  j["snapshot"] = s.snapshot_path;
  return j.dump();
}

std::string summary_json(const ScanSummary& s) {
  Json j;
  j["command"] = "scan";
  Json verdicts = Json::array();
  for (const auto& v : s.report.verdicts) verdicts.push_back(verdict_json(v));
  if (s.drift) {
    for (const auto& v : s.drift->t_fits) verdicts.push_back(verdict_json(v));
    verdicts.push_back(verdict_json(s.drift->alpha_fit));
  }
  if (s.distance) {
    for (const auto& v : s.distance->t_fits) verdicts.push_back(verdict_json(v));
    verdicts.push_back(verdict_json(s.distance->alpha_fit));
  }
  j["verdicts"] = verdicts;
  j["csv"] = s.csv_path;
  j["verdict_file"] = s.verdict_path;
  return j.dump();
}

std::string summary_json(const FockCheckSummary& s) {
  Json j;
  j["command"] = "fock-check";
  j["checks"] = s.rows.size();
  j["all_pass"] = s.all_pass;
  j["csv"] = s.csv_path;
  return j.dump();
}

std::string format_check_table(const std::vector<fock::CheckRow>& rows) {
  std::size_t width = 5;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s << std::left << std::setw(static_cast<int>(width)) << "check" << "  " << std::setw(12) << "value"
    << "  " << std::setw(12) << "threshold" << "  result\n";
  for (const auto& r : rows) {
    s << std::left << std::setw(static_cast<int>(width)) << r.name << "  " << std::scientific
      << std::setprecision(3) << std::setw(12) << r.value << "  " << std::setw(12) << r.threshold
      << "  " << (r.pass ? "PASS" : "FAIL") << '\n';
  }
  return s.str();
}

}  // namespace lp
