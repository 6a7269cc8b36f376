#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lp/commands.hpp"
#include "lp/config.hpp"
#include "lp/errors.hpp"
#include "lp/snapshot.hpp"

#include "json.hpp"
#include "support.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace lp;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lp_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Warnings may precede the JSON error object.
nlohmann::json last_json_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line, last;
  while (std::getline(in, line)) {
    if (!line.empty()) last = line;
  }
  return nlohmann::json::parse(last);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_lpsim(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(LPSIM_PATH) + " " + args + " >" + (log.string() + ".out") +
                          " 2>" + (log.string() + ".err");
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

RunConfig small_run(const fs::path& out) {
  RawConfig raw;
  set_value(raw, "grid.n", "16");
  set_value(raw, "grid.L", "12");
  set_value(raw, "out.dir", out.string());
  return build_config(raw);
}

Snapshot random_snapshot(SnapshotKind kind, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SpatialGrid g(8, 5.0);
  Snapshot s;
  s.kind = kind;
  s.n = 8;
  s.L = 5.0;
  s.alpha = 3.5;
  s.t = 0.125;
  s.phase = -2.25;
  s.psi = testing::random_field(g.size(), rng, 1.0);
  s.field = testing::random_field(g.size(), rng, 1.0);
  return s;
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("comments, blanks and whitespace") {
    const RawConfig r = parse_config_text("# header\n\n grid.n = 16  # trailing\nrun.alpha=2\n");
    CHECK(r.size() == 2);
    CHECK(r.at("grid.n") == "16");
    CHECK(r.at("run.alpha") == "2");
  }
  SUBCASE("rejections") {
    CHECK_THROWS_AS(parse_config_text("grid.q = 1"), ValidationError);
    CHECK_THROWS_AS(parse_config_text("grid.n = 16\ngrid.n = 32"), ValidationError);
    CHECK_THROWS_AS(parse_config_text("grid.n 16"), ValidationError);
    RawConfig r;
    CHECK_THROWS_AS(apply_override(r, "nonsense=1"), ValidationError);
    CHECK_THROWS_AS(apply_override(r, "grid.n"), ValidationError);
  }
  SUBCASE("later overrides win") {
    RawConfig r = parse_config_text("run.alpha = 2");
    apply_override(r, "run.alpha=8");
    apply_override(r, "run.alpha = 16");
    CHECK(build_config(r).alpha == 16.0);
  }
  SUBCASE("canonical text round trip") {
    const RawConfig& d = default_raw_config();
    CHECK(parse_config_text(format_config(d)) == d);
  }
}

TEST_CASE("config validation") {
  const RunConfig d = build_config({});
  CHECK(d.n == 32);
  CHECK(d.L == 16.0);
  CHECK(d.alpha == 4.0);
  CHECK(d.dt == 1e-3);
  CHECK(d.field == FieldRecipe::perturbed);

  auto rejects = [](const std::string& key, const std::string& value) {
    RawConfig r;
    set_value(r, key, value);
    INFO(key << " = " << value);
    CHECK_THROWS_AS(build_config(r), ValidationError);
  };
  rejects("grid.n", "24");
  rejects("grid.n", "4");
  rejects("grid.n", "sixteen");
  rejects("grid.L", "-1");
  rejects("grid.inv_k_mode", "exact");
  rejects("run.alpha", "0");
  rejects("run.dt", "nan");
  rejects("run.T", "0.0015");  // not a whole number of steps
  rejects("run.form", "lagrangian");
  rejects("run.sample_every", "0");
  rejects("init.psi", "plane");
  rejects("init.psi", "snapshot");  // needs init.snapshot
  rejects("init.momentum", "1,2");
  rejects("init.amplitude", "-0.1");
  rejects("scan.alphas", "2,2,4,8");
  rejects("fock.instances", "0");
  rejects("out.dir", "");

  RawConfig r;
  set_value(r, "run.dt", "5e-4");
  set_value(r, "run.T", "0.3");
  set_value(r, "init.momentum", "0.5, 0, -1");
  const RunConfig c = build_config(r);
  CHECK(c.momentum.z() == -1.0);
  CHECK(step_count(c.T, c.dt) == 600);
}

TEST_CASE("snapshot format") {
  for (SnapshotKind kind : {SnapshotKind::fourier, SnapshotKind::polarization}) {
    const Snapshot s = random_snapshot(kind, kind == SnapshotKind::fourier ? 1 : 2);
    const std::string bytes = encode_snapshot(s);
    CHECK(bytes.size() == 8 + 4 + 4 * 8 + 2 * 512 * 16);
    CHECK(bytes.compare(0, 8, std::string(kind == SnapshotKind::fourier ? kFourierMagic.data()
                                                                        : kPolarizationMagic.data(),
                                          8)) == 0);
    const Snapshot back = decode_snapshot(bytes);
    CHECK(back.kind == kind);
    CHECK(back.n == 8);
    CHECK(back.L == 5.0);
    CHECK(back.alpha == 3.5);
    CHECK(back.t == 0.125);
    CHECK(back.phase == -2.25);
    CHECK((back.psi == s.psi).all());
    CHECK((back.field == s.field).all());
    CHECK(encode_snapshot(back) == bytes);

    std::string bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_snapshot(bad), ValidationError);
    CHECK_THROWS_AS(decode_snapshot(bytes.substr(0, bytes.size() - 1)), ValidationError);
    CHECK_THROWS_AS(decode_snapshot(bytes.substr(0, 20)), ValidationError);
    CHECK_THROWS_AS(decode_snapshot(bytes + "x"), ValidationError);
  }
  CHECK_THROWS_AS(read_snapshot("/nonexistent/snap.lpsnap"), ValidationError);
}

TEST_CASE("stationary evolution from the ground-state command") {
  const fs::path dir = scratch_dir("stationary");
  RunConfig c = small_run(dir);
  c.alpha = 1.0;
  const GroundStateSummary gs = cmd_ground_state(c);
  CHECK(gs.state.residual <= 1e-8);
  CHECK(fs::exists(gs.snapshot_path));
  const auto report = nlohmann::json::parse(slurp(gs.report_path));
  CHECK(report["lambda"].get<double>() == gs.state.lambda);
  CHECK(report["iterations"].get<int>() == gs.state.iterations);

  c.particle = ParticleSource::snapshot;
  c.snapshot = gs.snapshot_path;
  c.dt = 1e-4;
  c.T = 0.1;
  c.sample_every = 100;
  const EvolveSummary ev = cmd_evolve(c);
  CHECK(ev.samples == 11);
  CHECK(ev.final_t == doctest::Approx(0.1));
  CHECK(ev.max_field_drift <= 1e-6);
  CHECK(ev.max_norm_drift <= 1e-10);
  const std::string csv = slurp(ev.csv_path);
  CHECK(csv.rfind("t,norm,energy", 0) == 0);

  SUBCASE("reruns are bit-identical") {
    const std::string first_csv = csv;
    const std::string first_snap = slurp(ev.snapshot_path);
    cmd_evolve(c);
    CHECK(slurp(ev.csv_path) == first_csv);
    CHECK(slurp(ev.snapshot_path) == first_snap);
  }

  SUBCASE("the polarization form agrees") {
    RunConfig p = c;
    p.form = Form::polarization;
    p.out_dir = (dir / "pol").string();
    const EvolveSummary pe = cmd_evolve(p);
    CHECK(pe.max_field_drift <= 1e-6);
    CHECK(pe.max_norm_drift <= 1e-10);
  }
}

TEST_CASE("representation conversion") {
  const fs::path dir = scratch_dir("convert");
  RunConfig c = small_run(dir);
  c.T = 0.01;
  c.sample_every = 10;
  const EvolveSummary ev = cmd_evolve(c);
  const Snapshot src = read_snapshot(ev.snapshot_path);
  const std::string pol = (dir / "pol.lpsnap").string();
  const std::string back = (dir / "back.lpsnap").string();

  const Snapshot p = cmd_convert(ev.snapshot_path, pol, ConvertDirection::to_polarization, c.mode);
  CHECK(p.kind == SnapshotKind::polarization);
  const Snapshot f = cmd_convert(pol, back, ConvertDirection::to_fourier, c.mode);
  CHECK(f.kind == SnapshotKind::fourier);
  CHECK(read_snapshot(back).alpha == src.alpha);
  CHECK((f.psi - src.psi).abs().maxCoeff() <= 1e-15);
  // phi(0) has no polarization content; compare the remaining modes.
  double err = 0.0;
  for (Eigen::Index i = 1; i < src.field.size(); ++i) err = std::max(err, std::abs(f.field[i] - src.field[i]));
  CHECK(err <= 1e-10);
  CHECK(parse_convert_direction("to-fourier") == ConvertDirection::to_fourier);
  CHECK_THROWS_AS(parse_convert_direction("sideways"), ValidationError);
}

TEST_CASE("fock checks through the command layer") {
  const fs::path dir = scratch_dir("fock");
  RunConfig c = small_run(dir);
  c.fock_instances = 20;
  c.fock_rank_one = 20;
  const FockCheckSummary s = cmd_fock_check(c);
  CHECK(s.rows.size() >= 8);
  CHECK(s.all_pass);
  for (const auto& r : s.rows) {
    INFO(r.name << " " << r.value << " vs " << r.threshold);
    CHECK(r.pass);
  }
  const std::string table = format_check_table(s.rows);
  CHECK(table.find("PASS") != std::string::npos);
  CHECK(table.find("FAIL") == std::string::npos);
  const auto j = nlohmann::json::parse(summary_json(s));
  CHECK(j["all_pass"].get<bool>());
}

TEST_CASE("lpsim exit codes") {
  const fs::path dir = scratch_dir("exit");
  const std::string out = " --set out.dir=" + dir.string();

  CHECK(run_lpsim("--set grid.bogus=1 evolve" + out, dir / "unknown") == 1);
  const auto err = last_json_line(dir / "unknown.err");
  CHECK(err["error"] == "validation");
  CHECK(run_lpsim("--set run.T=0.0015 evolve" + out, dir / "steps") == 1);
  CHECK(run_lpsim("frobnicate" + out, dir / "cmd") == 1);

  std::ofstream(dir / "bad.cfg") << "grid.n = 16\ngrid.n = 16\n";
  CHECK(run_lpsim("--config " + (dir / "bad.cfg").string() + " evolve" + out, dir / "dup") == 1);

  // The minimiser cannot converge in two iterations.
  CHECK(run_lpsim("--grid.n 16 --grid.L 12 --ground.max_iter 2 ground-state" + out, dir / "gs") == 2);
  CHECK(last_json_line(dir / "gs.err")["error"] == "numerical");

  std::ofstream(dir / "ok.cfg") << "grid.n = 16\ngrid.L = 12\nrun.T = 0.01\n";
  CHECK(run_lpsim("--config " + (dir / "ok.cfg").string() + " --run.alpha 2 evolve" + out, dir / "ok") == 0);
  const auto summary = nlohmann::json::parse(slurp(dir / "ok.out"));
  CHECK(summary["command"] == "evolve");
  CHECK(fs::exists(dir / "diagnostics.csv"));
  CHECK(fs::exists(dir / "final.lpsnap"));
}
