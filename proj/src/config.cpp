#include "lp/config.hpp"

#include "lp/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lp {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& why) {
  throw ValidationError("config key '" + key + "' = '" + value + "': " + why);
}

double parse_double(const RawConfig& raw, const std::string& key) {
  const std::string& text = raw.at(key);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
    bad_value(key, text, "expected a finite number");
  }
  return v;
}

long long parse_integer(const RawConfig& raw, const std::string& key) {
  const std::string& text = raw.at(key);
  long long v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    bad_value(key, text, "expected an integer");
  }
  return v;
}

std::vector<double> parse_list(const RawConfig& raw, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(raw.at(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    RawConfig one{{key, trim(item)}};
    out.push_back(parse_double(one, key));
  }
  if (out.empty()) bad_value(key, raw.at(key), "expected a comma-separated list");
  return out;
}

double positive(const RawConfig& raw, const std::string& key) {
  const double v = parse_double(raw, key);
  if (!(v > 0.0)) bad_value(key, raw.at(key), "must be positive");
  return v;
}

template <class F>
auto with_key(const RawConfig& raw, const std::string& key, F&& parse) {
  try {
    return parse(raw.at(key));
  } catch (const ValidationError& e) {
    bad_value(key, raw.at(key), e.what());
  }
}

std::string join(const std::vector<double>& v) {
  std::ostringstream s;
  for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
  return s.str();
}

}  // namespace

std::string to_string(Form f) { return f == Form::polarization ? "polarization" : "fourier"; }

Form parse_form(const std::string& text) {
  if (text == "fourier") return Form::fourier;
  if (text == "polarization") return Form::polarization;
  throw ValidationError("unknown form '" + text + "' (expected fourier or polarization)");
}

const RawConfig& default_raw_config() {
  static const RawConfig defaults = [] {
    const ScanConfig scan;
    return RawConfig{
        {"grid.n", "32"},
        {"grid.L", "16"},
        {"grid.inv_k_mode", "cell_average"},
        {"run.alpha", "4"},
        {"run.form", "fourier"},
        {"run.dt", "0.001"},
        {"run.T", "1"},
        {"run.sample_every", "10"},
        {"run.seed", "0"},
        {"init.psi", "gaussian"},
        {"init.width", "1"},
        {"init.momentum", "0,0,0"},
        {"init.field", "perturbed"},
        {"init.amplitude", "0.2"},
        {"init.snapshot", ""},
        {"ground.tol", "1e-8"},
        {"ground.max_iter", "20000"},
        {"ground.step", "0.005"},
        {"scan.alphas", join(scan.alphas)},
        {"scan.T_max", "1"},
        {"scan.dt_max", "0.001"},
        {"scan.drift_times", join(scan.drift_times)},
        {"scan.distance_times", join(scan.distance_times)},
        {"scan.sample_every", "10"},
        {"scan.threads", "0"},
        {"fock.instances", "200"},
        {"fock.rank_one", "100"},
        {"out.dir", "."},
    };
  }();
  return defaults;
}

void set_value(RawConfig& raw, const std::string& key, const std::string& value) {
  if (!default_raw_config().count(key)) throw ValidationError("unknown config key '" + key + "'");
  raw[key] = value;
}

RawConfig parse_config_text(const std::string& text, const std::string& origin) {
  RawConfig out;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw ValidationError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!default_raw_config().count(key)) throw ValidationError(where + ": unknown config key '" + key + "'");
    if (out.count(key)) throw ValidationError(where + ": duplicate key '" + key + "'");
    out[key] = value;
  }
  return out;
}

RawConfig read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

void apply_override(RawConfig& raw, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ValidationError("override '" + assignment + "' is not key=value");
  set_value(raw, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

RunConfig build_config(const RawConfig& partial) {
  RawConfig raw = default_raw_config();
  for (const auto& [k, v] : partial) set_value(raw, k, v);

  RunConfig c;
  const long long n = parse_integer(raw, "grid.n");
  if (n < 8 || n > 512 || (n & (n - 1)) != 0) bad_value("grid.n", raw["grid.n"], "must be a power of two in [8, 512]");
  c.n = static_cast<int>(n);
  c.L = positive(raw, "grid.L");
  c.mode = with_key(raw, "grid.inv_k_mode", parse_inv_k_mode);

  c.alpha = positive(raw, "run.alpha");
  c.form = with_key(raw, "run.form", parse_form);
  c.dt = positive(raw, "run.dt");
  c.T = positive(raw, "run.T");
  try {
    (void)step_count(c.T, c.dt);
  } catch (const ValidationError& e) {
    bad_value("run.T", raw["run.T"], e.what());
  }
  const long long every = parse_integer(raw, "run.sample_every");
  if (every < 1) bad_value("run.sample_every", raw["run.sample_every"], "must be at least 1");
  c.sample_every = static_cast<int>(every);
  const long long seed = parse_integer(raw, "run.seed");
  if (seed < 0) bad_value("run.seed", raw["run.seed"], "must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);

  const std::string& psi = raw["init.psi"];
  if (psi == "gaussian") c.particle = ParticleSource::gaussian;
  else if (psi == "pekar") c.particle = ParticleSource::pekar;
  else if (psi == "snapshot") c.particle = ParticleSource::snapshot;
  else bad_value("init.psi", psi, "expected gaussian, pekar or snapshot");
  c.width = positive(raw, "init.width");
  const std::vector<double> p = parse_list(raw, "init.momentum");
  if (p.size() != 3) bad_value("init.momentum", raw["init.momentum"], "expected three components");
  c.momentum = Eigen::Vector3d(p[0], p[1], p[2]);
  c.field = with_key(raw, "init.field", parse_field_recipe);
  c.amplitude = parse_double(raw, "init.amplitude");
  if (c.amplitude < 0.0) bad_value("init.amplitude", raw["init.amplitude"], "must be non-negative");
  c.snapshot = raw["init.snapshot"];
  if (c.particle == ParticleSource::snapshot && c.snapshot.empty()) {
    bad_value("init.snapshot", "", "required when init.psi = snapshot");
  }

  c.ground.tol = positive(raw, "ground.tol");
  const long long iters = parse_integer(raw, "ground.max_iter");
  if (iters < 1) bad_value("ground.max_iter", raw["ground.max_iter"], "must be at least 1");
  c.ground.max_iter = static_cast<int>(iters);
  c.ground.step = positive(raw, "ground.step");
  c.ground.seed_width = c.width;

  ScanConfig& s = c.scan;
  s.alphas = parse_list(raw, "scan.alphas");
  s.T_max = positive(raw, "scan.T_max");
  s.dt_max = positive(raw, "scan.dt_max");
  s.drift_times = parse_list(raw, "scan.drift_times");
  s.distance_times = parse_list(raw, "scan.distance_times");
  s.sample_every = static_cast<int>(parse_integer(raw, "scan.sample_every"));
  s.threads = static_cast<int>(parse_integer(raw, "scan.threads"));
  if (c.particle == ParticleSource::snapshot) {
    // Scans always start from a generated state; the snapshot source only applies to evolve.
    s.particle = InitialParticle::gaussian;
  } else {
    s.particle = c.particle == ParticleSource::pekar ? InitialParticle::pekar : InitialParticle::gaussian;
  }
  s.width = c.width;
  s.momentum = c.momentum;
  s.recipe = c.field;
  s.amplitude = c.amplitude;
  s.n = c.n;
  s.L = c.L;
  s.mode = c.mode;
  try {
    validate(s);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("scan settings: ") + e.what());
  }

  const long long inst = parse_integer(raw, "fock.instances");
  const long long rank = parse_integer(raw, "fock.rank_one");
  if (inst < 1 || inst > 100000) bad_value("fock.instances", raw["fock.instances"], "must be in [1, 1e5]");
  if (rank < 1 || rank > 100000) bad_value("fock.rank_one", raw["fock.rank_one"], "must be in [1, 1e5]");
  c.fock_instances = static_cast<int>(inst);
  c.fock_rank_one = static_cast<int>(rank);

  c.out_dir = raw["out.dir"];
  if (c.out_dir.empty()) bad_value("out.dir", "", "must not be empty");
  return c;
}

std::string format_config(const RawConfig& raw) {
  std::ostringstream s;
  for (const auto& [k, v] : raw) s << k << " = " << v << '\n';
  return s.str();
}

}  // namespace lp
