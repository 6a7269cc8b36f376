#pragma once

// Flat "section.key = value" run configuration. Every key has a default; files
// and command-line overrides are merged into a raw table, then validated into
// RunConfig before any computation starts.

#include "lp/dynamics.hpp"
#include "lp/scaling_lab.hpp"
#include "lp/spectral_core.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace lp {

enum class Form { fourier, polarization };
std::string to_string(Form f);
Form parse_form(const std::string& text);

enum class ParticleSource { gaussian, pekar, snapshot };

struct RunConfig {
  // grid
  int n = 32;
  double L = 16.0;
  InvKMode mode = InvKMode::cell_average;
  // run
  double alpha = 4.0;
  Form form = Form::fourier;
  double dt = 1e-3;
  double T = 1.0;
  int sample_every = 10;
  std::uint64_t seed = 0;
  // init
  ParticleSource particle = ParticleSource::gaussian;
  double width = 1.0;
  Eigen::Vector3d momentum = Eigen::Vector3d::Zero();
  FieldRecipe field = FieldRecipe::perturbed;
  double amplitude = 0.2;
  std::string snapshot;
  // ground state
  GroundStateOptions ground;
  // scan
  ScanConfig scan;
  // fock checks
  int fock_instances = 200;
  int fock_rank_one = 100;
  // output
  std::string out_dir = ".";
};

using RawConfig = std::map<std::string, std::string>;

/// Every accepted key with its default value.
const RawConfig& default_raw_config();

/// Parses "key = value" lines; '#' starts a comment. Throws ValidationError on
/// malformed lines, duplicate keys or unknown keys.
RawConfig parse_config_text(const std::string& text, const std::string& origin = "config");
RawConfig read_config_file(const std::string& path);

/// Applies "key=value" overrides (unknown keys rejected).
void apply_override(RawConfig& raw, const std::string& assignment);
void set_value(RawConfig& raw, const std::string& key, const std::string& value);

/// Validates and converts every field; throws ValidationError naming the key.
RunConfig build_config(const RawConfig& raw);

/// Canonical text form (sorted keys), suitable for parse_config_text.
std::string format_config(const RawConfig& raw);

}  // namespace lp
