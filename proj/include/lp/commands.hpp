#pragma once

// Subcommand implementations behind the lpsim executable. Each command takes a
// validated RunConfig, writes its artifacts into out_dir and returns a summary.

#include "lp/config.hpp"
#include "lp/fock_weyl.hpp"
#include "lp/scaling_lab.hpp"
#include "lp/snapshot.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lp {

struct GroundStateSummary {
  GroundState state;
  std::string snapshot_path;
  std::string report_path;
};

struct EvolveSummary {
  std::string csv_path;
  std::string snapshot_path;
  std::size_t samples = 0;
  double final_t = 0.0;
  double max_field_drift = 0.0;
  double max_norm_drift = 0.0;    // max | ||psi_t|| - ||psi_0|| |
  double max_energy_drift = 0.0;  // max relative |E_t - E_0|
};

struct ScanSummary {
  ScanReport report;
  std::optional<DriftStudy> drift;
  std::optional<DistanceStudy> distance;
  std::string csv_path;
  std::string verdict_path;
};

struct FockCheckSummary {
  std::vector<fock::CheckRow> rows;
  bool all_pass = true;
  std::string csv_path;
};

enum class ConvertDirection { to_polarization, to_fourier };
ConvertDirection parse_convert_direction(const std::string& text);

GroundStateSummary cmd_ground_state(const RunConfig& config);
EvolveSummary cmd_evolve(const RunConfig& config);
ScanSummary cmd_scan(const RunConfig& config);
FockCheckSummary cmd_fock_check(const RunConfig& config);
/// Reads `input`, converts the field representation and writes `output`.
Snapshot cmd_convert(const std::string& input, const std::string& output,
                     ConvertDirection direction, InvKMode mode);

/// One-line JSON summaries printed on standard output.
std::string summary_json(const GroundStateSummary& s);
std::string summary_json(const EvolveSummary& s);
std::string summary_json(const ScanSummary& s);
std::string summary_json(const FockCheckSummary& s);

/// Fixed-width PASS/FAIL table for the fock-check rows.
std::string format_check_table(const std::vector<fock::CheckRow>& rows);

}  // namespace lp
