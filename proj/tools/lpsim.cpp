// lpsim: command-line driver for the Landau-Pekar simulator.
//
//   lpsim [--config FILE] [--set key=value]... [--<key> value]... <command>
//
// Exit status: 0 success, 1 invalid input, 2 numerical failure. Failures also
// print one JSON object {"error": ..., "message": ...} on standard error.

#include "lp/commands.hpp"
#include "lp/errors.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

int report_error(const char* kind, const std::string& message, int code) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  j["exit_code"] = code;
  std::cerr << j.dump() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Landau-Pekar polaron simulator and verification tools"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "flat key = value configuration file");
  app.add_option("--set", overrides, "override a configuration key (key=value)")->take_all();

  // Each configuration key is also accepted as --<key> <value>.
  std::map<std::string, std::string> flag_values;
  for (const auto& [key, value] : lp::default_raw_config()) {
    app.add_option("--" + key, flag_values[key], "default: " + (value.empty() ? "(empty)" : value));
  }

  auto* ground = app.add_subcommand("ground-state", "Pekar minimiser; writes ground_state.lpsnap and ground_state.json");
  auto* evolve = app.add_subcommand("evolve", "time evolution; writes diagnostics.csv and final.lpsnap");
  auto* scan = app.add_subcommand("scan", "alpha scan; writes scan.csv and verdicts.jsonl");
  auto* fock = app.add_subcommand("fock-check", "Weyl-operator and reduced-density checks");
  auto* convert = app.add_subcommand("convert", "convert a snapshot between field representations");
  std::string input, output, direction;
  convert->add_option("input", input, "input snapshot")->required();
  convert->add_option("output", output, "output snapshot")->required();
  convert->add_option("--direction", direction, "to-polarization or to-fourier")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("validation", e.what(), 1);
  }

  try {
    lp::RawConfig raw = config_path.empty() ? lp::RawConfig{} : lp::read_config_file(config_path);
    for (const auto& o : overrides) lp::apply_override(raw, o);
    for (const auto& [key, value] : flag_values) {
      if (app.count("--" + key) > 0) lp::set_value(raw, key, value);
    }
    const lp::RunConfig config = lp::build_config(raw);

    if (*ground) {
      std::cout << lp::summary_json(lp::cmd_ground_state(config)) << '\n';
    } else if (*evolve) {
      std::cout << lp::summary_json(lp::cmd_evolve(config)) << '\n';
    } else if (*scan) {
      std::cout << lp::summary_json(lp::cmd_scan(config)) << '\n';
    } else if (*fock) {
      const lp::FockCheckSummary s = lp::cmd_fock_check(config);
      std::cout << lp::format_check_table(s.rows) << lp::summary_json(s) << '\n';
      if (!s.all_pass) return report_error("numerical", "one or more fock checks failed", 2);
    } else if (*convert) {
      lp::cmd_convert(input, output, lp::parse_convert_direction(direction), config.mode);
      std::cout << "{\"command\":\"convert\",\"output\":" << nlohmann::json(output).dump() << "}\n";
    }
  } catch (const lp::ValidationError& e) {
    return report_error("validation", e.what(), 1);
  } catch (const lp::NumericalError& e) {
    return report_error("numerical", e.what(), 2);
  } catch (const std::exception& e) {
    return report_error("numerical", e.what(), 2);
  }
  return 0;
}
