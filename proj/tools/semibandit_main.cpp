// semibandit command-line driver. Talks to the shared library exclusively
// through the public C interface in semibandit/semibandit.h.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "semibandit/semibandit.h"

namespace {

std::string json_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size() + 8);
  for (const char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

// One machine-readable error line on stderr, nonzero exit.
int report_failure(sb_status status) {
  std::cerr << "{\"error\":{\"status\":\"" << sb_status_name(status)
            << "\",\"message\":\"" << json_escape(sb_last_error())
            << "\"}}\n";
  return static_cast<int>(status);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) {
    std::cerr << "{\"error\":{\"status\":\"SB_ERROR_IO\",\"message\":\"cannot read "
              << json_escape(path) << "\"}}\n";
    std::exit(static_cast<int>(SB_ERROR_IO));
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual bandit simulation, tuning and replay toolkit"};
  app.require_subcommand(1);

  // simulate
  std::string sim_config;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Run a multi-replication simulation from a config file");
  simulate->add_option("--config", sim_config, "experiment config (JSON)")
      ->required();

  // tune
  std::string tune_config, tune_param, tune_grid, tune_out;
  CLI::App* tune = app.add_subcommand(
      "tune", "Grid-search one exploration parameter of a single-policy config");
  tune->add_option("--config", tune_config, "experiment config (JSON)")
      ->required();
  tune->add_option("--param", tune_param, "parameter to tune: v | omega")
      ->required();
  tune->add_option("--grid", tune_grid, "comma-separated grid values")
      ->required();
  tune->add_option("--out", tune_out, "CSV output path (value,median_RT)");

  // replay
  std::string replay_log, replay_policy, replay_policy_config, replay_out;
  long long replay_horizon = 5000;
  int replay_runs = 10;
  std::uint64_t replay_seed = 1;
  double replay_v = -1.0;
  CLI::App* replay = app.add_subcommand(
      "replay", "Evaluate a policy on a logged stream (plain or gzip)");
  replay->add_option("--log", replay_log, "log file")->required();
  replay->add_option("--policy", replay_policy,
                     "policy kind: uniform | lints | semits | acts | bose");
  replay->add_option("--policy-config", replay_policy_config,
                     "policy config file (JSON), overrides --policy");
  replay->add_option("--T", replay_horizon, "matched events per run")
      ->required();
  replay->add_option("--runs", replay_runs, "independent evaluation runs");
  replay->add_option("--seed", replay_seed, "base seed for the run streams");
  replay->add_option("--v", replay_v,
                     "exploration scale (with --policy; ignored otherwise)");
  replay->add_option("--out", replay_out, "CSV output path");

  // gen-log
  std::string genlog_config, genlog_out;
  long long genlog_length = 0;
  std::uint64_t genlog_seed = 1;
  CLI::App* genlog = app.add_subcommand(
      "gen-log", "Write a synthetic uniformly-logged dataset");
  genlog->add_option("--config", genlog_config, "generator config (JSON)")
      ->required();
  genlog->add_option("--length", genlog_length, "number of events")->required();
  genlog->add_option("--out", genlog_out, "output path")->required();
  genlog->add_option("--seed", genlog_seed, "generator seed");

  // audit
  std::string audit_file;
  CLI::App* audit = app.add_subcommand(
      "audit", "Check recorded-run invariants on an audit side file");
  audit->add_option("--run", audit_file, "audit CSV written by simulate")
      ->required();

  CLI11_PARSE(app, argc, argv);

  if (simulate->parsed()) {
    std::vector<char> summary(1 << 16);
    const sb_status status =
        sb_simulate(read_file(sim_config).c_str(), summary.data(), summary.size());
    if (status != SB_OK) return report_failure(status);
    std::cout << summary.data();
    return 0;
  }

  if (tune->parsed()) {
    double best = 0.0;
    const sb_status status =
        sb_tune(read_file(tune_config).c_str(), tune_param.c_str(),
                tune_grid.c_str(), tune_out.empty() ? nullptr : tune_out.c_str(),
                &best);
    if (status != SB_OK) return report_failure(status);
    std::cout << "best " << tune_param << " = " << best << "\n";
    return 0;
  }

  if (replay->parsed()) {
    std::string policy_json;
    if (!replay_policy_config.empty()) {
      policy_json = read_file(replay_policy_config);
    } else if (!replay_policy.empty()) {
      std::ostringstream built;
      built << "{\"kind\": \"" << replay_policy << "\"";
      if (replay_v >= 0.0) built << ", \"v\": " << replay_v;
      built << "}";
      policy_json = built.str();
    } else {
      std::cerr << "{\"error\":{\"status\":\"SB_ERROR_INVALID_ARGUMENT\","
                   "\"message\":\"replay needs --policy or --policy-config\"}}\n";
      return static_cast<int>(SB_ERROR_INVALID_ARGUMENT);
    }
    std::vector<char> summary(1 << 12);
    const sb_status status = sb_replay(
        replay_log.c_str(), policy_json.c_str(), replay_horizon, replay_runs,
        replay_seed, replay_out.empty() ? nullptr : replay_out.c_str(),
        summary.data(), summary.size());
    if (status != SB_OK) return report_failure(status);
    std::cout << summary.data() << "\n";
    return 0;
  }

  if (genlog->parsed()) {
    const sb_status status =
        sb_gen_log(read_file(genlog_config).c_str(), genlog_length, genlog_seed,
                   genlog_out.c_str());
    if (status != SB_OK) return report_failure(status);
    std::cout << "wrote " << genlog_length << " events to " << genlog_out
              << "\n";
    return 0;
  }

  if (audit->parsed()) {
    std::vector<char> report(1 << 20);
    const sb_status status =
        sb_audit(audit_file.c_str(), report.data(), report.size());
    std::cout << report.data();
    if (status != SB_OK) return report_failure(status);
    return 0;
  }

  return 0;
}
