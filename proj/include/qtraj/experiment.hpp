#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qtraj/signal.hpp"

namespace qtraj {

// One experiment = lattice + probe + initial state + integration + analysis.
// Loaded from a JSON file with sections named after the fields below; the
// run manifest embeds the same JSON so any run can be reproduced from its
// manifest alone.
struct ExperimentConfig {
  LatticeSpec lattice;

  std::vector<int> probe_sites;
  double probe_strength = 0.0;
  double probe_efficiency = 1.0;

  enum class InitialKind { Eigenstate, Site, Thermal };
  InitialKind initial_kind = InitialKind::Eigenstate;
  int initial_index = 1;    // eigenstate k or site n
  double initial_beta = 1.0;

  IntegrationConfig integration;
  int n_traj = 1;

  struct Analysis {
    double omega_max = 0.0;  // 0 -> 1.2 x spectral span
    int omega_points = 400;
    bool mean_subtract = true;
    bool floor_subtract = false;
  } analysis;

  std::vector<int> peak_scan_sizes;      // `peak-scan`
  std::vector<double> zeno_strengths;    // `zeno`
  RVec correlation_taus;                 // `correlation`; empty -> default grid

  ProbeConfig probe() const;
  Mat initial_state() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

// Reads a config file; a run manifest (object with "config" inside) is
// unwrapped so manifests can be re-run directly.
ExperimentConfig load_config(const std::string& path);

// Every invariant violation, without running. Empty = valid.
std::vector<std::string> validate_config(const ExperimentConfig& cfg);

struct RunOptions {
  int n_threads = 0;                         // 0 -> all cores
  std::optional<std::uint64_t> seed_override;
};

// Executes one subcommand, writing CSV outputs plus a JSON manifest into
// out_dir. Returns the list of files written. Throws ConfigError for
// configuration problems (CLI exit 2) and std::runtime_error for runtime
// failures (exit 1).
std::vector<std::string> run_subcommand(const std::string& subcommand,
                                        const std::string& config_path,
                                        const std::string& out_dir,
                                        const RunOptions& options = {});

std::string sha256_hex(const std::string& bytes);

namespace io {
std::string format_double(double v);  // shortest round-trip decimal
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
}  // namespace io

}  // namespace qtraj
