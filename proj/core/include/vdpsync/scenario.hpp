#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vdpsync/classical.hpp"
#include "vdpsync/designer.hpp"
#include "vdpsync/wigner.hpp"

namespace vdpsync::scenario {

enum class Kind {
  ClassicalShortcut,
  ClassicalReference,
  QuantumSteady,
  QuantumShortcut,
  QuantumScan,
  WignerCrosscheck,
};

std::string kind_name(Kind k);
Kind kind_from_name(const std::string& name);

/// A fully resolved scenario; every field has its default applied.
struct Scenario {
  Kind kind = Kind::ClassicalShortcut;
  std::string label;

  classical::ClassicalParams classical_params;
  fock::QuantumParams quantum_params;

  // design inputs
  classical::PhasePoint classical_alpha0;
  double tau = 0.25;
  double t_inf = 50.125;
  fock::Complex quantum_alpha0{-1.0, 1.0};
  double delta_y = 0.0;
  designer::IterationMode mode = designer::IterationMode::PerSegment;
  std::vector<double> tau_list;
  std::vector<double> delta_y_list;

  // numerics
  double dt = 1e-4;          // classical integration step
  double qdt = 1e-3;         // quantum integration step
  double shoot_tol = 1e-10;
  double gamma_max = 1e6;
  double continuity_tol = 1e-5;
  double blowup_cap = 1e3;
  double follow_horizon = 10.0;
  bool printed_extra_term = false;
  double design_tol = 1e-3;
  int n_max = 12;
  double tail_eps1 = 1.0;
  double tail_eps2 = 0.0;
  double steady_tol = 1e-8;
  double steady_t_max = 600.0;
  double horizon = 55.0;
  double sample_dt = 0.05;
  double threshold = 0.01;
  wigner::PDEConfig pde;
  double t_end = 2.0;  // wigner cross-check window

  // outputs
  int stride = 10;
  std::vector<double> snapshot_times;
  std::vector<std::pair<std::string, std::string>> output_files;  // role -> filename

  std::string output_file(const std::string& role) const;
};

/// Parse and resolve a scenario file; rejects unknown fields with
/// field-level messages.  Throws ConfigError.
Scenario parse_scenario(const std::filesystem::path& file);

/// Resolved configuration re-serialized with every default filled in.
std::string resolved_config_json(const Scenario& s);

struct RunOutcome {
  std::vector<std::filesystem::path> outputs;
  std::filesystem::path manifest;
};

/// Execute a scenario, writing outputs plus manifest into out_dir.
RunOutcome run_scenario(const Scenario& s, const std::filesystem::path& out_dir,
                        int workers = 1);

/// Version string recorded in manifests.
std::string code_version();

/// Scenario files shipped with the tool (sorted by name).
std::vector<std::filesystem::path> bundled_scenarios(const std::filesystem::path& dir);

}  // namespace vdpsync::scenario
