#include "vdpsync/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vdpsync/io.hpp"

namespace vdpsync::scenario {

using nlohmann::json;

std::string kind_name(Kind k) {
  switch (k) {
    case Kind::ClassicalShortcut: return "classical-shortcut";
    case Kind::ClassicalReference: return "classical-reference";
    case Kind::QuantumSteady: return "quantum-steady";
    case Kind::QuantumShortcut: return "quantum-shortcut";
    case Kind::QuantumScan: return "quantum-scan";
    case Kind::WignerCrosscheck: return "wigner-crosscheck";
  }
  return "unknown";
}

Kind kind_from_name(const std::string& name) {
  for (Kind k : {Kind::ClassicalShortcut, Kind::ClassicalReference, Kind::QuantumSteady,
                 Kind::QuantumShortcut, Kind::QuantumScan, Kind::WignerCrosscheck})
    if (kind_name(k) == name) return k;
  throw ConfigError("unknown scenario kind '" + name + "'");
}

std::string code_version() { return "1.0.0"; }

namespace {

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }) == allowed.end())
      throw ConfigError(where + ": unknown field '" + key + "'");
  }
}

double get_num(const json& j, const std::string& where, const char* key, double dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return j.at(key).get<double>();
}

int get_int(const json& j, const std::string& where, const char* key, int dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  return j.at(key).get<int>();
}

bool get_bool(const json& j, const std::string& where, const char* key, bool dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_boolean()) throw ConfigError(where + "." + key + ": expected a boolean");
  return j.at(key).get<bool>();
}

std::string get_str(const json& j, const std::string& where, const char* key,
                    const std::string& dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_string()) throw ConfigError(where + "." + key + ": expected a string");
  return j.at(key).get<std::string>();
}

fock::Complex get_complex(const json& j, const std::string& where, const char* key,
                          fock::Complex dflt) {
  if (!j.contains(key)) return dflt;
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ConfigError(where + "." + key + ": expected [re, im]");
  return {v[0].get<double>(), v[1].get<double>()};
}

std::vector<double> get_list(const json& j, const std::string& where, const char* key,
                             std::vector<double> dflt) {
  if (!j.contains(key)) return dflt;
  const auto& v = j.at(key);
  if (!v.is_array()) throw ConfigError(where + "." + key + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(where + "." + key + ": expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

bool is_classical(Kind k) {
  return k == Kind::ClassicalShortcut || k == Kind::ClassicalReference;
}

std::map<std::string, std::string> default_outputs(Kind k) {
  switch (k) {
    case Kind::ClassicalShortcut:
      return {{"trajectory", "trajectory.csv"},
              {"driving", "driving.csv"},
              {"phase", "phase.csv"},
              {"summary", "summary.json"}};
    case Kind::ClassicalReference:
      return {{"trajectory", "trajectory.csv"}, {"summary", "summary.json"}};
    case Kind::QuantumSteady:
      return {{"state", "steady_state.json"},
              {"observables", "observables.csv"},
              {"summary", "summary.json"}};
    case Kind::QuantumShortcut:
      return {{"observables", "observables.csv"},
              {"iterations", "iterations.jsonl"},
              {"state", "final_state.json"},
              {"summary", "summary.json"}};
    case Kind::QuantumScan:
      return {{"scan", "scan.csv"}, {"iterations", "iterations.jsonl"},
              {"summary", "summary.json"}};
    case Kind::WignerCrosscheck:
      return {{"lindblad", "lindblad_observables.csv"},
              {"wigner", "wigner_observables.csv"},
              {"summary", "summary.json"}};
  }
  return {};
}

}  // namespace

std::string Scenario::output_file(const std::string& role) const {
  for (const auto& [r, f] : output_files)
    if (r == role) return f;
  throw ConfigError("scenario has no output role '" + role + "'");
}

Scenario parse_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open scenario file " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("scenario " + file.string() + ": " + e.what());
  }

  check_keys(j, "scenario",
             {"kind", "label", "classical", "quantum", "design", "numerics", "outputs"});
  if (!j.contains("kind")) throw ConfigError("scenario: missing 'kind'");
  Scenario s;
  s.kind = kind_from_name(get_str(j, "scenario", "kind", ""));
  s.label = get_str(j, "scenario", "label", file.stem().string());

  if (is_classical(s.kind)) {
    if (j.contains("quantum")) throw ConfigError("classical scenario cannot carry 'quantum'");
    const json c = j.value("classical", json::object());
    check_keys(c, "classical", {"kappa1", "kappa2", "eps0", "omega_ratio", "omega0"});
    const double omega0 = get_num(c, "classical", "omega0", 2.0 * std::numbers::pi);
    s.classical_params = classical::ClassicalParams::from_dimensionless(
        get_num(c, "classical", "kappa1", 1.0), get_num(c, "classical", "kappa2", 0.5),
        get_num(c, "classical", "eps0", 1.5), get_num(c, "classical", "omega_ratio", 1.05),
        omega0);
    s.classical_params.validate();
  } else {
    if (j.contains("classical")) throw ConfigError("quantum scenario cannot carry 'classical'");
    const json q = j.value("quantum", json::object());
    check_keys(q, "quantum", {"delta", "kappa1", "kappa2", "dim"});
    s.quantum_params.delta = get_num(q, "quantum", "delta", 2.0 * std::numbers::pi * 0.05);
    s.quantum_params.kappa1 = get_num(q, "quantum", "kappa1", 1.0);
    s.quantum_params.kappa2 = get_num(q, "quantum", "kappa2", 0.05);
    s.quantum_params.dim = get_int(q, "quantum", "dim", 40);
    if (s.quantum_params.kappa1 < 0.0)
      throw ConfigError("quantum.kappa1: must be non-negative");
    if (s.quantum_params.kappa2 < 0.0)
      throw ConfigError("quantum.kappa2: must be non-negative");
    s.quantum_params.validate();
  }

  const json d = j.value("design", json::object());
  switch (s.kind) {
    case Kind::ClassicalShortcut:
      check_keys(d, "design", {"tau", "t_inf", "alpha0"});
      s.tau = get_num(d, "design", "tau", 0.25);
      s.t_inf = get_num(d, "design", "t_inf", 50.125);
      {
        const fock::Complex a0 = get_complex(d, "design", "alpha0", {0.0, 0.0});
        s.classical_alpha0 = {a0.real(), a0.imag()};
      }
      break;
    case Kind::ClassicalReference:
      check_keys(d, "design", {"t_inf", "alpha0"});
      s.t_inf = get_num(d, "design", "t_inf", 50.125);
      {
        const fock::Complex a0 = get_complex(d, "design", "alpha0", {0.0, 0.0});
        s.classical_alpha0 = {a0.real(), a0.imag()};
      }
      break;
    case Kind::QuantumSteady:
      check_keys(d, "design", {});
      break;
    case Kind::QuantumShortcut:
      check_keys(d, "design", {"tau", "tau_list", "delta_y", "alpha0", "mode"});
      s.tau = get_num(d, "design", "tau", 2.0);
      s.tau_list = get_list(d, "design", "tau_list", {});
      s.delta_y = get_num(d, "design", "delta_y", 0.0);
      s.quantum_alpha0 = get_complex(d, "design", "alpha0", {-1.0, 1.0});
      break;
    case Kind::WignerCrosscheck:
      check_keys(d, "design", {"tau", "delta_y", "alpha0", "mode"});
      s.tau = get_num(d, "design", "tau", 2.0);
      s.delta_y = get_num(d, "design", "delta_y", 0.0);
      s.quantum_alpha0 = get_complex(d, "design", "alpha0", {-1.0, 1.0});
      break;
    case Kind::QuantumScan:
      check_keys(d, "design", {"tau_list", "delta_y_list", "alpha0", "mode"});
      s.tau_list = get_list(d, "design", "tau_list", {2.0, 1.0, 0.5});
      s.delta_y_list = get_list(d, "design", "delta_y_list", {0.0});
      s.quantum_alpha0 = get_complex(d, "design", "alpha0", {-1.0, 1.0});
      break;
  }
  if (d.contains("mode")) {
    const std::string m = get_str(d, "design", "mode", "per-segment");
    if (m == "per-segment") s.mode = designer::IterationMode::PerSegment;
    else if (m == "whole-path") s.mode = designer::IterationMode::WholePath;
    else throw ConfigError("design.mode: expected 'per-segment' or 'whole-path'");
  }

  const json n = j.value("numerics", json::object());
  if (is_classical(s.kind)) {
    check_keys(n, "numerics",
               {"dt", "shoot_tol", "gamma_max", "continuity_tol", "blowup_cap",
                "follow_horizon", "printed_extra_term"});
    s.dt = get_num(n, "numerics", "dt", 1e-4);
    s.shoot_tol = get_num(n, "numerics", "shoot_tol", 1e-10);
    s.gamma_max = get_num(n, "numerics", "gamma_max", 1e6);
    s.continuity_tol = get_num(n, "numerics", "continuity_tol", 1e-5);
    s.blowup_cap = get_num(n, "numerics", "blowup_cap", 1e3);
    s.follow_horizon = get_num(n, "numerics", "follow_horizon", 10.0);
    s.printed_extra_term = get_bool(n, "numerics", "printed_extra_term", false);
  } else {
    check_keys(n, "numerics",
               {"dt", "design_tol", "n_max", "tail_eps1", "tail_eps2", "steady_tol",
                "steady_t_max", "horizon", "sample_dt", "threshold", "pde_dt", "grid_points",
                "half_width", "theta", "solver_tol", "t_end"});
    s.qdt = get_num(n, "numerics", "dt", 1e-3);
    s.design_tol = get_num(n, "numerics", "design_tol", 1e-3);
    s.n_max = get_int(n, "numerics", "n_max", 12);
    s.tail_eps1 = get_num(n, "numerics", "tail_eps1", 1.0);
    s.tail_eps2 = get_num(n, "numerics", "tail_eps2", 0.0);
    s.steady_tol = get_num(n, "numerics", "steady_tol", 1e-8);
    s.steady_t_max = get_num(n, "numerics", "steady_t_max", 600.0);
    s.horizon = get_num(n, "numerics", "horizon", 55.0);
    s.sample_dt = get_num(n, "numerics", "sample_dt", 0.05);
    s.threshold = get_num(n, "numerics", "threshold", 0.01);
    s.pde.dt = get_num(n, "numerics", "pde_dt", 5e-4);
    s.pde.points = get_int(n, "numerics", "grid_points", 256);
    s.pde.half_width = get_num(n, "numerics", "half_width", 4.0);
    s.pde.theta = get_num(n, "numerics", "theta", 0.5);
    s.pde.solver_tol = get_num(n, "numerics", "solver_tol", 1e-10);
    s.t_end = get_num(n, "numerics", "t_end", 2.0);
    if (s.kind != Kind::WignerCrosscheck &&
        (n.contains("pde_dt") || n.contains("grid_points") || n.contains("half_width") ||
         n.contains("theta") || n.contains("solver_tol") || n.contains("t_end")))
      throw ConfigError("numerics: pde settings only apply to wigner-crosscheck scenarios");
  }

  const json o = j.value("outputs", json::object());
  auto defaults = default_outputs(s.kind);
  {
    std::vector<const char*> allowed{"stride", "snapshot_times"};
    for (const auto& [role, _] : defaults) allowed.push_back(role.c_str());
    if (!o.is_object()) throw ConfigError("outputs: expected an object");
    for (const auto& [key, _] : o.items()) {
      if (std::find_if(allowed.begin(), allowed.end(),
                       [&](const char* a) { return key == a; }) == allowed.end())
        throw ConfigError("outputs: unknown field '" + key + "'");
    }
  }
  s.stride = get_int(o, "outputs", "stride", is_classical(s.kind) ? 10 : 50);
  if (s.stride < 1) throw ConfigError("outputs.stride: must be at least 1");
  s.snapshot_times = get_list(o, "outputs", "snapshot_times", {});
  for (auto& [role, fname] : defaults) fname = get_str(o, "outputs", role.c_str(), fname);
  s.output_files.assign(defaults.begin(), defaults.end());
  return s;
}

namespace {

json complex_json(fock::Complex z) { return json::array({z.real(), z.imag()}); }

json scenario_to_json(const Scenario& s) {
  json j;
  j["kind"] = kind_name(s.kind);
  j["label"] = s.label;
  if (is_classical(s.kind)) {
    j["classical"] = {{"kappa1", s.classical_params.kappa1_scaled()},
                      {"kappa2", s.classical_params.kappa2_scaled()},
                      {"eps0", s.classical_params.eps0_scaled()},
                      {"omega_ratio", s.classical_params.omega / s.classical_params.omega0},
                      {"omega0", s.classical_params.omega0}};
    json d;
    d["t_inf"] = s.t_inf;
    d["alpha0"] = complex_json({s.classical_alpha0.x, s.classical_alpha0.y});
    if (s.kind == Kind::ClassicalShortcut) d["tau"] = s.tau;
    j["design"] = d;
    j["numerics"] = {{"dt", s.dt},
                     {"shoot_tol", s.shoot_tol},
                     {"gamma_max", s.gamma_max},
                     {"continuity_tol", s.continuity_tol},
                     {"blowup_cap", s.blowup_cap},
                     {"follow_horizon", s.follow_horizon},
                     {"printed_extra_term", s.printed_extra_term}};
  } else {
    j["quantum"] = {{"delta", s.quantum_params.delta},
                    {"kappa1", s.quantum_params.kappa1},
                    {"kappa2", s.quantum_params.kappa2},
                    {"dim", s.quantum_params.dim}};
    json d;
    if (s.kind == Kind::QuantumScan) {
      d["tau_list"] = s.tau_list;
      d["delta_y_list"] = s.delta_y_list;
    } else if (s.kind != Kind::QuantumSteady) {
      if (s.kind == Kind::QuantumShortcut && !s.tau_list.empty())
        d["tau_list"] = s.tau_list;
      else
        d["tau"] = s.tau;
      d["delta_y"] = s.delta_y;
    }
    if (s.kind != Kind::QuantumSteady) {
      d["alpha0"] = complex_json(s.quantum_alpha0);
      d["mode"] =
          s.mode == designer::IterationMode::PerSegment ? "per-segment" : "whole-path";
    }
    j["design"] = d;
    json n = {{"dt", s.qdt},
              {"design_tol", s.design_tol},
              {"n_max", s.n_max},
              {"tail_eps1", s.tail_eps1},
              {"tail_eps2", s.tail_eps2},
              {"steady_tol", s.steady_tol},
              {"steady_t_max", s.steady_t_max},
              {"horizon", s.horizon},
              {"sample_dt", s.sample_dt},
              {"threshold", s.threshold}};
    if (s.kind == Kind::WignerCrosscheck) {
      n["pde_dt"] = s.pde.dt;
      n["grid_points"] = s.pde.points;
      n["half_width"] = s.pde.half_width;
      n["theta"] = s.pde.theta;
      n["solver_tol"] = s.pde.solver_tol;
      n["t_end"] = s.t_end;
    }
    j["numerics"] = n;
  }
  json o;
  o["stride"] = s.stride;
  o["snapshot_times"] = s.snapshot_times;
  for (const auto& [role, fname] : s.output_files) o[role] = fname;
  j["outputs"] = o;
  return j;
}

struct OutputCollector {
  std::filesystem::path dir;
  std::vector<std::filesystem::path> files;

  std::filesystem::path path(const std::string& name) {
    files.push_back(dir / name);
    return files.back();
  }
};

void write_summary(OutputCollector& out, const Scenario& s, const json& extra) {
  json j = extra;
  j["label"] = s.label;
  j["kind"] = kind_name(s.kind);
  std::ofstream f(out.path(s.output_file("summary")));
  f << j.dump(2) << '\n';
}

void run_classical_common(const Scenario& s, OutputCollector& out, bool with_design) {
  const auto& p = s.classical_params;
  classical::DrivingSignal driving;
  json summary;
  classical::PhasePoint start = s.classical_alpha0;
  double export_end = 0.0;

  if (with_design) {
    const classical::ShootOptions shoot{s.shoot_tol, s.gamma_max, 200};
    const classical::ShortcutDesign design =
        classical::design_shortcut(p, s.classical_alpha0, s.tau, s.t_inf, s.dt, shoot,
                                   s.continuity_tol);
    driving = design.driving;
    export_end = s.tau + s.follow_horizon;
    summary["branch_point"] = complex_json({design.branch.point.x, design.branch.point.y});
    summary["y_slope_inf"] = design.branch.y_slope;
    summary["gamma0"] = design.gamma0;
    summary["junction_mismatch"] = design.driving.junction_mismatch();
    summary["phi"] = design.driving.phi;
    // transient profile at full resolution
    io::CsvWriter w(out.path(s.output_file("driving")), {"t", "x", "y", "eps"});
    for (std::size_t i = 0; i < design.grid_times.size(); ++i)
      w.row({design.grid_times[i], design.x_path[i], design.y_path[i],
             design.driving(design.grid_times[i])});
  } else {
    driving = classical::DrivingSignal::sinusoid(p.eps0, p.omega, 0.0);
    export_end = s.t_inf;
    const classical::BranchPoint b =
        classical::find_branch_point(p, s.t_inf, s.dt, s.classical_alpha0);
    summary["branch_point"] = complex_json({b.point.x, b.point.y});
    summary["y_slope_inf"] = b.y_slope;
    summary["short_horizon_warning"] = b.short_horizon;
  }

  classical::IntegrateOptions iopts;
  iopts.blowup_cap = s.blowup_cap;
  iopts.record_stride = s.stride;
  const classical::ClassicalTrajectory traj =
      classical::integrate(start, driving, export_end, s.dt, p, iopts);
  {
    io::CsvWriter w(out.path(s.output_file("trajectory")), {"t", "x", "y", "eps"});
    for (std::size_t i = 0; i < traj.times.size(); ++i)
      w.row({traj.times[i], traj.points[i].x, traj.points[i].y, driving(traj.times[i])});
  }
  if (with_design) {
    const classical::PhaseSeries phase =
        classical::phase_difference(traj, p.omega, driving.phi);
    io::CsvWriter w(out.path(s.output_file("phase")), {"t", "dphi", "dphi_mod_pi"});
    for (std::size_t i = 0; i < phase.times.size(); ++i)
      w.row({phase.times[i], phase.raw[i], phase.folded[i]});
    summary["origin_crossing"] = phase.origin_crossing;
  }
  write_summary(out, s, summary);
}

json moment_json(const fock::MomentSet& m) {
  return {{"mean", complex_json(m.mean)},
          {"third", complex_json(m.third)},
          {"phonon", m.phonon}};
}

void write_observables_csv(const std::filesystem::path& file,
                           const lindblad::QuantumTrajectory& traj) {
  io::CsvWriter w(file,
                  {"t", "re_mean", "im_mean", "re_third", "im_third", "phonon", "trace_dist"});
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const auto& m = traj.observables[i];
    const double dist = traj.trace_dist.empty() ? 0.0 : traj.trace_dist[i];
    w.row({traj.times[i], m.mean.real(), m.mean.imag(), m.third.real(), m.third.imag(),
           m.phonon, dist});
  }
}

void append_iteration_lines(std::ofstream& f, const std::vector<designer::IterationRecord>& recs,
                            const json& cell_info) {
  for (const auto& r : recs) {
    json line;
    if (!cell_info.is_null()) line["cell"] = cell_info;
    line["segment"] = r.segment;
    line["iteration"] = r.iteration;
    line["offset"] = complex_json(r.offset);
    line["corrected_target"] = complex_json(r.corrected_target);
    f << line.dump() << '\n';
  }
}

void run_quantum_steady(const Scenario& s, OutputCollector& out) {
  lindblad::SteadyStateOptions sopts{s.steady_tol, s.steady_t_max, s.qdt, 1.0};
  const fock::DensityMatrix rho_ss =
      lindblad::steady_state(s.tail_eps1, s.tail_eps2, s.quantum_params, sopts);
  io::write_density_matrix(out.path(s.output_file("state")), rho_ss);

  // convergence trace from the vacuum seed over the reporting horizon
  fock::DensityMatrix vac;
  vac.m = fock::Matrix::Zero(s.quantum_params.dim, s.quantum_params.dim);
  vac.m(0, 0) = 1.0;
  lindblad::PropagateOptions popts;
  popts.dt = s.qdt;
  popts.observable_stride = s.stride;
  const auto schedule = lindblad::ControlSchedule::constant(s.tail_eps1, s.tail_eps2);
  const lindblad::QuantumTrajectory traj =
      lindblad::propagate(vac, schedule, s.horizon, s.quantum_params, popts, {}, &rho_ss);
  write_observables_csv(out.path(s.output_file("observables")), traj);

  const fock::MomentSet m = fock::moments(rho_ss);
  json summary;
  summary["steady"] = moment_json(m);
  summary["phonon_ratio_formula"] =
      s.quantum_params.kappa2 > 0.0
          ? s.quantum_params.kappa1 / (2.0 * s.quantum_params.kappa2) + 1.0
          : 0.0;
  write_summary(out, s, summary);
}

std::string tau_suffix(double tau) {
  std::string v = io::format_double(tau);
  for (char& c : v)
    if (c == '.') c = 'p';
  return "_tau" + v;
}

std::string with_suffix(const std::string& name, const std::string& suffix) {
  const auto dot = name.rfind('.');
  if (dot == std::string::npos) return name + suffix;
  return name.substr(0, dot) + suffix + name.substr(dot);
}

void run_quantum_shortcut(const Scenario& s, OutputCollector& out) {
  lindblad::SteadyStateOptions sopts{s.steady_tol, s.steady_t_max, s.qdt, 1.0};
  const fock::DensityMatrix rho_inf =
      lindblad::steady_state(s.tail_eps1, s.tail_eps2, s.quantum_params, sopts);
  const fock::MomentSet target = fock::moments(rho_inf);
  const fock::DensityMatrix rho0 = fock::coherent_state(s.quantum_alpha0, s.quantum_params.dim);

  designer::DesignOptions dopts;
  dopts.n_max = s.n_max;
  dopts.tol = s.design_tol;
  dopts.mode = s.mode;
  dopts.dt = s.qdt;
  dopts.tail_eps1 = s.tail_eps1;
  dopts.tail_eps2 = s.tail_eps2;
  dopts.propagate.dt = s.qdt;

  lindblad::PropagateOptions popts;
  popts.dt = s.qdt;
  popts.observable_stride = s.stride;

  json summary;
  summary["alpha_inf"] = complex_json(target.mean);
  summary["target"] = moment_json(target);

  const bool multi = !s.tau_list.empty();
  std::ofstream iters(out.path(s.output_file("iterations")));
  const std::vector<double> taus = multi ? s.tau_list : std::vector<double>{s.tau};

  json crossings = json::object();
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double tau = taus[i];
    designer::PathSpec spec{s.quantum_alpha0, target.mean, s.delta_y, tau};
    const designer::DesignResult design =
        designer::iterate_design(spec, s.quantum_params, dopts);
    append_iteration_lines(iters, design.records,
                           multi ? json{{"tau", tau}} : json());

    const std::string suffix = multi ? tau_suffix(tau) : std::string();
    const lindblad::QuantumTrajectory traj =
        lindblad::propagate(rho0, design.schedule, s.horizon, s.quantum_params, popts,
                            multi ? std::span<const double>{} : std::span<const double>(s.snapshot_times),
                            &rho_inf);
    write_observables_csv(out.path(with_suffix(s.output_file("observables"), suffix)), traj);
    if (!multi) {
      for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
        std::ostringstream name;
        name << "snapshot_" << k << ".json";
        io::write_density_matrix(out.path(name.str()), traj.snapshots[k].second);
      }
    }
    io::write_density_matrix(out.path(with_suffix(s.output_file("state"), suffix)),
                             design.rho_end);
    json info;
    info["delta3"] = designer::delta3(fock::moments(design.rho_end), target);
    info["design_converged"] = design.converged;
    lindblad::DistanceCurve curve{traj.times, traj.trace_dist};
    try {
      info["crossing_time"] = lindblad::crossing_time(curve, s.threshold);
    } catch (const NeverCrossesError&) {
      info["crossing_time"] = nullptr;
    }
    if (multi) {
      crossings[io::format_double(tau)] = info;
    } else {
      summary.update(info);
    }
  }

  if (multi) {
    // constant-drive baseline for comparison
    const auto schedule = lindblad::ControlSchedule::constant(s.tail_eps1, s.tail_eps2);
    const lindblad::QuantumTrajectory traj =
        lindblad::propagate(rho0, schedule, s.horizon, s.quantum_params, popts, {}, &rho_inf);
    write_observables_csv(out.path(with_suffix(s.output_file("observables"), "_const")), traj);
    lindblad::DistanceCurve curve{traj.times, traj.trace_dist};
    json info;
    try {
      info["crossing_time"] = lindblad::crossing_time(curve, s.threshold);
    } catch (const NeverCrossesError&) {
      info["crossing_time"] = nullptr;
    }
    crossings["const"] = info;
    summary["curves"] = crossings;
  }
  write_summary(out, s, summary);
}

void run_quantum_scan(const Scenario& s, OutputCollector& out, int workers) {
  designer::PathSpec tmpl{s.quantum_alpha0, {0.0, 0.0}, 0.0, 1.0};
  designer::DesignOptions dopts;
  dopts.n_max = s.n_max;
  dopts.tol = s.design_tol;
  dopts.mode = s.mode;
  dopts.dt = s.qdt;
  dopts.tail_eps1 = s.tail_eps1;
  dopts.tail_eps2 = s.tail_eps2;
  dopts.propagate.dt = s.qdt;
  dopts.steady = {s.steady_tol, s.steady_t_max, s.qdt, 1.0};
  const designer::ScanResult scan =
      designer::scan_delta3(s.delta_y_list, s.tau_list, tmpl, s.quantum_params, dopts, workers);

  {
    io::CsvWriter w(out.path(s.output_file("scan")),
                    {"delta_y", "tau", "delta3", "re_third", "im_third", "converged"});
    for (const auto& cell : scan.cells)
      w.row({cell.delta_y, cell.tau, cell.delta3, cell.final_moments.third.real(),
             cell.final_moments.third.imag(), cell.converged ? 1.0 : 0.0});
  }
  {
    std::ofstream f(out.path(s.output_file("iterations")));
    for (const auto& cell : scan.cells)
      append_iteration_lines(f, cell.records,
                             json{{"delta_y", cell.delta_y}, {"tau", cell.tau}});
  }
  json summary;
  summary["target"] = moment_json(scan.target);
  summary["cells"] = scan.cells.size();
  write_summary(out, s, summary);
}

void run_wigner_crosscheck(const Scenario& s, OutputCollector& out) {
  lindblad::SteadyStateOptions sopts{s.steady_tol, s.steady_t_max, s.qdt, 1.0};
  const fock::DensityMatrix rho_inf =
      lindblad::steady_state(s.tail_eps1, s.tail_eps2, s.quantum_params, sopts);
  const fock::MomentSet target = fock::moments(rho_inf);

  designer::PathSpec spec{s.quantum_alpha0, target.mean, s.delta_y, s.tau};
  designer::DesignOptions dopts;
  dopts.n_max = s.n_max;
  dopts.tol = s.design_tol;
  dopts.mode = s.mode;
  dopts.dt = s.qdt;
  dopts.tail_eps1 = s.tail_eps1;
  dopts.tail_eps2 = s.tail_eps2;
  dopts.propagate.dt = s.qdt;
  const designer::DesignResult design = designer::iterate_design(spec, s.quantum_params, dopts);

  const fock::DensityMatrix rho0 = fock::coherent_state(s.quantum_alpha0, s.quantum_params.dim);
  lindblad::PropagateOptions popts;
  popts.dt = s.qdt;
  popts.observable_stride = std::max(1, static_cast<int>(std::lround(s.sample_dt / s.qdt)));
  const lindblad::QuantumTrajectory me = lindblad::propagate(
      rho0, design.schedule, s.t_end, s.quantum_params, popts, {}, &rho_inf);
  write_observables_csv(out.path(s.output_file("lindblad")), me);

  const wigner::WignerSeries ws =
      wigner::evolve(design.schedule, s.quantum_params, s.pde, s.quantum_alpha0, s.t_end,
                     s.sample_dt, s.snapshot_times);
  {
    io::CsvWriter w(out.path(s.output_file("wigner")),
                    {"t", "re_mean", "im_mean", "re_third", "im_third", "phonon", "mass"});
    for (std::size_t i = 0; i < ws.times.size(); ++i) {
      const auto& m = ws.moments[i];
      w.row({ws.times[i], m.mean.real(), m.mean.imag(), m.third.real(), m.third.imag(),
             m.phonon, ws.mass[i]});
    }
  }
  for (std::size_t k = 0; k < ws.snapshots.size(); ++k) {
    std::ostringstream base;
    base << "wigner_snapshot_" << k;
    const auto& grid = ws.snapshots[k].second;
    {
      std::ofstream f(out.path(base.str() + ".csv"));
      for (int iy = 0; iy < grid.m; ++iy) {
        for (int ix = 0; ix < grid.m; ++ix) {
          if (ix) f << ',';
          f << io::format_double(std::abs(grid.at(ix, iy)));
        }
        f << '\n';
      }
    }
    json meta{{"t", ws.snapshots[k].first},
              {"half_width", grid.half_width},
              {"points", grid.m}};
    std::ofstream mf(out.path(base.str() + ".meta.json"));
    mf << meta.dump() << '\n';
  }

  // align the two series on shared sample instants
  double max_mean_dev = 0.0, max_third_dev = 0.0;
  std::size_t compared = 0;
  for (std::size_t i = 0; i < ws.times.size(); ++i) {
    for (std::size_t jdx = 0; jdx < me.times.size(); ++jdx) {
      if (std::abs(me.times[jdx] - ws.times[i]) < 1e-9) {
        const auto& a = ws.moments[i];
        const auto& b = me.observables[jdx];
        max_mean_dev = std::max(max_mean_dev, std::abs(a.mean - b.mean) / std::abs(b.mean));
        max_third_dev =
            std::max(max_third_dev, std::abs(a.third - b.third) / std::abs(b.third));
        ++compared;
        break;
      }
    }
  }
  json summary;
  summary["compared_samples"] = compared;
  summary["max_rel_mean_deviation"] = max_mean_dev;
  summary["max_rel_third_deviation"] = max_third_dev;
  summary["mass_final"] = ws.mass.back();
  summary["design_converged"] = design.converged;
  write_summary(out, s, summary);
}

}  // namespace

std::string resolved_config_json(const Scenario& s) { return scenario_to_json(s).dump(2); }

RunOutcome run_scenario(const Scenario& s, const std::filesystem::path& out_dir, int workers) {
  const auto t_start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out_dir);
  OutputCollector out{out_dir, {}};

  {
    std::ofstream f(out.path("resolved_config.json"));
    f << resolved_config_json(s) << '\n';
  }

  switch (s.kind) {
    case Kind::ClassicalShortcut: run_classical_common(s, out, true); break;
    case Kind::ClassicalReference: run_classical_common(s, out, false); break;
    case Kind::QuantumSteady: run_quantum_steady(s, out); break;
    case Kind::QuantumShortcut: run_quantum_shortcut(s, out); break;
    case Kind::QuantumScan: run_quantum_scan(s, out, workers); break;
    case Kind::WignerCrosscheck: run_wigner_crosscheck(s, out); break;
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  json manifest;
  manifest["code_version"] = code_version();
  manifest["wall_time_seconds"] = wall;
  manifest["scenario"] = scenario_to_json(s);
  json files = json::array();
  for (const auto& f : out.files) {
    std::ostringstream hex;
    hex << std::hex << io::fnv1a64_file(f);
    files.push_back({{"file", f.filename().string()}, {"fnv1a64", hex.str()}});
  }
  manifest["outputs"] = files;
  RunOutcome outcome;
  outcome.outputs = out.files;
  outcome.manifest = out_dir / "manifest.json";
  std::ofstream mf(outcome.manifest);
  mf << manifest.dump(2) << '\n';
  return outcome;
}

std::vector<std::filesystem::path> bundled_scenarios(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::is_directory(dir)) return out;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace vdpsync::scenario
