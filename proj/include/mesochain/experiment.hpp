#pragma once

#include "mesochain/chain.hpp"
#include "mesochain/closure.hpp"
#include "mesochain/fine_grid.hpp"
#include "mesochain/mesh.hpp"
#include "mesochain/meso_solver.hpp"

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace mesochain {

enum class InitialCondition
{
  ramp,
  oscillatory
};

std::string_view to_string(InitialCondition ic);
InitialCondition initial_condition_from_string(std::string_view name);

struct ExperimentConfig
{
  std::size_t n = 40000;
  double l = 1.0;
  double m = 1.0;
  PowerLawPotential potential;
  // 0 means "same as c_r"
  double wall_stiffness = 0.0;
  // Experiments default to walls half a lattice step outside the domain so
  // that the rest lattice is an exact equilibrium.
  bool wall_offset_half_h = true;
  // 0 means the default stability fraction
  double dt = 0.0;

  WindowKind window = WindowKind::box;
  std::size_t b = 50;
  // fine-grid points; 0 means min(n, 4096)
  std::size_t fine_g = 0;
  std::size_t order = 0;
  StressMode stress_mode = StressMode::integral;

  InitialCondition ic = InitialCondition::ramp;
  double gamma = 0.3;
  double amp = 5.0;
  double freq = 20.0;

  std::vector<double> snapshots = {0.0, 0.01, 0.03, 0.05, 0.06, 0.07};
  std::string out_dir = "out";

  bool exclude_boundary = true;
  std::vector<std::string> norms = {"linf", "l2"};

  // sweep-n particle counts
  std::vector<std::size_t> n_list = {10000, 20000, 40000, 80000};

  // run-meso
  FluxScheme scheme = FluxScheme::lax_friedrichs;
  std::string meso_closure = "integral";
  bool meso_convective = false;
  double cfl = 0.8;
  bool compare_micro = true;

  // reserved; every pipeline stage is deterministic
  std::optional<std::uint64_t> seed;

  double eta() const { return 1.0 / static_cast<double>(b); }
  double t_end() const { return snapshots.empty() ? 0.0 : snapshots.back(); }

  ChainConfig chain() const;
  WindowFunction window_function() const;
  MesoMesh mesh() const;
  FineGrid fine_grid() const;
  ChainState initial_state(const ChainConfig& cfg) const;

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

void to_json(nlohmann::ordered_json& j, const ExperimentConfig& cfg);
/// Missing keys keep their defaults. "eta" is accepted and must satisfy
/// b * eta = 1.
void from_json(const nlohmann::json& j, ExperimentConfig& cfg);

ExperimentConfig load_experiment_config(const std::string& path);

struct ErrorNorms
{
  double linf = 0.0;
  double l2 = 0.0;
};

/// Norms of exact - approx over the mesh nodes; boundary-affected nodes are
/// skipped when `exclude_boundary` is set. l2 is sqrt(sum err^2 * l_eta).
ErrorNorms error_norms(const MesoField& exact, const MesoField& approx, bool exclude_boundary);

double max_abs(const MesoField& f, bool exclude_boundary = false);

/// Piecewise-linear interpolant of (q_j, v_j) at the mesh nodes, constant
/// beyond the end particles.
MesoField micro_velocity_at_nodes(const ChainState& state,
                                  const MesoMesh& mesh,
                                  const WindowFunction& window);

struct QuantityPair
{
  std::string name;
  MesoField exact;
  MesoField approx;
  ErrorNorms err;
};

struct SnapshotComparison
{
  double t = 0.0;
  std::vector<QuantityPair> pairs;
  MesoField rho_bar;
  MesoField v_bar;
  double max_abs_tconv_exact = 0.0;
  double max_abs_tint_exact = 0.0;
  bool prescription_feasible = false;
  double kappa_sq = 0.0;
  // energy missing when the prescription is infeasible
  double energy_deficit = 0.0;
  double energy_drift = 0.0;

  const QuantityPair& pair(const std::string& name) const;
};

/// Exact vs closure comparison of one microstate: jacobian, velocity,
/// stress_int and stress_conv.
SnapshotComparison compare_snapshot(const ExperimentConfig& ecfg,
                                    const ChainConfig& cfg,
                                    const ChainState& state,
                                    double energy_ref);

struct ComparisonReport
{
  std::string command;
  std::size_t n = 0;
  std::vector<SnapshotComparison> snapshots;
  double runtime_seconds = 0.0;
  std::size_t micro_steps = 0;
  double energy_ref = 0.0;

  const SnapshotComparison& at(double t) const;
};

nlohmann::ordered_json report_json(const ComparisonReport& report,
                                    const std::vector<std::string>& norms);

/// Runs the microscale chain and calls `visit` at every snapshot time.
template <class Visit>
void
run_micro_snapshots(const ExperimentConfig& ecfg, const ChainConfig& cfg, Visit&& visit);

/// Microscale run plus comparison at every snapshot. No files written.
ComparisonReport run_comparison(const ExperimentConfig& ecfg);

/// Rightmost particle whose speed is at least `threshold`; 0 if none.
double wave_front(const ChainState& state, double threshold);

struct RegionErrors
{
  double front = 0.0;
  double unperturbed_linf = 0.0;
  double perturbed_linf = 0.0;
  std::size_t unperturbed_cells = 0;
  std::size_t perturbed_cells = 0;
};

/// Interior L-infinity error of a pair split at `front`: cells entirely to
/// its right are unperturbed, cells entirely to its left perturbed.
RegionErrors split_errors(const QuantityPair& pair, double front, bool exclude_boundary);

/// Initial mesoscale state: box/gaussian averages of the initial microstate.
MesoState initial_meso_state(const ExperimentConfig& ecfg, const ChainConfig& cfg);

// Output helpers used by the CLI. Every function writes into ecfg.out_dir
// and records what it wrote in `manifest`.
class Manifest
{
public:
  void add(const std::string& path, const std::string& schema);
  void write(const std::string& dir, const std::string& command) const;

private:
  nlohmann::ordered_json files_ = nlohmann::ordered_json::array();
};

std::string snapshot_tag(double t);

void write_effective_config(const ExperimentConfig& ecfg, Manifest& manifest);

int cmd_run_micro(const ExperimentConfig& ecfg);
int cmd_compare_closure(const ExperimentConfig& ecfg);
int cmd_sweep_n(const ExperimentConfig& ecfg);
int cmd_oscillatory(const ExperimentConfig& ecfg);
int cmd_run_meso(const ExperimentConfig& ecfg);
int cmd_reconstruct(const ExperimentConfig& ecfg);

template <class Visit>
void
run_micro_snapshots(const ExperimentConfig& ecfg, const ChainConfig& cfg, Visit&& visit)
{
  ChainIntegrator integ(cfg, ecfg.initial_state(cfg));
  for (double t : ecfg.snapshots) {
    integ.advance_to(t);
    visit(integ);
  }
}

} // namespace mesochain
