#include "mesochain/experiment.hpp"

#include "mesochain/averaging.hpp"
#include "mesochain/deconvolution.hpp"
#include "mesochain/error.hpp"
#include "mesochain/io.hpp"
#include "mesochain/serialize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

namespace mesochain {

using ojson = nlohmann::ordered_json;

std::string_view
to_string(InitialCondition ic)
{
  return ic == InitialCondition::ramp ? "ramp" : "oscillatory";
}

InitialCondition
initial_condition_from_string(std::string_view name)
{
  if (name == "ramp")
    return InitialCondition::ramp;
  if (name == "oscillatory")
    return InitialCondition::oscillatory;
  throw ConfigError("unknown initial condition '" + std::string(name) + "'");
}

ChainConfig
ExperimentConfig::chain() const
{
  ChainConfig cfg = ChainConfig::make(n, l, m, potential, wall_offset_half_h);
  if (wall_stiffness > 0.0)
    cfg.wall_stiffness = wall_stiffness;
  if (dt > 0.0)
    cfg.dt = dt;
  cfg.validate();
  return cfg;
}

WindowFunction
ExperimentConfig::window_function() const
{
  return {window, eta(), l};
}

MesoMesh
ExperimentConfig::mesh() const
{
  return MesoMesh::with_cells(b, l);
}

FineGrid
ExperimentConfig::fine_grid() const
{
  return fine_g > 0 ? FineGrid::with_points(fine_g, l) : FineGrid::default_for(n, l);
}

ChainState
ExperimentConfig::initial_state(const ChainConfig& cfg) const
{
  if (ic == InitialCondition::ramp)
    return init_ramp(cfg, gamma);
  return init_oscillatory(cfg, gamma, amp, freq);
}

void
ExperimentConfig::validate() const
{
  if (n < 2)
    throw ConfigError("need at least two particles");
  if (b < 1)
    throw ConfigError("need at least one mesoscale cell");
  if (b > n / 10)
    std::cerr << "warning: " << b << " cells for " << n
              << " particles leaves little scale separation\n";
  if (!std::is_sorted(snapshots.begin(), snapshots.end()))
    throw ConfigError("snapshot times must be sorted");
  if (!snapshots.empty() && snapshots.front() < 0.0)
    throw ConfigError("snapshot times must be nonnegative");
  for (const auto& norm : norms)
    if (norm != "linf" && norm != "l2")
      throw ConfigError("unknown norm '" + norm + "' (expected linf or l2)");
  if (meso_closure != "integral" && meso_closure != "local_eos")
    throw ConfigError("unknown meso closure '" + meso_closure + "'");
  if (!(cfl > 0.0 && cfl <= 0.9))
    throw ConfigError("meso CFL target must lie in (0, 0.9]");
  chain();
  window_function().validate();
  fine_grid().validate();
}

void
to_json(ojson& j, const ExperimentConfig& c)
{
  ojson chain;
  chain["n"] = c.n;
  chain["l"] = c.l;
  chain["m"] = c.m;
  chain["potential"] = c.potential;
  chain["wall_stiffness"] = c.wall_stiffness > 0.0 ? c.wall_stiffness : c.potential.c_r;
  chain["wall_offset_half_h"] = c.wall_offset_half_h;
  chain["dt"] = c.chain().dt;
  j["chain"] = chain;
  j["window"] = {{"kind", to_string(c.window)}, {"b", c.b}, {"eta", c.eta()}};
  j["fine_g"] = c.fine_grid().g;
  j["order"] = c.order;
  j["stress_mode"] = to_string(c.stress_mode);
  j["ic"] = {{"kind", to_string(c.ic)}, {"gamma", c.gamma}, {"amp", c.amp}, {"freq", c.freq}};
  j["snapshots"] = c.snapshots;
  j["out_dir"] = c.out_dir;
  j["metrics"] = {{"exclude_boundary", c.exclude_boundary}, {"norms", c.norms}};
  j["sweep"] = {{"n_list", c.n_list}};
  j["meso"] = {{"scheme", to_string(c.scheme)},
               {"closure", c.meso_closure},
               {"convective", c.meso_convective},
               {"cfl", c.cfl},
               {"compare_micro", c.compare_micro}};
  if (c.seed)
    j["seed"] = *c.seed;
  else
    j["seed"] = nullptr;
}

void
from_json(const nlohmann::json& j, ExperimentConfig& c)
{
  if (j.contains("chain")) {
    const auto& ch = j.at("chain");
    c.n = ch.value("n", c.n);
    c.l = ch.value("l", c.l);
    c.m = ch.value("m", c.m);
    if (ch.contains("potential"))
      c.potential = ch.at("potential").get<PowerLawPotential>();
    c.wall_stiffness = ch.value("wall_stiffness", c.wall_stiffness);
    c.wall_offset_half_h = ch.value("wall_offset_half_h", c.wall_offset_half_h);
    c.dt = ch.value("dt", c.dt);
  }
  if (j.contains("window")) {
    const auto& w = j.at("window");
    if (w.contains("kind"))
      c.window = window_kind_from_string(w.at("kind").get<std::string>());
    c.b = w.value("b", c.b);
    if (w.contains("eta")) {
      const double eta = w.at("eta").get<double>();
      if (!w.contains("b"))
        c.b = static_cast<std::size_t>(std::llround(1.0 / eta));
      if (std::abs(eta * static_cast<double>(c.b) - 1.0) > 1e-9)
        throw ConfigError("window eta must equal 1 / b");
    }
  }
  c.fine_g = j.value("fine_g", c.fine_g);
  c.order = j.value("order", c.order);
  if (j.contains("stress_mode"))
    c.stress_mode = stress_mode_from_string(j.at("stress_mode").get<std::string>());
  if (j.contains("ic")) {
    const auto& ic = j.at("ic");
    if (ic.contains("kind"))
      c.ic = initial_condition_from_string(ic.at("kind").get<std::string>());
    c.gamma = ic.value("gamma", c.gamma);
    c.amp = ic.value("amp", c.amp);
    c.freq = ic.value("freq", c.freq);
  }
  if (j.contains("snapshots"))
    c.snapshots = j.at("snapshots").get<std::vector<double>>();
  c.out_dir = j.value("out_dir", c.out_dir);
  if (j.contains("metrics")) {
    const auto& mt = j.at("metrics");
    c.exclude_boundary = mt.value("exclude_boundary", c.exclude_boundary);
    if (mt.contains("norms"))
      c.norms = mt.at("norms").get<std::vector<std::string>>();
  }
  if (j.contains("sweep") && j.at("sweep").contains("n_list"))
    c.n_list = j.at("sweep").at("n_list").get<std::vector<std::size_t>>();
  if (j.contains("meso")) {
    const auto& me = j.at("meso");
    if (me.contains("scheme"))
      c.scheme = flux_scheme_from_string(me.at("scheme").get<std::string>());
    c.meso_closure = me.value("closure", c.meso_closure);
    c.meso_convective = me.value("convective", c.meso_convective);
    c.cfl = me.value("cfl", c.cfl);
    c.compare_micro = me.value("compare_micro", c.compare_micro);
  }
  if (j.contains("seed") && !j.at("seed").is_null())
    c.seed = j.at("seed").get<std::uint64_t>();
}

ExperimentConfig
load_experiment_config(const std::string& path)
{
  ExperimentConfig cfg;
  try {
    nlohmann::json::parse(read_text_file(path)).get_to(cfg);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse config " + path + ": " + e.what());
  }
  return cfg;
}

ErrorNorms
error_norms(const MesoField& exact, const MesoField& approx, bool exclude_boundary)
{
  if (exact.size() != approx.size())
    throw GridMismatchError("compared fields have different sizes");
  ErrorNorms e;
  double sq = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    if (exclude_boundary && !exact.boundary_affected.empty() && exact.boundary_affected[i])
      continue;
    const double d = std::abs(exact[i] - approx[i]);
    e.linf = std::max(e.linf, d);
    sq += d * d;
  }
  e.l2 = std::sqrt(sq * exact.mesh.l_eta());
  return e;
}

double
max_abs(const MesoField& f, bool exclude_boundary)
{
  double out = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (exclude_boundary && !f.boundary_affected.empty() && f.boundary_affected[i])
      continue;
    out = std::max(out, std::abs(f[i]));
  }
  return out;
}

MesoField
micro_velocity_at_nodes(const ChainState& state, const MesoMesh& mesh, const WindowFunction& window)
{
  MesoField out = MesoField::zeros(mesh, window, Quantity::velocity);
  const auto& q = state.q;
  for (std::size_t b = 0; b < mesh.b; ++b) {
    const double x = mesh.center(b);
    if (x <= q.front()) {
      out[b] = state.v.front();
      continue;
    }
    if (x >= q.back()) {
      out[b] = state.v.back();
      continue;
    }
    const auto it = std::upper_bound(q.begin(), q.end(), x);
    const auto k = static_cast<std::size_t>(it - q.begin());
    const double s = (x - q[k - 1]) / (q[k] - q[k - 1]);
    out[b] = (1.0 - s) * state.v[k - 1] + s * state.v[k];
  }
  return out;
}

const QuantityPair&
SnapshotComparison::pair(const std::string& name) const
{
  for (const auto& p : pairs)
    if (p.name == name)
      return p;
  throw ConfigError("no compared quantity named '" + name + "'");
}

SnapshotComparison
compare_snapshot(const ExperimentConfig& ecfg,
                 const ChainConfig& cfg,
                 const ChainState& state,
                 double energy_ref)
{
  const WindowFunction window = ecfg.window_function();
  const MesoMesh mesh = ecfg.mesh();
  const FineGrid grid = ecfg.fine_grid();

  SnapshotComparison sc;
  sc.t = state.t;
  sc.rho_bar = average_density(cfg, state, window, mesh);
  const MesoField mom = average_momentum(cfg, state, window, mesh);
  sc.v_bar = average_velocity(cfg, state, window, mesh);

  const MesoField j_exact = jacobian_at_mesh(cfg, state, mesh).field;
  const MesoField v_exact = micro_velocity_at_nodes(state, mesh, window);
  const MesoField tc_exact = convective_stress_exact(cfg, state, window, mesh);
  const MesoField ti_exact = interaction_stress_exact(cfg, state, window, mesh);
  sc.max_abs_tconv_exact = max_abs(tc_exact);
  sc.max_abs_tint_exact = max_abs(ti_exact);
  sc.energy_drift = (total_energy(cfg, state) - energy_ref) / std::abs(energy_ref);

  // zero-order prescription; its kappa_sq is reported at every order
  MesoField tc_zero = MesoField::zeros(mesh, window, Quantity::stress_conv);
  try {
    const PrescribedState st = prescribe_velocities(
      sc.v_bar, prescribe_positions(sc.rho_bar, cfg), energy_ref, window, cfg);
    sc.prescription_feasible = true;
    sc.kappa_sq = st.kappa_sq;
    tc_zero = stress_conv_zero(sc.v_bar, st, window, cfg);
  } catch (const InfeasiblePrescriptionError& e) {
    sc.energy_deficit = e.deficit();
  }

  MesoField j_approx = sc.rho_bar;
  MesoField v_approx = sc.v_bar;
  MesoField ti_approx;
  MesoField tc_approx;
  if (ecfg.order == 0) {
    j_approx.quantity = Quantity::jacobian;
    for (double& x : j_approx.values)
      x *= cfg.l / cfg.m;
    ti_approx = stress_int_zero(sc.rho_bar, window, cfg, ecfg.stress_mode, grid);
    tc_approx = tc_zero;
  } else {
    const ConvOperator op(window, grid);
    const FineField rho_f = interpolate_to_fine(sc.rho_bar, grid);
    const FineField mom_f = interpolate_to_fine(mom, grid);
    const FineField j_n = reconstruct_J(op, rho_f, ecfg.order, cfg);
    const FineField v_n = reconstruct_v(op, rho_f, mom_f, ecfg.order, cfg);
    j_approx.quantity = Quantity::jacobian;
    j_approx.values = sample_at_nodes(j_n, mesh);
    v_approx.values = sample_at_nodes(v_n, mesh);
    OrderNStress s = stress_order_n(j_n, v_n, sc.v_bar, window, cfg);
    ti_approx = std::move(s.interaction);
    tc_approx = std::move(s.conv);
  }

  auto add = [&](const char* name, const MesoField& ex, const MesoField& ap) {
    sc.pairs.push_back({name, ex, ap, error_norms(ex, ap, ecfg.exclude_boundary)});
  };
  add("jacobian", j_exact, j_approx);
  add("velocity", v_exact, v_approx);
  add("stress_int", ti_exact, ti_approx);
  add("stress_conv", tc_exact, tc_approx);
  return sc;
}

const SnapshotComparison&
ComparisonReport::at(double t) const
{
  for (const auto& s : snapshots)
    if (std::abs(s.t - t) <= 1e-12)
      return s;
  throw ConfigError("no snapshot at t = " + format_double(t));
}

ojson
report_json(const ComparisonReport& report, const std::vector<std::string>& norms)
{
  ojson j;
  j["schema"] = "mesochain.report/1";
  j["command"] = report.command;
  j["n"] = report.n;
  j["energy_ref"] = report.energy_ref;
  j["micro_steps"] = report.micro_steps;
  j["runtime_seconds"] = report.runtime_seconds;
  ojson snaps = ojson::array();
  for (const auto& s : report.snapshots) {
    ojson sj;
    sj["t"] = s.t;
    ojson q;
    for (const auto& p : s.pairs) {
      ojson e;
      for (const auto& norm : norms)
        e[norm] = norm == "linf" ? p.err.linf : p.err.l2;
      q[p.name] = e;
    }
    sj["errors"] = q;
    sj["kappa_sq"] = s.prescription_feasible ? ojson(s.kappa_sq) : ojson(nullptr);
    sj["prescription_feasible"] = s.prescription_feasible;
    sj["energy_deficit"] = s.energy_deficit;
    sj["max_abs_tconv_exact"] = s.max_abs_tconv_exact;
    sj["max_abs_tint_exact"] = s.max_abs_tint_exact;
    sj["energy_drift"] = s.energy_drift;
    snaps.push_back(sj);
  }
  j["snapshots"] = snaps;
  return j;
}

namespace {

double
seconds_since(std::chrono::steady_clock::time_point start)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string
join(const std::string& dir, const std::string& name)
{
  return dir.empty() ? name : dir + "/" + name;
}

} // namespace

ComparisonReport
run_comparison(const ExperimentConfig& ecfg)
{
  ecfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const ChainConfig cfg = ecfg.chain();
  ComparisonReport report;
  report.n = cfg.n;
  report.energy_ref = total_energy(cfg, ecfg.initial_state(cfg));
  run_micro_snapshots(ecfg, cfg, [&](const ChainIntegrator& integ) {
    report.snapshots.push_back(compare_snapshot(ecfg, cfg, integ.state(), report.energy_ref));
    report.micro_steps = integ.steps_taken();
  });
  report.runtime_seconds = seconds_since(start);
  return report;
}

double
wave_front(const ChainState& state, double threshold)
{
  for (std::size_t j = state.q.size(); j-- > 0;)
    if (std::abs(state.v[j]) >= threshold)
      return state.q[j];
  return 0.0;
}

RegionErrors
split_errors(const QuantityPair& pair, double front, bool exclude_boundary)
{
  RegionErrors r;
  r.front = front;
  const MesoMesh& mesh = pair.exact.mesh;
  const double le = mesh.l_eta();
  for (std::size_t i = 0; i < mesh.b; ++i) {
    if (exclude_boundary && pair.exact.boundary_affected[i])
      continue;
    const double left = mesh.center(i) - 0.5 * le;
    const double right = mesh.center(i) + 0.5 * le;
    const double d = std::abs(pair.exact[i] - pair.approx[i]);
    if (left >= front) {
      r.unperturbed_linf = std::max(r.unperturbed_linf, d);
      ++r.unperturbed_cells;
    } else if (right <= front) {
      r.perturbed_linf = std::max(r.perturbed_linf, d);
      ++r.perturbed_cells;
    }
  }
  return r;
}

MesoState
initial_meso_state(const ExperimentConfig& ecfg, const ChainConfig& cfg)
{
  const ChainState s0 = ecfg.initial_state(cfg);
  const WindowFunction window = ecfg.window_function();
  const MesoMesh mesh = ecfg.mesh();
  MesoState st{average_density(cfg, s0, window, mesh), average_momentum(cfg, s0, window, mesh), 0.0};
  return st;
}

void
Manifest::add(const std::string& path, const std::string& schema)
{
  files_.push_back({{"path", path}, {"schema", schema}});
}

void
Manifest::write(const std::string& dir, const std::string& command) const
{
  ojson j;
  j["schema"] = "mesochain.manifest/1";
  j["command"] = command;
  j["files"] = files_;
  write_text_file(join(dir, "manifest.json"), j.dump(2) + "\n");
}

std::string
snapshot_tag(double t)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", t);
  return buf;
}

void
write_effective_config(const ExperimentConfig& ecfg, Manifest& manifest)
{
  ensure_directory(ecfg.out_dir);
  ojson j = ecfg;
  write_text_file(join(ecfg.out_dir, "config.json"), j.dump(2) + "\n");
  manifest.add("config.json", "mesochain.config/1");
}

namespace {

void
write_comparison_csvs(const ExperimentConfig& ecfg,
                      const std::string& subdir,
                      const ComparisonReport& report,
                      Manifest& manifest)
{
  ensure_directory(join(ecfg.out_dir, subdir));
  for (const auto& s : report.snapshots) {
    for (const auto& p : s.pairs) {
      const std::string rel = join(subdir, "t" + snapshot_tag(s.t) + "_" + p.name + ".csv");
      write_text_file(join(ecfg.out_dir, rel), paired_csv(p.exact, p.approx));
      manifest.add(rel, "mesochain.paired/1");
    }
    const std::string rel = join(subdir, "t" + snapshot_tag(s.t) + "_density.csv");
    write_text_file(join(ecfg.out_dir, rel), meso_field_csv(s.rho_bar));
    manifest.add(rel, "mesochain.meso_field/1");
  }
}

void
write_report(const ExperimentConfig& ecfg,
             const std::string& name,
             const ojson& j,
             Manifest& manifest)
{
  write_text_file(join(ecfg.out_dir, name), j.dump(2) + "\n");
  manifest.add(name, "mesochain.report/1");
}

void
print_summary(const ComparisonReport& report)
{
  for (const auto& s : report.snapshots) {
    std::cout << "t=" << s.t;
    for (const auto& p : s.pairs)
      std::cout << "  " << p.name << " linf=" << p.err.linf;
    std::cout << "  max|Tc|=" << s.max_abs_tconv_exact;
    if (s.prescription_feasible)
      std::cout << "  kappa_sq=" << s.kappa_sq;
    else
      std::cout << "  kappa_sq=n/a (deficit " << s.energy_deficit << ")";
    std::cout << '\n';
  }
  std::cout << "runtime " << report.runtime_seconds << " s, " << report.micro_steps
            << " micro steps\n";
}

} // namespace

int
cmd_run_micro(const ExperimentConfig& ecfg)
{
  ecfg.validate();
  Manifest manifest;
  write_effective_config(ecfg, manifest);
  ensure_directory(join(ecfg.out_dir, "checkpoints"));
  const ChainConfig cfg = ecfg.chain();
  const auto start = std::chrono::steady_clock::now();
  const double e0 = total_energy(cfg, ecfg.initial_state(cfg));
  ojson trace = ojson::array();
  std::size_t steps = 0;
  run_micro_snapshots(ecfg, cfg, [&](const ChainIntegrator& integ) {
    const std::string base = join("checkpoints", "chain_t" + snapshot_tag(integ.state().t));
    write_checkpoint(join(ecfg.out_dir, base + ".csv"), join(ecfg.out_dir, base + ".json"), cfg,
                     integ.state());
    manifest.add(base + ".csv", "mesochain.checkpoint/1");
    manifest.add(base + ".json", "mesochain.checkpoint_meta/1");
    const double e = total_energy(cfg, integ.state());
    trace.push_back({{"t", integ.state().t}, {"energy", e}, {"drift", (e - e0) / std::abs(e0)}});
    steps = integ.steps_taken();
    std::cout << "t=" << integ.state().t << " energy=" << e << '\n';
  });
  ojson report;
  report["schema"] = "mesochain.report/1";
  report["command"] = "run-micro";
  report["n"] = cfg.n;
  report["dt"] = cfg.dt;
  report["micro_steps"] = steps;
  report["runtime_seconds"] = seconds_since(start);
  report["energy"] = trace;
  write_report(ecfg, "report.json", report, manifest);
  manifest.write(ecfg.out_dir, "run-micro");
  return 0;
}

int
cmd_compare_closure(const ExperimentConfig& ecfg)
{
  Manifest manifest;
  write_effective_config(ecfg, manifest);
  ComparisonReport report = run_comparison(ecfg);
  report.command = "compare-closure";
  write_comparison_csvs(ecfg, "compare", report, manifest);
  write_report(ecfg, "report.json", report_json(report, ecfg.norms), manifest);
  manifest.write(ecfg.out_dir, "compare-closure");
  print_summary(report);
  return 0;
}

int
cmd_sweep_n(const ExperimentConfig& ecfg)
{
  if (ecfg.n_list.empty())
    throw ConfigError("sweep needs at least one particle count");
  Manifest manifest;
  write_effective_config(ecfg, manifest);
  std::ostringstream summary;
  summary << "n,t,jacobian_linf,jacobian_l2,stress_int_linf,stress_int_l2\n";
  ojson reports = ojson::array();
  for (std::size_t n : ecfg.n_list) {
    ExperimentConfig sub = ecfg;
    sub.n = n;
    sub.fine_g = ecfg.fine_g;
    ComparisonReport report = run_comparison(sub);
    report.command = "sweep-n";
    write_comparison_csvs(ecfg, "n" + std::to_string(n), report, manifest);
    for (const auto& s : report.snapshots) {
      const auto& j = s.pair("jacobian").err;
      const auto& ti = s.pair("stress_int").err;
      summary << n << ',' << format_double(s.t) << ',' << format_double(j.linf) << ','
              << format_double(j.l2) << ',' << format_double(ti.linf) << ','
              << format_double(ti.l2) << '\n';
      std::cout << "n=" << n << " t=" << s.t << " jacobian linf=" << j.linf
                << " stress_int linf=" << ti.linf << '\n';
    }
    reports.push_back(report_json(report, ecfg.norms));
  }
  write_text_file(join(ecfg.out_dir, "sweep.csv"), summary.str());
  manifest.add("sweep.csv", "mesochain.sweep/1");
  ojson j;
  j["schema"] = "mesochain.report/1";
  j["command"] = "sweep-n";
  j["runs"] = reports;
  write_report(ecfg, "report.json", j, manifest);
  manifest.write(ecfg.out_dir, "sweep-n");
  return 0;
}

int
cmd_oscillatory(const ExperimentConfig& ecfg)
{
  ExperimentConfig osc = ecfg;
  osc.ic = InitialCondition::oscillatory;
  ExperimentConfig ramp = ecfg;
  ramp.ic = InitialCondition::ramp;
  osc.validate();

  Manifest manifest;
  write_effective_config(osc, manifest);

  // split the oscillatory run at the disturbance front of the first
  // positive snapshot
  const ChainConfig cfg = osc.chain();
  const double threshold = 1e-3 * std::max(std::abs(osc.gamma), std::abs(osc.amp));
  const auto start = std::chrono::steady_clock::now();
  ComparisonReport osc_report;
  osc_report.command = "oscillatory";
  osc_report.n = cfg.n;
  osc_report.energy_ref = total_energy(cfg, osc.initial_state(cfg));
  std::optional<RegionErrors> split;
  double split_t = 0.0;
  run_micro_snapshots(osc, cfg, [&](const ChainIntegrator& integ) {
    osc_report.snapshots.push_back(
      compare_snapshot(osc, cfg, integ.state(), osc_report.energy_ref));
    osc_report.micro_steps = integ.steps_taken();
    if (!split && integ.state().t > 0.0) {
      split_t = integ.state().t;
      split = split_errors(osc_report.snapshots.back().pair("stress_int"),
                           wave_front(integ.state(), threshold), osc.exclude_boundary);
    }
  });
  osc_report.runtime_seconds = seconds_since(start);
  const ComparisonReport ramp_report = run_comparison(ramp);

  double osc_tc = 0.0, ramp_tc = 0.0, ramp_ti = 0.0;
  for (const auto& s : osc_report.snapshots)
    osc_tc = std::max(osc_tc, s.max_abs_tconv_exact);
  for (const auto& s : ramp_report.snapshots)
    ramp_tc = std::max(ramp_tc, s.max_abs_tconv_exact);
  if (split)
    ramp_ti = ramp_report.at(split_t).pair("stress_int").err.linf;

  write_comparison_csvs(osc, "oscillatory", osc_report, manifest);
  write_comparison_csvs(osc, "ramp", ramp_report, manifest);
  ojson j;
  j["schema"] = "mesochain.report/1";
  j["command"] = "oscillatory";
  j["oscillatory"] = report_json(osc_report, osc.norms);
  j["ramp"] = report_json(ramp_report, osc.norms);
  j["max_abs_tconv_oscillatory"] = osc_tc;
  j["max_abs_tconv_ramp"] = ramp_tc;
  j["tconv_ratio"] = ramp_tc > 0.0 ? ojson(osc_tc / ramp_tc) : ojson(nullptr);
  j["ramp_stress_int_linf"] = ramp_ti;
  if (split) {
    j["split_time"] = split_t;
    j["front"] = split->front;
    j["unperturbed_stress_int_linf"] = split->unperturbed_linf;
    j["perturbed_stress_int_linf"] = split->perturbed_linf;
    j["unperturbed_cells"] = split->unperturbed_cells;
    j["perturbed_cells"] = split->perturbed_cells;
  }
  write_report(osc, "report.json", j, manifest);
  manifest.write(osc.out_dir, "oscillatory");

  std::cout << "max|Tc| oscillatory=" << osc_tc << " ramp=" << ramp_tc << '\n';
  if (split)
    std::cout << "front=" << split->front << " stress_int linf unperturbed="
              << split->unperturbed_linf << " perturbed=" << split->perturbed_linf
              << " (ramp " << ramp_ti << ")\n";
  return 0;
}

int
cmd_run_meso(const ExperimentConfig& ecfg)
{
  ecfg.validate();
  if (ecfg.snapshots.empty())
    throw ConfigError("run-meso needs at least one snapshot time");
  Manifest manifest;
  write_effective_config(ecfg, manifest);
  ensure_directory(join(ecfg.out_dir, "meso"));

  const ChainConfig cfg = ecfg.chain();
  const WindowFunction window = ecfg.window_function();
  const MesoState initial = initial_meso_state(ecfg, cfg);
  StressClosure closure = ecfg.meso_closure == "local_eos"
                            ? local_eos_closure(cfg)
                            : integral_closure(window, cfg, ecfg.fine_grid());
  if (ecfg.meso_convective)
    closure = with_convective(std::move(closure), window, cfg,
                              total_energy(cfg, ecfg.initial_state(cfg)));
  MesoSolverOptions options;
  options.scheme = ecfg.scheme;
  options.cfl_target = ecfg.cfl;

  const auto start = std::chrono::steady_clock::now();
  const std::vector<MesoState> traj = run_closed(initial, ecfg.snapshots, closure, cfg, options);
  const double meso_seconds = seconds_since(start);

  ojson snaps = ojson::array();
  for (const auto& s : traj) {
    MesoField v = s.rho;
    v.quantity = Quantity::velocity;
    v.values = s.velocity();
    for (const MesoField* f : {&s.rho, &s.mom, static_cast<const MesoField*>(&v)}) {
      const std::string rel =
        join("meso", "t" + snapshot_tag(s.t) + "_" + std::string(to_string(f->quantity)) + ".csv");
      write_text_file(join(ecfg.out_dir, rel), meso_field_csv(*f));
      manifest.add(rel, "mesochain.meso_field/1");
    }
    snaps.push_back({{"t", s.t}, {"mass", s.mass()}});
  }

  if (ecfg.compare_micro) {
    std::size_t k = 0;
    run_micro_snapshots(ecfg, cfg, [&](const ChainIntegrator& integ) {
      MesoField micro = average_density(cfg, integ.state(), window, ecfg.mesh());
      const std::string rel = join("meso", "t" + snapshot_tag(traj[k].t) + "_density_vs_micro.csv");
      write_text_file(join(ecfg.out_dir, rel), paired_csv(micro, traj[k].rho));
      manifest.add(rel, "mesochain.paired/1");
      const ErrorNorms e = error_norms(micro, traj[k].rho, ecfg.exclude_boundary);
      snaps[k]["density_vs_micro_linf"] = e.linf;
      snaps[k]["density_vs_micro_l2"] = e.l2;
      std::cout << "t=" << traj[k].t << " density vs micro linf=" << e.linf << '\n';
      ++k;
    });
  }

  ojson j;
  j["schema"] = "mesochain.report/1";
  j["command"] = "run-meso";
  j["initial_mass"] = initial.mass();
  j["meso_runtime_seconds"] = meso_seconds;
  j["snapshots"] = snaps;
  write_report(ecfg, "report.json", j, manifest);
  manifest.write(ecfg.out_dir, "run-meso");
  return 0;
}

int
cmd_reconstruct(const ExperimentConfig& ecfg)
{
  ecfg.validate();
  Manifest manifest;
  write_effective_config(ecfg, manifest);
  ensure_directory(join(ecfg.out_dir, "reconstruct"));
  const ChainConfig cfg = ecfg.chain();
  const WindowFunction window = ecfg.window_function();
  const MesoMesh mesh = ecfg.mesh();
  const FineGrid grid = ecfg.fine_grid();
  const ConvOperator op(window, grid);

  ojson snaps = ojson::array();
  run_micro_snapshots(ecfg, cfg, [&](const ChainIntegrator& integ) {
    const ChainState& s = integ.state();
    const FineField rho_f = interpolate_to_fine(average_density(cfg, s, window, mesh), grid);
    const FineField mom_f = interpolate_to_fine(average_momentum(cfg, s, window, mesh), grid);
    ojson orders = ojson::array();
    for (std::size_t k = 0; k <= ecfg.order; ++k) {
      const FineField j_k = reconstruct_J(op, rho_f, k, cfg);
      const FineField v_k = reconstruct_v(op, rho_f, mom_f, k, cfg);
      const std::string tag = "t" + snapshot_tag(s.t) + "_n" + std::to_string(k);
      const std::string rel_j = join("reconstruct", tag + "_J.csv");
      const std::string rel_v = join("reconstruct", tag + "_v.csv");
      write_text_file(join(ecfg.out_dir, rel_j), fine_field_csv(j_k));
      write_text_file(join(ecfg.out_dir, rel_v), fine_field_csv(v_k));
      manifest.add(rel_j, "mesochain.fine_field/1");
      manifest.add(rel_v, "mesochain.fine_field/1");
      const FineField g_k = landweber_reconstruct(op, rho_f, k);
      orders.push_back({{"order", k}, {"density_residual", residual_norm(op, g_k, rho_f)}});
    }
    snaps.push_back({{"t", s.t}, {"orders", orders}});
  });
  ojson j;
  j["schema"] = "mesochain.report/1";
  j["command"] = "reconstruct";
  j["fine_g"] = grid.g;
  j["snapshots"] = snaps;
  write_report(ecfg, "report.json", j, manifest);
  manifest.write(ecfg.out_dir, "reconstruct");
  return 0;
}

} // namespace mesochain
