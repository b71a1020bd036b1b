// mesochain: run microscale chains, compare mesoscale closures, drive the
// closed continuum solver.

#include "mesochain/error.hpp"
#include "mesochain/experiment.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <sstream>

using namespace mesochain;

namespace {

struct Overrides
{
  std::string config;
  std::string out;
  std::size_t n = 0;
  std::size_t b = 0;
  double eta = 0.0;
  std::size_t order = 0;
  std::string ic;
  double gamma = 0.0;
  double amp = 0.0;
  double freq = 0.0;
  std::string snapshots;
  std::string n_list;
  std::uint64_t seed = 0;
  std::string window;
  std::size_t fine_g = 0;
  std::string walls;
  std::string stress_mode;
  std::string closure;
  std::string scheme;
  bool include_boundary = false;
  bool convective = false;
};

template <class T>
std::vector<T>
parse_list(const std::string& text, const char* what)
{
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty())
      continue;
    std::istringstream is(item);
    T value;
    if (!(is >> value) || !is.eof())
      throw ConfigError(std::string("bad entry '") + item + "' in " + what);
    out.push_back(value);
  }
  return out;
}

void
add_common(CLI::App* cmd, Overrides& o)
{
  cmd->add_option("--config", o.config, "JSON experiment config");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--n", o.n, "particle count");
  cmd->add_option("--b", o.b, "number of mesoscale cells");
  cmd->add_option("--eta", o.eta, "mesoscale resolution (1/b)");
  cmd->add_option("--order", o.order, "closure order n");
  cmd->add_option("--ic", o.ic, "initial condition")->check(CLI::IsMember({"ramp", "oscillatory"}));
  cmd->add_option("--gamma", o.gamma, "ramp velocity");
  cmd->add_option("--amp", o.amp, "oscillation amplitude");
  cmd->add_option("--freq", o.freq, "oscillation frequency k");
  cmd->add_option("--snapshots", o.snapshots, "comma-separated snapshot times");
  cmd->add_option("--seed", o.seed, "reserved; runs are deterministic");
  cmd->add_option("--window", o.window, "averaging window")
    ->check(CLI::IsMember({"box", "gaussian"}));
  cmd->add_option("--fine-g", o.fine_g, "fine-grid points (default min(n, 4096))");
  cmd->add_option("--walls", o.walls, "wall placement")->check(CLI::IsMember({"offset", "edge"}));
  cmd->add_option("--stress-mode", o.stress_mode, "zero-order interaction stress form")
    ->check(CLI::IsMember({"integral", "riemann"}));
  cmd->add_flag("--include-boundary", o.include_boundary, "keep boundary cells in error norms");
}

ExperimentConfig
resolve(const CLI::App* cmd, const Overrides& o)
{
  ExperimentConfig c;
  if (!o.config.empty())
    c = load_experiment_config(o.config);
  auto given = [&](const char* name) { return cmd->get_option(name)->count() > 0; };
  if (given("--out"))
    c.out_dir = o.out;
  if (given("--n"))
    c.n = o.n;
  if (given("--b"))
    c.b = o.b;
  if (given("--eta")) {
    if (!given("--b"))
      c.b = static_cast<std::size_t>(std::llround(1.0 / o.eta));
    if (std::abs(o.eta * static_cast<double>(c.b) - 1.0) > 1e-9)
      throw ConfigError("--eta must equal 1 / b");
  }
  if (given("--order"))
    c.order = o.order;
  if (given("--ic"))
    c.ic = initial_condition_from_string(o.ic);
  if (given("--gamma"))
    c.gamma = o.gamma;
  if (given("--amp"))
    c.amp = o.amp;
  if (given("--freq"))
    c.freq = o.freq;
  if (given("--snapshots"))
    c.snapshots = parse_list<double>(o.snapshots, "--snapshots");
  if (given("--seed"))
    c.seed = o.seed;
  if (given("--window"))
    c.window = window_kind_from_string(o.window);
  if (given("--fine-g"))
    c.fine_g = o.fine_g;
  if (given("--walls"))
    c.wall_offset_half_h = o.walls == "offset";
  if (given("--stress-mode"))
    c.stress_mode = stress_mode_from_string(o.stress_mode);
  if (o.include_boundary)
    c.exclude_boundary = false;
  if (cmd->get_option_no_throw("--n-list") && given("--n-list"))
    c.n_list = parse_list<std::size_t>(o.n_list, "--n-list");
  if (cmd->get_option_no_throw("--closure") && given("--closure"))
    c.meso_closure = o.closure;
  if (cmd->get_option_no_throw("--scheme") && given("--scheme"))
    c.scheme = flux_scheme_from_string(o.scheme);
  if (o.convective)
    c.meso_convective = true;
  return c;
}

} // namespace

int
main(int argc, char** argv)
{
  CLI::App app{"Mesoscale averaging and closure toolkit for 1D particle chains"};
  app.require_subcommand(1);

  Overrides o;
  auto* run_micro = app.add_subcommand("run-micro", "integrate the chain and write checkpoints");
  auto* compare = app.add_subcommand("compare-closure", "exact vs closed-form stresses");
  auto* sweep = app.add_subcommand("sweep-n", "compare-closure over several particle counts");
  auto* osc = app.add_subcommand("oscillatory", "high-frequency initial data vs the ramp");
  auto* meso = app.add_subcommand("run-meso", "closed mesoscale solver");
  auto* recon = app.add_subcommand("reconstruct", "Landweber reconstructions of J and v");
  for (auto* cmd : {run_micro, compare, sweep, osc, meso, recon})
    add_common(cmd, o);
  sweep->add_option("--n-list", o.n_list, "comma-separated particle counts");
  meso->add_option("--closure", o.closure, "stress closure")
    ->check(CLI::IsMember({"integral", "local_eos"}));
  meso->add_option("--scheme", o.scheme, "numerical flux")
    ->check(CLI::IsMember({"lax_friedrichs", "rusanov"}));
  meso->add_flag("--convective", o.convective, "add the zero-order convective stress");

  CLI11_PARSE(app, argc, argv);

  try {
    for (auto* cmd : app.get_subcommands()) {
      const ExperimentConfig cfg = resolve(cmd, o);
      const std::string name = cmd->get_name();
      if (name == "run-micro")
        return cmd_run_micro(cfg);
      if (name == "compare-closure")
        return cmd_compare_closure(cfg);
      if (name == "sweep-n")
        return cmd_sweep_n(cfg);
      if (name == "oscillatory")
        return cmd_oscillatory(cfg);
      if (name == "run-meso")
        return cmd_run_meso(cfg);
      if (name == "reconstruct")
        return cmd_reconstruct(cfg);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
