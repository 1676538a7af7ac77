#include "cli.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <thread>

#include <CLI11.hpp>

#include "gm3/continuation.hpp"
#include "gm3/csv.hpp"
#include "gm3/errors.hpp"
#include "gm3/model.hpp"
#include "gm3/nlep.hpp"
#include "gm3/outer.hpp"
#include "gm3/profile.hpp"
#include "gm3/sim.hpp"
#include "gm3/smalleig.hpp"

namespace fs = std::filesystem;

namespace gm3cli {

namespace {

const std::vector<std::string> kCommands{"equilibrium", "nucleation", "nlep-theta", "nlep-tau",
                                         "smalleig",    "simulate",   "continue",   "sweep"};

std::string exact(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string list(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + exact(xs[i]);
  return s;
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

struct SummaryRow {
  std::string quantity;
  double value;
  double tolerance;
  std::string source;
};

class Summary {
public:
  void add(std::string q, double v, double tol, std::string source) {
    rows_.push_back({std::move(q), v, tol, std::move(source)});
  }
  const std::vector<SummaryRow>& rows() const { return rows_; }

  void write(const fs::path& dir) const {
    gm3::CsvWriter out((dir / "summary.csv").string(), gm3::kSummaryHeader);
    for (const auto& r : rows_) {
      out.row({r.quantity, gm3::format_number(r.value), gm3::format_number(r.tolerance), r.source});
    }
  }

  void print(std::ostream& os) const {
    std::size_t width = 8;
    for (const auto& r : rows_) width = std::max(width, r.quantity.size());
    for (const auto& r : rows_) {
      os << std::left << std::setw(static_cast<int>(width) + 2) << r.quantity
         << gm3::format_number(r.value) << "\n";
    }
  }

private:
  std::vector<SummaryRow> rows_;
};

gm3::ModelParams model_params(const Options& o) {
  gm3::ModelParams p;
  p.a = o.a;
  p.b = o.b;
  p.c = o.c;
  p.delta1 = o.delta1;
  p.delta2_override = o.delta2;
  p.Dv = o.Dv;
  p.theta = o.theta;
  p.tau = o.tau;
  p.l = o.l;
  return p;
}

double* sweep_target(Options& o, const std::string& key) {
  static const std::map<std::string, double Options::*> fields{
      {"a", &Options::a},         {"b", &Options::b},           {"c", &Options::c},
      {"delta1", &Options::delta1}, {"Dv", &Options::Dv},       {"theta", &Options::theta},
      {"tau", &Options::tau},     {"l", &Options::l},           {"dt", &Options::dt},
      {"t-end", &Options::t_end}, {"ramp-rate", &Options::ramp_rate},
      {"V0", &Options::V0},       {"center", &Options::center}, {"Dv-target", &Options::Dv_target}};
  const auto it = fields.find(key);
  return it == fields.end() ? nullptr : &(o.*(it->second));
}

// Configuration checks that do not need a solver; failures map to exit 1.
void check_config(const Options& o) {
  using gm3::Error;
  using gm3::ErrorKind;
  model_params(o).validate();
  if (o.command == "sweep") {
    if (o.sweep_command.empty() || o.sweep_command == "sweep") {
      throw Error(ErrorKind::InvalidParameter, "sweep needs sweep-command naming a non-sweep command");
    }
    if (!sweep_target(const_cast<Options&>(o), o.sweep_param)) {
      throw Error(ErrorKind::InvalidParameter, "sweep-param '" + o.sweep_param + "' is not sweepable");
    }
    if (o.sweep_values.empty()) throw Error(ErrorKind::InvalidParameter, "sweep-values is empty");
  }
  if (o.initial == "file" && o.initial_file.empty()) {
    throw Error(ErrorKind::InvalidParameter, "initial = file needs initial-file");
  }
  if (!(o.dt > 0.0) || !(o.t_end >= 0.0)) throw Error(ErrorKind::InvalidParameter, "need dt > 0, t-end >= 0");
  if (o.n < 5 || o.nlep_n < 5) throw Error(ErrorKind::InvalidParameter, "grids need at least 5 nodes");
  if (!(o.Ly >= 20.0)) throw Error(ErrorKind::InvalidParameter, "Ly must be >= 20");
  if (!(o.ds > 0.0)) throw Error(ErrorKind::InvalidParameter, "ds must be positive");
}

gm3::DomainMode domain_for(const Options& o, gm3::DomainMode fallback) {
  if (o.domain == "full") return gm3::DomainMode::Full;
  if (o.domain == "half") return gm3::DomainMode::Half;
  return fallback;
}

void write_manifest(const Options& o, const fs::path& dir) {
  std::ofstream out(dir / "manifest.cfg");
  for (const auto& [k, v] : manifest_entries(o)) {
    if (v != "\"\"") out << k << " = " << v << "\n";
  }
  if (!out) throw gm3::Error(gm3::ErrorKind::Io, "cannot write manifest in " + dir.string());
}

Summary cmd_equilibrium(const Options& o, const fs::path& dir) {
  const auto p = gm3::ModelParams::checked(model_params(o));
  std::optional<std::pair<double, double>> guess;
  if (o.V0_guess > 0.0 && o.mu_guess > 0.0) guess = std::make_pair(o.V0_guess, o.mu_guess);
  const auto s = gm3::solve_V0_mu(p, guess, o.newton_tol, o.max_iter);
  Summary sum;
  sum.add("V0", s.V0, o.newton_tol, "newton");
  sum.add("mu", s.mu, o.newton_tol, "newton");
  sum.add("u0p", s.u0p, 0.0, "derived");
  sum.add("gamma", s.gamma, 0.0, "derived");
  sum.add("chi_mu", s.chi_of_mu, 0.0, "quadrature");
  sum.add("residual_flux", s.residuals[0], o.newton_tol, "newton");
  sum.add("residual_length", s.residuals[1], o.newton_tol, "newton");
  sum.add("iterations", s.iterations, 0.0, "newton");

  const auto grid = gm3::Grid1D::half(p.l, o.n);
  const Eigen::VectorXd u = gm3::outer_u_profile(grid.x(), s, p);
  gm3::CsvWriter prof((dir / "outer_profile.csv").string(), "x,u,v,w");
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double v = p.c * u(i) * u(i) / (u(i) - p.a);
    prof.row({gm3::format_number(grid[i]), gm3::format_number(u(i)), gm3::format_number(v),
              gm3::format_number(u(i) / p.c)});
  }
  return sum;
}

Summary cmd_nucleation(const Options& o, const fs::path&) {
  const auto p = gm3::ModelParams::checked(model_params(o));
  const auto r = gm3::nucleation_threshold(p, o.expect_nucleation);
  Summary sum;
  const bool nuc = r.regime == gm3::Regime::Nucleating;
  sum.add("nucleating", nuc ? 1.0 : 0.0, 0.0, "bc > a");
  if (nuc) {
    sum.add("D_nuc", r.D_nuc, 1e-8, "brent on chi(2a)");
    sum.add("chi_max", r.chi_max, 1e-10, "quadrature");
    sum.add("V0", r.V0, 1e-8, "brent on chi(2a)");
    sum.add("u0p", r.u0p, 0.0, "derived");
  }
  return sum;
}

// Samples fun on [0, curve_max], recording nan where the resolvent is singular.
void write_curve(const Options& o, const fs::path& file, const std::string& header,
                 const std::function<gm3::cdouble(double)>& fun) {
  if (o.curve_points <= 0) return;
  gm3::CsvWriter out(file.string(), header);
  for (int i = 0; i < o.curve_points; ++i) {
    const double lam = o.curve_points == 1 ? 0.0 : o.curve_max * i / (o.curve_points - 1);
    double value = std::nan("");
    try {
      value = fun(lam).real();
    } catch (const gm3::Error& e) {
      if (e.kind() != gm3::ErrorKind::NearSingularResolvent) throw;
    }
    out.row({gm3::format_number(lam), gm3::format_number(value)});
  }
}

Summary cmd_nlep_theta(const Options& o, const fs::path& dir) {
  const auto p = gm3::ModelParams::checked(model_params(o));
  const gm3::LineOperator op(o.nlep_n, o.Ly);
  const auto r = gm3::hopf_theta(p, op, {0.87, 2.75 * p.b});
  Summary sum;
  sum.add("theta_h", r.threshold, 1e-10, "newton on f = A");
  sum.add("theta_hat", r.threshold / p.b, 1e-10, "theta_h / b");
  sum.add("omega", r.omega, 1e-10, "newton on f = A");
  sum.add("residual", r.residual, 1e-10, "newton on f = A");
  sum.add("f0", gm3::f_lambda(0.0, op).real(), 1e-8, "resolvent");
  if (!o.Dv_list.empty()) {
    const auto curve = gm3::hopf_theta_curve(p, o.Dv_list, op);
    gm3::CsvWriter out((dir / "theta_curve.csv").string(), "Dv,theta_h,omega");
    for (std::size_t i = 0; i < curve.size(); ++i) {
      out.row({gm3::format_number(o.Dv_list[i]), gm3::format_number(curve[i].threshold),
               gm3::format_number(curve[i].omega)});
    }
  }
  write_curve(o, dir / "f_curve.csv", "lambda,f", [&](double lam) { return gm3::f_lambda(lam, op); });
  return sum;
}

Summary cmd_nlep_tau(const Options& o, const fs::path& dir) {
  const auto p = gm3::ModelParams::checked(model_params(o));
  const gm3::LineOperator op(o.nlep_n, o.Ly);
  const auto r = gm3::hopf_tau_large(p, op, {0.5, 6.0 * p.c});
  Summary sum;
  sum.add("tau_lh", r.threshold, 1e-10, "newton on g = 3");
  sum.add("omega", r.omega, 1e-10, "newton on g = 3");
  sum.add("residual", r.residual, 1e-10, "newton on g = 3");
  sum.add("lambda0", gm3::lambda0_root(o.tau, p.c), 1e-14, "bisection at tau");
  write_curve(o, dir / "g_curve.csv", "lambda,g",
              [&](double lam) { return gm3::g_lambda(lam, p.c, o.tau, op); });
  return sum;
}

Summary cmd_smalleig(const Options& o, const fs::path&) {
  const auto p = gm3::ModelParams::checked(model_params(o));
  const auto th = gm3::tau_h_threshold(p.c);
  Summary sum;
  sum.add("tau_h", th.closed_form, 0.0, "c J1/J2");
  sum.add("tau_h_quadrature", th.quadrature, 1e-8, "quadrature");
  if (o.tau > 0.0) {
    const auto d = gm3::small_lambda_roots(o.tau, p);
    sum.add("k", d.k, 0.0, "closed form");
    for (int i = 0; i < 2; ++i) {
      sum.add("lambda" + std::to_string(i) + "_re", d.lambda_pair[i].real(), 0.0, "quadratic");
      sum.add("lambda" + std::to_string(i) + "_im", d.lambda_pair[i].imag(), 0.0, "quadratic");
    }
    sum.add("re_asymptotic", d.re_asym, 0.0, "leading order");
    sum.add("im_asymptotic", d.im_asym, 0.0, "leading order");
    sum.add("lambda_linearized", d.lambda_linearized, 0.0, "linearized");
  }
  return sum;
}

gm3::SimConfig sim_config(const Options& o) {
  gm3::SimConfig cfg;
  cfg.params = gm3::ModelParams::checked(model_params(o));
  cfg.n = o.n;
  cfg.auto_refine = o.auto_refine;
  cfg.t_end = o.t_end;
  cfg.dt = o.dt;
  if (o.ramp != "none") {
    gm3::Ramp r;
    r.kind = o.ramp == "linear" ? gm3::Ramp::Kind::Linear : gm3::Ramp::Kind::Exponential;
    r.Dv0 = o.ramp_Dv0;
    r.rate = o.ramp_rate;
    cfg.ramp = r;
  }
  cfg.domain = domain_for(o, gm3::DomainMode::Full);
  cfg.initial.kind = o.initial == "spike"     ? gm3::InitialCondition::Kind::AsymptoticSpike
                     : o.initial == "perturb" ? gm3::InitialCondition::Kind::HomogeneousPerturbation
                                              : gm3::InitialCondition::Kind::FromFile;
  cfg.initial.center = o.center;
  cfg.initial.V0 = o.V0;
  cfg.initial.seed = o.seed;
  cfg.initial.amplitude = o.amplitude;
  cfg.initial.path = o.initial_file;
  cfg.output_stride = o.output_stride;
  cfg.snapshot_stride = o.snapshot_stride;
  cfg.max_halvings = o.max_halvings;
  cfg.tracker.threshold = o.track_threshold;
  cfg.tracker.min_sep_cells = o.min_sep_cells;
  return cfg;
}

Summary cmd_simulate(const Options& o, const fs::path& dir) {
  const auto cfg = sim_config(o);
  const gm3::Grid1D grid = gm3::make_grid(cfg);
  gm3::CsvWriter snaps((dir / "snapshots.csv").string(), gm3::kSnapshotHeader);
  gm3::CsvWriter track((dir / "track.csv").string(), gm3::kTrackHeader);
  gm3::SimSinks sinks;
  sinks.snapshot = [&](double t, const gm3::FieldTriple& s) { gm3::write_snapshot(snaps, t, grid, s); };
  sinks.sample = [&](const gm3::TrackSample& s) { gm3::write_track_sample(track, s); };
  const auto res = gm3::simulate(cfg, sinks);

  gm3::CsvWriter events((dir / "events.csv").string(), gm3::kEventHeader);
  for (const auto& e : res.track.events) gm3::write_event(events, e);

  Summary sum;
  sum.add("t_final", res.t_final, 0.0, "simulation");
  sum.add("nodes", static_cast<double>(res.grid.size()), 0.0, "grid");
  sum.add("steps", static_cast<double>(res.steps), 0.0, "simulation");
  sum.add("halvings", static_cast<double>(res.halvings), 0.0, "simulation");
  const auto& last = res.track.samples.back();
  sum.add("final_count", static_cast<double>(last.count()), 0.0, "tracker");
  sum.add("final_Dv", last.Dv, 0.0, "ramp");
  double first_nuc = std::nan(""), first_osc = std::nan("");
  for (const auto& e : res.track.events) {
    if (e.type == gm3::Event::Type::Nucleation && std::isnan(first_nuc)) first_nuc = e.t;
    if (e.type == gm3::Event::Type::OscillationOnset && std::isnan(first_osc)) first_osc = e.t;
  }
  sum.add("events", static_cast<double>(res.track.events.size()), 0.0, "tracker");
  sum.add("first_nucleation_t", first_nuc, o.dt * o.output_stride, "tracker");
  sum.add("oscillation_onset_t", first_osc, o.dt * o.output_stride, "tracker");
  return sum;
}

Summary cmd_continue(const Options& o, const fs::path& dir) {
  const auto p = gm3::ModelParams::checked(model_params(o));
  gm3::ContinuationOptions co;
  co.domain = domain_for(o, gm3::DomainMode::Half);
  co.n = o.n;
  co.ds_min = o.ds_min;
  co.ds_max = o.ds_max;
  co.max_points = o.max_points;
  co.fold_tol = o.fold_tol;
  co.newton_tol = o.newton_tol;
  const auto br = gm3::continue_branch(p, o.Dv, o.Dv_target, o.ds, co);

  gm3::CsvWriter out((dir / "branch.csv").string(), gm3::kBranchHeader);
  Summary sum;
  int folds = 0;
  double max_res = 0.0;
  for (const auto& pt : br.points) {
    out.row({gm3::format_number(pt.arclength), gm3::format_number(pt.Dv), gm3::format_number(pt.mu),
             gm3::format_number(pt.v0), pt.fold ? "1" : "0"});
    max_res = std::max(max_res, pt.residual);
    if (pt.fold) {
      ++folds;
      sum.add("fold_Dv", pt.Dv, o.fold_tol, "bisection on tangent");
      sum.add("fold_mu", pt.mu, o.fold_tol, "bisection on tangent");
    }
  }
  sum.add("points", static_cast<double>(br.points.size()), 0.0, "continuation");
  sum.add("folds", folds, 0.0, "continuation");
  sum.add("truncated", br.truncated ? 1.0 : 0.0, 0.0, br.note.empty() ? "continuation" : br.note);
  sum.add("max_residual", max_res, o.newton_tol, "scaled residual");
  return sum;
}

using Command = Summary (*)(const Options&, const fs::path&);

Command command_fn(const std::string& name) {
  if (name == "equilibrium") return cmd_equilibrium;
  if (name == "nucleation") return cmd_nucleation;
  if (name == "nlep-theta") return cmd_nlep_theta;
  if (name == "nlep-tau") return cmd_nlep_tau;
  if (name == "smalleig") return cmd_smalleig;
  if (name == "simulate") return cmd_simulate;
  if (name == "continue") return cmd_continue;
  return nullptr;
}

struct Outcome {
  int code = 0;
  Summary summary;
  std::string error;
};

// One non-sweep run into dir, which must already exist.
Outcome run_single(const Options& o, const fs::path& dir) {
  Outcome out;
  write_manifest(o, dir);
  try {
    out.summary = command_fn(o.command)(o, dir);
    out.summary.write(dir);
  } catch (const std::exception& e) {
    out.code = 2;
    out.error = e.what();
    std::ofstream(dir / "error.txt") << e.what() << "\n";
  }
  return out;
}

int run_sweep(const Options& o, const fs::path& dir, std::ostream& log, std::ostream& err) {
  write_manifest(o, dir);
  const std::size_t count = o.sweep_values.size();
  std::vector<Outcome> outcomes(count);
  std::vector<Options> runs(count, o);
  std::vector<fs::path> dirs(count);
  for (std::size_t i = 0; i < count; ++i) {
    runs[i].command = o.sweep_command;
    runs[i].sweep_command.clear();
    runs[i].sweep_param.clear();
    runs[i].sweep_values.clear();
    *sweep_target(runs[i], o.sweep_param) = o.sweep_values[i];
    char name[32];
    std::snprintf(name, sizeof name, "run_%03zu", i);
    dirs[i] = dir / name;
    runs[i].out = dirs[i].string();
    fs::create_directories(dirs[i]);
  }

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers =
      std::min<std::size_t>(count, o.threads > 0 ? static_cast<std::size_t>(o.threads) : hw);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) outcomes[i] = run_single(runs[i], dirs[i]);
    });
  }
  for (auto& t : pool) t.join();

  gm3::CsvWriter table((dir / "sweep.csv").string(), "run,parameter,value,exit_code,quantity,result");
  int failures = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::string head = std::to_string(i) + "," + o.sweep_param + "," +
                             gm3::format_number(o.sweep_values[i]) + "," +
                             std::to_string(outcomes[i].code);
    if (outcomes[i].code != 0) {
      ++failures;
      table.stream() << head << ",error,nan\n";
      err << "run " << i << " failed: " << outcomes[i].error << "\n";
      continue;
    }
    for (const auto& r : outcomes[i].summary.rows()) {
      table.stream() << head << "," << r.quantity << "," << gm3::format_number(r.value) << "\n";
    }
  }
  if (!o.quiet) log << count - failures << "/" << count << " runs succeeded\n";
  return failures == 0 ? 0 : 2;
}

}  // namespace

void register_options(CLI::App& app, Options& o) {
  app.add_option("command", o.command, "What to run")->required()->check(CLI::IsMember(kCommands));

  auto model = "Model";
  app.add_option("--a", o.a, "Activator source")->capture_default_str()->group(model);
  app.add_option("--b", o.b, "Inhibitor decay")->capture_default_str()->group(model);
  app.add_option("--c", o.c, "Substrate decay")->capture_default_str()->group(model);
  app.add_option("--delta1", o.delta1, "Activator diffusivity")->capture_default_str()->group(model);
  app.add_option("--delta2", o.delta2, "Substrate diffusivity (default delta1^2)")->group(model);
  app.add_option("--Dv", o.Dv, "Inhibitor diffusivity; start of a continuation")
      ->capture_default_str()->group(model);
  app.add_option("--theta", o.theta, "Inhibitor time constant")->capture_default_str()->group(model);
  app.add_option("--tau", o.tau, "Substrate time constant")->capture_default_str()->group(model);
  app.add_option("--l", o.l, "Half-length of the interval")->capture_default_str()->group(model);

  auto eq = "Equilibrium";
  app.add_option("--newton-tol", o.newton_tol, "Newton tolerance")->capture_default_str()->group(eq);
  app.add_option("--max-iter", o.max_iter, "Newton iteration cap")->capture_default_str()->group(eq);
  app.add_option("--expect-nucleation", o.expect_nucleation, "Fail if bc <= a")
      ->capture_default_str()->group(eq);
  app.add_option("--V0-guess", o.V0_guess, "Newton start for V0 (0: default)")
      ->capture_default_str()->group(eq);
  app.add_option("--mu-guess", o.mu_guess, "Newton start for mu (0: default)")
      ->capture_default_str()->group(eq);

  auto nl = "NLEP";
  app.add_option("--nlep-n", o.nlep_n, "Nodes of the line operator")->capture_default_str()->group(nl);
  app.add_option("--Ly", o.Ly, "Truncation of the line")->capture_default_str()->group(nl);
  app.add_option("--Dv-list", o.Dv_list, "Dv values for a theta_h curve")->delimiter(',')->group(nl);
  app.add_option("--curve-points", o.curve_points, "Samples of f or g on [0, curve-max]")
      ->capture_default_str()->group(nl);
  app.add_option("--curve-max", o.curve_max, "Upper end of the f or g curve")
      ->capture_default_str()->group(nl);

  auto grid = "Grid";
  app.add_option("--n", o.n, "Spatial nodes")->capture_default_str()->group(grid);
  app.add_option("--auto-refine", o.auto_refine, "Refine until h <= sqrt(delta1)/10")
      ->capture_default_str()->group(grid);
  app.add_option("--domain", o.domain, "auto, full or half")
      ->capture_default_str()->check(CLI::IsMember({"auto", "full", "half"}))->group(grid);

  auto sim = "Simulation";
  app.add_option("--dt", o.dt, "Time step")->capture_default_str()->group(sim);
  app.add_option("--t-end", o.t_end, "Final time")->capture_default_str()->group(sim);
  app.add_option("--output-stride", o.output_stride, "Steps between track samples")
      ->capture_default_str()->group(sim);
  app.add_option("--snapshot-stride", o.snapshot_stride, "Steps between snapshots (0: first and last)")
      ->capture_default_str()->group(sim);
  app.add_option("--max-halvings", o.max_halvings, "Step halvings before giving up")
      ->capture_default_str()->group(sim);
  app.add_option("--ramp", o.ramp, "none, linear or exponential")
      ->capture_default_str()->check(CLI::IsMember({"none", "linear", "exponential"}))->group(sim);
  app.add_option("--ramp-Dv0", o.ramp_Dv0, "Dv at t = 0 under a ramp")->capture_default_str()->group(sim);
  app.add_option("--ramp-rate", o.ramp_rate, "Ramp rate")->capture_default_str()->group(sim);
  app.add_option("--initial", o.initial, "spike, perturb or file")
      ->capture_default_str()->check(CLI::IsMember({"spike", "perturb", "file"}))->group(sim);
  app.add_option("--center", o.center, "Initial spike position")->capture_default_str()->group(sim);
  app.add_option("--V0", o.V0, "Initial spike level (0: matched value)")->capture_default_str()->group(sim);
  app.add_option("--seed", o.seed, "Seed for perturbed initial data")->capture_default_str()->group(sim);
  app.add_option("--amplitude", o.amplitude, "Perturbation amplitude")->capture_default_str()->group(sim);
  app.add_option("--initial-file", o.initial_file, "Snapshot CSV to start from")
      ->capture_default_str()->group(sim);
  app.add_option("--track-threshold", o.track_threshold, "Spike threshold as a fraction of the u range")
      ->capture_default_str()->group(sim);
  app.add_option("--min-sep-cells", o.min_sep_cells, "Minimum spike separation in cells")
      ->capture_default_str()->group(sim);

  auto cont = "Continuation";
  app.add_option("--Dv-target", o.Dv_target, "Far end of the Dv interval")->capture_default_str()->group(cont);
  app.add_option("--ds", o.ds, "Initial arclength step")->capture_default_str()->group(cont);
  app.add_option("--ds-min", o.ds_min, "Smallest arclength step")->capture_default_str()->group(cont);
  app.add_option("--ds-max", o.ds_max, "Largest arclength step")->capture_default_str()->group(cont);
  app.add_option("--max-points", o.max_points, "Branch length cap")->capture_default_str()->group(cont);
  app.add_option("--fold-tol", o.fold_tol, "Fold location tolerance")->capture_default_str()->group(cont);

  auto sw = "Sweep";
  app.add_option("--sweep-command", o.sweep_command, "Command run for each value")
      ->check(CLI::IsMember(kCommands))->group(sw);
  app.add_option("--sweep-param", o.sweep_param, "Key varied across runs")->group(sw);
  app.add_option("--sweep-values", o.sweep_values, "Comma-separated values")->delimiter(',')->group(sw);
  app.add_option("--threads", o.threads, "Worker threads (0: all cores)")->capture_default_str()->group(sw);

  app.add_option("--out", o.out, "Output directory")->capture_default_str();
  app.add_flag("--quiet", o.quiet, "Suppress the summary table");
}

std::vector<std::pair<std::string, std::string>> manifest_entries(const Options& o) {
  std::vector<std::pair<std::string, std::string>> e{
      {"command", quoted(o.command)},
      {"a", exact(o.a)},
      {"b", exact(o.b)},
      {"c", exact(o.c)},
      {"delta1", exact(o.delta1)}};
  if (o.delta2) e.emplace_back("delta2", exact(*o.delta2));
  const auto b = [](bool x) { return std::string(x ? "true" : "false"); };
  std::vector<std::pair<std::string, std::string>> rest{
      {"Dv", exact(o.Dv)},
      {"theta", exact(o.theta)},
      {"tau", exact(o.tau)},
      {"l", exact(o.l)},
      {"newton-tol", exact(o.newton_tol)},
      {"max-iter", std::to_string(o.max_iter)},
      {"expect-nucleation", b(o.expect_nucleation)},
      {"V0-guess", exact(o.V0_guess)},
      {"mu-guess", exact(o.mu_guess)},
      {"nlep-n", std::to_string(o.nlep_n)},
      {"Ly", exact(o.Ly)},
      {"Dv-list", quoted(list(o.Dv_list))},
      {"curve-points", std::to_string(o.curve_points)},
      {"curve-max", exact(o.curve_max)},
      {"n", std::to_string(o.n)},
      {"auto-refine", b(o.auto_refine)},
      {"domain", quoted(o.domain)},
      {"dt", exact(o.dt)},
      {"t-end", exact(o.t_end)},
      {"output-stride", std::to_string(o.output_stride)},
      {"snapshot-stride", std::to_string(o.snapshot_stride)},
      {"max-halvings", std::to_string(o.max_halvings)},
      {"ramp", quoted(o.ramp)},
      {"ramp-Dv0", exact(o.ramp_Dv0)},
      {"ramp-rate", exact(o.ramp_rate)},
      {"initial", quoted(o.initial)},
      {"center", exact(o.center)},
      {"V0", exact(o.V0)},
      {"seed", std::to_string(o.seed)},
      {"amplitude", exact(o.amplitude)},
      {"initial-file", quoted(o.initial_file)},
      {"track-threshold", exact(o.track_threshold)},
      {"min-sep-cells", exact(o.min_sep_cells)},
      {"Dv-target", exact(o.Dv_target)},
      {"ds", exact(o.ds)},
      {"ds-min", exact(o.ds_min)},
      {"ds-max", exact(o.ds_max)},
      {"max-points", std::to_string(o.max_points)},
      {"fold-tol", exact(o.fold_tol)},
      {"sweep-command", quoted(o.sweep_command)},
      {"sweep-param", quoted(o.sweep_param)},
      {"sweep-values", quoted(list(o.sweep_values))},
      {"threads", std::to_string(o.threads)},
      {"out", quoted(o.out)},
      {"quiet", b(o.quiet)}};
  e.insert(e.end(), rest.begin(), rest.end());
  return e;
}

int run(const Options& o, std::ostream& log, std::ostream& err) {
  try {
    check_config(o);
  } catch (const gm3::Error& e) {
    err << e.what() << "\n";
    return 1;
  }
  const fs::path dir(o.out);
  try {
    fs::create_directories(dir);
  } catch (const fs::filesystem_error& e) {
    err << "cannot create output directory: " << e.what() << "\n";
    return 1;
  }
  if (o.command == "sweep") return run_sweep(o, dir, log, err);
  const auto outcome = run_single(o, dir);
  if (outcome.code != 0) {
    err << outcome.error << "\n";
    return outcome.code;
  }
  if (!o.quiet) outcome.summary.print(log);
  return 0;
}

int main_entry(int argc, char** argv, std::ostream& log, std::ostream& err) {
  CLI::App app{"Spike equilibria, thresholds and simulations of a three-component reaction-diffusion system",
               "gm3"};
  Options o;
  register_options(app, o);
  app.set_config("--config", "", "key = value file; flags override its entries");
  app.allow_config_extras(CLI::config_extras_mode::error);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    log << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 1;
  }
  return run(o, log, err);
}

}  // namespace gm3cli
