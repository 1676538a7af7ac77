#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace CLI {
class App;
}

namespace gm3cli {

/// Fully resolved run configuration. Every field is a config key and a flag
/// of the same name.
struct Options {
  std::string command;

  double a = 0.01;
  double b = 1.0;
  double c = 1.0;
  double delta1 = 1e-4;
  std::optional<double> delta2;
  double Dv = 1.0;
  double theta = 0.0;
  double tau = 0.0;
  double l = 1.0;

  // equilibrium / nucleation
  double newton_tol = 1e-10;
  int max_iter = 100;
  bool expect_nucleation = false;
  double V0_guess = 0.0;  // 0: default start
  double mu_guess = 0.0;

  // nlep
  int nlep_n = 4001;
  double Ly = 20.0;
  std::vector<double> Dv_list;  // nlep-theta: also trace theta_h over these Dv
  int curve_points = 0;         // nlep-*: samples of f or g on [0, curve_max]
  double curve_max = 5.0;

  // grids
  int n = 2001;
  bool auto_refine = true;
  std::string domain = "auto";  // auto | full | half

  // simulate
  double dt = 1e-3;
  double t_end = 10.0;
  int output_stride = 100;
  int snapshot_stride = 0;
  int max_halvings = 12;
  std::string ramp = "none";  // none | linear | exponential
  double ramp_Dv0 = 2.0;
  double ramp_rate = 1.5e-4;
  std::string initial = "spike";  // spike | perturb | file
  double center = 0.0;
  double V0 = 0.0;
  unsigned long long seed = 1;
  double amplitude = 1e-3;
  std::string initial_file;
  double track_threshold = 0.5;
  double min_sep_cells = 10.0;

  // continue
  double Dv_target = 0.5;
  double ds = 0.05;
  double ds_min = 1e-4;
  double ds_max = 0.1;
  int max_points = 500;
  double fold_tol = 1e-6;

  // sweep
  std::string sweep_command;
  std::string sweep_param;
  std::vector<double> sweep_values;
  int threads = 0;  // 0: hardware concurrency

  std::string out = "out";
  bool quiet = false;
};

/// Registers the positional command, every key as --key, and --config.
void register_options(CLI::App& app, Options& o);

/// Key/value lines of the manifest, in registration order.
std::vector<std::pair<std::string, std::string>> manifest_entries(const Options& o);

/// Runs a parsed configuration. Returns 0 on success, 1 for configuration
/// errors (nothing written), 2 for solver failures (error.txt written).
int run(const Options& o, std::ostream& log, std::ostream& err);

/// Whole program: parse argv, run, map errors to exit codes.
int main_entry(int argc, char** argv, std::ostream& log, std::ostream& err);

}  // namespace gm3cli
