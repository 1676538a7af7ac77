#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gm3/model.hpp"

namespace gm3 {

/// Dv(t) schedule: Dv0 - rate t (Linear) or Dv0 exp(-rate t) (Exponential).
struct Ramp {
  enum class Kind { Linear, Exponential };
  Kind kind = Kind::Linear;
  double Dv0 = 2.0;
  double rate = 1.5e-4;

  double at(double t) const;
};

enum class DomainMode { Full, Half };

struct InitialCondition {
  enum class Kind { AsymptoticSpike, HomogeneousPerturbation, FromFile };
  Kind kind = Kind::AsymptoticSpike;
  double center = 0.0;
  double V0 = 0.0;         // AsymptoticSpike level; 0 picks the matched value
  std::uint64_t seed = 1;  // HomogeneousPerturbation
  double amplitude = 1e-3;
  std::string path;        // FromFile: a snapshot CSV (t,x,u,v,w); its last time is used
};

struct TrackerOptions {
  double threshold = 0.5;  // fraction of max u
  double min_sep_cells = 10.0;
};

struct SimConfig {
  ModelParams params;
  Eigen::Index n = 2001;
  bool auto_refine = true;  // raise n until h <= sqrt(delta1)/10
  double t_end = 10.0;
  double dt = 1e-3;
  std::optional<Ramp> ramp;
  DomainMode domain = DomainMode::Full;
  InitialCondition initial;
  int output_stride = 100;    // steps between track samples
  int snapshot_stride = 0;    // steps between snapshots; 0 writes only the first and last
  int max_halvings = 12;
  TrackerOptions tracker;
};

struct Spike {
  double position = 0.0;
  double amplitude = 0.0;
};

struct TrackedSpike {
  int id = 0;
  double position = 0.0;
  double amplitude = 0.0;
};

struct TrackSample {
  double t = 0.0;
  double Dv = 0.0;
  std::vector<TrackedSpike> spikes;
  std::size_t count() const { return spikes.size(); }
};

struct Event {
  enum class Type { Nucleation, Annihilation, OscillationOnset };
  double t = 0.0;
  Type type = Type::Nucleation;
  std::string detail;
};
const char* to_string(Event::Type type);

struct SpikeTrack {
  std::vector<TrackSample> samples;
  std::vector<Event> events;
};

/// Grid a configuration resolves to, including auto refinement.
Grid1D make_grid(const SimConfig& cfg);

/// Initial fields for cfg on grid.
FieldTriple initial_state(const SimConfig& cfg, const Grid1D& grid);

/// Asymptotic one-spike profile centred at x0: inner core blended into the
/// outer solution over |x - x0| in [5, 10] sqrt(delta1).
FieldTriple asymptotic_spike(const ModelParams& p, const Grid1D& grid, double x0, double V0 = 0.0);

/// One IMEX step: implicit diffusion and linear decay, explicit kinetics.
/// Throws BlowUpDetected / PositivityLost; does not retry.
FieldTriple step(const FieldTriple& state, double dt, const ModelParams& p, double h);

/// The same step split into 2^k substeps, with k raised on failure up to max_halvings.
FieldTriple step_adaptive(const FieldTriple& state, double dt, const ModelParams& p, double h,
                          int max_halvings, int* halvings_used = nullptr);

std::vector<Spike> track_spikes(const Eigen::Ref<const Eigen::VectorXd>& u, const Grid1D& grid,
                                const TrackerOptions& options = {});

/// Count changes persisting K samples and oscillation onsets (windowed
/// peak-to-peak of a spike position above osc_cells * h).
std::vector<Event> detect_events(const SpikeTrack& track, double h, int K = 20,
                                 double window_fraction = 0.1, double osc_cells = 5.0);

struct SimResult {
  Grid1D grid;
  FieldTriple final_state;
  SpikeTrack track;
  double t_final = 0.0;
  long steps = 0;
  long halvings = 0;
};

/// Optional streaming sinks. Snapshots receive (t, state); samples
/// receive each track sample as it is recorded.
struct SimSinks {
  std::function<void(double, const FieldTriple&)> snapshot;
  std::function<void(const TrackSample&)> sample;
};

/// Runs cfg to t_end. Step errors are rethrown with the failing time attached.
SimResult simulate(const SimConfig& cfg, const SimSinks& sinks = {});

}  // namespace gm3
