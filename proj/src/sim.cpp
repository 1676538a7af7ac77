#include "gm3/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "gm3/csv.hpp"
#include "gm3/errors.hpp"
#include "gm3/outer.hpp"
#include "gm3/profile.hpp"
#include "gm3/tridiag.hpp"

namespace gm3 {

double Ramp::at(double t) const {
  return kind == Kind::Linear ? Dv0 - rate * t : Dv0 * std::exp(-rate * t);
}

const char* to_string(Event::Type type) {
  switch (type) {
    case Event::Type::Nucleation: return "Nucleation";
    case Event::Type::Annihilation: return "Annihilation";
    case Event::Type::OscillationOnset: return "OscillationOnset";
  }
  return "Unknown";
}

Grid1D make_grid(const SimConfig& cfg) {
  const ModelParams& p = cfg.params;
  const double length = cfg.domain == DomainMode::Full ? 2.0 * p.l : p.l;
  Eigen::Index n = cfg.n;
  if (cfg.auto_refine) {
    const double h_max = p.sqrt_delta1() / 10.0;
    n = std::max<Eigen::Index>(n, static_cast<Eigen::Index>(std::ceil(length / h_max - 1e-9)) + 1);
  }
  if (n % 2 == 0) ++n;
  return cfg.domain == DomainMode::Full ? Grid1D::full(p.l, n) : Grid1D::half(p.l, n);
}

namespace {

// Smaller root of c u^2 - v u + a v = 0, the outer u for a given v.
double outer_u_from_v(double v, const ModelParams& p) {
  const double disc = v * v - 4.0 * p.a * p.c * v;
  if (disc <= 0.0) return v / (2.0 * p.c);
  return 2.0 * p.a * v / (v + std::sqrt(disc));
}

double blend_weight(double r, double s) {
  if (r <= 5.0 * s) return 1.0;
  if (r >= 10.0 * s) return 0.0;
  const double t = (r - 5.0 * s) / (5.0 * s);
  return 1.0 - t * t * (3.0 - 2.0 * t);
}

FieldTriple from_file(const std::string& path, const Grid1D& grid) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  const auto table = read_csv(in);
  const auto col = [&](const char* name) { return table.column(name); };
  const auto& t = col("t");
  const auto& x = col("x");
  const auto& u = col("u");
  const auto& v = col("v");
  const auto& w = col("w");
  if (t.empty()) throw Error(ErrorKind::Io, path + " has no rows");
  const double last = t.back();
  std::vector<double> xs, us, vs, ws;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] != last) continue;
    xs.push_back(x[i]);
    us.push_back(u[i]);
    vs.push_back(v[i]);
    ws.push_back(w[i]);
  }
  if (xs.size() < 2) throw Error(ErrorKind::Io, path + ": last snapshot has fewer than 2 nodes");
  FieldTriple out = FieldTriple::constant(grid.size(), 0.0, 0.0, 0.0);
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double xi = std::clamp(grid[i], xs.front(), xs.back());
    auto it = std::upper_bound(xs.begin(), xs.end(), xi);
    std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(it - xs.begin()), xs.size() - 1);
    j = std::max<std::size_t>(j, 1);
    const double s = (xi - xs[j - 1]) / (xs[j] - xs[j - 1]);
    out.u(i) = us[j - 1] + s * (us[j] - us[j - 1]);
    out.v(i) = vs[j - 1] + s * (vs[j] - vs[j - 1]);
    out.w(i) = ws[j - 1] + s * (ws[j] - ws[j - 1]);
  }
  return out;
}

Tridiagonal<double> implicit_operator(double alpha, double D, double h, Eigen::Index n) {
  Tridiagonal<double> m(n);
  const double k = D / (h * h);
  m.diag.setConstant(alpha + 2.0 * k);
  m.lower.setConstant(-k);
  m.upper.setConstant(-k);
  m.upper(0) = -2.0 * k;       // ghost u_{-1} = u_1
  m.lower(n - 2) = -2.0 * k;   // ghost u_n = u_{n-2}
  return m;
}

}  // namespace

FieldTriple asymptotic_spike(const ModelParams& p, const Grid1D& grid, double x0, double V0) {
  p.validate();
  const Eigen::Index n = grid.size();
  Eigen::VectorXd r(n);
  for (Eigen::Index i = 0; i < n; ++i) r(i) = std::abs(grid[i] - x0);
  const Eigen::VectorXd r_out = r.cwiseMin(p.l);

  FieldTriple out = FieldTriple::constant(n, 0.0, 0.0, 0.0);
  bool have_outer = false;
  if (V0 <= 0.0 && p.a > 0.0 && p.b * p.c > p.a) {
    try {
      const OuterSolve solve = solve_V0_mu(p);
      V0 = solve.V0;
      out.u = outer_u_profile(r_out, solve, p);
      for (Eigen::Index i = 0; i < n; ++i) {
        out.v(i) = p.c * out.u(i) * out.u(i) / (out.u(i) - p.a);
      }
      have_outer = true;
    } catch (const Error&) {
      // fall through to the closed-form outer approximation
    }
  }
  if (!have_outer) {
    const Background bg = p.b * p.c > p.a ? Background::SmallA : Background::Homogeneous;
    if (V0 <= 0.0) V0 = bg == Background::SmallA ? smalla_roots(p).V0_plus : homog_roots(p).V0_plus;
    for (Eigen::Index i = 0; i < n; ++i) {
      out.v(i) = v_outer_profile(r_out(i), V0, p, bg);
      out.u(i) = outer_u_from_v(out.v(i), p);
    }
  }
  out.w = out.u / p.c;

  const double s = p.sqrt_delta1();
  const double gamma = gamma_of(p.a, p.c, p.delta1, V0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double chi = blend_weight(r(i), s);
    if (chi == 0.0) continue;
    const double u_in = V0 * (wc_eval(r(i) / s, gamma) + gamma) / (p.c * s);
    const double v_in = V0 / s;
    out.u(i) = chi * u_in + (1.0 - chi) * out.u(i);
    out.v(i) = chi * v_in + (1.0 - chi) * out.v(i);
    out.w(i) = chi * u_in / p.c + (1.0 - chi) * out.w(i);
  }
  return out;
}

FieldTriple initial_state(const SimConfig& cfg, const Grid1D& grid) {
  const ModelParams& p = cfg.params;
  switch (cfg.initial.kind) {
    case InitialCondition::Kind::AsymptoticSpike:
      return asymptotic_spike(p, grid, cfg.initial.center, cfg.initial.V0);
    case InitialCondition::Kind::HomogeneousPerturbation: {
      FieldTriple out = homogeneous_state(p, grid.size());
      std::mt19937_64 rng(cfg.initial.seed);
      for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        out.u(i) *= 1.0 + cfg.initial.amplitude * (2.0 * unit - 1.0);
      }
      return out;
    }
    case InitialCondition::Kind::FromFile:
      return from_file(cfg.initial.path, grid);
  }
  throw Error(ErrorKind::InvalidParameter, "unknown initial condition");
}

FieldTriple step(const FieldTriple& s, double dt, const ModelParams& p, double h) {
  const Eigen::Index n = s.size();
  if (n < 3) throw Error(ErrorKind::GridTooSmall, "step needs n >= 3");
  const Eigen::ArrayXd vw = s.v.array() * s.w.array();
  if ((vw.abs() < 1e-12).any()) throw Error(ErrorKind::DegenerateDenominator, "|v w| < 1e-12");

  FieldTriple next;
  const Eigen::VectorXd rhs_u =
      (s.u.array() / dt + p.a + s.u.array().cube() / vw).matrix();
  next.u = solve_tridiagonal(implicit_operator(1.0 / dt + 1.0, p.delta1, h, n), rhs_u);

  const Eigen::VectorXd u2 = next.u.cwiseProduct(next.u);
  const Eigen::VectorXd rhs_v = p.theta > 0.0 ? Eigen::VectorXd(p.theta / dt * s.v + u2) : u2;
  next.v = solve_tridiagonal(implicit_operator(p.theta / dt + p.b, p.Dv, h, n), rhs_v);

  const Eigen::VectorXd rhs_w = p.tau > 0.0 ? Eigen::VectorXd(p.tau / dt * s.w + next.u) : next.u;
  next.w = solve_tridiagonal(implicit_operator(p.tau / dt + p.c, p.delta2(), h, n), rhs_w);

  if (!next.all_finite() || next.u.cwiseAbs().maxCoeff() > 1e8) {
    throw Error(ErrorKind::BlowUpDetected, "max |u| exceeded 1e8 or became non-finite");
  }
  if (next.u.minCoeff() <= 0.0 || next.v.minCoeff() <= 0.0 || next.w.minCoeff() <= 0.0) {
    throw Error(ErrorKind::PositivityLost, "a field became non-positive");
  }
  return next;
}

FieldTriple step_adaptive(const FieldTriple& state, double dt, const ModelParams& p, double h,
                          int max_halvings, int* halvings_used) {
  for (int k = 0;; ++k) {
    try {
      FieldTriple s = state;
      const long sub = 1L << k;
      for (long j = 0; j < sub; ++j) s = step(s, dt / static_cast<double>(sub), p, h);
      if (halvings_used) *halvings_used = k;
      return s;
    } catch (const Error& e) {
      const bool retry = e.kind() == ErrorKind::BlowUpDetected ||
                         e.kind() == ErrorKind::PositivityLost ||
                         e.kind() == ErrorKind::DegenerateDenominator;
      if (!retry || k >= max_halvings) throw;
    }
  }
}

std::vector<Spike> track_spikes(const Eigen::Ref<const Eigen::VectorXd>& u, const Grid1D& grid,
                                const TrackerOptions& options) {
  const Eigen::Index n = u.size();
  std::vector<Spike> out;
  if (n < 3) return out;
  const double hi = u.maxCoeff(), lo = u.minCoeff();
  if (!(hi - lo > 1e-12 * std::max(1.0, std::abs(hi)))) return out;
  const double level = lo + options.threshold * (hi - lo);

  struct Candidate {
    Eigen::Index i;
    double position, amplitude;
  };
  std::vector<Candidate> cands;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (u(i) < level) continue;
    // reflected neighbours at the ends
    const double left = i > 0 ? u(i - 1) : u(1);
    const double right = i < n - 1 ? u(i + 1) : u(n - 2);
    const bool peak = (i == 0 || i == n - 1) ? u(i) > left : (u(i) > left && u(i) >= right);
    if (!peak) continue;
    const double curv = left - 2.0 * u(i) + right;
    double offset = curv < 0.0 ? 0.5 * (left - right) / curv : 0.0;
    offset = std::clamp(offset, -0.5, 0.5);
    double position = grid[i] + offset * grid.h();
    position = std::clamp(position, grid.front(), grid.back());
    const double amplitude = u(i) - 0.25 * (left - right) * offset;
    cands.push_back({i, position, amplitude});
  }
  std::sort(cands.begin(), cands.end(),
            [](const Candidate& a, const Candidate& b) { return a.amplitude > b.amplitude; });
  const double min_sep = options.min_sep_cells * grid.h();
  for (const auto& c : cands) {
    const bool clear = std::all_of(out.begin(), out.end(), [&](const Spike& s) {
      return std::abs(s.position - c.position) >= min_sep;
    });
    if (clear) out.push_back({c.position, c.amplitude});
  }
  std::sort(out.begin(), out.end(),
            [](const Spike& a, const Spike& b) { return a.position < b.position; });
  return out;
}

namespace {

std::vector<TrackedSpike> assign_ids(const std::vector<Spike>& spikes,
                                     const std::vector<TrackedSpike>& previous, double max_jump,
                                     int& next_id) {
  std::vector<TrackedSpike> out(spikes.size());
  std::vector<bool> used(previous.size(), false), done(spikes.size(), false);
  struct Pair {
    double d;
    std::size_t i, j;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < spikes.size(); ++i) {
    for (std::size_t j = 0; j < previous.size(); ++j) {
      const double d = std::abs(spikes[i].position - previous[j].position);
      if (d <= max_jump) pairs.push_back({d, i, j});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return a.d < b.d || (a.d == b.d && (a.i < b.i || (a.i == b.i && a.j < b.j)));
  });
  for (const auto& pr : pairs) {
    if (done[pr.i] || used[pr.j]) continue;
    done[pr.i] = used[pr.j] = true;
    out[pr.i] = {previous[pr.j].id, spikes[pr.i].position, spikes[pr.i].amplitude};
  }
  for (std::size_t i = 0; i < spikes.size(); ++i) {
    if (!done[i]) out[i] = {next_id++, spikes[i].position, spikes[i].amplitude};
  }
  return out;
}

std::string describe_new(const TrackSample& before, const TrackSample& after) {
  std::ostringstream os;
  os << "count " << before.count() << "->" << after.count();
  std::vector<double> fresh;
  for (const auto& s : after.spikes) {
    const bool seen = std::any_of(before.spikes.begin(), before.spikes.end(),
                                  [&](const TrackedSpike& b) { return b.id == s.id; });
    if (!seen) fresh.push_back(s.position);
  }
  if (!fresh.empty()) {
    os << " at";
    for (double x : fresh) os << ' ' << format_number(x);
  }
  os << " Dv " << format_number(after.Dv);
  return os.str();
}

}  // namespace

std::vector<Event> detect_events(const SpikeTrack& track, double h, int K, double window_fraction,
                                 double osc_cells) {
  std::vector<Event> events;
  const auto& S = track.samples;
  if (S.size() < 2) return events;

  std::size_t stable = 0;  // index of the sample that fixed the current count
  for (std::size_t i = 1; i < S.size(); ++i) {
    if (S[i].count() == S[stable].count()) continue;
    std::size_t j = i;
    while (j < S.size() && S[j].count() == S[i].count() && j - i < static_cast<std::size_t>(K)) ++j;
    if (j - i < static_cast<std::size_t>(K)) continue;
    const auto type = S[i].count() > S[stable].count() ? Event::Type::Nucleation
                                                        : Event::Type::Annihilation;
    events.push_back({S[i].t, type, describe_new(S[stable], S[i])});
    stable = i;
  }

  const double window = window_fraction * (S.back().t - S.front().t);
  std::map<int, std::vector<std::pair<double, double>>> paths;
  for (const auto& s : S) {
    for (const auto& sp : s.spikes) paths[sp.id].push_back({s.t, sp.position});
  }
  for (const auto& [id, path] : paths) {
    std::size_t start = 0;
    for (std::size_t j = 0; j < path.size(); ++j) {
      while (path[j].first - path[start].first > window) ++start;
      double lo = path[j].second, hi = lo;
      for (std::size_t m = start; m < j; ++m) {
        lo = std::min(lo, path[m].second);
        hi = std::max(hi, path[m].second);
      }
      if (hi - lo > osc_cells * h) {
        std::ostringstream os;
        os << "spike " << id << " peak-to-peak " << format_number(hi - lo);
        events.push_back({path[j].first, Event::Type::OscillationOnset, os.str()});
        break;
      }
    }
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const Event& a, const Event& b) { return a.t < b.t; });
  return events;
}

SimResult simulate(const SimConfig& cfg, const SimSinks& sinks) {
  cfg.params.validate();
  if (!(cfg.dt > 0.0) || !(cfg.t_end >= 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "need dt > 0 and t_end >= 0");
  }
  if (cfg.output_stride < 1) throw Error(ErrorKind::InvalidParameter, "output_stride must be >= 1");
  if (cfg.ramp && (!(cfg.ramp->at(0.0) > 0.0) || !(cfg.ramp->at(cfg.t_end) > 0.0))) {
    throw Error(ErrorKind::InvalidParameter, "ramp must keep Dv > 0 on [0, t_end]");
  }

  SimResult res{make_grid(cfg), {}, {}, 0.0, 0, 0};
  const double h = res.grid.h();
  ModelParams p = cfg.params;
  if (cfg.ramp) p.Dv = cfg.ramp->at(0.0);
  FieldTriple state = initial_state(cfg, res.grid);

  int next_id = 0;
  const double max_jump = 50.0 * h;
  auto record = [&](double t) {
    TrackSample sample;
    sample.t = t;
    sample.Dv = p.Dv;
    const auto spikes = track_spikes(state.u, res.grid, cfg.tracker);
    static const std::vector<TrackedSpike> none;
    sample.spikes = assign_ids(spikes, res.track.samples.empty() ? none : res.track.samples.back().spikes,
                               max_jump, next_id);
    if (sinks.sample) sinks.sample(sample);
    res.track.samples.push_back(std::move(sample));
  };

  record(0.0);
  if (sinks.snapshot) sinks.snapshot(0.0, state);
  const long steps = std::lround(cfg.t_end / cfg.dt);
  double t = 0.0;
  for (long k = 1; k <= steps; ++k) {
    const double t_next = static_cast<double>(k) * cfg.dt;
    if (cfg.ramp) p.Dv = cfg.ramp->at(t_next);
    int used = 0;
    try {
      state = step_adaptive(state, t_next - t, p, h, cfg.max_halvings, &used);
    } catch (const Error& e) {
      std::ostringstream os;
      os << e.what() << " (at t = " << t << ", Dv = " << p.Dv << ")";
      throw Error(e.kind(), os.str());
    }
    res.halvings += used;
    t = t_next;
    if (k % cfg.output_stride == 0 || k == steps) record(t);
    if (sinks.snapshot && ((cfg.snapshot_stride > 0 && k % cfg.snapshot_stride == 0) || k == steps)) {
      sinks.snapshot(t, state);
    }
  }
  res.steps = steps;
  res.t_final = t;
  res.final_state = std::move(state);
  res.track.events = detect_events(res.track, h);
  return res;
}

}  // namespace gm3
