#include "patrol/sync_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include "patrol/chain_trajectories.hpp"

namespace patrol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTol = 1e-12;

struct Bot {
  double l = 0.0, r = 0.0;
  double x = 0.0;
  int dir = 0;
  bool transit = false;
  double target = 0.0;
  bool timer = false;
  double timer_left = 0.0;
  int timer_dir = 0;
  double a_time = 0.0;
  bool failed = false;
  bool dead = false;
  bool parked = false;
  double w = 0.0;
  bool clamped = false;
  double last_v = std::numeric_limits<double>::quiet_NaN();
  // Exact time the current sub-step motion hits its boundary.
  double hit = kInf;
  double hit_pos = 0.0;
};

struct PairState {
  bool latched = false;
  long n_meet = 0;
  double last_meet = 0.0;
  bool inter = false;
  double delta = 0.0;  // extra dwell of the left group at its right extreme
};

struct FailureEdge {
  double time;
  std::size_t robot;
  bool start;
};

class Simulator {
 public:
  Simulator(const ChainRoadmap& chain, const Partition& partition, const SimConfig& cfg)
      : chain_(chain), cfg_(cfg) {
    validate_config(partition);
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(cfg.run_index),
                      static_cast<std::uint32_t>(cfg.run_index >> 32)};
    rng_.seed(seq);
    bots_.resize(partition.size());
    trace_.dirs.resize(partition.size());
    trace_.config = cfg;
    init_state(partition);
    for (const FailureWindow& f : cfg.failures) {
      edges_.push_back({f.start, f.robot, true});
      if (std::isfinite(f.end)) edges_.push_back({f.end, f.robot, false});
    }
    std::stable_sort(edges_.begin(), edges_.end(),
                     [](const FailureEdge& a, const FailureEdge& b) { return a.time < b.time; });
    tracks_.resize(partition.size());
  }

  Trace run() {
    const double T = cfg_.horizon;
    const auto steps = static_cast<std::size_t>(std::ceil(T / cfg_.dt - 1e-9));
    const double sigma = std::sqrt(cfg_.sigma2);
    std::normal_distribution<double> noise(0.0, sigma > 0.0 ? sigma : 1.0);
    process_instant(0.0);
    for (std::size_t s = 0; s < steps; ++s) {
      const double t0 = static_cast<double>(s) * cfg_.dt;
      const double t1 = std::min(static_cast<double>(s + 1) * cfg_.dt, T);
      for (Bot& b : bots_) {
        b.w = sigma > 0.0 ? noise(rng_) : 0.0;
        b.clamped = false;
      }
      double cur = t0;
      int guard = 0;
      while (cur < t1) {
        if (++guard > 100000) throw std::logic_error("simulation stalled inside a step");
        record(cur);
        const double next = advance(cur, t1);
        cur = next;
        process_instant(cur);
      }
    }
    finish(T);
    return std::move(trace_);
  }

 private:
  void validate_config(const Partition& partition) {
    if (!(cfg_.dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (!(cfg_.horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (!(cfg_.sigma2 >= 0.0)) throw std::invalid_argument("noise variance must be non-negative");
    if (partition.size() == 0) throw std::invalid_argument("partition has no slots");
    double shortest = kInf;
    for (const Cluster& c : partition.clusters()) {
      if (c.empty()) continue;
      if (!(c.length() > 0.0)) throw std::invalid_argument("simulation needs positive cluster lengths");
      shortest = std::min(shortest, c.length());
    }
    if (!std::isfinite(shortest)) throw std::invalid_argument("partition has no nonempty cluster");
    if (!(cfg_.dt < shortest / 4.0)) {
      throw std::invalid_argument("dt must be below a quarter of the shortest cluster");
    }
    for (const FailureWindow& f : cfg_.failures) {
      if (f.robot >= partition.size()) throw std::invalid_argument("failure names an unknown robot");
      if (!(f.end > f.start)) throw std::invalid_argument("failure window is empty");
    }
    if (cfg_.detection_timeout && !(*cfg_.detection_timeout > 0.0)) {
      throw std::invalid_argument("detection timeout must be positive");
    }
  }

  void init_state(const Partition& partition) {
    const std::size_t m = partition.size();
    if (cfg_.initial_positions && cfg_.initial_positions->size() != m) {
      throw std::invalid_argument("initial positions must list one entry per robot");
    }
    if (cfg_.initial_dirs && cfg_.initial_dirs->size() != m) {
      throw std::invalid_argument("initial directions must list one entry per robot");
    }
    for (std::size_t i = 0; i < m; ++i) {
      Bot& b = bots_[i];
      const Cluster& c = partition[i];
      b.l = c.left;
      b.r = c.right;
      if (c.empty()) {
        b.parked = true;
        b.x = c.left;
        continue;
      }
      std::uniform_real_distribution<double> where(c.left, c.right);
      std::bernoulli_distribution coin(0.5);
      const double x = where(rng_);
      const int d = coin(rng_) ? 1 : -1;
      b.x = cfg_.initial_positions ? (*cfg_.initial_positions)[i] : x;
      b.dir = cfg_.initial_dirs ? (*cfg_.initial_dirs)[i] : d;
      if (!(b.x >= c.left - 1e-9 && b.x <= c.right + 1e-9)) {
        throw std::invalid_argument("initial position outside the robot's cluster");
      }
      b.x = std::clamp(b.x, c.left, c.right);
      if (b.dir < -1 || b.dir > 1) throw std::invalid_argument("initial direction must be -1, 0 or 1");
    }
    for (std::size_t i = 0; i < m; ++i) trace_.dirs[i].push_back({0.0, bots_[i].dir});
    std::vector<std::size_t> team;
    for (std::size_t i = 0; i < m; ++i) {
      if (!bots_[i].parked) team.push_back(i);
    }
    start_epoch(0.0, partition, team);
  }

  // team[k] owns the k-th nonempty slot of `partition`.
  void start_epoch(double now, const Partition& partition, std::vector<std::size_t> team) {
    if (!trace_.epochs.empty()) trace_.epochs.back().end = now;
    Epoch e;
    e.start = now;
    e.end = cfg_.horizon;
    e.partition = partition;
    team_ = std::move(team);
    const AggregatedClusters agg = aggregate_clusters(partition);
    std::vector<std::size_t> slot_of;
    for (std::size_t k = 0; k < partition.size(); ++k) {
      if (!partition[k].empty()) slot_of.push_back(k);
    }
    e.team = team_;
    trace_.epochs.push_back(std::move(e));

    pairs_.assign(team_.empty() ? 0 : team_.size() - 1, PairState{});
    for (std::size_t k = 0; k + 1 < team_.size(); ++k) {
      PairState& p = pairs_[k];
      p.last_meet = now;
      const std::size_t g = agg.group_of(slot_of[k]);
      p.inter = g != agg.group_of(slot_of[k + 1]);
      p.delta = (p.inter && g > 0) ? agg.d_max - agg.group_lengths[g] : 0.0;
    }
    const bool several = agg.count() >= 2;
    hold_first_ = several ? 2.0 * (agg.d_max - agg.group_lengths.front()) : 0.0;
    hold_last_ = several ? 2.0 * (agg.d_max - agg.group_lengths.back()) : 0.0;
  }

  void set_dir(std::size_t i, int d, double now) {
    Bot& b = bots_[i];
    if (b.dir != d) trace_.dirs[i].push_back({now, d});
    b.dir = d;
    if (d != 0) {
      const std::size_t k = team_pos(i);
      if (k != npos) {
        if (k > 0) pairs_[k - 1].latched = false;
        if (k < pairs_.size()) pairs_[k].latched = false;
      }
    }
  }

  void start_hold(std::size_t i, double h, int d, double now) {
    Bot& b = bots_[i];
    b.timer = false;
    if (h <= 0.0) {
      set_dir(i, d, now);
      return;
    }
    set_dir(i, 0, now);
    b.timer = true;
    b.timer_left = h;
    b.timer_dir = d;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::size_t team_pos(std::size_t i) const {
    auto it = std::find(team_.begin(), team_.end(), i);
    return it == team_.end() ? npos : static_cast<std::size_t>(it - team_.begin());
  }

  bool frozen(const Bot& b) const { return b.parked || b.dead || b.failed; }

  double velocity(const Bot& b) const {
    if (frozen(b) || b.clamped) return 0.0;
    double v = 0.0;
    if (b.transit) {
      v = (b.target > b.x ? 1.0 : -1.0) + b.w;
      const double lo = chain_.coordinate(0);
      const double hi = chain_.length();
      if ((b.x <= lo && v < 0.0) || (b.x >= hi && v > 0.0)) return 0.0;
      return v;
    }
    if (b.dir == 0) return 0.0;
    v = static_cast<double>(b.dir) + b.w;
    if ((b.x <= b.l && v < 0.0) || (b.x >= b.r && v > 0.0)) return 0.0;
    return v;
  }

  void record(double now) {
    for (std::size_t i = 0; i < bots_.size(); ++i) {
      Bot& b = bots_[i];
      const double v = velocity(b);
      if (v == b.last_v) continue;
      b.last_v = v;
      auto& bps = tracks_[i];
      if (!bps.empty() && bps.back().time >= now) {
        bps.back().position = b.x;
      } else {
        bps.push_back({now, b.x});
      }
    }
  }

  // Move everyone to the next event inside (cur, t1] and return its time.
  double advance(double cur, double t1) {
    double next = t1;
    for (Bot& b : bots_) {
      b.hit = kInf;
      const double v = velocity(b);
      if (v == 0.0) continue;
      double bound = 0.0;
      if (b.transit) {
        const bool toward = (b.target - b.x) * v > 0.0;
        bound = toward ? b.target : (v > 0.0 ? chain_.length() : chain_.coordinate(0));
      } else {
        bound = v > 0.0 ? b.r : b.l;
      }
      b.hit = cur + (bound - b.x) / v;
      b.hit_pos = bound;
      next = std::min(next, b.hit);
    }
    for (const Bot& b : bots_) {
      if (b.timer && !frozen(b)) next = std::min(next, cur + b.timer_left);
    }
    if (edge_ < edges_.size()) next = std::min(next, std::max(cur, edges_[edge_].time));
    for (double d : detection_deadlines()) {
      if (d > cur) next = std::min(next, d);
    }
    next = std::max(next, cur);

    const double span = next - cur;
    for (Bot& b : bots_) {
      const double v = velocity(b);
      if (v != 0.0) {
        if (b.hit <= next + kTol) {
          b.x = b.hit_pos;
          after_hit(b);
        } else {
          b.x += v * span;
          if (!b.transit) b.x = std::clamp(b.x, b.l, b.r);
        }
      }
      if (b.timer && !frozen(b)) {
        b.timer_left -= span;
        if (b.timer_left <= kTol) b.timer_left = 0.0;
      }
    }
    return next;
  }

  void after_hit(Bot& b) {
    if (b.transit) {
      if (b.x == b.target) {
        b.transit = false;
        // Arrives as if it had been heading for that boundary.
        b.dir = b.target == b.r ? 1 : -1;
      } else {
        b.clamped = true;
      }
      return;
    }
    const bool wanted = (b.dir > 0 && b.x == b.r) || (b.dir < 0 && b.x == b.l);
    if (!wanted) b.clamped = true;
  }

  std::vector<double> detection_deadlines() const {
    std::vector<double> out;
    if (!cfg_.detection_timeout) return out;
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      if (bots_[team_[k]].failed || bots_[team_[k + 1]].failed) {
        out.push_back(pairs_[k].last_meet + *cfg_.detection_timeout);
      }
    }
    return out;
  }

  void process_instant(double now) {
    while (edge_ < edges_.size() && edges_[edge_].time <= now + kTol) {
      const FailureEdge& f = edges_[edge_++];
      Bot& b = bots_[f.robot];
      if (b.dead) continue;
      b.failed = f.start;
      trace_.events.push_back({now, f.robot, f.start ? "fail" : "resume"});
    }
    bool changed = true;
    while (changed) {
      changed = false;
      changed |= arrivals(now);
      changed |= timers(now);
      changed |= meetings(now);
      changed |= detect(now);
    }
  }

  bool arrivals(double now) {
    bool any = false;
    for (std::size_t k = 0; k < team_.size(); ++k) {
      const std::size_t i = team_[k];
      Bot& b = bots_[i];
      if (frozen(b) || b.transit || b.dir == 0) continue;
      const bool first = k == 0;
      const bool last = k + 1 == team_.size();
      if (b.dir > 0 && b.x >= b.r - kTol) {
        b.x = b.r;
        b.a_time = now;
        if (last) {
          start_hold(i, hold_last_, -1, now);
        } else {
          set_dir(i, 0, now);
        }
        any = true;
      } else if (b.dir < 0 && b.x <= b.l + kTol) {
        b.x = b.l;
        if (first) {
          start_hold(i, hold_first_, 1, now);
        } else {
          set_dir(i, 0, now);
        }
        any = true;
      }
    }
    return any;
  }

  bool timers(double now) {
    bool any = false;
    for (std::size_t i = 0; i < bots_.size(); ++i) {
      Bot& b = bots_[i];
      if (!b.timer || frozen(b) || b.timer_left > kTol) continue;
      b.timer = false;
      set_dir(i, b.timer_dir, now);
      any = true;
    }
    return any;
  }

  bool meetings(double now) {
    bool any = false;
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      PairState& p = pairs_[k];
      const std::size_t ia = team_[k];
      const std::size_t ib = team_[k + 1];
      Bot& a = bots_[ia];
      Bot& b = bots_[ib];
      if (p.latched || frozen(a) || frozen(b) || a.transit || b.transit) continue;
      if (a.dir != 0 || b.dir != 0 || a.x != a.r || b.x != b.l) continue;
      p.latched = true;
      const long n = p.n_meet++;
      p.last_meet = now;
      trace_.comms.push_back({now, ia, ib});
      trace_.events.push_back({now, ia, "meet"});
      a.timer = false;
      b.timer = false;
      if (p.inter) {
        const double tau = std::max(0.0, a.a_time + p.delta - now);
        start_hold(ib, tau, 1, now);
        start_hold(ia, p.delta + tau, -1, now);
      } else if (n % 2 == 0) {
        set_dir(ib, 1, now);
      } else {
        set_dir(ia, -1, now);
      }
      any = true;
    }
    return any;
  }

  bool detect(double now) {
    if (!cfg_.detection_timeout) return false;
    std::vector<std::size_t> lost;
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      if (now + kTol < pairs_[k].last_meet + *cfg_.detection_timeout) continue;
      for (std::size_t i : {team_[k], team_[k + 1]}) {
        if (bots_[i].failed && std::find(lost.begin(), lost.end(), i) == lost.end()) lost.push_back(i);
      }
    }
    if (lost.empty()) return false;
    for (std::size_t i : lost) {
      bots_[i].dead = true;
      bots_[i].timer = false;
      trace_.events.push_back({now, i, "detect"});
    }
    repartition(now);
    return true;
  }

  void repartition(double now) {
    std::vector<std::size_t> survivors;
    for (std::size_t i : team_) {
      if (!bots_[i].dead) survivors.push_back(i);
    }
    if (survivors.empty()) {
      team_.clear();
      pairs_.clear();
      return;
    }
    const Partition next = optimal_partition_bisect(chain_, survivors.size(), cfg_.eps).partition;
    std::vector<std::size_t> team;
    for (std::size_t k = 0; k < survivors.size(); ++k) {
      const std::size_t i = survivors[k];
      Bot& b = bots_[i];
      const Cluster& c = next[k];
      b.timer = false;
      b.clamped = false;
      if (c.empty()) {
        b.parked = true;
        set_dir(i, 0, now);
        continue;
      }
      if (!(c.length() > 0.0)) throw std::invalid_argument("repartition produced a zero-length cluster");
      b.l = c.left;
      b.r = c.right;
      b.a_time = now;
      b.transit = false;
      if (b.x < b.l || b.x > b.r) {
        b.transit = true;
        b.target = b.x < b.l ? b.l : b.r;
        set_dir(i, b.target > b.x ? 1 : -1, now);
      } else if (b.dir == 0) {
        set_dir(i, 1, now);
      }
      team.push_back(i);
    }
    trace_.events.push_back({now, survivors.front(), "repartition"});
    start_epoch(now, next, std::move(team));
  }

  void finish(double T) {
    record(T);
    TeamTrajectory& x = trace_.trajectory;
    x.horizon = T;
    x.num_viewpoints = chain_.size();
    x.period = 2.0 * trace_.epochs.front().partition.dimension();
    const Route route = Route::chain(chain_);
    for (std::size_t i = 0; i < bots_.size(); ++i) {
      RobotTrack r;
      r.route = route;
      r.breakpoints = std::move(tracks_[i]);
      if (r.breakpoints.back().time < T) r.breakpoints.push_back({T, bots_[i].x});
      const auto& team0 = trace_.epochs.front().team;
      r.active = !bots_[i].dead && std::find(team0.begin(), team0.end(), i) != team0.end();
      x.robots.push_back(std::move(r));
    }
  }

  const ChainRoadmap& chain_;
  SimConfig cfg_;
  std::mt19937_64 rng_;
  std::vector<Bot> bots_;
  std::vector<std::vector<Breakpoint>> tracks_;
  std::vector<std::size_t> team_;
  std::vector<PairState> pairs_;
  std::vector<FailureEdge> edges_;
  std::size_t edge_ = 0;
  double hold_first_ = 0.0;
  double hold_last_ = 0.0;
  Trace trace_;
};

}  // namespace

ChainRoadmap case_study_chain() {
  return ChainRoadmap({0,    4,    9.5,  15,   17,   22,   27,   31,   36,    39,
                       41.5, 46,   51.5, 56,   59.5, 63,   66,   69.5, 75.5,  79.5,
                       81.5, 86,   91.5, 95,   98.5, 102.5, 107, 109.5, 111, 116});
}

Trace simulate(const ChainRoadmap& chain, const Partition& partition, const SimConfig& cfg) {
  return Simulator(chain, partition, cfg).run();
}

Trace inject_permanent_failure_and_repartition(const ChainRoadmap& chain, const Partition& partition,
                                               SimConfig cfg, std::size_t robot, double at,
                                               double timeout) {
  if (partition.nonempty_count() < 2) throw std::invalid_argument("no robot would survive the failure");
  cfg.failures.push_back({robot, at, kInf});
  cfg.detection_timeout = timeout;
  return simulate(chain, partition, cfg);
}

std::optional<double> convergence_time(const Trace& trace, std::size_t epoch,
                                       std::optional<double> eta_opt) {
  const Epoch& e = trace.epochs.at(epoch);
  const double eta = eta_opt.value_or(trace.config.eta);
  const double P = 2.0 * e.partition.dimension();
  const double g = trace.config.dt;
  double settled = e.start;
  for (std::size_t k = 0;; ++k) {
    const double t = e.start + static_cast<double>(k) * g;
    if (t + P > e.end) break;
    for (std::size_t i : e.team) {
      const RobotTrack& r = trace.trajectory.robots[i];
      if (std::abs(r.position(t + P) - r.position(t)) > eta) {
        settled = t + g;
        break;
      }
    }
  }
  if (e.end - settled < 3.0 * P) return std::nullopt;
  return settled;
}

WindowMetrics evaluate_window(const Trace& trace, const ChainRoadmap& chain, std::size_t epoch,
                              double t0, double t1) {
  const Epoch& e = trace.epochs.at(epoch);
  if (!(t1 > t0)) throw std::invalid_argument("evaluation window is empty");
  TeamTrajectory x = trace.trajectory;
  x.horizon = t1;
  x.period.reset();
  for (std::size_t i = 0; i < x.robots.size(); ++i) {
    RobotTrack& r = x.robots[i];
    r.active = std::find(e.team.begin(), e.team.end(), i) != e.team.end();
    r.breakpoints = clip(r.breakpoints, t0, t1);
  }
  WindowMetrics out;
  out.refresh_time = eval_refresh_time(x, {.warmup = t0, .eta = 1e-9, .strict = false});
  if (e.team.size() >= 2) {
    const double P = 2.0 * e.partition.dimension();
    LatencyOptions opts;
    opts.eta = 1e-9;
    opts.window_start = t0;
    opts.tail = (static_cast<double>(e.team.size()) / 2.0 + 1.0) * P;
    out.latency = eval_latency(x, chain, opts);
    out.bounds = latency_lower_bounds(e.partition);
  }
  return out;
}

std::vector<SweepRow> noise_sweep(const ChainRoadmap& chain, const Partition& partition,
                                  const SweepConfig& cfg) {
  if (cfg.runs == 0) throw std::invalid_argument("sweep needs at least one run");
  const double warmup = cfg.warmup.value_or(cfg.horizon / 3.0);
  if (!(warmup >= 0.0 && warmup < cfg.horizon)) throw std::invalid_argument("warmup outside horizon");
  const std::size_t total = cfg.variances.size() * cfg.runs;
  std::vector<WindowMetrics> results(total);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t job = next++; job < total; job = next++) {
      SimConfig sc;
      sc.dt = cfg.dt;
      sc.horizon = cfg.horizon;
      sc.seed = cfg.master_seed;
      sc.run_index = job;
      sc.sigma2 = cfg.variances[job / cfg.runs];
      const Trace tr = simulate(chain, partition, sc);
      results[job] = evaluate_window(tr, chain, 0, warmup, cfg.horizon);
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.workers, total));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  std::vector<SweepRow> rows;
  for (std::size_t v = 0; v < cfg.variances.size(); ++v) {
    SweepRow row;
    row.sigma2 = cfg.variances[v];
    row.rt_min = row.lt_min = kInf;
    row.rt_max = row.lt_max = -kInf;
    for (std::size_t r = 0; r < cfg.runs; ++r) {
      const WindowMetrics& m = results[v * cfg.runs + r];
      row.rt_mean += m.refresh_time;
      row.lt_mean += m.latency.overall;
      row.rt_min = std::min(row.rt_min, m.refresh_time);
      row.rt_max = std::max(row.rt_max, m.refresh_time);
      row.lt_min = std::min(row.lt_min, m.latency.overall);
      row.lt_max = std::max(row.lt_max, m.latency.overall);
    }
    row.rt_mean /= static_cast<double>(cfg.runs);
    row.lt_mean /= static_cast<double>(cfg.runs);
    rows.push_back(row);
  }
  return rows;
}

Bootstrap distributed_bootstrap(const ChainRoadmap& chain, const std::vector<double>& positions,
                                double eps) {
  const std::size_t m = positions.size();
  if (m == 0) throw std::invalid_argument("bootstrap needs robots");
  Bootstrap out;
  const double origin = chain.coordinate(0);
  for (double p : positions) {
    if (p < origin || p > chain.length()) throw std::invalid_argument("robot off the chain");
    out.gather_time = std::max(out.gather_time, p - origin);
  }
  out.leader = 0;
  if (m >= chain.size()) throw InfeasibleError("at least as many robots as viewpoints");
  if (!(eps > 0.0) || !(eps < chain.length() / static_cast<double>(m))) {
    throw std::invalid_argument("tolerance must satisfy 0 < eps < v_n / m");
  }
  // The leader probes a length by walking the chain and counting clusters.
  double a = 0.0;
  double b = 2.0 * chain.length() / static_cast<double>(m);
  const double walk = 2.0 * (chain.length() - origin);
  while (b - a > eps) {
    const double rho = 0.5 * (a + b);
    if (rho <= a || rho >= b) break;
    ++out.probes;
    out.leader_travel += walk;
    if (left_induced_cardinality(chain, rho) > m) {
      a = rho;
    } else {
      b = rho;
    }
  }
  out.partition = pad_partition(left_induced_partition(chain, b), m);
  return out;
}

namespace {

int dir_at(const std::vector<DirChange>& d, double t) {
  int v = 0;
  for (const DirChange& c : d) {
    if (c.time > t) break;
    v = c.dir;
  }
  return v;
}

}  // namespace

void write_trace_csv(std::ostream& out, const Trace& trace) {
  struct Row {
    double time;
    std::size_t robot;
    std::string event;
  };
  std::vector<Row> rows;
  const TeamTrajectory& x = trace.trajectory;
  const double dt = trace.config.dt;
  const auto steps = static_cast<std::size_t>(std::ceil(x.horizon / dt - 1e-9));
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = std::min(static_cast<double>(k) * dt, x.horizon);
    for (std::size_t i = 0; i < x.robots.size(); ++i) rows.push_back({t, i, ""});
  }
  for (const TraceEvent& e : trace.events) rows.push_back({e.time, e.robot, e.what});
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.time < b.time; });
  out << "time,robot,position,dir,event\n";
  char buf[96];
  for (const Row& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g,%d,", r.time, r.robot + 1,
                  x.robots[r.robot].position(r.time), dir_at(trace.dirs[r.robot], r.time));
    out << buf << r.event << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "sigma2,rt_mean,rt_min,rt_max,lt_mean,lt_min,lt_max\n";
  char buf[256];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.sigma2, r.rt_mean,
                  r.rt_min, r.rt_max, r.lt_mean, r.lt_min, r.lt_max);
    out << buf;
  }
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("spearman needs paired samples");
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace patrol
