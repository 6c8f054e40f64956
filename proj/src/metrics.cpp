#include "patrol/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "patrol/chain_trajectories.hpp"

namespace patrol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void append(std::vector<Interval>& v, Interval iv) {
  if (!v.empty() && iv.start <= v.back().end) {
    v.back().end = std::max(v.back().end, iv.end);
  } else {
    v.push_back(iv);
  }
}

// Times within [a.time, b.time] where the segment is within eta of `level`.
std::optional<Interval> near_level(const Breakpoint& a, const Breakpoint& b, double level, double eta) {
  const bool a_in = std::abs(a.position - level) <= eta;
  const bool b_in = std::abs(b.position - level) <= eta;
  if (a_in && b_in) return Interval{a.time, b.time};
  const double dp = b.position - a.position;
  if (dp == 0.0) return std::nullopt;
  auto cross = [&](double y) { return a.time + (y - a.position) * (b.time - a.time) / dp; };
  double lo = std::min(cross(level - eta), cross(level + eta));
  double hi = std::max(cross(level - eta), cross(level + eta));
  if (a_in) lo = a.time;
  if (b_in) hi = b.time;
  lo = std::max(lo, a.time);
  hi = std::min(hi, b.time);
  if (lo > hi) return std::nullopt;
  return Interval{lo, hi};
}

}  // namespace

std::vector<Interval> merge_intervals(std::vector<Interval> v) {
  std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) {
    return a.start < b.start || (a.start == b.start && a.end < b.end);
  });
  std::vector<Interval> out;
  for (const Interval& iv : v) append(out, iv);
  return out;
}

std::vector<std::vector<Interval>> robot_occupancy(const RobotTrack& r, std::size_t num_viewpoints,
                                                   double eta) {
  std::vector<std::vector<Interval>> occ(num_viewpoints);
  const Route& route = r.route;
  const std::size_t stops = route.stops.size();
  const double loop = route.closed ? route.length() : 0.0;
  const auto& bps = r.breakpoints;

  auto visit_range = [&](const Breakpoint& a, const Breakpoint& b) {
    const double lo = std::min(a.position, b.position) - eta;
    const double hi = std::max(a.position, b.position) + eta;
    long j0 = 0;
    long j1 = 0;
    if (route.closed) {
      j0 = static_cast<long>(std::floor(lo / loop));
      j1 = static_cast<long>(std::floor(hi / loop));
    }
    for (long j = j0; j <= j1; ++j) {
      const double shift = static_cast<double>(j) * loop;
      auto first = std::lower_bound(route.arc.begin(), route.arc.begin() + stops, lo - shift);
      for (auto it = first; it != route.arc.begin() + stops && *it <= hi - shift; ++it) {
        const std::size_t k = static_cast<std::size_t>(it - route.arc.begin());
        if (auto iv = near_level(a, b, *it + shift, eta)) append(occ[route.stops[k]], *iv);
      }
    }
  };

  if (bps.size() == 1) {
    visit_range(bps[0], bps[0]);
  }
  for (std::size_t s = 1; s < bps.size(); ++s) visit_range(bps[s - 1], bps[s]);
  return occ;
}

VisitLog visits(const TeamTrajectory& x, double eta) {
  VisitLog log;
  log.eta = eta;
  log.per_viewpoint.resize(x.num_viewpoints);
  for (const RobotTrack& r : x.robots) {
    if (!r.active) continue;
    auto occ = robot_occupancy(r, x.num_viewpoints, eta);
    for (std::size_t v = 0; v < x.num_viewpoints; ++v) {
      auto& dst = log.per_viewpoint[v];
      dst.insert(dst.end(), occ[v].begin(), occ[v].end());
    }
  }
  for (auto& v : log.per_viewpoint) v = merge_intervals(std::move(v));
  return log;
}

double eval_refresh_time(const TeamTrajectory& x, const RefreshOptions& opts) {
  if (x.robots.empty() || x.num_viewpoints == 0) throw std::invalid_argument("empty trajectory");
  const double w0 = opts.strict ? 0.0 : opts.warmup;
  const double w1 = x.horizon;
  if (!(w1 > w0)) throw std::invalid_argument("evaluation window is empty");
  if (!opts.strict && x.period && w1 - w0 < *x.period * (1.0 - 1e-12)) {
    throw std::invalid_argument("evaluation window shorter than the declared period");
  }
  const double cap = (!opts.strict && x.period) ? *x.period : kInf;
  const VisitLog log = visits(x, opts.eta);

  double rt = 0.0;
  for (const auto& ivs : log.per_viewpoint) {
    double last = w0;
    bool seen = false;
    for (const Interval& iv : ivs) {
      if (iv.end < w0 || iv.start > w1) continue;
      const double gap = std::max(0.0, iv.start - last);
      rt = std::max(rt, seen ? gap : std::min(gap, cap));
      last = std::max(last, iv.end);
      seen = true;
    }
    if (!seen) return kInf;
    rt = std::max(rt, std::min(std::max(0.0, w1 - last), cap));
  }
  return rt;
}

std::vector<double> CommLog::instants(std::size_t k) const {
  std::vector<double> out{origin};
  for (const Interval& iv : pairs.at(k)) {
    if (iv.start > origin) out.push_back(iv.start);
  }
  return out;
}

CommLog comm_instants(const TeamTrajectory& x, const ChainRoadmap& chain, double eta,
                      double window_start) {
  if (x.num_viewpoints != chain.size()) {
    throw std::invalid_argument("trajectory does not live on this chain");
  }
  CommLog log;
  log.origin = window_start;
  std::vector<std::vector<std::vector<Interval>>> occ;
  for (std::size_t i = 0; i < x.robots.size(); ++i) {
    if (!x.robots[i].active) continue;
    log.robots.push_back(i);
    occ.push_back(robot_occupancy(x.robots[i], chain.size(), eta));
  }
  for (std::size_t k = 0; k + 1 < log.robots.size(); ++k) {
    std::vector<Interval> both;
    for (std::size_t u = 0; u < chain.size(); ++u) {
      const auto& a = occ[k][u];
      if (a.empty()) continue;
      for (std::size_t w = (u == 0 ? 0 : u - 1); w <= std::min(u + 1, chain.size() - 1); ++w) {
        const auto& b = occ[k + 1][w];
        std::size_t p = 0;
        std::size_t q = 0;
        while (p < a.size() && q < b.size()) {
          const double s = std::max(a[p].start, b[q].start);
          const double e = std::min(a[p].end, b[q].end);
          if (s <= e) both.push_back({s, e});
          if (a[p].end < b[q].end) {
            ++p;
          } else {
            ++q;
          }
        }
      }
    }
    std::vector<Interval> kept;
    for (const Interval& iv : merge_intervals(std::move(both))) {
      if (iv.end >= window_start) kept.push_back({std::max(iv.start, window_start), iv.end});
    }
    log.pairs.push_back(std::move(kept));
  }
  return log;
}

namespace {

// Earliest time >= t at which pair k can relay a message.
double next_relay(const std::vector<Interval>& ivs, double origin, double t, bool use_intervals) {
  if (t <= origin) return origin;
  auto it = std::lower_bound(ivs.begin(), ivs.end(), t,
                             [](const Interval& iv, double v) { return iv.end < v; });
  if (it == ivs.end()) return kInf;
  if (it->start >= t) return it->start;
  if (use_intervals) return t;
  ++it;
  return it == ivs.end() ? kInf : it->start;
}

double one_direction(const std::vector<const std::vector<Interval>*>& pairs, double origin,
                     double horizon, double tail, const LatencyOptions& opts) {
  if (pairs.size() <= 1) return 0.0;
  const bool intervals = opts.use_intervals && !opts.strict;
  std::vector<double> departures{origin};
  for (const Interval& iv : *pairs.front()) {
    if (iv.start > origin) departures.push_back(iv.start);
    if (!intervals || iv.end == iv.start) continue;
    // While the first pair stays in contact the injection time can slide;
    // the latest injection reaching a given arrival sits at an interval end.
    departures.push_back(iv.end);
    for (std::size_t k = 1; k < pairs.size(); ++k) {
      for (const Interval& other : *pairs[k]) {
        if (other.end > iv.start && other.end < iv.end) departures.push_back(other.end);
      }
    }
  }
  std::sort(departures.begin(), departures.end());
  departures.erase(std::unique(departures.begin(), departures.end()), departures.end());
  // arrival -> latest departure reaching it
  std::map<double, double> latest;
  double worst = 0.0;
  for (double t0 : departures) {
    double t = t0;
    for (std::size_t k = 1; k < pairs.size() && t < kInf; ++k) {
      t = next_relay(*pairs[k], origin, t, intervals);
    }
    if (opts.strict) {
      worst = std::max(worst, std::min(t, horizon) - t0);
    } else if (t <= horizon) {
      auto [it, inserted] = latest.emplace(t, t0);
      if (!inserted) it->second = std::max(it->second, t0);
    } else if (t0 <= horizon - tail) {
      // The earliest undelivered injection bounds the rest.
      worst = std::max(worst, horizon - t0);
    }
  }
  for (const auto& [arrival, dep] : latest) worst = std::max(worst, arrival - dep);
  return worst;
}

}  // namespace

Latency eval_latency(const CommLog& log, double horizon, const LatencyOptions& opts) {
  if (log.robots.size() < 2) throw std::invalid_argument("latency needs at least two robots");
  std::vector<const std::vector<Interval>*> up;
  for (const auto& p : log.pairs) up.push_back(&p);
  std::vector<const std::vector<Interval>*> down(up.rbegin(), up.rend());
  const double tail = opts.tail.value_or(0.0);
  Latency lt;
  lt.up = one_direction(up, log.origin, horizon, tail, opts);
  lt.down = one_direction(down, log.origin, horizon, tail, opts);
  lt.overall = std::max(lt.up, lt.down);
  return lt;
}

Latency eval_latency(const TeamTrajectory& x, const ChainRoadmap& chain, const LatencyOptions& opts) {
  const CommLog log = comm_instants(x, chain, opts.eta, opts.window_start);
  LatencyOptions resolved = opts;
  if (!resolved.tail) {
    const double robots = static_cast<double>(log.robots.size());
    resolved.tail = x.period ? (robots / 2.0 + 1.0) * *x.period : 0.0;
  }
  return eval_latency(log, x.horizon, resolved);
}

LatencyBounds latency_lower_bounds(const Partition& partition) {
  std::vector<double> d;
  for (const Cluster& c : partition.clusters()) {
    if (!c.empty()) d.push_back(c.length());
  }
  if (d.size() < 2) throw std::invalid_argument("latency bounds need two robots");
  LatencyBounds b;
  for (std::size_t i = 1; i + 1 < d.size(); ++i) b.up_lb += d[i];
  const AggregatedClusters agg = aggregate_clusters(partition);
  const double mbar = static_cast<double>(agg.count());
  const double form = (mbar - 2.0) * agg.d_max + (agg.group_lengths.front() - d.front()) +
                      (agg.group_lengths.back() - d.back());
  b.periodic_lb = std::max(0.0, form);
  return b;
}

nlohmann::json metrics_report(double refresh_time, const std::optional<Latency>& latency,
                              const std::optional<LatencyBounds>& bounds) {
  nlohmann::json doc;
  if (std::isinf(refresh_time)) {
    doc["refresh_time"] = "inf";
  } else {
    doc["refresh_time"] = refresh_time;
  }
  if (latency) {
    doc["latency"] = {{"up", latency->up}, {"down", latency->down}, {"overall", latency->overall}};
  }
  if (bounds) doc["bounds"] = {{"up_lb", bounds->up_lb}, {"periodic_lb", bounds->periodic_lb}};
  return doc;
}

}  // namespace patrol
