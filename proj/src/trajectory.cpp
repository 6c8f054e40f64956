#include "patrol/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace patrol {

Route Route::chain(const ChainRoadmap& chain) {
  Route r;
  r.stops.resize(chain.size());
  for (std::size_t i = 0; i < chain.size(); ++i) r.stops[i] = i;
  r.arc.assign(chain.coordinates().begin(), chain.coordinates().end());
  return r;
}

Route Route::path(const Roadmap& g, const std::vector<std::size_t>& vertices) {
  if (vertices.empty()) throw std::invalid_argument("empty route");
  Route r;
  r.stops = vertices;
  r.arc.push_back(0.0);
  for (std::size_t k = 1; k < vertices.size(); ++k) {
    r.arc.push_back(r.arc.back() + g.distance(vertices[k - 1], vertices[k]));
  }
  return r;
}

Route Route::loop(const Roadmap& g, const std::vector<std::size_t>& vertices) {
  Route r = path(g, vertices);
  r.arc.push_back(r.arc.back() + g.distance(vertices.back(), vertices.front()));
  r.closed = true;
  return r;
}

double RobotTrack::position(double t) const {
  if (breakpoints.empty()) throw std::logic_error("robot without breakpoints");
  if (t <= breakpoints.front().time) return breakpoints.front().position;
  if (t >= breakpoints.back().time) return breakpoints.back().position;
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t,
                             [](double v, const Breakpoint& b) { return v < b.time; });
  const Breakpoint& b = *it;
  const Breakpoint& a = *(it - 1);
  return a.position + (b.position - a.position) * (t - a.time) / (b.time - a.time);
}

void validate(const TeamTrajectory& x, double speed_tol) {
  for (std::size_t i = 0; i < x.robots.size(); ++i) {
    const RobotTrack& r = x.robots[i];
    const std::string who = "robot " + std::to_string(i + 1);
    if (r.breakpoints.empty()) throw std::invalid_argument(who + ": no breakpoints");
    if (r.breakpoints.front().time > 0.0 || r.breakpoints.back().time < x.horizon) {
      throw std::invalid_argument(who + ": breakpoints do not cover [0, horizon]");
    }
    if (r.route.stops.empty() ||
        r.route.arc.size() != r.route.stops.size() + (r.route.closed ? 1 : 0)) {
      throw std::invalid_argument(who + ": malformed route");
    }
    for (std::size_t k = 0; k < r.breakpoints.size(); ++k) {
      const Breakpoint& b = r.breakpoints[k];
      if (!r.route.closed && (b.position < -1e-9 || b.position > r.route.length() + 1e-9)) {
        throw std::invalid_argument(who + ": position off the route");
      }
      if (k == 0) continue;
      const Breakpoint& a = r.breakpoints[k - 1];
      if (!(b.time > a.time)) throw std::invalid_argument(who + ": breakpoint times not increasing");
      const double speed = std::abs(b.position - a.position) / (b.time - a.time);
      if (speed > 1.0 + speed_tol) {
        throw std::invalid_argument(who + ": speed " + std::to_string(speed) + " exceeds 1 at t=" +
                                    std::to_string(a.time));
      }
    }
  }
}

std::vector<Breakpoint> clip(const std::vector<Breakpoint>& bps, double t0, double t1) {
  std::vector<Breakpoint> out;
  if (bps.empty()) return out;
  auto at = [&](double t) {
    RobotTrack tmp;
    tmp.breakpoints = bps;
    return tmp.position(t);
  };
  out.push_back({t0, at(t0)});
  for (const Breakpoint& b : bps) {
    if (b.time > t0 && b.time < t1) out.push_back(b);
  }
  if (t1 > t0) out.push_back({t1, at(t1)});
  return out;
}

std::vector<Breakpoint> tile_periodic(const std::vector<Breakpoint>& one_period, double period,
                                      double horizon) {
  if (one_period.size() < 2 || !(period > 0.0)) {
    throw std::invalid_argument("periodic pattern needs two breakpoints and a positive period");
  }
  const double start = one_period.front().time;
  const double end = one_period.back().time;
  const long k0 = static_cast<long>(std::floor((0.0 - end) / period));
  const long k1 = static_cast<long>(std::ceil((horizon - start) / period));
  std::vector<Breakpoint> all;
  for (long k = k0; k <= k1; ++k) {
    const double shift = static_cast<double>(k) * period;
    for (std::size_t j = 0; j + 1 < one_period.size(); ++j) {
      all.push_back({one_period[j].time + shift, one_period[j].position});
    }
  }
  all.push_back({one_period.back().time + static_cast<double>(k1) * period,
                 one_period.back().position});
  return clip(all, 0.0, horizon);
}

namespace {

std::vector<double> grid(double horizon, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("sampling step must be positive");
  std::vector<double> ts;
  const auto steps = static_cast<std::size_t>(std::floor(horizon / dt + 1e-9));
  ts.reserve(steps + 2);
  for (std::size_t k = 0; k <= steps; ++k) ts.push_back(static_cast<double>(k) * dt);
  if (ts.back() < horizon) ts.push_back(horizon);
  if (ts.back() > horizon) ts.back() = horizon;
  return ts;
}

std::vector<double> positions_at(const RobotTrack& r, const std::vector<double>& ts) {
  std::vector<double> out;
  out.reserve(ts.size());
  const auto& bps = r.breakpoints;
  std::size_t j = 0;
  for (double t : ts) {
    while (j + 1 < bps.size() && bps[j + 1].time <= t) ++j;
    if (t <= bps.front().time) {
      out.push_back(bps.front().position);
    } else if (j + 1 >= bps.size()) {
      out.push_back(bps.back().position);
    } else {
      const Breakpoint& a = bps[j];
      const Breakpoint& b = bps[j + 1];
      out.push_back(a.position + (b.position - a.position) * (t - a.time) / (b.time - a.time));
    }
  }
  return out;
}

}  // namespace

TeamTrajectory sample(const TeamTrajectory& x, double dt) {
  const std::vector<double> ts = grid(x.horizon, dt);
  TeamTrajectory out;
  out.horizon = x.horizon;
  out.period = x.period;
  out.num_viewpoints = x.num_viewpoints;
  for (const RobotTrack& r : x.robots) {
    RobotTrack s;
    s.route = r.route;
    s.active = r.active;
    const std::vector<double> ps = positions_at(r, ts);
    s.breakpoints.reserve(ts.size());
    for (std::size_t k = 0; k < ts.size(); ++k) s.breakpoints.push_back({ts[k], ps[k]});
    out.robots.push_back(std::move(s));
  }
  return out;
}

nlohmann::json to_json(const TeamTrajectory& x, const Roadmap* graph) {
  using nlohmann::json;
  json doc;
  if (x.period) doc["period"] = *x.period;
  doc["horizon"] = x.horizon;
  doc["num_viewpoints"] = x.num_viewpoints;
  json robots = json::array();
  for (std::size_t i = 0; i < x.robots.size(); ++i) {
    const RobotTrack& r = x.robots[i];
    json bps = json::array();
    for (const Breakpoint& b : r.breakpoints) bps.push_back({b.time, b.position});
    json route = {{"stops", r.route.stops}, {"arc", r.route.arc}, {"closed", r.route.closed}};
    if (graph) {
      json ids = json::array();
      for (std::size_t v : r.route.stops) ids.push_back(graph->id(v));
      route["stop_ids"] = std::move(ids);
    }
    robots.push_back({{"id", i + 1}, {"active", r.active}, {"breakpoints", std::move(bps)},
                      {"route", std::move(route)}});
  }
  doc["robots"] = std::move(robots);
  return doc;
}

TeamTrajectory trajectory_from_json(const nlohmann::json& doc, std::size_t num_viewpoints) {
  TeamTrajectory x;
  try {
    if (doc.contains("period")) x.period = doc.at("period").get<double>();
    x.horizon = doc.at("horizon").get<double>();
    x.num_viewpoints = doc.value("num_viewpoints", num_viewpoints);
    for (const auto& rj : doc.at("robots")) {
      RobotTrack r;
      r.active = rj.value("active", true);
      for (const auto& b : rj.at("breakpoints")) {
        r.breakpoints.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
      }
      const auto& route = rj.at("route");
      r.route.stops = route.at("stops").get<std::vector<std::size_t>>();
      r.route.arc = route.at("arc").get<std::vector<double>>();
      r.route.closed = route.value("closed", false);
      for (std::size_t v : r.route.stops) {
        if (v >= x.num_viewpoints) throw std::invalid_argument("route stop out of range");
      }
      x.robots.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("trajectory document: ") + e.what());
  }
  validate(x);
  return x;
}

void write_samples_csv(std::ostream& out, const TeamTrajectory& x, double dt) {
  const std::vector<double> ts = grid(x.horizon, dt);
  std::vector<std::vector<double>> ps;
  for (const RobotTrack& r : x.robots) ps.push_back(positions_at(r, ts));
  out << "time,robot,position\n";
  char buf[96];
  for (std::size_t k = 0; k < ts.size(); ++k) {
    for (std::size_t i = 0; i < ps.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g\n", ts[k], i + 1, ps[i][k]);
      out << buf;
    }
  }
}

}  // namespace patrol
