#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <vector>

#include "json.hpp"
#include "patrol/roadmap.hpp"

namespace patrol {

struct Breakpoint {
  double time = 0.0;
  double position = 0.0;
};

// A walk through viewpoints parameterised by arc length. `arc[k]` is the
// position of `stops[k]`. Closed routes have one extra arc entry holding
// the loop length; positions on them are unwrapped and taken modulo it.
struct Route {
  std::vector<std::size_t> stops;
  std::vector<double> arc;
  bool closed = false;

  double length() const { return arc.empty() ? 0.0 : arc.back(); }

  static Route chain(const ChainRoadmap& chain);
  static Route path(const Roadmap& g, const std::vector<std::size_t>& vertices);
  static Route loop(const Roadmap& g, const std::vector<std::size_t>& vertices);
};

// Piecewise-linear position along a route. Outside the breakpoint range the
// robot holds its first/last position.
struct RobotTrack {
  Route route;
  std::vector<Breakpoint> breakpoints;
  // Inactive robots (parked on empty clusters, failed) are ignored by
  // metrics.
  bool active = true;

  double position(double t) const;
};

struct TeamTrajectory {
  std::vector<RobotTrack> robots;
  double horizon = 0.0;
  std::optional<double> period;
  std::size_t num_viewpoints = 0;
};

// Throws std::invalid_argument on decreasing times, speeds above one
// (up to `speed_tol`), positions off the route, or gaps in [0, horizon].
void validate(const TeamTrajectory& x, double speed_tol = 1e-9);

// Repeat one period of breakpoints (first and last position equal) by
// multiples of `period` until [0, horizon] is covered, then clip.
std::vector<Breakpoint> tile_periodic(const std::vector<Breakpoint>& one_period, double period,
                                      double horizon);

// Restrict breakpoints to [t0, t1], interpolating the cut points.
std::vector<Breakpoint> clip(const std::vector<Breakpoint>& bps, double t0, double t1);

// Resample every robot on a fixed grid of step dt (the last sample lands on
// the horizon).
TeamTrajectory sample(const TeamTrajectory& x, double dt);

nlohmann::json to_json(const TeamTrajectory& x, const Roadmap* graph = nullptr);
TeamTrajectory trajectory_from_json(const nlohmann::json& doc, std::size_t num_viewpoints);

// `time,robot,position` rows on a grid of step dt.
void write_samples_csv(std::ostream& out, const TeamTrajectory& x, double dt);

}  // namespace patrol
