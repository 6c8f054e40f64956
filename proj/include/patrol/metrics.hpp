#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "json.hpp"
#include "patrol/chain_partition.hpp"
#include "patrol/trajectory.hpp"

namespace patrol {

struct Interval {
  double start = 0.0;
  double end = 0.0;
};

// Sort and merge touching or overlapping intervals.
std::vector<Interval> merge_intervals(std::vector<Interval> v);

// Times each viewpoint is occupied, within `eta`, by some active robot.
struct VisitLog {
  std::vector<std::vector<Interval>> per_viewpoint;
  double eta = 0.0;
};

// Occupancy of every viewpoint by a single robot.
std::vector<std::vector<Interval>> robot_occupancy(const RobotTrack& r, std::size_t num_viewpoints,
                                                   double eta);

VisitLog visits(const TeamTrajectory& x, double eta);

struct RefreshOptions {
  double warmup = 0.0;
  double eta = 0.0;
  // Raw definition: window [0, T_f], boundary gaps uncapped.
  bool strict = false;
};

// Largest gap between consecutive visits over all viewpoints; infinity if
// some viewpoint is never visited in the window.
double eval_refresh_time(const TeamTrajectory& x, const RefreshOptions& opts = {});

// Communication intervals of consecutive active robots on a chain.
struct CommLog {
  std::vector<std::size_t> robots;
  // pairs[k]: robots[k] and robots[k + 1].
  std::vector<std::vector<Interval>> pairs;
  double origin = 0.0;

  // Interval starts with the time origin prepended.
  std::vector<double> instants(std::size_t k) const;
};

CommLog comm_instants(const TeamTrajectory& x, const ChainRoadmap& chain, double eta,
                      double window_start = 0.0);

struct Latency {
  double up = 0.0;
  double down = 0.0;
  double overall = 0.0;
};

struct LatencyOptions {
  double eta = 0.0;
  double window_start = 0.0;
  // Raw max-min definition, where a message injected at every instant
  // counts even when a later injection reaches the far end at the same time.
  bool strict = false;
  // Let relays and injections happen anywhere inside a communication
  // interval instead of only at its start. Ignored in strict mode.
  bool use_intervals = true;
  // Injections that have not reached the far end by the horizon are charged
  // T_f - t, except those within `tail` of the horizon, which are dropped.
  // Unset: (m / 2 + 1) declared periods, or 0 without a declared period.
  std::optional<double> tail;
};

Latency eval_latency(const CommLog& log, double horizon, const LatencyOptions& opts = {});
Latency eval_latency(const TeamTrajectory& x, const ChainRoadmap& chain,
                     const LatencyOptions& opts = {});

struct LatencyBounds {
  double up_lb = 0.0;
  double periodic_lb = 0.0;
};

LatencyBounds latency_lower_bounds(const Partition& partition);

nlohmann::json metrics_report(double refresh_time, const std::optional<Latency>& latency,
                              const std::optional<LatencyBounds>& bounds);

}  // namespace patrol
