#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "patrol/chain_partition.hpp"
#include "patrol/metrics.hpp"
#include "patrol/trajectory.hpp"

namespace patrol {

struct FailureWindow {
  std::size_t robot = 0;  // 0-based
  double start = 0.0;
  double end = std::numeric_limits<double>::infinity();
};

struct SimConfig {
  double dt = 0.1;
  double horizon = 1000.0;
  std::uint64_t seed = 1;
  // Stream index mixed into the seed; batch runs use one per run.
  std::uint64_t run_index = 0;
  double sigma2 = 0.0;
  std::vector<FailureWindow> failures;
  // Silence, in seconds, after which a stopped neighbour is declared lost
  // and the team repartitions. Disabled when unset.
  std::optional<double> detection_timeout;
  // Position tolerance for the periodicity test.
  double eta = 1e-6;
  // Bisection tolerance for repartitioning.
  double eps = 1e-9;
  // Override the random initial state (one entry per partition slot).
  std::optional<std::vector<double>> initial_positions;
  std::optional<std::vector<int>> initial_dirs;
};

struct CommEvent {
  double time = 0.0;
  std::size_t left = 0;
  std::size_t right = 0;
};

struct TraceEvent {
  double time = 0.0;
  std::size_t robot = 0;
  std::string what;
};

// A stretch of the run with a fixed partition and team.
struct Epoch {
  double start = 0.0;
  double end = 0.0;
  Partition partition;
  // Partition slot -> robot, for robots taking part.
  std::vector<std::size_t> team;
};

struct DirChange {
  double time = 0.0;
  int dir = 0;
};

struct Trace {
  TeamTrajectory trajectory;
  std::vector<std::vector<DirChange>> dirs;
  std::vector<CommEvent> comms;
  std::vector<TraceEvent> events;
  std::vector<Epoch> epochs;
  SimConfig config;
};

// 30-viewpoint chain used by the failure and noise scenarios; its optimal
// 10- and 9-robot partitions have no empty or zero-length clusters.
ChainRoadmap case_study_chain();

// Runs the distributed synchronization law on `partition` (one robot per
// slot; robots on empty slots stay parked and silent).
Trace simulate(const ChainRoadmap& chain, const Partition& partition, const SimConfig& cfg);

// Permanent failure of `robot` at `at`, detected after `timeout` seconds of
// silence; the survivors repartition and resynchronize. Returns the trace
// with the repartition epoch appended.
Trace inject_permanent_failure_and_repartition(const ChainRoadmap& chain, const Partition& partition,
                                               SimConfig cfg, std::size_t robot, double at,
                                               double timeout);

// First grid time of the epoch after which every team robot repeats its
// position one period (2 d_max) later, within eta, for at least two more
// periods. Empty if the epoch never settles. eta defaults to the config's.
std::optional<double> convergence_time(const Trace& trace, std::size_t epoch,
                                       std::optional<double> eta = std::nullopt);

struct WindowMetrics {
  double refresh_time = 0.0;
  Latency latency;
  LatencyBounds bounds;
};

// Refresh time and latency of the epoch's team over [t0, t1].
WindowMetrics evaluate_window(const Trace& trace, const ChainRoadmap& chain, std::size_t epoch,
                              double t0, double t1);

struct SweepRow {
  double sigma2 = 0.0;
  double rt_mean = 0.0, rt_min = 0.0, rt_max = 0.0;
  double lt_mean = 0.0, lt_min = 0.0, lt_max = 0.0;
};

struct SweepConfig {
  std::vector<double> variances;
  std::size_t runs = 100;
  std::uint64_t master_seed = 1;
  double dt = 0.1;
  double horizon = 600.0;
  // Start of the evaluation window; horizon / 3 when unset.
  std::optional<double> warmup;
  std::size_t workers = 1;
};

std::vector<SweepRow> noise_sweep(const ChainRoadmap& chain, const Partition& partition,
                                  const SweepConfig& cfg);

// Scripted three-step bootstrap: gather at the leftmost viewpoint, elect
// the lowest-index robot, and let it run the bisection by traversing the
// chain and back once per probe.
struct Bootstrap {
  Partition partition;
  std::size_t leader = 0;
  double gather_time = 0.0;
  double leader_travel = 0.0;
  int probes = 0;
};

Bootstrap distributed_bootstrap(const ChainRoadmap& chain, const std::vector<double>& positions,
                                double eps);

void write_trace_csv(std::ostream& out, const Trace& trace);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace patrol
