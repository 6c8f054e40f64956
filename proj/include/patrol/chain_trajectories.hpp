#pragma once

#include <cstddef>
#include <vector>

#include "patrol/chain_partition.hpp"
#include "patrol/trajectory.hpp"

namespace patrol {

// Consecutive nonempty clusters grouped greedily so each group's summed
// length stays within d_max.
struct AggregatedClusters {
  // Robots (partition slots) owning nonempty clusters, in chain order.
  std::vector<std::size_t> robots;
  // groups[g] lists robots of group g.
  std::vector<std::vector<std::size_t>> groups;
  std::vector<double> left_extremes;
  std::vector<double> right_extremes;
  std::vector<double> group_lengths;
  double d_max = 0.0;

  std::size_t count() const { return groups.size(); }
  // Group of a robot, or npos for robots on empty clusters.
  std::size_t group_of(std::size_t robot) const;
};

// Greedy grouping of a length sequence against d_max; returns index groups.
std::vector<std::vector<std::size_t>> aggregate_lengths(const std::vector<double>& lengths,
                                                        double d_max);

AggregatedClusters aggregate_clusters(const Partition& partition);

// Each robot sweeps its cluster end to end at unit speed, leaving l_i at
// t = 0. Robots on empty clusters park and are marked inactive.
TeamTrajectory traj_min_refresh(const ChainRoadmap& chain, const Partition& partition,
                                double horizon);

// Like traj_min_refresh, but even robots start at r_i.
TeamTrajectory traj_opposite_phase(const ChainRoadmap& chain, const Partition& partition,
                                   double horizon);

// 2 d_max periodic schedule where robot i reaches r_i exactly when robot
// i + 1 leaves l_{i+1}.
TeamTrajectory traj_min_uplatency(const ChainRoadmap& chain, const Partition& partition,
                                  double horizon);

// 2 d_max periodic schedule built from the aggregated clusters: token
// passing within each group, alternating phases across groups.
TeamTrajectory traj_min_latency(const ChainRoadmap& chain, const Partition& partition,
                                double horizon);

}  // namespace patrol
