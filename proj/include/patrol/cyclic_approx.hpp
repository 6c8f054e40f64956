#pragma once

#include <cstddef>
#include <vector>

#include "json.hpp"
#include "patrol/chain_partition.hpp"
#include "patrol/roadmap.hpp"
#include "patrol/trajectory.hpp"

namespace patrol {

// Minimum spanning tree by Kruskal, ties broken by edge index. Returns
// edge indices in the order they were accepted.
std::vector<std::size_t> minimum_spanning_tree(const Roadmap& g);

struct ChainifyResult {
  std::vector<std::size_t> mst_edges;
  // Open tour on the spanning tree, starting at its lowest-index leaf.
  std::vector<std::size_t> tour;
  ChainRoadmap chain;
  // Chain vertex -> roadmap vertex.
  std::vector<std::size_t> back_map;
};

ChainifyResult chainify(const Roadmap& g);

struct ChainCertificate {
  double rt_chain = 0.0;
  // ceil(n / m - 1) times the shortest edge.
  double rt_lower_bound = 0.0;
  double ratio = 0.0;
  // ((n - 2) / n) 8 gamma
  double ratio_bound = 0.0;
  double gamma = 0.0;
};

struct ChainApproxOptions {
  double eps = 1e-9;
  // Drop repeated viewpoints from each robot's route and sweep the result
  // instead (no guarantee attached).
  bool shortcut = false;
};

struct ChainApproximation {
  ChainifyResult chainified;
  Partition partition;
  TeamTrajectory trajectory;
  ChainCertificate certificate;
};

ChainApproximation chain_approximation(const Roadmap& g, std::size_t m, double horizon,
                                       const ChainApproxOptions& opts = {});

struct PathCover {
  std::vector<std::vector<std::size_t>> paths;
  std::vector<double> costs;
  double cost = 0.0;
  // Threshold at which the cover was found (0 for the oracle).
  double threshold = 0.0;
  // Proven lower bound on the optimal cover cost.
  double lower_bound = 0.0;
};

// Cost of a vertex sequence on the shortest-path metric.
double path_cost(const Roadmap& g, const std::vector<std::size_t>& path);

// Feasibility test at threshold B: spanning-tree components of the metric
// closure joined by edges <= B, each preorder split greedily into runs of
// cost <= split_factor * B. Returns the runs.
std::vector<std::vector<std::size_t>> threshold_cover(const Roadmap& g, double B,
                                                      double split_factor = 4.0);

struct PathCoverOptions {
  double split_factor = 4.0;
  double rel_tol = 1e-12;
};

// Smallest feasible threshold by bisection, then every component's preorder
// is re-split optimally over the runs it received plus any spare robots.
PathCover minmax_path_cover(const Roadmap& g, std::size_t m, const PathCoverOptions& opts = {});

struct CoverLimits {
  std::size_t max_vertices = 8;
  std::size_t max_robots = 3;
};

// Exact min-max cover by exhaustive search.
PathCover exact_cover_oracle(const Roadmap& g, std::size_t m, const CoverLimits& limits = {});

// Robot i sweeps paths[i] back and forth at unit speed; robots beyond the
// path count stay idle and inactive.
TeamTrajectory path_cover_trajectory(const Roadmap& g, const PathCover& cover, std::size_t m,
                                     double horizon);

nlohmann::json to_json(const Roadmap& g, const PathCover& cover);
nlohmann::json to_json(const Roadmap& g, const ChainifyResult& result);
nlohmann::json to_json(const ChainCertificate& cert);

}  // namespace patrol
