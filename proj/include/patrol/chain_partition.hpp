#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "json.hpp"
#include "patrol/roadmap.hpp"

namespace patrol {

// Raised when a request cannot be satisfied for the given instance, such
// as asking for at least as many robots as there are viewpoints.
class InfeasibleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An interval of consecutive chain viewpoints. Empty clusters keep a
// parking coordinate in `left == right`.
struct Cluster {
  std::vector<std::size_t> members;
  double left = 0.0;
  double right = 0.0;

  bool empty() const { return members.empty(); }
  double length() const { return right - left; }
};

class Partition {
 public:
  Partition() = default;
  explicit Partition(std::vector<Cluster> clusters) : clusters_(std::move(clusters)) {}

  const std::vector<Cluster>& clusters() const { return clusters_; }
  const Cluster& operator[](std::size_t i) const { return clusters_.at(i); }
  std::size_t size() const { return clusters_.size(); }
  std::size_t nonempty_count() const;

  // Longest cluster span; empty clusters contribute zero.
  double dimension() const;
  std::vector<double> lengths() const;

  // Build a partition of `chain` from cluster lengths separated by
  // unit gaps; handy for tests and synthetic latency studies.
  static std::pair<ChainRoadmap, Partition> from_lengths(const std::vector<double>& lengths,
                                                         double gap = 1.0);

 private:
  std::vector<Cluster> clusters_;
};

// Greedy left-to-right clustering where each cluster spans at most rho.
// Runs in a single linear pass.
Partition left_induced_partition(const ChainRoadmap& chain, double rho);

// Number of clusters of the left-induced partition of length rho.
std::size_t left_induced_cardinality(const ChainRoadmap& chain, double rho);

// Append empty clusters, parked at the right end of the last nonempty
// cluster, until the partition has exactly m slots.
Partition pad_partition(Partition partition, std::size_t m);

struct BisectionReport {
  double lower = 0.0;
  double upper = 0.0;
  double tolerance = 0.0;
  int iterations = 0;
  int iteration_bound = 0;
};

struct BisectionResult {
  Partition partition;
  BisectionReport report;
};

// Bisection over the left-induced length on [0, 2 v_n / m]. The returned
// partition has at most m nonempty clusters (padded to m) and dimension at
// most the optimum plus `eps`.
BisectionResult optimal_partition_bisect(const ChainRoadmap& chain, std::size_t m, double eps);

// Exact optimum: tests every pairwise coordinate difference.
Partition optimal_partition_exact(const ChainRoadmap& chain, std::size_t m);

nlohmann::json to_json(const ChainRoadmap& chain, const Partition& partition,
                       std::optional<std::pair<double, double>> rho_interval = std::nullopt);

// Inverse of to_json: clusters by viewpoint id, empty ones parked at their
// recorded span.
Partition partition_from_json(const ChainRoadmap& chain, const nlohmann::json& doc);

}  // namespace patrol
