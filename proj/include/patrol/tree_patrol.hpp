#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "patrol/roadmap.hpp"
#include "patrol/trajectory.hpp"

namespace patrol {

// Raised when an exhaustive search would exceed its configured size.
class SearchLimitError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Connected piece of a tree: sorted vertex and edge indices.
struct Subtree {
  std::vector<std::size_t> vertices;
  std::vector<std::size_t> edges;
};

// Closed depth-first tour. `vertices` starts and ends at the root; arc[k]
// is the distance travelled when reaching vertices[k].
struct DftTour {
  std::vector<std::size_t> vertices;
  std::vector<double> arc;

  double length() const { return arc.empty() ? 0.0 : arc.back(); }
  // Open tour as a closed route (the final return to the root is implied).
  Route route(const Roadmap& tree) const;
};

// Rooted at the lowest-index vertex, children in increasing index order.
DftTour dft_tour(const Roadmap& tree, const Subtree& sub);
DftTour dft_tour(const Roadmap& tree);

struct SubtreeCollection {
  std::vector<Subtree> subtrees;
  // robots[j] robots patrol subtrees[j].
  std::vector<std::size_t> robots;
  std::vector<std::size_t> removed_edges;
  double objective = 0.0;
};

// Components of the tree after deleting `removed` edges, ordered by their
// lowest vertex.
std::vector<Subtree> split_tree(const Roadmap& tree, const std::vector<std::size_t>& removed);

// max_j DFT(T_j) / m_j; throws if some subtree has no robot.
double collection_objective(const Roadmap& tree, const std::vector<Subtree>& subtrees,
                            const std::vector<std::size_t>& robots);

// Robots equally spaced along each subtree's tour, all moving forward at
// unit speed; robot k of subtree j starts k DFT(T_j) / m_j along it.
TeamTrajectory efficient_trajectory(const Roadmap& tree, const SubtreeCollection& coll,
                                    double horizon);

struct SearchLimits {
  std::size_t max_vertices = 15;
  std::size_t max_robots = 6;
};

// Exhaustive search over removed-edge sets and robot allocations. Ties go
// to fewer removed edges, then the lexicographically smaller edge set, then
// the lexicographically smaller allocation.
SubtreeCollection optimal_subtree_collection(const Roadmap& tree, std::size_t m,
                                             const SearchLimits& limits = {});

// Best strategy with one robot per subtree (at most m subtrees).
SubtreeCollection best_partition_strategy(const Roadmap& tree, std::size_t m,
                                          const SearchLimits& limits = {});

// All m robots equally spaced on one tour of the whole tree.
SubtreeCollection cyclic_strategy(const Roadmap& tree, std::size_t m);

nlohmann::json to_json(const Roadmap& tree, const SubtreeCollection& coll);

}  // namespace patrol
