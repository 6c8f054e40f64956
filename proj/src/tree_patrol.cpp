#include "patrol/tree_patrol.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

namespace patrol {

namespace {

void require_tree(const Roadmap& g) {
  if (!g.is_tree()) throw std::invalid_argument("roadmap is not a tree");
}

double edge_sum(const Roadmap& g, const Subtree& s) {
  double total = 0.0;
  for (std::size_t e : s.edges) total += g.edges()[e].length;
  return total;
}

}  // namespace

Route DftTour::route(const Roadmap& tree) const {
  if (vertices.size() <= 1) return Route::path(tree, vertices);
  return Route::loop(tree, {vertices.begin(), vertices.end() - 1});
}

DftTour dft_tour(const Roadmap& tree, const Subtree& sub) {
  if (sub.vertices.empty()) throw std::invalid_argument("empty subtree");
  std::vector<char> in_sub(tree.edges().size(), 0);
  for (std::size_t e : sub.edges) in_sub.at(e) = 1;
  const std::size_t root = *std::min_element(sub.vertices.begin(), sub.vertices.end());

  DftTour tour;
  tour.vertices.push_back(root);
  tour.arc.push_back(0.0);
  // Frame: vertex, parent, sorted children, next child.
  struct Frame {
    std::size_t v;
    std::size_t parent;
    std::vector<std::pair<std::size_t, double>> kids;
    std::size_t next = 0;
  };
  auto frame_of = [&](std::size_t v, std::size_t parent) {
    Frame f{v, parent, {}, 0};
    for (const auto& nb : tree.neighbors(v)) {
      if (in_sub[nb.edge] && nb.vertex != parent) f.kids.push_back({nb.vertex, tree.edges()[nb.edge].length});
    }
    std::sort(f.kids.begin(), f.kids.end());
    return f;
  };
  constexpr std::size_t none = static_cast<std::size_t>(-1);
  std::vector<Frame> stack{frame_of(root, none)};
  std::vector<double> up_length{0.0};
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next < f.kids.size()) {
      const auto [child, len] = f.kids[f.next++];
      tour.vertices.push_back(child);
      tour.arc.push_back(tour.arc.back() + len);
      up_length.push_back(len);
      stack.push_back(frame_of(child, f.v));
      continue;
    }
    const std::size_t parent = f.parent;
    const double len = up_length.back();
    stack.pop_back();
    up_length.pop_back();
    if (parent != none) {
      tour.vertices.push_back(parent);
      tour.arc.push_back(tour.arc.back() + len);
    }
  }
  if (tour.vertices.size() != 2 * sub.vertices.size() - 1) {
    throw std::invalid_argument("subtree is not connected");
  }
  return tour;
}

DftTour dft_tour(const Roadmap& tree) {
  require_tree(tree);
  return dft_tour(tree, split_tree(tree, {}).front());
}

std::vector<Subtree> split_tree(const Roadmap& tree, const std::vector<std::size_t>& removed) {
  require_tree(tree);
  const std::size_t n = tree.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::vector<char> cut(tree.edges().size(), 0);
  for (std::size_t e : removed) cut.at(e) = 1;
  for (std::size_t e = 0; e < tree.edges().size(); ++e) {
    if (cut[e]) continue;
    const std::size_t a = find(tree.edges()[e].u);
    const std::size_t b = find(tree.edges()[e].v);
    parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<Subtree> out;
  std::vector<std::size_t> slot(n, static_cast<std::size_t>(-1));
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t r = find(v);
    if (slot[r] == static_cast<std::size_t>(-1)) {
      slot[r] = out.size();
      out.emplace_back();
    }
    out[slot[r]].vertices.push_back(v);
  }
  for (std::size_t e = 0; e < tree.edges().size(); ++e) {
    if (!cut[e]) out[slot[find(tree.edges()[e].u)]].edges.push_back(e);
  }
  return out;
}

double collection_objective(const Roadmap& tree, const std::vector<Subtree>& subtrees,
                            const std::vector<std::size_t>& robots) {
  if (subtrees.size() != robots.size()) throw std::invalid_argument("one robot count per subtree");
  double worst = 0.0;
  for (std::size_t j = 0; j < subtrees.size(); ++j) {
    if (robots[j] == 0) throw std::invalid_argument("subtree without robots has infinite refresh time");
    worst = std::max(worst, 2.0 * edge_sum(tree, subtrees[j]) / static_cast<double>(robots[j]));
  }
  return worst;
}

TeamTrajectory efficient_trajectory(const Roadmap& tree, const SubtreeCollection& coll,
                                    double horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  const double objective = collection_objective(tree, coll.subtrees, coll.robots);
  TeamTrajectory x;
  x.horizon = horizon;
  x.num_viewpoints = tree.size();
  if (objective > 0.0) x.period = objective;
  for (std::size_t j = 0; j < coll.subtrees.size(); ++j) {
    const DftTour tour = dft_tour(tree, coll.subtrees[j]);
    const Route route = tour.route(tree);
    const double L = tour.length();
    const std::size_t mj = coll.robots[j];
    for (std::size_t k = 0; k < mj; ++k) {
      RobotTrack r;
      r.route = route;
      const double phase = L * static_cast<double>(k) / static_cast<double>(mj);
      if (L == 0.0) {
        r.breakpoints = {{0.0, 0.0}, {horizon, 0.0}};
      } else {
        r.breakpoints = {{0.0, phase}, {horizon, phase + horizon}};
      }
      x.robots.push_back(std::move(r));
    }
  }
  return x;
}

namespace {

void check_limits(const Roadmap& tree, std::size_t m, const SearchLimits& limits) {
  require_tree(tree);
  if (m == 0) throw std::invalid_argument("need at least one robot");
  if (tree.size() > limits.max_vertices || m > limits.max_robots) {
    throw SearchLimitError("exhaustive subtree search limited to " + std::to_string(limits.max_vertices) +
                           " vertices and " + std::to_string(limits.max_robots) +
                           " robots; use the chain or cyclic approximations for larger instances");
  }
}

// Compositions of m into k positive parts, lexicographic order.
void compositions(std::size_t m, std::size_t k, std::vector<std::size_t>& cur,
                  std::vector<std::vector<std::size_t>>& out) {
  if (k == 1) {
    cur.push_back(m);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (std::size_t first = 1; first + (k - 1) <= m; ++first) {
    cur.push_back(first);
    compositions(m - first, k - 1, cur, out);
    cur.pop_back();
  }
}

bool better(const SubtreeCollection& a, const SubtreeCollection& b) {
  const double tol = 1e-12 * std::max(1.0, std::abs(b.objective));
  if (a.objective < b.objective - tol) return true;
  if (a.objective > b.objective + tol) return false;
  if (a.removed_edges.size() != b.removed_edges.size()) {
    return a.removed_edges.size() < b.removed_edges.size();
  }
  if (a.removed_edges != b.removed_edges) return a.removed_edges < b.removed_edges;
  return a.robots < b.robots;
}

template <typename Visit>
void for_each_cut(const Roadmap& tree, std::size_t max_cuts, Visit visit) {
  const std::size_t e = tree.edges().size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << e); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) > max_cuts) continue;
    std::vector<std::size_t> removed;
    for (std::size_t i = 0; i < e; ++i) {
      if (mask >> i & 1U) removed.push_back(i);
    }
    visit(removed);
  }
}

}  // namespace

SubtreeCollection optimal_subtree_collection(const Roadmap& tree, std::size_t m,
                                             const SearchLimits& limits) {
  check_limits(tree, m, limits);
  SubtreeCollection best;
  bool have = false;
  for_each_cut(tree, m - 1, [&](const std::vector<std::size_t>& removed) {
    std::vector<Subtree> parts = split_tree(tree, removed);
    std::vector<double> dft;
    for (const Subtree& s : parts) dft.push_back(2.0 * edge_sum(tree, s));
    std::vector<std::vector<std::size_t>> allocs;
    std::vector<std::size_t> cur;
    compositions(m, parts.size(), cur, allocs);
    for (const auto& alloc : allocs) {
      SubtreeCollection c;
      c.removed_edges = removed;
      c.robots = alloc;
      for (std::size_t j = 0; j < parts.size(); ++j) {
        c.objective = std::max(c.objective, dft[j] / static_cast<double>(alloc[j]));
      }
      if (!have || better(c, best)) {
        c.subtrees = parts;
        best = std::move(c);
        have = true;
      }
    }
  });
  return best;
}

SubtreeCollection best_partition_strategy(const Roadmap& tree, std::size_t m,
                                          const SearchLimits& limits) {
  check_limits(tree, m, limits);
  SubtreeCollection best;
  bool have = false;
  for_each_cut(tree, m - 1, [&](const std::vector<std::size_t>& removed) {
    SubtreeCollection c;
    c.removed_edges = removed;
    c.subtrees = split_tree(tree, removed);
    c.robots.assign(c.subtrees.size(), 1);
    c.objective = collection_objective(tree, c.subtrees, c.robots);
    if (!have || better(c, best)) {
      best = std::move(c);
      have = true;
    }
  });
  return best;
}

SubtreeCollection cyclic_strategy(const Roadmap& tree, std::size_t m) {
  require_tree(tree);
  if (m == 0) throw std::invalid_argument("need at least one robot");
  SubtreeCollection c;
  c.subtrees = split_tree(tree, {});
  c.robots = {m};
  c.objective = collection_objective(tree, c.subtrees, c.robots);
  return c;
}

nlohmann::json to_json(const Roadmap& tree, const SubtreeCollection& coll) {
  nlohmann::json removed = nlohmann::json::array();
  for (std::size_t e : coll.removed_edges) {
    removed.push_back({tree.id(tree.edges()[e].u), tree.id(tree.edges()[e].v)});
  }
  nlohmann::json subtrees = nlohmann::json::array();
  for (std::size_t j = 0; j < coll.subtrees.size(); ++j) {
    const DftTour tour = dft_tour(tree, coll.subtrees[j]);
    nlohmann::json verts = nlohmann::json::array();
    for (std::size_t v : coll.subtrees[j].vertices) verts.push_back(tree.id(v));
    nlohmann::json order = nlohmann::json::array();
    for (std::size_t v : tour.vertices) order.push_back(tree.id(v));
    subtrees.push_back({{"vertices", verts},
                        {"tour", order},
                        {"tour_length", tour.length()},
                        {"robots", coll.robots[j]}});
  }
  return {{"removed_edges", removed},
          {"allocation", coll.robots},
          {"objective", coll.objective},
          {"subtrees", subtrees}};
}

}  // namespace patrol
