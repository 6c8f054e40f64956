#include "patrol/cyclic_approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "patrol/chain_trajectories.hpp"

namespace patrol {

namespace {

constexpr std::size_t npos = static_cast<std::size_t>(-1);

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

// Sweep a route of length L back and forth from its start.
std::vector<Breakpoint> sweep(double L, double horizon) {
  if (L == 0.0) return {{0.0, 0.0}, {horizon, 0.0}};
  return tile_periodic({{0.0, 0.0}, {L, L}, {2.0 * L, 0.0}}, 2.0 * L, horizon);
}

// Minimum spanning tree of the metric closure restricted to `vertices`
// (Prim, ties to the lower index), as children lists rooted at the first
// vertex.
std::vector<std::vector<std::size_t>> closure_mst(const Roadmap& g, std::size_t n,
                                                  std::vector<std::size_t>& parent) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> key(n, inf);
  std::vector<char> done(n, 0);
  parent.assign(n, npos);
  key[0] = 0.0;
  std::vector<std::vector<std::size_t>> kids(n);
  for (std::size_t it = 0; it < n; ++it) {
    std::size_t u = npos;
    for (std::size_t v = 0; v < n; ++v) {
      if (!done[v] && (u == npos || key[v] < key[u])) u = v;
    }
    done[u] = 1;
    if (parent[u] != npos) kids[parent[u]].push_back(u);
    for (std::size_t v = 0; v < n; ++v) {
      if (!done[v] && g.distance(u, v) < key[v]) {
        key[v] = g.distance(u, v);
        parent[v] = u;
      }
    }
  }
  for (auto& k : kids) std::sort(k.begin(), k.end());
  return kids;
}

// Preorders of the components left after dropping closure-MST edges > B,
// each rooted at its lowest vertex.
std::vector<std::vector<std::size_t>> component_preorders(const Roadmap& g, double B) {
  const std::size_t n = g.size();
  std::vector<std::size_t> parent;
  const auto kids = closure_mst(g, n, parent);
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t v = 0; v < n; ++v) {
    if (parent[v] != npos && g.distance(v, parent[v]) <= B) {
      adj[v].push_back(parent[v]);
      adj[parent[v]].push_back(v);
    }
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  std::vector<char> seen(n, 0);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t root = 0; root < n; ++root) {
    if (seen[root]) continue;
    std::vector<std::size_t> order;
    std::vector<std::size_t> stack{root};
    seen[root] = 1;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      order.push_back(v);
      for (auto it = adj[v].rbegin(); it != adj[v].rend(); ++it) {
        if (!seen[*it]) {
          seen[*it] = 1;
          stack.push_back(*it);
        }
      }
    }
    out.push_back(std::move(order));
  }
  return out;
}

// Greedy split of a sequence into maximal runs of cost <= cap.
std::vector<std::vector<std::size_t>> greedy_split(const Roadmap& g, const std::vector<std::size_t>& seq,
                                                   double cap) {
  std::vector<std::vector<std::size_t>> runs{{seq.front()}};
  double cost = 0.0;
  for (std::size_t k = 1; k < seq.size(); ++k) {
    const double d = g.distance(seq[k - 1], seq[k]);
    if (cost + d <= cap) {
      cost += d;
      runs.back().push_back(seq[k]);
    } else {
      runs.push_back({seq[k]});
      cost = 0.0;
    }
  }
  return runs;
}

// Optimal split of a sequence into at most s contiguous runs minimising
// the largest run cost.
std::vector<std::vector<std::size_t>> optimal_split(const Roadmap& g, const std::vector<std::size_t>& seq,
                                                    std::size_t s) {
  const std::size_t L = seq.size();
  s = std::min(s, L);
  std::vector<double> pre(L, 0.0);
  for (std::size_t k = 1; k < L; ++k) pre[k] = pre[k - 1] + g.distance(seq[k - 1], seq[k]);
  const double inf = std::numeric_limits<double>::infinity();
  // best[j][i]: first i items in j runs.
  std::vector<std::vector<double>> best(s + 1, std::vector<double>(L + 1, inf));
  std::vector<std::vector<std::size_t>> cut(s + 1, std::vector<std::size_t>(L + 1, 0));
  best[0][0] = 0.0;
  for (std::size_t j = 1; j <= s; ++j) {
    for (std::size_t i = 1; i <= L; ++i) {
      for (std::size_t k = j - 1; k < i; ++k) {
        const double v = std::max(best[j - 1][k], pre[i - 1] - pre[k]);
        if (v < best[j][i]) {
          best[j][i] = v;
          cut[j][i] = k;
        }
      }
    }
  }
  std::size_t j = 1;
  for (std::size_t t = 2; t <= s; ++t) {
    if (best[t][L] < best[j][L]) j = t;
  }
  std::vector<std::vector<std::size_t>> runs;
  for (std::size_t i = L; j > 0; --j) {
    const std::size_t k = cut[j][i];
    runs.emplace_back(seq.begin() + static_cast<long>(k), seq.begin() + static_cast<long>(i));
    i = k;
  }
  std::reverse(runs.begin(), runs.end());
  return runs;
}

double max_run_cost(const Roadmap& g, const std::vector<std::vector<std::size_t>>& runs) {
  double worst = 0.0;
  for (const auto& r : runs) worst = std::max(worst, path_cost(g, r));
  return worst;
}

PathCover make_cover(const Roadmap& g, std::vector<std::vector<std::size_t>> paths, double threshold) {
  PathCover c;
  c.paths = std::move(paths);
  for (const auto& p : c.paths) {
    c.costs.push_back(path_cost(g, p));
    c.cost = std::max(c.cost, c.costs.back());
  }
  c.threshold = threshold;
  return c;
}

}  // namespace

std::vector<std::size_t> minimum_spanning_tree(const Roadmap& g) {
  std::vector<std::size_t> order(g.edges().size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return g.edges()[a].length < g.edges()[b].length;
  });
  UnionFind uf(g.size());
  std::vector<std::size_t> out;
  for (std::size_t e : order) {
    if (uf.unite(g.edges()[e].u, g.edges()[e].v)) out.push_back(e);
  }
  return out;
}

ChainifyResult chainify(const Roadmap& g) {
  const std::size_t n = g.size();
  if (n < 3) throw std::invalid_argument("chainification needs at least three viewpoints");
  std::vector<std::size_t> mst = minimum_spanning_tree(g);
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t e : mst) {
    adj[g.edges()[e].u].push_back(g.edges()[e].v);
    adj[g.edges()[e].v].push_back(g.edges()[e].u);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  std::size_t start = 0;
  while (adj[start].size() != 1) ++start;

  // Full depth-first walk, then drop the backtrack after the last new vertex.
  std::vector<std::size_t> walk{start};
  std::size_t last_new = 0;
  std::vector<char> seen(n, 0);
  seen[start] = 1;
  struct Frame {
    std::size_t v;
    std::size_t next;
  };
  std::vector<Frame> stack{{start, 0}};
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next < adj[f.v].size()) {
      const std::size_t c = adj[f.v][f.next++];
      if (seen[c]) continue;
      seen[c] = 1;
      walk.push_back(c);
      last_new = walk.size() - 1;
      stack.push_back({c, 0});
      continue;
    }
    stack.pop_back();
    if (!stack.empty()) walk.push_back(stack.back().v);
  }
  walk.resize(last_new + 1);

  const Route route = Route::path(g, walk);
  std::vector<std::size_t> seen_count(n, 0);
  std::vector<std::string> ids;
  for (std::size_t v : walk) {
    const std::size_t k = ++seen_count[v];
    ids.push_back(k == 1 ? g.id(v) : g.id(v) + "#" + std::to_string(k));
  }
  return {std::move(mst), walk, ChainRoadmap(route.arc, std::move(ids)), walk};
}

ChainApproximation chain_approximation(const Roadmap& g, std::size_t m, double horizon,
                                       const ChainApproxOptions& opts) {
  if (m == 0) throw std::invalid_argument("need at least one robot");
  const std::size_t n = g.size();
  if (m >= n) throw InfeasibleError("chain approximation needs fewer robots than viewpoints");
  ChainApproximation out{chainify(g), {}, {}, {}};
  const ChainifyResult& ch = out.chainified;
  out.partition = optimal_partition_bisect(ch.chain, m, opts.eps).partition;

  TeamTrajectory x = traj_min_refresh(ch.chain, out.partition, horizon);
  const Route mapped = Route::path(g, ch.back_map);
  for (std::size_t i = 0; i < x.robots.size(); ++i) {
    RobotTrack& r = x.robots[i];
    const Cluster& c = out.partition[i];
    if (!opts.shortcut || c.empty()) {
      r.route = mapped;
      continue;
    }
    std::vector<std::size_t> seq;
    for (std::size_t k : c.members) {
      const std::size_t v = ch.back_map[k];
      if (std::find(seq.begin(), seq.end(), v) == seq.end()) seq.push_back(v);
    }
    r.route = Route::path(g, seq);
    r.breakpoints = sweep(r.route.length(), horizon);
  }
  if (opts.shortcut) x.period.reset();
  x.num_viewpoints = n;
  out.trajectory = std::move(x);

  double w_min = std::numeric_limits<double>::infinity();
  for (const Edge& e : g.edges()) w_min = std::min(w_min, e.length);
  ChainCertificate& cert = out.certificate;
  cert.gamma = edge_length_ratio(g);
  cert.rt_chain = 2.0 * out.partition.dimension();
  cert.rt_lower_bound = static_cast<double>((n + m - 1) / m - 1) * w_min;
  cert.ratio = cert.rt_chain / cert.rt_lower_bound;
  cert.ratio_bound = static_cast<double>(n - 2) / static_cast<double>(n) * 8.0 * cert.gamma;
  return out;
}

double path_cost(const Roadmap& g, const std::vector<std::size_t>& path) {
  double total = 0.0;
  for (std::size_t k = 1; k < path.size(); ++k) total += g.distance(path[k - 1], path[k]);
  return total;
}

std::vector<std::vector<std::size_t>> threshold_cover(const Roadmap& g, double B, double split_factor) {
  std::vector<std::vector<std::size_t>> runs;
  for (const auto& seq : component_preorders(g, B)) {
    for (auto& r : greedy_split(g, seq, split_factor * B)) runs.push_back(std::move(r));
  }
  return runs;
}

PathCover minmax_path_cover(const Roadmap& g, std::size_t m, const PathCoverOptions& opts) {
  if (m == 0) throw std::invalid_argument("need at least one robot");
  const std::size_t n = g.size();
  if (m >= n) {
    std::vector<std::vector<std::size_t>> single;
    for (std::size_t v = 0; v < n; ++v) single.push_back({v});
    return make_cover(g, std::move(single), 0.0);
  }
  // Any threshold at or above the optimum is feasible, and the whole
  // spanning tree weight always is.
  double lo = 0.0;
  double hi = 0.0;
  {
    std::vector<std::size_t> parent;
    closure_mst(g, n, parent);
    for (std::size_t v = 0; v < n; ++v) {
      if (parent[v] != npos) hi += g.distance(v, parent[v]);
    }
  }
  while (hi - lo > opts.rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (threshold_cover(g, mid, opts.split_factor).size() <= m) {
      hi = mid;
    } else {
      lo = mid;
    }
  }

  const auto comps = component_preorders(g, hi);
  std::vector<std::size_t> runs(comps.size());
  std::size_t used = 0;
  for (std::size_t j = 0; j < comps.size(); ++j) {
    runs[j] = greedy_split(g, comps[j], opts.split_factor * hi).size();
    used += runs[j];
  }
  std::vector<std::vector<std::vector<std::size_t>>> split(comps.size());
  std::vector<double> cost(comps.size());
  for (std::size_t j = 0; j < comps.size(); ++j) {
    split[j] = optimal_split(g, comps[j], runs[j]);
    cost[j] = max_run_cost(g, split[j]);
  }
  for (; used < m; ++used) {
    std::size_t worst = 0;
    for (std::size_t j = 1; j < comps.size(); ++j) {
      if (cost[j] > cost[worst]) worst = j;
    }
    if (cost[worst] == 0.0) break;
    ++runs[worst];
    split[worst] = optimal_split(g, comps[worst], runs[worst]);
    cost[worst] = max_run_cost(g, split[worst]);
  }
  std::vector<std::vector<std::size_t>> paths;
  for (auto& s : split) {
    for (auto& r : s) paths.push_back(std::move(r));
  }
  PathCover c = make_cover(g, std::move(paths), hi);
  c.lower_bound = lo;
  return c;
}

PathCover exact_cover_oracle(const Roadmap& g, std::size_t m, const CoverLimits& limits) {
  const std::size_t n = g.size();
  if (m == 0) throw std::invalid_argument("need at least one robot");
  if (n > limits.max_vertices || m > limits.max_robots) {
    throw std::invalid_argument("exact cover limited to " + std::to_string(limits.max_vertices) +
                                " viewpoints and " + std::to_string(limits.max_robots) + " robots");
  }
  const std::size_t full = (std::size_t{1} << n) - 1;
  const double inf = std::numeric_limits<double>::infinity();
  // Cheapest open path through exactly the vertices of each subset.
  std::vector<std::vector<double>> walk(full + 1, std::vector<double>(n, inf));
  std::vector<std::vector<std::size_t>> prev(full + 1, std::vector<std::size_t>(n, npos));
  for (std::size_t v = 0; v < n; ++v) walk[std::size_t{1} << v][v] = 0.0;
  for (std::size_t s = 1; s <= full; ++s) {
    for (std::size_t v = 0; v < n; ++v) {
      if (walk[s][v] == inf) continue;
      for (std::size_t u = 0; u < n; ++u) {
        if (s >> u & 1U) continue;
        const std::size_t t = s | std::size_t{1} << u;
        const double c = walk[s][v] + g.distance(v, u);
        if (c < walk[t][u]) {
          walk[t][u] = c;
          prev[t][u] = v;
        }
      }
    }
  }
  std::vector<double> best_path(full + 1, inf);
  std::vector<std::size_t> best_end(full + 1, npos);
  for (std::size_t s = 1; s <= full; ++s) {
    for (std::size_t v = 0; v < n; ++v) {
      if (walk[s][v] < best_path[s]) {
        best_path[s] = walk[s][v];
        best_end[s] = v;
      }
    }
  }
  // cover[k][s]: s split into at most k paths.
  std::vector<std::vector<double>> cover(m + 1, std::vector<double>(full + 1, inf));
  std::vector<std::vector<std::size_t>> pick(m + 1, std::vector<std::size_t>(full + 1, 0));
  cover[0][0] = 0.0;
  for (std::size_t k = 1; k <= m; ++k) {
    cover[k][0] = 0.0;
    for (std::size_t s = 1; s <= full; ++s) {
      const std::size_t low = s & (~s + 1);
      for (std::size_t sub = s; sub > 0; sub = (sub - 1) & s) {
        if (!(sub & low)) continue;
        const double c = std::max(best_path[sub], cover[k - 1][s ^ sub]);
        if (c < cover[k][s]) {
          cover[k][s] = c;
          pick[k][s] = sub;
        }
      }
    }
  }
  std::vector<std::vector<std::size_t>> paths;
  for (std::size_t k = m, s = full; s != 0; --k) {
    std::size_t sub = pick[k][s];
    std::vector<std::size_t> p;
    for (std::size_t v = best_end[sub], t = sub; v != npos;) {
      p.push_back(v);
      const std::size_t pv = prev[t][v];
      t &= ~(std::size_t{1} << v);
      v = pv;
    }
    std::reverse(p.begin(), p.end());
    paths.push_back(std::move(p));
    s ^= sub;
  }
  PathCover c = make_cover(g, std::move(paths), 0.0);
  c.lower_bound = c.cost;
  return c;
}

TeamTrajectory path_cover_trajectory(const Roadmap& g, const PathCover& cover, std::size_t m,
                                     double horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (cover.paths.size() > m) {
    throw InfeasibleError("cover has " + std::to_string(cover.paths.size()) + " paths but only " +
                          std::to_string(m) + " robots");
  }
  TeamTrajectory x;
  x.horizon = horizon;
  x.num_viewpoints = g.size();
  for (const auto& p : cover.paths) {
    RobotTrack r;
    r.route = Route::path(g, p);
    r.breakpoints = sweep(r.route.length(), horizon);
    x.robots.push_back(std::move(r));
  }
  while (x.robots.size() < m) {
    RobotTrack r;
    r.route = Route::path(g, {cover.paths.empty() ? 0 : cover.paths.front().front()});
    r.breakpoints = {{0.0, 0.0}, {horizon, 0.0}};
    r.active = false;
    x.robots.push_back(std::move(r));
  }
  double worst = 0.0;
  for (const auto& p : cover.paths) worst = std::max(worst, path_cost(g, p));
  if (worst > 0.0) x.period = 2.0 * worst;
  return x;
}

nlohmann::json to_json(const Roadmap& g, const PathCover& cover) {
  nlohmann::json paths = nlohmann::json::array();
  for (std::size_t i = 0; i < cover.paths.size(); ++i) {
    nlohmann::json verts = nlohmann::json::array();
    for (std::size_t v : cover.paths[i]) verts.push_back(g.id(v));
    paths.push_back({{"vertices", verts}, {"cost", cover.costs.at(i)}});
  }
  return {{"paths", paths},
          {"cost", cover.cost},
          {"threshold", cover.threshold},
          {"lower_bound", cover.lower_bound}};
}

nlohmann::json to_json(const Roadmap& g, const ChainifyResult& result) {
  nlohmann::json mst = nlohmann::json::array();
  for (std::size_t e : result.mst_edges) mst.push_back({g.id(g.edges()[e].u), g.id(g.edges()[e].v)});
  nlohmann::json tour = nlohmann::json::array();
  for (std::size_t v : result.tour) tour.push_back(g.id(v));
  return {{"mst_edges", mst}, {"tour", tour}, {"chain", to_json(result.chain)}};
}

nlohmann::json to_json(const ChainCertificate& cert) {
  return {{"rt_chain", cert.rt_chain},     {"rt_lower_bound", cert.rt_lower_bound},
          {"ratio", cert.ratio},           {"ratio_bound", cert.ratio_bound},
          {"gamma", cert.gamma}};
}

}  // namespace patrol
