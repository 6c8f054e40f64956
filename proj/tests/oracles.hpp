#pragma once

// Independent reference implementations used only by tests.

#include <algorithm>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

// Minimum over all splits of coords into at most m consecutive intervals of
// the largest interval span.
inline double interval_partition_min_dim(const std::vector<double>& coords, std::size_t m) {
  const std::size_t n = coords.size();
  const double inf = std::numeric_limits<double>::infinity();
  // best[k][j]: first j viewpoints covered by k intervals
  std::vector<std::vector<double>> best(m + 1, std::vector<double>(n + 1, inf));
  best[0][0] = 0.0;
  for (std::size_t k = 1; k <= m; ++k) {
    best[k][0] = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
      best[k][j] = best[k - 1][j];
      for (std::size_t i = 0; i < j; ++i) {
        double span = coords[j - 1] - coords[i];
        best[k][j] = std::min(best[k][j], std::max(best[k - 1][i], span));
      }
    }
  }
  return best[m][n];
}

inline std::vector<double> random_chain(std::mt19937_64& rng, std::size_t n, double lo = 0.1,
                                        double hi = 10.0) {
  std::uniform_real_distribution<double> len(lo, hi);
  std::vector<double> coords{0.0};
  while (coords.size() < n) coords.push_back(coords.back() + len(rng));
  return coords;
}

}  // namespace oracle

#include <cmath>
#include <map>

#include "patrol/trajectory.hpp"

namespace oracle {

// Contact-start instants of robots a and b, found by probing every
// breakpoint time of either robot: both must sit exactly on chain viewpoints
// at most one index apart.
inline std::vector<double> contact_starts(const patrol::TeamTrajectory& x, std::size_t a,
                                          std::size_t b, const std::vector<double>& coords) {
  std::vector<double> ts;
  for (std::size_t r : {a, b}) {
    for (const auto& bp : x.robots[r].breakpoints) ts.push_back(bp.time);
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  auto index_at = [&](double p) -> long {
    auto it = std::find(coords.begin(), coords.end(), p);
    return it == coords.end() ? -1 : static_cast<long>(it - coords.begin());
  };
  auto contact = [&](double t) {
    long u = index_at(x.robots[a].position(t));
    long w = index_at(x.robots[b].position(t));
    return u >= 0 && w >= 0 && std::abs(u - w) <= 1;
  };
  std::vector<double> out{0.0};
  for (std::size_t k = 0; k < ts.size(); ++k) {
    if (!contact(ts[k])) continue;
    bool continuing = k > 0 && contact(ts[k - 1]) && contact(0.5 * (ts[k - 1] + ts[k]));
    if (!continuing && ts[k] > 0.0) out.push_back(ts[k]);
  }
  return out;
}

// Latency over instant sets phi[0..m-2] by set reachability: for each
// injection, every instant of every later set reachable through a
// non-decreasing sequence is marked, and the earliest mark on the last set
// is the arrival. With `dedupe`, injections sharing an arrival are charged
// from the latest of them only. Undelivered injections later than
// horizon - tail are dropped, earlier ones are charged horizon - t.
inline double propagate(const std::vector<std::vector<double>>& phi, double horizon, bool dedupe,
                        double tail) {
  if (phi.size() <= 1) return 0.0;
  std::map<double, double> latest;
  double worst = 0.0;
  for (double t0 : phi[0]) {
    std::vector<double> reach{t0};
    for (std::size_t k = 1; k < phi.size(); ++k) {
      std::vector<double> next;
      for (double t : phi[k]) {
        for (double r : reach) {
          if (r <= t) {
            next.push_back(t);
            break;
          }
        }
      }
      reach = std::move(next);
    }
    double arrival = std::numeric_limits<double>::infinity();
    for (double r : reach) arrival = std::min(arrival, r);
    if (!dedupe) {
      worst = std::max(worst, std::min(arrival, horizon) - t0);
    } else if (arrival <= horizon) {
      auto [it, ok] = latest.emplace(arrival, t0);
      if (!ok) it->second = std::max(it->second, t0);
    } else if (t0 <= horizon - tail) {
      worst = std::max(worst, horizon - t0);
    }
  }
  for (auto [a, t] : latest) worst = std::max(worst, a - t);
  return worst;
}

}  // namespace oracle

#include "patrol/roadmap.hpp"

namespace oracle {

// Random connected planar roadmap with Euclidean edge lengths: each point
// joins its nearest predecessor, then `extra` random chords are added.
inline patrol::Roadmap random_planar_roadmap(std::mt19937_64& rng, std::size_t n, std::size_t extra) {
  std::uniform_real_distribution<double> coord(0.0, 10.0);
  std::vector<patrol::Point2> pts;
  std::vector<std::string> ids;
  std::vector<std::optional<patrol::Point2>> xy;
  for (std::size_t i = 0; i < n; ++i) {
    pts.push_back({std::round(coord(rng) * 8.0) / 8.0, std::round(coord(rng) * 8.0) / 8.0});
    ids.push_back("p" + std::to_string(i + 1));
    xy.emplace_back(pts.back());
  }
  auto dist = [&](std::size_t a, std::size_t b) { return std::hypot(pts[a].x - pts[b].x, pts[a].y - pts[b].y) + 0.05; };
  std::vector<patrol::Edge> edges;
  auto has = [&](std::size_t a, std::size_t b) {
    return std::any_of(edges.begin(), edges.end(), [&](const patrol::Edge& e) {
      return (e.u == a && e.v == b) || (e.u == b && e.v == a);
    });
  };
  for (std::size_t i = 1; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < i; ++j) {
      if (dist(i, j) < dist(i, best)) best = j;
    }
    edges.push_back({best, i, dist(best, i)});
  }
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t k = 0; k < extra; ++k) {
    const std::size_t a = pick(rng);
    const std::size_t b = pick(rng);
    if (a != b && !has(a, b)) edges.push_back({a, b, dist(a, b)});
  }
  return patrol::Roadmap(ids, edges, xy, false);
}

}  // namespace oracle
