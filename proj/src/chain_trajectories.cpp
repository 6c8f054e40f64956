#include "patrol/chain_trajectories.hpp"

#include <algorithm>
#include <stdexcept>

namespace patrol {

std::size_t AggregatedClusters::group_of(std::size_t robot) const {
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (std::find(groups[g].begin(), groups[g].end(), robot) != groups[g].end()) return g;
  }
  return static_cast<std::size_t>(-1);
}

std::vector<std::vector<std::size_t>> aggregate_lengths(const std::vector<double>& lengths,
                                                        double d_max) {
  std::vector<std::vector<std::size_t>> groups;
  double sum = 0.0;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (lengths[i] > d_max) throw std::invalid_argument("cluster longer than d_max");
    if (groups.empty() || sum + lengths[i] > d_max) {
      groups.emplace_back();
      sum = 0.0;
    }
    groups.back().push_back(i);
    sum += lengths[i];
  }
  return groups;
}

AggregatedClusters aggregate_clusters(const Partition& partition) {
  AggregatedClusters agg;
  std::vector<double> lengths;
  for (std::size_t i = 0; i < partition.size(); ++i) {
    if (partition[i].empty()) continue;
    agg.robots.push_back(i);
    lengths.push_back(partition[i].length());
  }
  if (agg.robots.empty()) throw std::invalid_argument("partition has no nonempty cluster");
  agg.d_max = partition.dimension();
  for (const auto& idx : aggregate_lengths(lengths, agg.d_max)) {
    std::vector<std::size_t> members;
    double total = 0.0;
    for (std::size_t k : idx) {
      members.push_back(agg.robots[k]);
      total += lengths[k];
    }
    agg.left_extremes.push_back(partition[members.front()].left);
    agg.right_extremes.push_back(partition[members.back()].right);
    agg.group_lengths.push_back(total);
    agg.groups.push_back(std::move(members));
  }
  return agg;
}

namespace {

void check_horizon(const Partition& partition, double horizon) {
  if (!(horizon >= 2.0 * partition.dimension()) || !(horizon > 0.0)) {
    throw std::invalid_argument("horizon shorter than one period");
  }
}

TeamTrajectory skeleton(const ChainRoadmap& chain, const Partition& partition, double horizon,
                        double period) {
  TeamTrajectory x;
  x.horizon = horizon;
  x.num_viewpoints = chain.size();
  if (period > 0.0) x.period = period;
  const Route route = Route::chain(chain);
  for (std::size_t i = 0; i < partition.size(); ++i) {
    RobotTrack r;
    r.route = route;
    if (partition[i].empty()) {
      r.active = false;
      r.breakpoints = {{0.0, partition[i].left}, {horizon, partition[i].left}};
    }
    x.robots.push_back(std::move(r));
  }
  return x;
}

std::vector<Breakpoint> stationary(double pos, double horizon) {
  return {{0.0, pos}, {horizon, pos}};
}

std::vector<Breakpoint> sweep(const Cluster& c, bool start_left, double horizon) {
  const double d = c.length();
  if (d == 0.0) return stationary(c.left, horizon);
  const double a = start_left ? c.left : c.right;
  const double b = start_left ? c.right : c.left;
  return tile_periodic({{0.0, a}, {d, b}, {2.0 * d, a}}, 2.0 * d, horizon);
}

// Drop breakpoints that repeat the previous time.
std::vector<Breakpoint> dedupe(std::vector<Breakpoint> bps) {
  std::vector<Breakpoint> out;
  for (const Breakpoint& b : bps) {
    if (!out.empty() && b.time <= out.back().time) continue;
    out.push_back(b);
  }
  return out;
}

int count_nonempty(const Partition& p) { return static_cast<int>(p.nonempty_count()); }

}  // namespace

TeamTrajectory traj_min_refresh(const ChainRoadmap& chain, const Partition& partition,
                                double horizon) {
  check_horizon(partition, horizon);
  TeamTrajectory x = skeleton(chain, partition, horizon, 2.0 * partition.dimension());
  for (std::size_t i = 0; i < partition.size(); ++i) {
    if (!partition[i].empty()) x.robots[i].breakpoints = sweep(partition[i], true, horizon);
  }
  return x;
}

TeamTrajectory traj_opposite_phase(const ChainRoadmap& chain, const Partition& partition,
                                   double horizon) {
  check_horizon(partition, horizon);
  TeamTrajectory x = skeleton(chain, partition, horizon, 2.0 * partition.dimension());
  bool left = true;
  for (std::size_t i = 0; i < partition.size(); ++i) {
    if (partition[i].empty()) continue;
    x.robots[i].breakpoints = sweep(partition[i], left, horizon);
    left = !left;
  }
  return x;
}

TeamTrajectory traj_min_uplatency(const ChainRoadmap& chain, const Partition& partition,
                                  double horizon) {
  check_horizon(partition, horizon);
  if (count_nonempty(partition) < 2) throw std::invalid_argument("latency needs two robots");
  const double dmax = partition.dimension();
  const double period = 2.0 * dmax;
  TeamTrajectory x = skeleton(chain, partition, horizon, period);
  double offset = 0.0;
  for (std::size_t i = 0; i < partition.size(); ++i) {
    const Cluster& c = partition[i];
    if (c.empty()) continue;
    const double d = c.length();
    if (d == 0.0) {
      x.robots[i].breakpoints = stationary(c.left, horizon);
      continue;
    }
    std::vector<Breakpoint> one{{offset, c.left}, {offset + d, c.right}, {offset + 2.0 * d, c.left}};
    if (2.0 * d < period) one.push_back({offset + period, c.left});
    x.robots[i].breakpoints = tile_periodic(one, period, horizon);
    offset += d;
  }
  return x;
}

namespace {

// Position l + clamp(s - lo, 0, d) of a robot driven by the group's
// virtual coordinate s, with exact extremes at the clamps.
std::vector<Breakpoint> follow(const std::vector<Breakpoint>& s, double lo, double hi,
                               const Cluster& c) {
  auto map = [&](double v) {
    if (v <= lo) return c.left;
    if (v >= hi) return c.right;
    return c.left + (v - lo);
  };
  std::vector<Breakpoint> out;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (k > 0) {
      const Breakpoint& a = s[k - 1];
      const Breakpoint& b = s[k];
      std::vector<Breakpoint> cross;
      for (double level : {lo, hi}) {
        if ((a.position - level) * (b.position - level) < 0.0) {
          const double t = a.time + (level - a.position) * (b.time - a.time) / (b.position - a.position);
          cross.push_back({t, level == lo ? c.left : c.right});
        }
      }
      std::sort(cross.begin(), cross.end(),
                [](const Breakpoint& p, const Breakpoint& q) { return p.time < q.time; });
      out.insert(out.end(), cross.begin(), cross.end());
    }
    out.push_back({s[k].time, map(s[k].position)});
  }
  return dedupe(std::move(out));
}

}  // namespace

TeamTrajectory traj_min_latency(const ChainRoadmap& chain, const Partition& partition,
                                double horizon) {
  check_horizon(partition, horizon);
  if (count_nonempty(partition) < 2) throw std::invalid_argument("latency needs two robots");
  const AggregatedClusters agg = aggregate_clusters(partition);
  const double dmax = agg.d_max;
  const double period = 2.0 * dmax;
  TeamTrajectory x = skeleton(chain, partition, horizon, period);

  for (std::size_t g = 0; g < agg.count(); ++g) {
    const double D = agg.group_lengths[g];
    std::vector<Breakpoint> one;
    if (g == 0 && agg.count() >= 2) {
      // Outer end of the chain: dwell at l_1 and touch r̄_1 only at the
      // instant the second group is at its left extreme.
      const double t = dmax;
      one = {{t, D}, {t + D, 0.0}, {t + period - D, 0.0}, {t + period, D}};
    } else {
      const double t = (g % 2 == 0) ? 0.0 : dmax;
      one = {{t, 0.0}, {t + D, D}, {t + period - D, D}, {t + period, 0.0}};
    }
    one = dedupe(std::move(one));
    const std::vector<Breakpoint> s =
        D > 0.0 ? tile_periodic(one, period, horizon) : stationary(0.0, horizon);

    double below = 0.0;
    for (std::size_t robot : agg.groups[g]) {
      const Cluster& c = partition[robot];
      const double above = below + c.length();
      x.robots[robot].breakpoints =
          c.length() == 0.0 ? stationary(c.left, horizon) : follow(s, below, above, c);
      below = above;
    }
  }
  return x;
}

}  // namespace patrol
