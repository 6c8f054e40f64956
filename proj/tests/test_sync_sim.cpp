#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "patrol/chain_trajectories.hpp"
#include "patrol/sync_sim.hpp"

using namespace patrol;

namespace {

int dir_at(const std::vector<DirChange>& d, double t) {
  int v = 0;
  for (const DirChange& c : d) {
    if (c.time > t) break;
    v = c.dir;
  }
  return v;
}

Partition case_study_partition(std::size_t m) {
  return optimal_partition_bisect(case_study_chain(), m, 1e-9).partition;
}

}  // namespace

TEST_CASE("two robots across a group boundary follow the hand schedule") {
  // [0,2] and [3,5]: two groups of length 2, no dwell anywhere.
  auto [chain, p] = Partition::from_lengths({2.0, 2.0});
  SimConfig cfg;
  cfg.horizon = 30.0;
  cfg.initial_positions = std::vector<double>{0.0, 3.0};
  cfg.initial_dirs = std::vector<int>{1, 1};
  const Trace tr = simulate(chain, p, cfg);
  REQUIRE(tr.comms.size() >= 6);
  for (std::size_t k = 0; k < 6; ++k) CHECK(tr.comms[k].time == doctest::Approx(4.0 + 4.0 * k));
  CHECK(tr.trajectory.robots[0].position(6.0) == doctest::Approx(0.0));
  CHECK(tr.trajectory.robots[1].position(6.0) == doctest::Approx(5.0));
  CHECK(tr.trajectory.robots[0].position(9.0) == doctest::Approx(1.0));
}

TEST_CASE("inter-group handshake makes the left group dwell symmetrically") {
  // Middle group of length 1 under d_max = 4: it dwells 2 (4 - 1) at r_2.
  auto [chain, p] = Partition::from_lengths({4.0, 1.0, 4.0});
  SimConfig cfg;
  cfg.horizon = 400.0;
  const Trace tr = simulate(chain, p, cfg);
  const auto tc = convergence_time(tr, 0);
  REQUIRE(tc);
  const RobotTrack& mid = tr.trajectory.robots[1];
  const double r = p[1].right;
  double dwell = 0.0;
  for (double t = *tc; t < *tc + 8.0; t += 1e-3) dwell += std::abs(mid.position(t) - r) < 1e-9 ? 1e-3 : 0.0;
  CHECK(dwell == doctest::Approx(6.0).epsilon(1e-3));
}

TEST_CASE("random initial states converge to the optimal periodic pattern") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> len(0.5, 10.0);
  std::uniform_int_distribution<int> count(1, 7);
  for (int inst = 0; inst < 40; ++inst) {
    std::vector<double> lengths(static_cast<std::size_t>(count(rng)));
    for (double& l : lengths) l = std::round(len(rng) * 4.0) / 4.0;
    auto [chain, p] = Partition::from_lengths(lengths);
    const double m = static_cast<double>(lengths.size());
    for (std::uint64_t run = 0; run < 3; ++run) {
      SimConfig cfg;
      cfg.run_index = run;
      cfg.horizon = (60.0 + 40.0 * m) * p.dimension();
      const Trace tr = simulate(chain, p, cfg);
      const auto tc = convergence_time(tr, 0);
      REQUIRE(tc);
      const WindowMetrics w = evaluate_window(tr, chain, 0, *tc, cfg.horizon);
      CHECK(w.refresh_time == doctest::Approx(2.0 * p.dimension()).epsilon(1e-9));
      if (lengths.size() >= 2) {
        // Closed form, recomputed independently of the metrics module.
        const auto groups = aggregate_lengths(lengths, p.dimension());
        double first = 0.0, last = 0.0;
        for (std::size_t i : groups.front()) first += lengths[i];
        for (std::size_t i : groups.back()) last += lengths[i];
        const double mbar = static_cast<double>(groups.size());
        const double lb = std::max(0.0, (mbar - 2.0) * p.dimension() + (first - lengths.front()) +
                                            (last - lengths.back()));
        CHECK(w.latency.overall == doctest::Approx(lb).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("single robot sweeps its cluster without communicating") {
  auto [chain, p] = Partition::from_lengths({5.0});
  SimConfig cfg;
  cfg.horizon = 100.0;
  const Trace tr = simulate(chain, p, cfg);
  CHECK(tr.comms.empty());
  const WindowMetrics w = evaluate_window(tr, chain, 0, 20.0, 100.0);
  CHECK(w.refresh_time == doctest::Approx(10.0));
}

TEST_CASE("same seed gives the same trace, different run index does not") {
  const ChainRoadmap chain = case_study_chain();
  const Partition p = case_study_partition(10);
  SimConfig cfg;
  cfg.horizon = 200.0;
  cfg.sigma2 = 0.1;
  const Trace a = simulate(chain, p, cfg);
  const Trace b = simulate(chain, p, cfg);
  std::ostringstream sa, sb;
  write_trace_csv(sa, a);
  write_trace_csv(sb, b);
  CHECK(sa.str() == sb.str());
  cfg.run_index = 1;
  std::ostringstream sc;
  write_trace_csv(sc, simulate(chain, p, cfg));
  CHECK(sa.str() != sc.str());
}

TEST_CASE("noiseless runs respect speed, clusters and order") {
  const ChainRoadmap chain = case_study_chain();
  const Partition p = case_study_partition(10);
  for (std::uint64_t run = 0; run < 10; ++run) {
    SimConfig cfg;
    cfg.horizon = 300.0;
    cfg.run_index = run;
    const Trace tr = simulate(chain, p, cfg);
    CHECK_NOTHROW(validate(tr.trajectory));
    for (double t = 0.0; t <= cfg.horizon; t += 0.05) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double x = tr.trajectory.robots[i].position(t);
        CHECK(x >= p[i].left - 1e-9);
        CHECK(x <= p[i].right + 1e-9);
        if (i + 1 < p.size()) CHECK(x <= tr.trajectory.robots[i + 1].position(t) + 1e-9);
      }
    }
  }
}

TEST_CASE("token alternates the single mover inside a group") {
  // Robots 2 and 3 share a group.
  auto [chain, p] = Partition::from_lengths({3.0, 1.0, 1.5, 3.0});
  REQUIRE(aggregate_clusters(p).count() == 3);
  for (std::uint64_t run = 0; run < 5; ++run) {
    SimConfig cfg;
    cfg.horizon = 200.0;
    cfg.run_index = run;
    const Trace tr = simulate(chain, p, cfg);
    const AggregatedClusters agg = aggregate_clusters(p);
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
      if (agg.group_of(k) != agg.group_of(k + 1)) continue;
      int prev = 0;
      int meetings = 0;
      for (const CommEvent& c : tr.comms) {
        if (c.left != k) continue;
        const double after = c.time + 1e-9;
        const int a = dir_at(tr.dirs[k], after);
        const int b = dir_at(tr.dirs[k + 1], after);
        CHECK(((a != 0) != (b != 0)));
        const int mover = a != 0 ? -1 : 1;
        if (prev != 0) CHECK(mover == -prev);
        prev = mover;
        ++meetings;
      }
      CHECK(meetings > 5);
    }
  }
}

TEST_CASE("temporary stop: neighbours gather, then the team resynchronizes") {
  const ChainRoadmap chain = case_study_chain();
  const Partition p = case_study_partition(10);
  SimConfig cfg;
  cfg.horizon = 1000.0;
  cfg.failures.push_back({6, 300.0, 400.0});
  const Trace tr = simulate(chain, p, cfg);
  REQUIRE(tr.epochs.size() == 1);
  for (std::size_t i = 0; i < 10; ++i) {
    const double x = tr.trajectory.robots[i].position(399.0);
    if (i < 6) CHECK(x == doctest::Approx(p[i].right));
    if (i > 6) CHECK(x == doctest::Approx(p[i].left));
  }
  const double x7 = tr.trajectory.robots[6].position(300.0);
  CHECK(tr.trajectory.robots[6].position(399.0) == x7);
  const WindowMetrics pre = evaluate_window(tr, chain, 0, 200.0, 300.0);
  CHECK(pre.refresh_time == doctest::Approx(2.0 * p.dimension()));
  const WindowMetrics during = evaluate_window(tr, chain, 0, 300.0, 400.0);
  CHECK(during.refresh_time > 2.0 * p.dimension());
  const auto tc = convergence_time(tr, 0);
  REQUIRE(tc);
  CHECK(*tc > 400.0);
  const WindowMetrics post = evaluate_window(tr, chain, 0, *tc, cfg.horizon);
  CHECK(post.refresh_time == doctest::Approx(2.0 * p.dimension()));
  CHECK(post.latency.overall == doctest::Approx(post.bounds.periodic_lb));
}

TEST_CASE("permanent failure is detected and the survivors repartition") {
  const ChainRoadmap chain = case_study_chain();
  const Partition p = case_study_partition(10);
  const double theta = 2.0 * (2.0 * p.dimension());
  SimConfig cfg;
  cfg.horizon = 1200.0;
  const Trace tr = inject_permanent_failure_and_repartition(chain, p, cfg, 6, 500.0, theta);
  REQUIRE(tr.epochs.size() == 2);
  const Epoch& e = tr.epochs[1];
  CHECK(e.team.size() == 9);
  CHECK(std::find(e.team.begin(), e.team.end(), 6) == e.team.end());
  // The first neighbour whose silence with robot 7 reaches theta fires.
  double left = 0.0, right = 0.0;
  for (const CommEvent& c : tr.comms) {
    if (c.time > 500.0) continue;
    if (c.right == 6) left = std::max(left, c.time);
    if (c.left == 6) right = std::max(right, c.time);
  }
  CHECK(e.start == doctest::Approx(std::max(500.0, std::min(left, right) + theta)));
  const auto coords = chain.coordinates();
  const double exact = oracle::interval_partition_min_dim({coords.begin(), coords.end()}, 9);
  CHECK(e.partition.dimension() == doctest::Approx(exact).epsilon(1e-9));
  CHECK(e.partition.dimension() >= p.dimension());
  const auto tc = convergence_time(tr, 1);
  REQUIRE(tc);
  const WindowMetrics w = evaluate_window(tr, chain, 1, *tc, cfg.horizon);
  CHECK(w.refresh_time == doctest::Approx(2.0 * exact));
  CHECK(w.latency.overall == doctest::Approx(w.bounds.periodic_lb));
  CHECK_FALSE(tr.trajectory.robots[6].active);
}

TEST_CASE("failure of the first robot hands the left end to robot 2") {
  const ChainRoadmap chain = case_study_chain();
  const Partition p = case_study_partition(10);
  SimConfig cfg;
  cfg.horizon = 1200.0;
  const Trace tr = inject_permanent_failure_and_repartition(chain, p, cfg, 0, 300.0, 4.0 * p.dimension());
  REQUIRE(tr.epochs.size() == 2);
  CHECK(tr.epochs[1].team.front() == 1);
  CHECK(tr.epochs[1].partition[0].left == 0.0);
  const auto tc = convergence_time(tr, 1);
  REQUIRE(tc);
  CHECK(evaluate_window(tr, chain, 1, *tc, cfg.horizon).refresh_time ==
        doctest::Approx(2.0 * tr.epochs[1].partition.dimension()));
}

TEST_CASE("a timeout beyond the horizon never repartitions") {
  const ChainRoadmap chain = case_study_chain();
  const Partition p = case_study_partition(10);
  SimConfig cfg;
  cfg.horizon = 800.0;
  const Trace tr = inject_permanent_failure_and_repartition(chain, p, cfg, 6, 400.0, 1000.0);
  CHECK(tr.epochs.size() == 1);
  CHECK(std::isinf(evaluate_window(tr, chain, 0, 500.0, 800.0).refresh_time));
}

TEST_CASE("simulate rejects bad configurations") {
  const ChainRoadmap chain = case_study_chain();
  const Partition p = case_study_partition(10);
  SimConfig cfg;
  cfg.dt = 2.0;
  CHECK_THROWS_AS(simulate(chain, p, cfg), std::invalid_argument);
  cfg = {};
  cfg.initial_positions = std::vector<double>(10, 0.0);
  CHECK_THROWS_AS(simulate(chain, p, cfg), std::invalid_argument);
  cfg = {};
  cfg.sigma2 = -1.0;
  CHECK_THROWS_AS(simulate(chain, p, cfg), std::invalid_argument);
  auto [single, one] = Partition::from_lengths({3.0});
  SimConfig lone;
  lone.horizon = 50.0;
  CHECK_THROWS(inject_permanent_failure_and_repartition(single, one, lone, 0, 10.0, 5.0));
}

TEST_CASE("noise sweep is independent of the worker count") {
  const ChainRoadmap chain = case_study_chain();
  const Partition p = case_study_partition(10);
  SweepConfig sc;
  sc.variances = {0.0, 0.3};
  sc.runs = 3;
  sc.horizon = 300.0;
  const auto one = noise_sweep(chain, p, sc);
  sc.workers = 3;
  const auto many = noise_sweep(chain, p, sc);
  std::ostringstream a, b;
  write_sweep_csv(a, one);
  write_sweep_csv(b, many);
  CHECK(a.str() == b.str());
  CHECK(one[0].rt_mean == doctest::Approx(2.0 * p.dimension()));
  CHECK(one[0].lt_mean == doctest::Approx(latency_lower_bounds(p).periodic_lb));
  CHECK(one[1].rt_mean > one[0].rt_mean);
}

TEST_CASE("bootstrap reproduces the centralized partition") {
  std::mt19937_64 rng(8);
  for (int inst = 0; inst < 30; ++inst) {
    const ChainRoadmap chain(oracle::random_chain(rng, 25));
    const std::size_t m = 1 + static_cast<std::size_t>(inst % 8);
    std::uniform_real_distribution<double> where(0.0, chain.length());
    std::vector<double> pos(m);
    double far = 0.0;
    for (double& x : pos) {
      x = where(rng);
      far = std::max(far, x);
    }
    const Bootstrap b = distributed_bootstrap(chain, pos, 1e-9);
    const Partition ref = optimal_partition_bisect(chain, m, 1e-9).partition;
    CHECK(b.partition.lengths() == ref.lengths());
    CHECK(b.gather_time == far);
    CHECK(b.leader == 0);
    CHECK(b.leader_travel == doctest::Approx(2.0 * chain.length() * b.probes));
  }
}

TEST_CASE("spearman") {
  CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(spearman({1, 2, 3, 4, 5}, {1, 3, 2, 5, 4}) == doctest::Approx(0.8));
  CHECK(spearman({1, 2, 3}, {1, 1, 2}) == doctest::Approx(std::sqrt(3.0) / 2.0));
}

TEST_CASE("trace CSV carries samples and events") {
  const ChainRoadmap chain = case_study_chain();
  const Partition p = case_study_partition(10);
  SimConfig cfg;
  cfg.horizon = 50.0;
  cfg.failures.push_back({2, 10.0, 20.0});
  const Trace tr = simulate(chain, p, cfg);
  std::ostringstream out;
  write_trace_csv(out, tr);
  const std::string s = out.str();
  CHECK(s.rfind("time,robot,position,dir,event\n", 0) == 0);
  CHECK(s.find(",3,") != std::string::npos);
  CHECK(s.find("fail") != std::string::npos);
  CHECK(s.find("resume") != std::string::npos);
  CHECK(s.find("meet") != std::string::npos);
}
