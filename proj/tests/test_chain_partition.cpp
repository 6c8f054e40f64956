#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "patrol/chain_partition.hpp"

using namespace patrol;

namespace {

std::vector<std::vector<std::size_t>> members(const Partition& p) {
  std::vector<std::vector<std::size_t>> out;
  for (const Cluster& c : p.clusters()) out.push_back(c.members);
  return out;
}

using Groups = std::vector<std::vector<std::size_t>>;

}  // namespace

TEST_CASE("left-induced partition") {
  ChainRoadmap chain({0, 1, 3, 6});
  auto p = left_induced_partition(chain, 2.0);
  CHECK(members(p) == Groups{{0, 1}, {2}, {3}});
  CHECK(left_induced_cardinality(chain, 2.0) == 3);
  CHECK(left_induced_partition(chain, 0.0).size() == 4);
  CHECK(members(left_induced_partition(chain, 6.0)) == Groups{{0, 1, 2, 3}});
  CHECK_THROWS(left_induced_partition(chain, -1.0));
}

TEST_CASE("bisection examples") {
  ChainRoadmap chain({0, 1, 3, 6});
  auto r2 = optimal_partition_bisect(chain, 2, 1e-9);
  CHECK(r2.partition.dimension() == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(members(r2.partition) == Groups{{0, 1, 2}, {3}});
  CHECK(r2.report.upper - r2.report.lower <= 2e-9);

  auto r3 = optimal_partition_bisect(chain, 3, 1e-9);
  CHECK(r3.partition.dimension() == doctest::Approx(1.0));
  CHECK(members(r3.partition) == Groups{{0, 1}, {2}, {3}});

  std::vector<double> uniform;
  for (int i = 0; i < 10; ++i) uniform.push_back(i);
  auto r5 = optimal_partition_bisect(ChainRoadmap(uniform), 5, 1e-9);
  CHECK(r5.partition.dimension() == doctest::Approx(1.0));
  CHECK(oracle::interval_partition_min_dim(uniform, 5) == 1.0);

  CHECK_THROWS_AS(optimal_partition_bisect(chain, 4, 1e-9), InfeasibleError);
  CHECK_THROWS_AS(optimal_partition_bisect(chain, 2, 3.0), std::invalid_argument);
  CHECK_THROWS_AS(optimal_partition_bisect(chain, 2, 0.0), std::invalid_argument);
}

TEST_CASE("exact method examples") {
  ChainRoadmap chain({0, 1, 3, 6});
  CHECK(optimal_partition_exact(chain, 2).dimension() == 3.0);
  CHECK(optimal_partition_exact(chain, 1).dimension() == 6.0);
  auto p = optimal_partition_exact(ChainRoadmap({0, 2, 2.5, 3, 10}), 2);
  CHECK(p.dimension() == 3.0);
  CHECK(members(p) == Groups{{0, 1, 2, 3}, {4}});
}

TEST_CASE("padding parks empty clusters") {
  ChainRoadmap chain({0, 1, 2, 10, 11});
  auto p = optimal_partition_exact(chain, 4);
  REQUIRE(p.size() == 4);
  CHECK(p.dimension() == 1.0);
  for (const Cluster& c : p.clusters()) {
    if (c.empty()) CHECK(c.left == p[p.nonempty_count() - 1].right);
  }
  std::size_t covered = 0;
  for (const Cluster& c : p.clusters()) covered += c.members.size();
  CHECK(covered == chain.size());
}

TEST_CASE("random chains agree with oracles") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 150; ++trial) {
    std::size_t n = 2 + rng() % 40;
    auto coords = oracle::random_chain(rng, n);
    ChainRoadmap chain(coords);
    std::size_t m = 1 + rng() % (n - 1);
    Partition exact = optimal_partition_exact(chain, m);
    auto bis = optimal_partition_bisect(chain, m, 1e-9);
    double gap = bis.partition.dimension() - exact.dimension();
    CHECK(gap >= 0.0);
    CHECK(gap <= 1e-9);
    CHECK(bis.partition.nonempty_count() <= m);
    CHECK(bis.report.iterations <= bis.report.iteration_bound);
    if (n <= 15) CHECK(exact.dimension() == oracle::interval_partition_min_dim(coords, m));

    // Monotone cardinality and dimension bounded by rho.
    double prev = -1.0;
    std::size_t prev_card = n + 1;
    for (double rho = 0.0; rho <= coords.back(); rho += coords.back() / 37.0) {
      auto p = left_induced_partition(chain, rho);
      CHECK(p.dimension() <= rho);
      CHECK(p.size() <= prev_card);
      prev_card = p.size();
      prev = rho;
    }
    (void)prev;
  }
}

TEST_CASE("removing longest edges is not optimal") {
  // A long run of short edges followed by three slightly longer ones.
  std::vector<double> coords{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11.5, 13, 14.5};
  ChainRoadmap chain(coords);
  std::vector<std::size_t> order(coords.size() - 1);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return coords[a + 1] - coords[a] > coords[b + 1] - coords[b];
  });
  std::vector<bool> cut(order.size(), false);
  for (int k = 0; k < 3; ++k) cut[order[k]] = true;
  double span_start = coords[0];
  double naive = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (cut[i]) {
      naive = std::max(naive, coords[i] - span_start);
      span_start = coords[i + 1];
    }
  }
  naive = std::max(naive, coords.back() - span_start);
  double optimal = optimal_partition_exact(chain, 4).dimension();
  CHECK(naive == 10.0);
  CHECK(optimal == 3.0);
  CHECK(optimal == oracle::interval_partition_min_dim(coords, 4));
  CHECK(naive > optimal);
}

TEST_CASE("partition json") {
  ChainRoadmap chain({0, 1, 3, 6});
  auto res = optimal_partition_bisect(chain, 2, 1e-9);
  auto doc = to_json(chain, res.partition, std::pair{res.report.lower, res.report.upper});
  CHECK(doc["clusters"][0] == nlohmann::json({"v1", "v2", "v3"}));
  CHECK(doc["rho_interval"].size() == 2);
}

TEST_CASE("partition json round trip") {
  std::mt19937_64 rng(4);
  for (int inst = 0; inst < 20; ++inst) {
    ChainRoadmap chain(oracle::random_chain(rng, 12));
    const Partition p = pad_partition(optimal_partition_bisect(chain, 4, 1e-9).partition, 6);
    const Partition q = partition_from_json(chain, nlohmann::json::parse(to_json(chain, p).dump()));
    REQUIRE(q.size() == p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      CHECK(q[i].members == p[i].members);
      CHECK(q[i].left == p[i].left);
      CHECK(q[i].right == p[i].right);
    }
  }
  ChainRoadmap chain({0, 1, 3, 6});
  CHECK_THROWS_AS(partition_from_json(chain, nlohmann::json::parse(R"({"clusters":[["v1","v3"],["v2","v4"]]})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(partition_from_json(chain, nlohmann::json::parse(R"({"clusters":[["v1"]]})")),
                  std::invalid_argument);
}
