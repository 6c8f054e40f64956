#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "patrol/metrics.hpp"
#include "patrol/tree_patrol.hpp"

using namespace patrol;

namespace {

std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("v" + std::to_string(i + 1));
  return out;
}

// Center v2, leaves v1, v3, v4, unit edges.
Roadmap unit_star() { return Roadmap(ids(4), {{0, 1, 1.0}, {1, 2, 1.0}, {1, 3, 1.0}}); }

Roadmap path3() { return Roadmap(ids(4), {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}}); }

Roadmap random_tree(std::mt19937_64& rng, std::size_t n, double lo = 0.5, double hi = 5.0) {
  std::uniform_real_distribution<double> len(lo, hi);
  std::vector<Edge> edges;
  for (std::size_t v = 1; v < n; ++v) {
    std::uniform_int_distribution<std::size_t> pick(0, v - 1);
    edges.push_back({pick(rng), v, std::round(len(rng) * 4.0) / 4.0});
  }
  std::shuffle(edges.begin(), edges.end(), rng);
  return Roadmap(ids(n), edges);
}

// Vertex a closed-route robot occupies at time t, if any.
std::optional<std::size_t> vertex_at(const RobotTrack& r, double t) {
  double s = r.position(t);
  const double L = r.route.length();
  if (r.route.closed && L > 0.0) s = std::fmod(s, L);
  for (std::size_t k = 0; k < r.route.stops.size(); ++k) {
    if (std::abs(r.route.arc[k] - s) < 1e-9) return r.route.stops[k];
  }
  return std::nullopt;
}

// Independent optimum: all ways to label vertices into connected groups,
// then hand robots one by one to the group with the largest DFT / m_j.
double oracle_optimum(const Roadmap& t, std::size_t m) {
  const std::size_t n = t.size();
  std::vector<std::size_t> label(n, 0);
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t v, std::size_t used) {
    if (used > m) return;
    if (v == n) {
      std::vector<double> dft(used, 0.0);
      std::vector<std::size_t> inside(used, 0);
      for (const Edge& e : t.edges()) {
        if (label[e.u] == label[e.v]) {
          dft[label[e.u]] += 2.0 * e.length;
          ++inside[label[e.u]];
        }
      }
      std::vector<std::size_t> size(used, 0);
      for (std::size_t u = 0; u < n; ++u) ++size[label[u]];
      for (std::size_t g = 0; g < used; ++g) {
        if (inside[g] + 1 != size[g]) return;  // not connected
      }
      std::vector<std::size_t> robots(used, 1);
      for (std::size_t extra = used; extra < m; ++extra) {
        std::size_t worst = 0;
        for (std::size_t g = 1; g < used; ++g) {
          if (dft[g] / static_cast<double>(robots[g]) > dft[worst] / static_cast<double>(robots[worst])) worst = g;
        }
        ++robots[worst];
      }
      double obj = 0.0;
      for (std::size_t g = 0; g < used; ++g) obj = std::max(obj, dft[g] / static_cast<double>(robots[g]));
      best = std::min(best, obj);
      return;
    }
    for (std::size_t g = 0; g <= used; ++g) {
      label[v] = g;
      rec(v + 1, std::max(used, g + 1));
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace

TEST_CASE("depth-first tour examples") {
  const DftTour star = dft_tour(unit_star());
  CHECK(star.length() == 6.0);
  CHECK(star.vertices == std::vector<std::size_t>{0, 1, 2, 1, 3, 1, 0});
  CHECK(dft_tour(Roadmap(ids(2), {{0, 1, 2.5}})).length() == 5.0);
  CHECK(dft_tour(path3()).length() == 6.0);
  CHECK(dft_tour(Roadmap({"solo"}, {})).length() == 0.0);
}

TEST_CASE("depth-first tours of random trees") {
  std::mt19937_64 rng(5);
  for (int inst = 0; inst < 50; ++inst) {
    const std::size_t n = 2 + static_cast<std::size_t>(inst);
    const Roadmap t = random_tree(rng, n);
    const DftTour tour = dft_tour(t);
    double total = 0.0;
    for (const Edge& e : t.edges()) total += e.length;
    CHECK(tour.length() == doctest::Approx(2.0 * total).epsilon(1e-12));
    CHECK(tour.vertices.front() == 0);
    CHECK(tour.vertices.back() == 0);
    std::vector<char> seen(n, 0);
    for (std::size_t k = 0; k < tour.vertices.size(); ++k) {
      seen[tour.vertices[k]] = 1;
      if (k > 0) CHECK(t.edge_between(tour.vertices[k - 1], tour.vertices[k]).has_value());
    }
    CHECK(std::count(seen.begin(), seen.end(), 1) == static_cast<long>(n));
  }
}

TEST_CASE("unit star with two robots: whole-tree tour beats every partition") {
  const Roadmap star = unit_star();
  const SubtreeCollection opt = optimal_subtree_collection(star, 2);
  CHECK(opt.objective == 3.0);
  CHECK(opt.removed_edges.empty());
  CHECK(opt.robots == std::vector<std::size_t>{2});
  CHECK(best_partition_strategy(star, 2).objective == 4.0);

  const TeamTrajectory x = efficient_trajectory(star, opt, 60.0);
  CHECK_NOTHROW(validate(x));
  CHECK(eval_refresh_time(x) == doctest::Approx(3.0));
  // Reference visiting order; v3 and v4 are mirrored since children are toured by index.
  const std::vector<std::vector<std::size_t>> table{{0, 1, 3, 1, 2, 1, 0}, {1, 2, 1, 0, 1, 3, 1}};
  auto mirror = [](std::size_t v) -> std::size_t { return v == 2 ? 3 : v == 3 ? 2 : v; };
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t t = 0; t < 7; ++t) {
      const auto v = vertex_at(x.robots[i], static_cast<double>(t));
      REQUIRE(v);
      CHECK(*v == mirror(table[i][t]));
    }
  }
}

TEST_CASE("path of three unit edges splits at the middle") {
  const Roadmap p = path3();
  const SubtreeCollection opt = optimal_subtree_collection(p, 2);
  CHECK(opt.objective == 2.0);
  REQUIRE(opt.removed_edges.size() == 1);
  CHECK(opt.removed_edges[0] == 1);
  CHECK(opt.robots == std::vector<std::size_t>{1, 1});
  CHECK(eval_refresh_time(efficient_trajectory(p, opt, 40.0)) == doctest::Approx(2.0));
  CHECK(optimal_subtree_collection(p, 1).objective == 6.0);
  CHECK(optimal_subtree_collection(p, 1).removed_edges.empty());
}

TEST_CASE("two close viewpoints defeat the cyclic strategy") {
  for (double eps : {0.5, 0.1, 0.01}) {
    const Roadmap t(ids(3), {{0, 1, eps}, {1, 2, 1.0}});
    const SubtreeCollection opt = optimal_subtree_collection(t, 2);
    CHECK(opt.objective == doctest::Approx(2.0 * eps));
    CHECK(cyclic_strategy(t, 2).objective == doctest::Approx(1.0 + eps));
    CHECK(cyclic_strategy(t, 2).objective > opt.objective);
    CHECK(eval_refresh_time(efficient_trajectory(t, opt, 20.0)) == doctest::Approx(2.0 * eps));
  }
}

TEST_CASE("exhaustive search against the set-partition oracle") {
  std::mt19937_64 rng(17);
  for (int inst = 0; inst < 80; ++inst) {
    const std::size_t n = 2 + static_cast<std::size_t>(inst % 6);
    const Roadmap t = random_tree(rng, n);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t m = 1; m <= 4; ++m) {
      const SubtreeCollection opt = optimal_subtree_collection(t, m);
      CHECK(opt.objective == doctest::Approx(oracle_optimum(t, m)).epsilon(1e-12));
      CHECK(opt.objective <= cyclic_strategy(t, m).objective + 1e-12);
      CHECK(opt.objective <= best_partition_strategy(t, m).objective + 1e-12);
      CHECK(opt.objective <= prev + 1e-12);
      prev = opt.objective;
      std::size_t robots = 0;
      for (std::size_t r : opt.robots) robots += r;
      CHECK(robots == m);
      CHECK(collection_objective(t, opt.subtrees, opt.robots) == doctest::Approx(opt.objective));
    }
  }
}

TEST_CASE("efficient trajectory refresh time, analytic and sampled") {
  std::mt19937_64 rng(23);
  for (int inst = 0; inst < 20; ++inst) {
    const Roadmap t = random_tree(rng, 3 + static_cast<std::size_t>(inst % 5));
    const std::size_t m = 1 + static_cast<std::size_t>(inst % 3);
    const SubtreeCollection opt = optimal_subtree_collection(t, m);
    const double horizon = 4.0 * opt.objective + 10.0;
    const TeamTrajectory x = efficient_trajectory(t, opt, horizon);
    CHECK_NOTHROW(validate(x));
    const double rt = eval_refresh_time(x);
    CHECK(rt == doctest::Approx(opt.objective).epsilon(1e-9));
    const double dt = 1e-3;
    const double sampled = eval_refresh_time(sample(x, dt), {.warmup = 0.0, .eta = dt / 2.0});
    CHECK(std::abs(sampled - rt) <= 2.0 * dt);
  }
}

TEST_CASE("tree search errors") {
  std::mt19937_64 rng(2);
  CHECK_THROWS_AS(optimal_subtree_collection(random_tree(rng, 16), 2), SearchLimitError);
  CHECK_THROWS_AS(optimal_subtree_collection(unit_star(), 7), SearchLimitError);
  CHECK_NOTHROW(optimal_subtree_collection(random_tree(rng, 16), 2, {.max_vertices = 16}));
  const Roadmap triangle(ids(3), {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}});
  CHECK_THROWS_AS(optimal_subtree_collection(triangle, 2), std::invalid_argument);
  SubtreeCollection bad = cyclic_strategy(unit_star(), 2);
  bad.robots = {0};
  CHECK_THROWS_AS(efficient_trajectory(unit_star(), bad, 10.0), std::invalid_argument);
}

TEST_CASE("plan JSON") {
  const Roadmap p = path3();
  const auto doc = to_json(p, optimal_subtree_collection(p, 2));
  CHECK(doc["removed_edges"] == nlohmann::json::parse(R"([["v2","v3"]])"));
  CHECK(doc["allocation"] == nlohmann::json::parse("[1,1]"));
  CHECK(doc["objective"] == 2.0);
  CHECK(doc["subtrees"][0]["tour"] == nlohmann::json::parse(R"(["v1","v2","v1"])"));
}
