#include "patrol/chain_partition.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

namespace patrol {

std::size_t Partition::nonempty_count() const {
  return static_cast<std::size_t>(std::count_if(clusters_.begin(), clusters_.end(),
                                                [](const Cluster& c) { return !c.empty(); }));
}

double Partition::dimension() const {
  double dim = 0.0;
  for (const Cluster& c : clusters_) dim = std::max(dim, c.length());
  return dim;
}

std::vector<double> Partition::lengths() const {
  std::vector<double> out;
  out.reserve(clusters_.size());
  for (const Cluster& c : clusters_) out.push_back(c.length());
  return out;
}

std::pair<ChainRoadmap, Partition> Partition::from_lengths(const std::vector<double>& lengths,
                                                           double gap) {
  std::vector<double> coords;
  std::vector<Cluster> clusters;
  double x = 0.0;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (i > 0) x += gap;
    Cluster c;
    c.left = x;
    c.members.push_back(coords.size());
    coords.push_back(x);
    if (lengths[i] > 0.0) {
      x += lengths[i];
      c.members.push_back(coords.size());
      coords.push_back(x);
    }
    c.right = x;
    clusters.push_back(std::move(c));
  }
  return {ChainRoadmap(std::move(coords)), Partition(std::move(clusters))};
}

// Comparisons use `v - start <= rho` rather than `v <= start + rho`, so a rho
// taken as a coordinate difference reproduces that difference exactly.
Partition left_induced_partition(const ChainRoadmap& chain, double rho) {
  if (!(rho >= 0.0)) throw std::invalid_argument("left-induced length must be non-negative");
  std::vector<Cluster> clusters;
  const auto coords = chain.coordinates();
  std::size_t i = 0;
  while (i < coords.size()) {
    Cluster c;
    const double start = coords[i];
    c.left = start;
    while (i < coords.size() && coords[i] - start <= rho) {
      c.members.push_back(i);
      c.right = coords[i];
      ++i;
    }
    clusters.push_back(std::move(c));
  }
  return Partition(std::move(clusters));
}

std::size_t left_induced_cardinality(const ChainRoadmap& chain, double rho) {
  const auto coords = chain.coordinates();
  std::size_t count = 0;
  std::size_t i = 0;
  while (i < coords.size()) {
    const double start = coords[i];
    ++count;
    while (i < coords.size() && coords[i] - start <= rho) ++i;
  }
  return count;
}

Partition pad_partition(Partition partition, std::size_t m) {
  std::vector<Cluster> clusters = partition.clusters();
  if (clusters.size() > m) throw std::invalid_argument("partition has more clusters than slots");
  double park = 0.0;
  for (const Cluster& c : clusters) {
    if (!c.empty()) park = c.right;
  }
  while (clusters.size() < m) {
    Cluster c;
    c.left = c.right = park;
    clusters.push_back(std::move(c));
  }
  return Partition(std::move(clusters));
}

namespace {

void check_robot_count(const ChainRoadmap& chain, std::size_t m) {
  if (m == 0) throw std::invalid_argument("need at least one robot");
  if (m >= chain.size()) {
    throw InfeasibleError("m = " + std::to_string(m) + " robots for " +
                          std::to_string(chain.size()) +
                          " viewpoints: place one robot per viewpoint instead");
  }
}

}  // namespace

BisectionResult optimal_partition_bisect(const ChainRoadmap& chain, std::size_t m, double eps) {
  check_robot_count(chain, m);
  const double md = static_cast<double>(m);
  if (!(eps > 0.0) || !(eps < chain.length() / md)) {
    throw std::invalid_argument("tolerance must satisfy 0 < eps < v_n / m");
  }

  double a = 0.0;
  double b = 2.0 * chain.length() / md;
  Partition best = left_induced_partition(chain, b);
  if (best.size() > m) {
    throw std::logic_error("left-induced partition at 2 v_n / m exceeds m clusters");
  }

  BisectionReport report;
  report.tolerance = eps;
  report.iteration_bound =
      static_cast<int>(std::ceil(std::log2(2.0 * chain.length() / (eps * md))));

  // Stop once the bracket is within eps, so the returned dimension (at most
  // b) is within eps of the optimum, which lies in (a, b].
  while (b - a > eps) {
    const double rho = 0.5 * (a + b);
    if (rho <= a || rho >= b) break;  // bracket at floating-point resolution
    ++report.iterations;
    Partition candidate = left_induced_partition(chain, rho);
    if (candidate.size() > m) {
      a = rho;
    } else {
      best = std::move(candidate);
      b = rho;
    }
  }
  report.lower = a;
  report.upper = b;
  return {pad_partition(std::move(best), m), report};
}

Partition optimal_partition_exact(const ChainRoadmap& chain, std::size_t m) {
  check_robot_count(chain, m);
  const auto coords = chain.coordinates();
  std::vector<double> candidates{0.0};
  candidates.reserve(coords.size() * (coords.size() - 1) / 2 + 1);
  for (std::size_t i = 0; i < coords.size(); ++i) {
    for (std::size_t j = i + 1; j < coords.size(); ++j) candidates.push_back(coords[j] - coords[i]);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  // Cardinality is non-increasing in rho: binary search for the first
  // candidate that fits.
  auto it = std::partition_point(candidates.begin(), candidates.end(), [&](double rho) {
    return left_induced_cardinality(chain, rho) > m;
  });
  if (it == candidates.end()) throw std::logic_error("no feasible left-induced length");
  return pad_partition(left_induced_partition(chain, *it), m);
}

nlohmann::json to_json(const ChainRoadmap& chain, const Partition& partition,
                       std::optional<std::pair<double, double>> rho_interval) {
  nlohmann::json doc;
  nlohmann::json clusters = nlohmann::json::array();
  nlohmann::json spans = nlohmann::json::array();
  for (const Cluster& c : partition.clusters()) {
    nlohmann::json ids = nlohmann::json::array();
    for (std::size_t v : c.members) ids.push_back(chain.id(v));
    clusters.push_back(std::move(ids));
    spans.push_back({c.left, c.right});
  }
  doc["clusters"] = std::move(clusters);
  doc["spans"] = std::move(spans);
  doc["dimension"] = partition.dimension();
  if (rho_interval) doc["rho_interval"] = {rho_interval->first, rho_interval->second};
  return doc;
}

Partition partition_from_json(const ChainRoadmap& chain, const nlohmann::json& doc) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < chain.size(); ++i) index.emplace(chain.id(i), i);
  std::vector<Cluster> clusters;
  std::size_t next = 0;
  try {
    const auto& cj = doc.at("clusters");
    for (std::size_t k = 0; k < cj.size(); ++k) {
      Cluster c;
      for (const auto& id : cj[k]) {
        const auto it = index.find(id.get<std::string>());
        if (it == index.end()) throw std::invalid_argument("partition: unknown viewpoint '" + id.get<std::string>() + "'");
        if (it->second != next) throw std::invalid_argument("partition: clusters must cover the chain in order");
        c.members.push_back(next++);
      }
      if (!c.empty()) {
        c.left = chain.coordinate(c.members.front());
        c.right = chain.coordinate(c.members.back());
      } else if (doc.contains("spans")) {
        c.left = c.right = doc["spans"].at(k).at(0).get<double>();
      } else if (!clusters.empty()) {
        c.left = c.right = clusters.back().right;
      }
      clusters.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("partition document: ") + e.what());
  }
  if (next != chain.size()) throw std::invalid_argument("partition: clusters must cover the chain");
  return Partition(std::move(clusters));
}

}  // namespace patrol
