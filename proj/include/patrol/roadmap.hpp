#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace patrol {

// Raised for malformed or invalid roadmap input.
class RoadmapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RoadmapKind { general, tree, chain };

std::string_view to_string(RoadmapKind kind);

struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
  double length = 0.0;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// A point on the roadmap: `offset` length units from `from` toward `to`
// along the edge joining them. A vertex is the point with from == to.
struct RoadmapPoint {
  std::size_t from = 0;
  std::size_t to = 0;
  double offset = 0.0;
  double edge_length = 0.0;

  static RoadmapPoint at_vertex(std::size_t v) { return {v, v, 0.0, 0.0}; }

  // Vertex this point coincides with, if any.
  std::optional<std::size_t> vertex() const;
  bool operator==(const RoadmapPoint& other) const;
};

// Undirected, connected, positively weighted graph of viewpoints.
// Immutable after construction; all-pairs shortest-path distances are
// computed once in the constructor.
class Roadmap {
 public:
  Roadmap(std::vector<std::string> ids, std::vector<Edge> edges,
          std::vector<std::optional<Point2>> xy = {},
          bool strict_triangle = true);

  std::size_t size() const { return ids_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::string& id(std::size_t v) const { return ids_.at(v); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::optional<Point2>& xy(std::size_t v) const { return xy_.at(v); }
  std::size_t index_of(std::string_view id) const;

  struct Neighbor {
    std::size_t vertex;
    std::size_t edge;
  };
  const std::vector<Neighbor>& neighbors(std::size_t v) const {
    return adjacency_.at(v);
  }
  std::optional<std::size_t> edge_between(std::size_t u, std::size_t v) const;

  double distance(std::size_t u, std::size_t v) const {
    return dist_[u * size() + v];
  }
  bool is_tree() const { return edges_.size() + 1 == size(); }

  // Triangle-inequality violations demoted to warnings when the roadmap was
  // built with strict_triangle = false.
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::vector<std::string> ids_;
  std::vector<Edge> edges_;
  std::vector<std::optional<Point2>> xy_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<double> dist_;
  std::vector<std::string> warnings_;
};

double shortest_path_distance(const Roadmap& g, std::string_view u,
                              std::string_view v);

// Longest over shortest edge length.
double edge_length_ratio(const Roadmap& g);

// Chain of viewpoints given by arc-length coordinates, v_1 = 0.
class ChainRoadmap {
 public:
  explicit ChainRoadmap(std::vector<double> coordinates,
                        std::vector<std::string> ids = {});

  std::size_t size() const { return coords_.size(); }
  double coordinate(std::size_t i) const { return coords_.at(i); }
  std::span<const double> coordinates() const { return coords_; }
  double length() const { return coords_.back(); }
  const std::string& id(std::size_t i) const { return ids_.at(i); }
  const std::vector<std::string>& ids() const { return ids_; }

  Roadmap to_roadmap() const;

 private:
  std::vector<double> coords_;
  std::vector<std::string> ids_;
};

struct LoadedRoadmap {
  RoadmapKind kind = RoadmapKind::general;
  Roadmap graph;
  std::optional<ChainRoadmap> chain;
};

struct LoadOptions {
  bool strict_triangle = true;
};

LoadedRoadmap load_roadmap(const nlohmann::json& doc, LoadOptions options = {});
LoadedRoadmap load_roadmap_file(const std::filesystem::path& path,
                                LoadOptions options = {});
nlohmann::json to_json(const LoadedRoadmap& roadmap);
nlohmann::json to_json(const ChainRoadmap& chain);

}  // namespace patrol
