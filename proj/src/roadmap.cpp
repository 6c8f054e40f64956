#include "patrol/roadmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace patrol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Relative slack used when comparing an edge against a detour.
bool strictly_shorter(double detour, double length) {
  return detour < length * (1.0 - 1e-12);
}

}  // namespace

std::string_view to_string(RoadmapKind kind) {
  switch (kind) {
    case RoadmapKind::chain:
      return "chain";
    case RoadmapKind::tree:
      return "tree";
    case RoadmapKind::general:
      break;
  }
  return "general";
}

std::optional<std::size_t> RoadmapPoint::vertex() const {
  if (from == to || offset <= 0.0) return from;
  if (offset >= edge_length) return to;
  return std::nullopt;
}

bool RoadmapPoint::operator==(const RoadmapPoint& other) const {
  auto a = vertex();
  auto b = other.vertex();
  if (a || b) return a == b;
  if (from == other.from && to == other.to) return offset == other.offset;
  if (from == other.to && to == other.from) {
    return offset == other.edge_length - other.offset;
  }
  return false;
}

Roadmap::Roadmap(std::vector<std::string> ids, std::vector<Edge> edges,
                 std::vector<std::optional<Point2>> xy, bool strict_triangle)
    : ids_(std::move(ids)), edges_(std::move(edges)), xy_(std::move(xy)) {
  const std::size_t n = ids_.size();
  if (n == 0) throw RoadmapError("roadmap has no vertices");
  if (xy_.empty()) xy_.resize(n);
  if (xy_.size() != n) throw RoadmapError("coordinate list size mismatch");

  for (std::size_t i = 0; i < n; ++i) {
    if (!index_.emplace(ids_[i], i).second) {
      throw RoadmapError("duplicate vertex id '" + ids_[i] + "'");
    }
  }

  adjacency_.resize(n);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const Edge& edge = edges_[e];
    if (edge.u >= n || edge.v >= n) throw RoadmapError("edge endpoint out of range");
    if (edge.u == edge.v) {
      throw RoadmapError("self-loop at vertex '" + ids_[edge.u] + "'");
    }
    if (!(edge.length > 0.0) || !std::isfinite(edge.length)) {
      throw RoadmapError("edge (" + ids_[edge.u] + ", " + ids_[edge.v] +
                         ") has non-positive length");
    }
    auto key = std::minmax(edge.u, edge.v);
    if (!seen.insert(key).second) {
      throw RoadmapError("duplicate edge (" + ids_[edge.u] + ", " + ids_[edge.v] + ")");
    }
    adjacency_[edge.u].push_back({edge.v, e});
    adjacency_[edge.v].push_back({edge.u, e});
  }
  for (auto& adj : adjacency_) {
    std::sort(adj.begin(), adj.end(),
              [](const Neighbor& a, const Neighbor& b) { return a.vertex < b.vertex; });
  }

  // Floyd-Warshall; roadmaps here are desk-sized.
  dist_.assign(n * n, kInf);
  for (std::size_t i = 0; i < n; ++i) dist_[i * n + i] = 0.0;
  for (const Edge& edge : edges_) {
    dist_[edge.u * n + edge.v] = std::min(dist_[edge.u * n + edge.v], edge.length);
    dist_[edge.v * n + edge.u] = std::min(dist_[edge.v * n + edge.u], edge.length);
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double dik = dist_[i * n + k];
      if (dik == kInf) continue;
      for (std::size_t j = 0; j < n; ++j) {
        const double via = dik + dist_[k * n + j];
        if (via < dist_[i * n + j]) dist_[i * n + j] = via;
      }
    }
  }
  for (std::size_t j = 1; j < n; ++j) {
    if (dist_[j] == kInf) {
      throw RoadmapError("roadmap is disconnected: '" + ids_[j] +
                         "' unreachable from '" + ids_[0] + "'");
    }
  }

  for (const Edge& edge : edges_) {
    if (!strictly_shorter(distance(edge.u, edge.v), edge.length)) continue;
    // Name the intermediate vertex of the best detour.
    std::size_t best = edge.u;
    double best_len = kInf;
    for (std::size_t w = 0; w < n; ++w) {
      if (w == edge.u || w == edge.v) continue;
      const double via = distance(edge.u, w) + distance(w, edge.v);
      if (via < best_len) {
        best_len = via;
        best = w;
      }
    }
    std::ostringstream msg;
    msg.precision(17);
    msg << "triangle inequality violated: edge (" << ids_[edge.u] << ", "
        << ids_[edge.v] << ") length " << edge.length << " exceeds route via '"
        << ids_[best] << "' of length " << best_len;
    if (strict_triangle) throw RoadmapError(msg.str());
    warnings_.push_back(msg.str());
  }
}

std::size_t Roadmap::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) throw RoadmapError("unknown vertex id '" + std::string(id) + "'");
  return it->second;
}

std::optional<std::size_t> Roadmap::edge_between(std::size_t u, std::size_t v) const {
  for (const Neighbor& nb : adjacency_.at(u)) {
    if (nb.vertex == v) return nb.edge;
  }
  return std::nullopt;
}

double shortest_path_distance(const Roadmap& g, std::string_view u, std::string_view v) {
  return g.distance(g.index_of(u), g.index_of(v));
}

double edge_length_ratio(const Roadmap& g) {
  if (g.edges().empty()) throw RoadmapError("edge length ratio of an edgeless roadmap");
  auto [lo, hi] = std::minmax_element(
      g.edges().begin(), g.edges().end(),
      [](const Edge& a, const Edge& b) { return a.length < b.length; });
  return hi->length / lo->length;
}

ChainRoadmap::ChainRoadmap(std::vector<double> coordinates, std::vector<std::string> ids)
    : coords_(std::move(coordinates)), ids_(std::move(ids)) {
  if (coords_.size() < 2) throw RoadmapError("a chain needs at least two viewpoints");
  if (coords_.front() != 0.0) throw RoadmapError("chain coordinates must start at 0");
  for (std::size_t i = 1; i < coords_.size(); ++i) {
    if (!std::isfinite(coords_[i]) || !(coords_[i] > coords_[i - 1])) {
      throw RoadmapError("chain coordinates must be strictly increasing (index " +
                         std::to_string(i) + ")");
    }
  }
  if (ids_.empty()) {
    ids_.reserve(coords_.size());
    for (std::size_t i = 0; i < coords_.size(); ++i) ids_.push_back("v" + std::to_string(i + 1));
  }
  if (ids_.size() != coords_.size()) throw RoadmapError("chain id list size mismatch");
}

Roadmap ChainRoadmap::to_roadmap() const {
  std::vector<Edge> edges;
  edges.reserve(size() - 1);
  for (std::size_t i = 0; i + 1 < size(); ++i) {
    edges.push_back({i, i + 1, coords_[i + 1] - coords_[i]});
  }
  return Roadmap(ids_, std::move(edges));
}

namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw RoadmapError(where + ": missing field '" + key + "'");
  }
  return obj.at(key);
}

double require_number(const json& value, const std::string& where) {
  if (!value.is_number()) throw RoadmapError(where + ": expected a number");
  return value.get<double>();
}

}  // namespace

LoadedRoadmap load_roadmap(const json& doc, LoadOptions options) {
  if (!doc.is_object()) throw RoadmapError("roadmap document must be a JSON object");
  const json& kind_field = require(doc, "kind", "roadmap");
  if (!kind_field.is_string()) throw RoadmapError("roadmap.kind: expected a string");
  const std::string kind_name = kind_field.get<std::string>();
  RoadmapKind kind;
  if (kind_name == "chain") {
    kind = RoadmapKind::chain;
  } else if (kind_name == "tree") {
    kind = RoadmapKind::tree;
  } else if (kind_name == "general") {
    kind = RoadmapKind::general;
  } else {
    throw RoadmapError("roadmap.kind: unknown kind '" + kind_name + "'");
  }

  const json& vertices = require(doc, "vertices", "roadmap");
  if (!vertices.is_array()) throw RoadmapError("roadmap.vertices: expected an array");
  std::vector<std::string> ids;
  std::vector<std::optional<Point2>> xy;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const std::string where = "roadmap.vertices[" + std::to_string(i) + "]";
    const json& id = require(vertices[i], "id", where);
    if (!id.is_string()) throw RoadmapError(where + ".id: expected a string");
    ids.push_back(id.get<std::string>());
    if (vertices[i].contains("xy")) {
      const json& p = vertices[i]["xy"];
      if (!p.is_array() || p.size() != 2) throw RoadmapError(where + ".xy: expected [x, y]");
      xy.push_back(Point2{require_number(p[0], where + ".xy[0]"),
                          require_number(p[1], where + ".xy[1]")});
    } else {
      xy.emplace_back();
    }
  }

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);
  auto lookup = [&](const json& value, const std::string& where) {
    if (!value.is_string()) throw RoadmapError(where + ": expected a vertex id string");
    auto it = index.find(value.get<std::string>());
    if (it == index.end()) {
      throw RoadmapError(where + ": unknown vertex id '" + value.get<std::string>() + "'");
    }
    return it->second;
  };

  if (kind == RoadmapKind::chain) {
    const json& coords = require(doc, "coordinates", "roadmap");
    if (!coords.is_array()) throw RoadmapError("roadmap.coordinates: expected an array");
    std::vector<double> values;
    for (std::size_t i = 0; i < coords.size(); ++i) {
      values.push_back(require_number(coords[i], "roadmap.coordinates[" + std::to_string(i) + "]"));
    }
    if (values.size() != ids.size()) {
      throw RoadmapError("roadmap.coordinates: expected one coordinate per vertex");
    }
    ChainRoadmap chain(std::move(values), ids);
    if (doc.contains("edges")) {
      // Optional, must describe exactly the consecutive chain edges.
      const json& edges = doc["edges"];
      if (!edges.is_array() || edges.size() + 1 != ids.size()) {
        throw RoadmapError("roadmap.edges: chain edges must join consecutive viewpoints");
      }
      for (std::size_t e = 0; e < edges.size(); ++e) {
        const std::string where = "roadmap.edges[" + std::to_string(e) + "]";
        auto u = lookup(require(edges[e], "u", where), where + ".u");
        auto v = lookup(require(edges[e], "v", where), where + ".v");
        if (std::max(u, v) != std::min(u, v) + 1) {
          throw RoadmapError(where + ": not a consecutive chain edge");
        }
      }
    }
    Roadmap graph(ids, [&] {
      std::vector<Edge> edges;
      for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
        edges.push_back({i, i + 1, chain.coordinate(i + 1) - chain.coordinate(i)});
      }
      return edges;
    }(), xy, options.strict_triangle);
    return LoadedRoadmap{kind, std::move(graph), std::move(chain)};
  }

  if (doc.contains("coordinates")) {
    throw RoadmapError("roadmap.coordinates: only allowed for kind 'chain'");
  }
  const json& edges_field = require(doc, "edges", "roadmap");
  if (!edges_field.is_array()) throw RoadmapError("roadmap.edges: expected an array");
  std::vector<Edge> edges;
  for (std::size_t e = 0; e < edges_field.size(); ++e) {
    const std::string where = "roadmap.edges[" + std::to_string(e) + "]";
    const json& item = edges_field[e];
    Edge edge;
    edge.u = lookup(require(item, "u", where), where + ".u");
    edge.v = lookup(require(item, "v", where), where + ".v");
    edge.length = require_number(require(item, "length", where), where + ".length");
    edges.push_back(edge);
  }
  Roadmap graph(std::move(ids), std::move(edges), std::move(xy), options.strict_triangle);
  if (kind == RoadmapKind::tree && !graph.is_tree()) {
    throw RoadmapError("roadmap declared as tree but has " + std::to_string(graph.edges().size()) +
                       " edges for " + std::to_string(graph.size()) + " vertices");
  }
  return LoadedRoadmap{kind, std::move(graph), std::nullopt};
}

LoadedRoadmap load_roadmap_file(const std::filesystem::path& path, LoadOptions options) {
  std::ifstream in(path);
  if (!in) throw RoadmapError("cannot open roadmap file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& err) {
    throw RoadmapError(path.string() + ": " + err.what());
  }
  try {
    return load_roadmap(doc, options);
  } catch (const RoadmapError& err) {
    throw RoadmapError(path.string() + ": " + err.what());
  }
}

nlohmann::json to_json(const LoadedRoadmap& roadmap) {
  if (roadmap.chain) {
    json doc = to_json(*roadmap.chain);
    for (std::size_t i = 0; i < roadmap.graph.size(); ++i) {
      if (const auto& p = roadmap.graph.xy(i)) doc["vertices"][i]["xy"] = {p->x, p->y};
    }
    return doc;
  }
  json doc;
  doc["kind"] = std::string(to_string(roadmap.kind));
  json vertices = json::array();
  for (std::size_t i = 0; i < roadmap.graph.size(); ++i) {
    json v = {{"id", roadmap.graph.id(i)}};
    if (const auto& p = roadmap.graph.xy(i)) v["xy"] = {p->x, p->y};
    vertices.push_back(std::move(v));
  }
  doc["vertices"] = std::move(vertices);
  json edges = json::array();
  for (const Edge& e : roadmap.graph.edges()) {
    edges.push_back({{"u", roadmap.graph.id(e.u)}, {"v", roadmap.graph.id(e.v)}, {"length", e.length}});
  }
  doc["edges"] = std::move(edges);
  return doc;
}

nlohmann::json to_json(const ChainRoadmap& chain) {
  json doc;
  doc["kind"] = "chain";
  json vertices = json::array();
  for (const auto& id : chain.ids()) vertices.push_back({{"id", id}});
  doc["vertices"] = std::move(vertices);
  doc["coordinates"] = std::vector<double>(chain.coordinates().begin(), chain.coordinates().end());
  return doc;
}

}  // namespace patrol
