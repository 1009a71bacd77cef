#include "ftc/graph.hpp"

#include <cmath>
#include <queue>
#include <set>
#include <string>
#include <utility>

#include "ftc/error.hpp"

namespace ftc {

namespace {

NetworkGraph assemble(std::size_t m, Matrix adjacency, Matrix source) {
  NetworkGraph g;
  g.m = m;
  g.adjacency = std::move(adjacency);
  g.source = std::move(source);
  g.in_degree = Matrix(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < m; ++j) d += g.adjacency(i, j);
    g.in_degree(i, i) = d;
  }
  g.total_weight = g.in_degree + g.source;
  g.laplacian_m = g.in_degree - g.adjacency;
  g.laplacian = g.laplacian_m + g.source;
  return g;
}

}  // namespace

NetworkGraph build_graph(std::size_t m, const std::vector<UnitEdge>& unit_edges,
                         const std::vector<SourceLink>& source_weights) {
  if (m == 0) throw Error(ErrorCode::kBadEdge, "graph needs at least one unit");
  Matrix adjacency(m, m);
  Matrix source(m, m);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& e : unit_edges) {
    const std::string tag = "edge (" + std::to_string(e.to) + "<-" + std::to_string(e.from) + ")";
    if (e.to < 1 || e.to > m || e.from < 1 || e.from > m) {
      throw Error(ErrorCode::kBadEdge, tag + " index out of range 1.." + std::to_string(m));
    }
    if (e.to == e.from) throw Error(ErrorCode::kBadEdge, tag + " self-loop");
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
      throw Error(ErrorCode::kBadEdge, tag + " negative or non-finite weight");
    }
    if (!seen.insert({e.to, e.from}).second) throw Error(ErrorCode::kBadEdge, tag + " duplicate");
    adjacency(e.to - 1, e.from - 1) = e.weight;
  }
  std::set<std::size_t> seen_src;
  for (const auto& s : source_weights) {
    const std::string tag = "source link (" + std::to_string(s.to) + "<-0)";
    if (s.to < 1 || s.to > m) throw Error(ErrorCode::kBadEdge, tag + " index out of range");
    if (!(s.weight >= 0.0) || !std::isfinite(s.weight)) {
      throw Error(ErrorCode::kBadEdge, tag + " negative or non-finite weight");
    }
    if (!seen_src.insert(s.to).second) throw Error(ErrorCode::kBadEdge, tag + " duplicate");
    source(s.to - 1, s.to - 1) = s.weight;
  }
  return assemble(m, std::move(adjacency), std::move(source));
}

NetworkGraph normalize_weights(const NetworkGraph& g) {
  Matrix adjacency = g.adjacency;
  Matrix source = g.source;
  for (std::size_t i = 0; i < g.m; ++i) {
    const double w = g.total_weight(i, i);
    if (!(w > 0.0)) {
      throw Error(ErrorCode::kIsolatedUnit, "unit " + std::to_string(i + 1) + " has no incoming weight");
    }
    for (std::size_t j = 0; j < g.m; ++j) adjacency(i, j) /= w;
    source(i, i) /= w;
  }
  return assemble(g.m, std::move(adjacency), std::move(source));
}

bool check_source_reachability(const NetworkGraph& g) {
  std::vector<bool> reached(g.m, false);
  std::queue<std::size_t> frontier;
  for (std::size_t i = 0; i < g.m; ++i) {
    if (g.source(i, i) > 0.0) {
      reached[i] = true;
      frontier.push(i);
    }
  }
  if (frontier.empty()) return false;
  while (!frontier.empty()) {
    const std::size_t j = frontier.front();
    frontier.pop();
    // Information flows j -> i whenever w_ij > 0.
    for (std::size_t i = 0; i < g.m; ++i) {
      if (!reached[i] && g.adjacency(i, j) > 0.0) {
        reached[i] = true;
        frontier.push(i);
      }
    }
  }
  for (bool r : reached)
    if (!r) return false;
  return true;
}

bool is_positive_stable(const Matrix& laplacian) {
  if (!laplacian.is_square()) return false;
  return is_hurwitz(-laplacian);
}

Topology parse_topology(std::string_view name) {
  if (name == "star") return Topology::kStar;
  if (name == "cyclic") return Topology::kCyclic;
  if (name == "path") return Topology::kPath;
  throw Error(ErrorCode::kValidationError, "unknown topology '" + std::string(name) + "'");
}

std::string_view topology_name(Topology t) {
  switch (t) {
    case Topology::kStar: return "star";
    case Topology::kCyclic: return "cyclic";
    case Topology::kPath: return "path";
  }
  return "?";
}

NetworkGraph named_topology(Topology t, std::size_t m) {
  std::vector<UnitEdge> edges;
  std::vector<SourceLink> sources;
  switch (t) {
    case Topology::kStar:
      for (std::size_t i = 1; i <= m; ++i) sources.push_back({i, 1.0});
      break;
    case Topology::kCyclic:
      if (m < 3) throw Error(ErrorCode::kValidationError, "cyclic topology needs m >= 3");
      for (std::size_t i = 1; i <= m; ++i) {
        const std::size_t next = i % m + 1;
        edges.push_back({next, i, 0.3});
        edges.push_back({i, next, 0.3});
        sources.push_back({i, 0.4});
      }
      break;
    case Topology::kPath:
      sources.push_back({1, 1.0});
      for (std::size_t i = 1; i < m; ++i) {
        edges.push_back({i + 1, i, 1.0});
        edges.push_back({i, i + 1, 1.0});
      }
      break;
  }
  return build_graph(m, edges, sources);
}

}  // namespace ftc
