#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "ftc/linalg.hpp"

namespace ftc {

/// Directed weight w_ij: unit `to` receives from unit `from`. Indices are 1-based.
struct UnitEdge {
  std::size_t to;
  std::size_t from;
  double weight;
};

/// Source (node 0) broadcast weight w_i0 into unit `to` (1-based).
struct SourceLink {
  std::size_t to;
  double weight;
};

/// Communication graph of m units plus a setpoint source. All matrices are m x m.
struct NetworkGraph {
  std::size_t m = 0;
  Matrix adjacency;     ///< A_m, zero diagonal
  Matrix source;        ///< A_0, diagonal source weights
  Matrix in_degree;     ///< D_m
  Matrix total_weight;  ///< W = D_m + A_0
  Matrix laplacian_m;   ///< L_m = D_m - A_m
  Matrix laplacian;     ///< L = L_m + A_0 = W - A_m
};

NetworkGraph build_graph(std::size_t m, const std::vector<UnitEdge>& unit_edges,
                         const std::vector<SourceLink>& source_weights);

/// Divides every incoming weight of unit i by its total in-weight w_i.
NetworkGraph normalize_weights(const NetworkGraph& g);

/// Breadth-first search from node 0 over positive weights.
bool check_source_reachability(const NetworkGraph& g);

/// All eigenvalues of L in the open right half-plane, i.e. -L Hurwitz.
bool is_positive_stable(const Matrix& laplacian);

enum class Topology { kStar, kCyclic, kPath };

Topology parse_topology(std::string_view name);
std::string_view topology_name(Topology t);

/// Benchmark topologies with raw (unnormalized) weights: star 1.0 from the source;
/// cyclic ring 0.3 both ways plus 0.4 from the source; path with source into unit 1
/// and a bidirectional chain of weight 1.0.
NetworkGraph named_topology(Topology t, std::size_t m);

}  // namespace ftc
