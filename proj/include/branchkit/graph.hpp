#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace branchkit {

using VertexId = std::uint32_t;
using Edge = std::pair<VertexId, VertexId>;
using EdgeList = std::vector<Edge>;

struct DegreeStats {
  std::uint64_t sum_d = 0;    // Σ d_i
  std::uint64_t sum_d2 = 0;   // Σ d_i²
  std::uint64_t sum_d3 = 0;   // Σ d_i³
  double mean_degree = 0.0;
};

// Immutable undirected simple graph on vertices 0..n-1. Adjacency is kept as
// sorted per-vertex neighbor ranges; the degree sequence is cached at
// construction. Safe to share across concurrent readers.
class Graph {
 public:
  Graph() = default;

  // Takes an arbitrary edge list: pairs are normalized to (min, max) and
  // duplicates collapsed. Self-loops and out-of-range endpoints throw.
  Graph(std::size_t num_vertices, EdgeList edges);

  std::size_t num_vertices() const { return n_; }
  std::size_t num_edges() const { return edges_.size(); }

  VertexId degree(VertexId v) const { return deg_[v]; }
  const std::vector<VertexId>& degree_sequence() const { return deg_; }

  // Edges sorted (min, max) lexicographically.
  const EdgeList& edges() const { return edges_; }

  std::span<const VertexId> neighbors(VertexId v) const {
    return {adj_.data() + offset_[v], offset_[v + 1] - offset_[v]};
  }

  bool has_edge(VertexId u, VertexId v) const;

  DegreeStats degree_stats() const;

  bool operator==(const Graph& other) const {
    return n_ == other.n_ && edges_ == other.edges_;
  }

 private:
  std::size_t n_ = 0;
  EdgeList edges_;
  std::vector<VertexId> deg_;
  std::vector<std::size_t> offset_;
  std::vector<VertexId> adj_;
};

// κ = (Σd²/N)/(Σd/N), or 0 for an edgeless graph.
double branching_factor(const Graph& g);

// |E| / (N(N-1)/2). Requires N ≥ 2.
double edge_density(const Graph& g);

// Σ_j d_j(d_j-1) / (N(N-1)(N-2)), the ordered-triple two-star density.
// Requires N ≥ 3.
double two_star_density(const Graph& g);

// Σ over ordered triples (i,j,l), all distinct, of (A_ij - a)(A_jl - a),
// evaluated in O(N + |E|) through per-vertex sums.
double centered_two_star_sum(const Graph& g, double alpha_hat);

// Observed graphs over one common vertex set.
struct ReplicateSet {
  std::size_t n = 0;
  std::vector<Graph> graphs;
};

}  // namespace branchkit
