#include "branchkit/graph.hpp"

#include <algorithm>
#include <stdexcept>

namespace branchkit {

Graph::Graph(std::size_t num_vertices, EdgeList edges) : n_(num_vertices) {
  for (auto& [u, v] : edges) {
    if (u == v) throw std::invalid_argument("Graph: self-loop " + std::to_string(u));
    if (u >= n_ || v >= n_) throw std::invalid_argument("Graph: vertex out of range");
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);

  deg_.assign(n_, 0);
  for (const auto& [u, v] : edges_) {
    ++deg_[u];
    ++deg_[v];
  }
  offset_.assign(n_ + 1, 0);
  for (std::size_t v = 0; v < n_; ++v) offset_[v + 1] = offset_[v] + deg_[v];
  adj_.resize(2 * edges_.size());
  std::vector<std::size_t> cursor(offset_.begin(), offset_.end() - 1);
  for (const auto& [u, v] : edges_) {
    adj_[cursor[u]++] = v;
    adj_[cursor[v]++] = u;
  }
  for (std::size_t v = 0; v < n_; ++v)
    std::sort(adj_.begin() + offset_[v], adj_.begin() + offset_[v + 1]);
}

bool Graph::has_edge(VertexId u, VertexId v) const {
  if (u == v) return false;
  if (deg_[u] > deg_[v]) std::swap(u, v);
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

DegreeStats Graph::degree_stats() const {
  DegreeStats s;
  for (VertexId d : deg_) {
    const std::uint64_t dd = d;
    s.sum_d += dd;
    s.sum_d2 += dd * dd;
    s.sum_d3 += dd * dd * dd;
  }
  s.mean_degree = n_ > 0 ? static_cast<double>(s.sum_d) / static_cast<double>(n_) : 0.0;
  return s;
}

double branching_factor(const Graph& g) {
  const DegreeStats s = g.degree_stats();
  if (s.sum_d == 0) return 0.0;
  return static_cast<double>(s.sum_d2) / static_cast<double>(s.sum_d);
}

double edge_density(const Graph& g) {
  const auto n = g.num_vertices();
  if (n < 2) throw std::invalid_argument("edge_density: need at least 2 vertices");
  return static_cast<double>(g.num_edges()) /
         (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

double two_star_density(const Graph& g) {
  const auto n = g.num_vertices();
  if (n < 3) throw std::invalid_argument("two_star_density: need at least 3 vertices");
  std::uint64_t two_stars = 0;  // Σ d(d-1) counts ordered (i,j,l) two-stars
  for (VertexId d : g.degree_sequence()) two_stars += std::uint64_t(d) * (d - (d > 0));
  return static_cast<double>(two_stars) /
         (static_cast<double>(n) * static_cast<double>(n - 1) * static_cast<double>(n - 2));
}

double centered_two_star_sum(const Graph& g, double alpha_hat) {
  // Middle vertex j contributes s_j² - q_j with s_j = Σ_{i≠j}(A_ij - a)
  // and q_j = Σ_{i≠j}(A_ij - a)².
  const double n1 = static_cast<double>(g.num_vertices()) - 1.0;
  const double a = alpha_hat;
  double total = 0.0;
  for (VertexId d : g.degree_sequence()) {
    const double dd = d;
    const double s = dd - a * n1;
    const double q = dd * (1.0 - a) * (1.0 - a) + (n1 - dd) * a * a;
    total += s * s - q;
  }
  return total;
}

}  // namespace branchkit
