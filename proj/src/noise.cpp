#include "branchkit/noise.hpp"

#include <stdexcept>

#include "branchkit/pair_index.hpp"

namespace branchkit {

void NoiseParams::validate() const {
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("NoiseParams: alpha outside [0,1]");
  if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("NoiseParams: beta outside [0,1]");
}

namespace {

// Visits every pair {i,j} selected with probability p among all N(N-1)/2
// pairs, in index order.
template <typename Fn>
void sample_pairs(std::size_t n, double p, Rng& rng, Fn&& fn) {
  if (p <= 0.0 || n < 2) return;
  const std::uint64_t total = pair_count(n);
  if (p >= 1.0) {
    for (std::uint64_t t = 0; t < total; ++t) fn(pair_from_index(n, t));
    return;
  }
  std::uint64_t t = rng.geometric_skip(p);
  while (t < total) {
    fn(pair_from_index(n, t));
    t += 1 + rng.geometric_skip(p);
  }
}

}  // namespace

Graph perturb(const Graph& truth, const NoiseParams& params, Seed seed) {
  params.validate();
  Rng rng(seed);
  const std::size_t n = truth.num_vertices();
  EdgeList observed;
  observed.reserve(truth.num_edges() + 16);
  for (const auto& e : truth.edges())
    if (!rng.bernoulli(params.beta)) observed.push_back(e);
  sample_pairs(n, params.alpha, rng, [&](Edge e) {
    if (!truth.has_edge(e.first, e.second)) observed.push_back(e);
  });
  return Graph(n, std::move(observed));
}

ReplicateSet observe_replicates(const Graph& truth, const NoiseParams& params, Seed seed,
                                std::size_t k) {
  ReplicateSet out;
  out.n = truth.num_vertices();
  out.graphs.reserve(k);
  for (std::size_t i = 0; i < k; ++i)
    out.graphs.push_back(perturb(truth, params, seed.derive(i)));
  return out;
}

double edge_unbiased_alpha(const Graph& truth, double beta) {
  if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("edge_unbiased_alpha: beta outside [0,1]");
  const std::uint64_t total = pair_count(truth.num_vertices());
  const std::uint64_t e = truth.num_edges();
  if (total == e) throw std::domain_error("edge_unbiased_alpha: complete graph has no non-edges");
  const double alpha = beta * static_cast<double>(e) / static_cast<double>(total - e);
  if (alpha > 1.0)
    throw std::domain_error(
        "edge_unbiased_alpha: graph too dense, balance needs alpha > 1");
  return alpha;
}

NoisyDegreeSums perturb_degree_sums(const Graph& truth, const NoiseParams& params, Rng& rng) {
  params.validate();
  const std::size_t n = truth.num_vertices();
  std::vector<VertexId> deg = truth.degree_sequence();
  if (params.beta > 0.0)
    for (const auto& [u, v] : truth.edges())
      if (rng.bernoulli(params.beta)) {
        --deg[u];
        --deg[v];
      }
  sample_pairs(n, params.alpha, rng, [&](Edge e) {
    if (!truth.has_edge(e.first, e.second)) {
      ++deg[e.first];
      ++deg[e.second];
    }
  });
  NoisyDegreeSums sums;
  for (VertexId d : deg) {
    sums.sum_d += d;
    sums.sum_d2 += static_cast<std::uint64_t>(d) * d;
  }
  return sums;
}

}  // namespace branchkit
