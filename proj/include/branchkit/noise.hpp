#pragma once

#include <cstddef>

#include "branchkit/graph.hpp"
#include "branchkit/rng.hpp"

namespace branchkit {

// Independent per-pair observation errors: a non-edge is reported with
// probability alpha, a true edge is missed with probability beta.
struct NoiseParams {
  double alpha = 0;  // false-positive rate on the N(N-1)/2 - |E| non-edges
  double beta = 0;   // false-negative rate on the |E| true edges

  void validate() const;
};

// One noisy observation of the true graph.
Graph perturb(const Graph& truth, const NoiseParams& params, Seed seed);

// k independent observations, one derived stream per replicate. Replicate i
// uses seed.derive(i), so any replicate can be regenerated in isolation.
ReplicateSet observe_replicates(const Graph& truth, const NoiseParams& params, Seed seed,
                                std::size_t k);

// The alpha that balances expected spurious and missed edges for this graph:
// alpha |E^c| = beta |E|. Throws if the graph is so dense that no alpha in
// [0,1] satisfies the balance.
double edge_unbiased_alpha(const Graph& truth, double beta);

// Degree-power sums of one noisy observation, without building the Graph.
// Used by sampling-based checks where only Σ d̃ and Σ d̃² matter.
struct NoisyDegreeSums {
  std::uint64_t sum_d = 0;
  std::uint64_t sum_d2 = 0;
};
NoisyDegreeSums perturb_degree_sums(const Graph& truth, const NoiseParams& params, Rng& rng);

}  // namespace branchkit
