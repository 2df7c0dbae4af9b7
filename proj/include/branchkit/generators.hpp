#pragma once

#include <cstddef>
#include <vector>

#include "branchkit/graph.hpp"
#include "branchkit/rng.hpp"

namespace branchkit {

// Truncated Pareto degree model: density ζ d_L^ζ x^{-(ζ+1)} / (1 - (d_L/u)^ζ)
// on [d_L, u] with u = upper_bound.
struct ParetoConfig {
  double shape = 0;        // ζ
  double lower_bound = 0;  // d_L
  double upper_bound = 0;  // usually N_v - 1

  void validate() const;
};

// Each pair {i,j} is an edge independently with probability p.
Graph erdos_renyi(std::size_t n, double p, Seed seed);

// Barabási–Albert growth from an (m+1)-clique: every new vertex attaches m
// distinct edges to existing vertices with probability proportional to
// current degree. Requires n > m >= 1.
Graph preferential_attachment(std::size_t n, std::size_t m, Seed seed);

// Degrees drawn i.i.d. from the truncated Pareto law, rounded half-up, parity
// fixed, then wired through a configuration model; stub-pairing collisions
// (loops, parallel edges) are repaired by edge swaps so the realized degree
// sequence is preserved whenever repair succeeds.
Graph pareto_configuration(std::size_t n, const ParetoConfig& cfg, Seed seed);

// The rounded i.i.d. target degrees (after parity fix), before wiring.
// Exposed for distribution-level checks.
std::vector<VertexId> pareto_degree_sequence(std::size_t n, const ParetoConfig& cfg, Seed seed);

// Mean of the truncated Pareto distribution on [d_l, upper].
double truncated_pareto_mean(double zeta, double d_l, double upper);

// Inverse CDF at u in [0,1).
double truncated_pareto_quantile(double zeta, double d_l, double upper, double u);

// Solves truncated_pareto_mean(zeta, d_l, n-1) == target_mean_degree for d_l
// by bisection (1e-8 relative). Throws if no root exists in (0, n-1].
double solve_pareto_lower_bound(std::size_t n, double zeta, double target_mean_degree);

// Wires an explicit degree sequence (even sum required after internal parity
// fix is NOT applied here; callers pass an even-sum sequence).
Graph configuration_model(std::size_t n, std::vector<VertexId> degrees, Rng& rng);

}  // namespace branchkit
