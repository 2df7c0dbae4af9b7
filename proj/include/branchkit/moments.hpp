#pragma once

#include <optional>
#include <string>

#include "branchkit/graph.hpp"
#include "branchkit/noise.hpp"

namespace branchkit {

// Exact moments of the observed degree sums Y = Σ d̃_i and X = Σ d̃_i² under
// the per-pair noise model. All five moments are exact for any valid
// (alpha, beta); assumption4_holds reports whether the edge balance
// alpha |E^c| = beta |E| is satisfied (to 1e-9 |E|), which the asymptotic
// theory assumes.
struct MomentReport {
  double e_y = 0;
  double e_x = 0;
  double var_y = 0;
  double cov_xy = 0;
  double var_x = 0;
  double ratio = 0;       // e_x / e_y
  double kappa_true = 0;  // branching factor of the clean graph
  bool assumption4_holds = false;
};

MomentReport expected_moments(const Graph& g, const NoiseParams& p);

// e_x / e_y, the leading approximation to the mean of the observed branching
// factor. Throws if e_y <= 0.
double naive_kappa_expectation(const Graph& g, const NoiseParams& p);

// (2-α-β)·[α(N-1) + β - (α+β)κ], the first-order mean error of the observed
// branching factor. Requires the edge balance condition; throws otherwise.
double bias_leading_term(const Graph& g, const NoiseParams& p);

// Asymptotic regime of a generated family: overall density and degree
// heterogeneity.
struct RegimeSpec {
  enum class Density { sparse, dense };
  enum class Heterogeneity { homogeneous, pareto };

  Density density = Density::sparse;
  double dense_exponent = 0;  // c in (0,1); edge probability scales like n^{-c}
  Heterogeneity heterogeneity = Heterogeneity::homogeneous;
  double zeta = 0;  // Pareto shape, positive

  void validate() const;
};

// First-order prediction for the mean error of the observed branching factor
// by regime. Empty means asymptotically negligible relative to κ.
std::optional<double> regime_bias_prediction(double kappa, const NoiseParams& p,
                                             const RegimeSpec& regime);

// Order of the standard deviation of the observed branching factor, without
// constants: a human-readable formula in n plus its value at the given n.
struct OrderBound {
  std::string formula;
  double value = 0;
};

OrderBound variance_order_bound(std::size_t n, const RegimeSpec& regime);

}  // namespace branchkit
