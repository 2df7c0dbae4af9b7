#include "branchkit/moments.hpp"

#include <cmath>
#include <stdexcept>

#include "branchkit/pair_index.hpp"

namespace branchkit {

namespace {

// First four raw moments of d̃_i = Bin(n-1-d_i, α) + Bin(d_i, 1-β), via
// cumulants (which add across the independent binomials).
struct VertexMoments {
  double m1, m2, m3, m4;
};

void binomial_cumulants(double m, double p, double c[4]) {
  const double q = 1.0 - p;
  c[0] += m * p;
  c[1] += m * p * q;
  c[2] += m * p * q * (1.0 - 2.0 * p);
  c[3] += m * p * q * (1.0 - 6.0 * p * q);
}

VertexMoments vertex_moments(double non_edges, double edges, double alpha, double beta) {
  double c[4] = {0, 0, 0, 0};
  binomial_cumulants(non_edges, alpha, c);
  binomial_cumulants(edges, 1.0 - beta, c);
  VertexMoments vm;
  vm.m1 = c[0];
  vm.m2 = c[1] + c[0] * c[0];
  vm.m3 = c[2] + 3.0 * c[1] * c[0] + c[0] * c[0] * c[0];
  vm.m4 = c[3] + 4.0 * c[2] * c[0] + 3.0 * c[1] * c[1] + 6.0 * c[1] * c[0] * c[0] +
          c[0] * c[0] * c[0] * c[0];
  return vm;
}

bool assumption4(const Graph& g, const NoiseParams& p) {
  const double total = static_cast<double>(pair_count(g.num_vertices()));
  const double e = static_cast<double>(g.num_edges());
  return std::abs(p.alpha * (total - e) - p.beta * e) <= 1e-9 * std::max(e, 1.0);
}

}  // namespace

MomentReport expected_moments(const Graph& g, const NoiseParams& p) {
  p.validate();
  const std::size_t n = g.num_vertices();
  if (n < 3) throw std::invalid_argument("expected_moments: need at least 3 vertices");
  const double alpha = p.alpha, beta = p.beta;
  const double n1 = static_cast<double>(n - 1);

  // Per-vertex contributions. Pairs couple d̃_i and d̃_j only through the one
  // shared indicator B_ij, so cross terms reduce to Var(B_ij) = v weighted by
  // f_i = 1 + 2(m1_i - p_ij):
  //   Cov(d̃_i, d̃_j)   = v
  //   Cov(d̃_i², d̃_j)  = v f_i
  //   Cov(d̃_i², d̃_j²) = v f_i f_j
  double sum_var = 0, sum_cov3 = 0, sum_var4 = 0;
  double e_y = 0, e_x = 0;
  std::vector<double> m1(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = g.degree(static_cast<VertexId>(i));
    const VertexMoments vm = vertex_moments(n1 - d, d, alpha, beta);
    m1[i] = vm.m1;
    e_y += vm.m1;
    e_x += vm.m2;
    sum_var += vm.m2 - vm.m1 * vm.m1;
    sum_cov3 += vm.m3 - vm.m2 * vm.m1;
    sum_var4 += vm.m4 - vm.m2 * vm.m2;
  }

  const double v_non = alpha * (1.0 - alpha);
  const double v_edge = beta * (1.0 - beta);
  const double total_pairs = static_cast<double>(pair_count(n));
  const double e = static_cast<double>(g.num_edges());

  // g_i / h_i are the f_i weights on non-edge and edge pairs respectively.
  double sum_g = 0, sum_g2 = 0, sum_g_nond = 0, sum_h_d = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = g.degree(static_cast<VertexId>(i));
    const double gi = 1.0 + 2.0 * (m1[i] - alpha);
    const double hi = 1.0 + 2.0 * (m1[i] - (1.0 - beta));
    sum_g += gi;
    sum_g2 += gi * gi;
    sum_g_nond += gi * (n1 - d);
    sum_h_d += hi * d;
  }
  double edge_gg = 0, edge_hh = 0;
  for (const auto& [u, v] : g.edges()) {
    const double gu = 1.0 + 2.0 * (m1[u] - alpha);
    const double gv = 1.0 + 2.0 * (m1[v] - alpha);
    const double hu = 1.0 + 2.0 * (m1[u] - (1.0 - beta));
    const double hv = 1.0 + 2.0 * (m1[v] - (1.0 - beta));
    edge_gg += gu * gv;
    edge_hh += hu * hv;
  }
  const double nonedge_gg = 0.5 * (sum_g * sum_g - sum_g2) - edge_gg;

  MomentReport r;
  r.e_y = e_y;
  r.e_x = e_x;
  r.var_y = sum_var + 2.0 * (v_non * (total_pairs - e) + v_edge * e);
  r.cov_xy = sum_cov3 + v_non * sum_g_nond + v_edge * sum_h_d;
  r.var_x = sum_var4 + 2.0 * (v_non * nonedge_gg + v_edge * edge_hh);
  r.ratio = e_y > 0 ? e_x / e_y : 0.0;
  r.kappa_true = branching_factor(g);
  r.assumption4_holds = assumption4(g, p);
  return r;
}

double naive_kappa_expectation(const Graph& g, const NoiseParams& p) {
  const MomentReport r = expected_moments(g, p);
  if (r.e_y <= 0) throw std::domain_error("naive_kappa_expectation: E[Y] must be positive");
  return r.e_x / r.e_y;
}

double bias_leading_term(const Graph& g, const NoiseParams& p) {
  p.validate();
  if (!assumption4(g, p))
    throw std::domain_error("bias_leading_term: edge balance alpha|E^c| = beta|E| required");
  const double kappa = branching_factor(g);
  const double n1 = static_cast<double>(g.num_vertices()) - 1.0;
  return (2.0 - p.alpha - p.beta) *
         (p.alpha * n1 + p.beta - (p.alpha + p.beta) * kappa);
}

void RegimeSpec::validate() const {
  if (density == Density::dense && !(dense_exponent > 0.0 && dense_exponent < 1.0))
    throw std::invalid_argument("RegimeSpec: dense exponent must lie in (0,1)");
  if (heterogeneity == Heterogeneity::pareto && !(zeta > 0.0))
    throw std::invalid_argument("RegimeSpec: pareto shape must be positive");
}

std::optional<double> regime_bias_prediction(double kappa, const NoiseParams& p,
                                             const RegimeSpec& regime) {
  regime.validate();
  if (regime.heterogeneity == RegimeSpec::Heterogeneity::homogeneous) return std::nullopt;
  const double scale = -p.beta * (2.0 - p.alpha - p.beta) * kappa;
  if (regime.zeta <= 2.0) return scale;
  return scale / ((regime.zeta - 1.0) * (regime.zeta - 1.0));
}

OrderBound variance_order_bound(std::size_t n, const RegimeSpec& regime) {
  regime.validate();
  const double nd = static_cast<double>(n);
  const double ln = std::log(nd);
  const bool sparse = regime.density == RegimeSpec::Density::sparse;
  const double c = regime.dense_exponent;

  if (regime.heterogeneity == RegimeSpec::Heterogeneity::homogeneous) {
    if (sparse) return {"(log n / n)^(1/2)", std::sqrt(ln / nd)};
    return {"n^((c-1)/2)", std::pow(nd, (c - 1.0) / 2.0)};
  }
  const double zeta = regime.zeta;
  if (sparse) {
    if (zeta < 1.0) return {"n / log n", nd / ln};
    if (zeta == 1.0) return {"n / log^2 n", nd / (ln * ln)};
    if (zeta < 2.5) return {"(n / log n)^(2-zeta)", std::pow(nd / ln, 2.0 - zeta)};
    return {"(log n / n)^(1/2)", std::sqrt(ln / nd)};
  }
  if (zeta < 1.0) return {"n^(1-c)", std::pow(nd, 1.0 - c)};
  if (zeta == 1.0) return {"n^(1-c) / log n", std::pow(nd, 1.0 - c) / ln};
  if (zeta < 2.5) return {"n^((2-zeta)(1-c))", std::pow(nd, (2.0 - zeta) * (1.0 - c))};
  return {"n^((c-1)/2)", std::pow(nd, (c - 1.0) / 2.0)};
}

}  // namespace branchkit
