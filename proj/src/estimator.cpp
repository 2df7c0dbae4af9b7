#include "branchkit/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "branchkit/pair_index.hpp"
#include "json.hpp"

namespace branchkit {

namespace {

// The bootstrap statistics carry a sqrt(2/(N(N-1))) scale, so the assembled
// matrix estimates the covariance of the pair-count-normalized statistics.
// Dividing by the pair count converts back to the variance of kappa_hat
// itself; frozen by the coverage regression test.
double variance_scale(std::size_t n) {
  return 2.0 / (static_cast<double>(n) * static_cast<double>(n - 1));
}

double z_quantile(double level) {
  boost::math::normal_distribution<double> nd;
  return boost::math::quantile(nd, 0.5 * (1.0 + level));
}

std::uint64_t intersection_size(const EdgeList& a, const EdgeList& b) {
  std::uint64_t count = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib)
      ++ia;
    else if (*ib < *ia)
      ++ib;
    else {
      ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

}  // namespace

void EstimatorConfig::validate() const {
  if (!(epsilon > 0)) throw std::invalid_argument("EstimatorConfig: epsilon must be positive");
  if (max_iterations < 1)
    throw std::invalid_argument("EstimatorConfig: max_iterations must be >= 1");
  if (n_bootstrap < 2) throw std::invalid_argument("EstimatorConfig: n_bootstrap must be >= 2");
  if (!(confidence_level > 0.0 && confidence_level < 1.0))
    throw std::invalid_argument("EstimatorConfig: confidence_level outside (0,1)");
  if (alpha0 && (*alpha0 < 0.0 || *alpha0 > 1.0))
    throw std::invalid_argument("EstimatorConfig: alpha0 outside [0,1]");
}

UStats u_stats(const ReplicateSet& reps) {
  if (reps.graphs.size() < 3)
    throw estimation_error(EstimationErrorKind::bad_input,
                           "u_stats: three replicates required");
  const std::size_t n = reps.n;
  for (const Graph& g : reps.graphs)
    if (g.num_vertices() != n)
      throw estimation_error(EstimationErrorKind::bad_input,
                             "u_stats: replicates disagree on vertex count");
  if (n < 3)
    throw estimation_error(EstimationErrorKind::bad_input, "u_stats: need at least 3 vertices");

  const double pairs = static_cast<double>(pair_count(n));
  const EdgeList& e1 = reps.graphs[0].edges();
  const EdgeList& e2 = reps.graphs[1].edges();
  const EdgeList& e3 = reps.graphs[2].edges();

  UStats us;
  us.u1_hat = static_cast<double>(e1.size()) / pairs;

  const std::uint64_t sym_diff = e1.size() + e2.size() - 2 * intersection_size(e1, e2);
  us.u2_hat = static_cast<double>(sym_diff) / (2.0 * pairs);

  // Pairs linked in exactly one replicate: pool the three sorted edge lists
  // and count runs of length one.
  EdgeList pooled;
  pooled.reserve(e1.size() + e2.size() + e3.size());
  pooled.insert(pooled.end(), e1.begin(), e1.end());
  pooled.insert(pooled.end(), e2.begin(), e2.end());
  pooled.insert(pooled.end(), e3.begin(), e3.end());
  std::sort(pooled.begin(), pooled.end());
  std::uint64_t exactly_one = 0;
  for (std::size_t i = 0; i < pooled.size();) {
    std::size_t j = i + 1;
    while (j < pooled.size() && pooled[j] == pooled[i]) ++j;
    if (j - i == 1) ++exactly_one;
    i = j;
  }
  us.u3_hat = static_cast<double>(exactly_one) / (3.0 * pairs);
  return us;
}

FixedPoint solve_fixed_point(const UStats& us, const EstimatorConfig& cfg) {
  cfg.validate();
  const double u1 = us.u1_hat, u2 = us.u2_hat, u3 = us.u3_hat;
  double alpha = cfg.alpha0.value_or(u2);
  FixedPoint fp;
  double beta = 0, delta = 0;
  for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
    const double a0 = alpha;
    if (std::abs(u1 - a0) < 1e-12)
      throw estimation_error(EstimationErrorKind::singular_iterate,
                             "solve_fixed_point: iterate hit u1");
    const double ddenom = u1 - u2 - 2.0 * u1 * a0 + a0 * a0;
    if (std::abs(ddenom) < 1e-14)
      throw estimation_error(EstimationErrorKind::singular_iterate,
                             "solve_fixed_point: density denominator vanished");
    beta = (u2 - a0 + u1 * a0) / (u1 - a0);
    delta = (u1 - a0) * (u1 - a0) / ddenom;
    if (std::abs(1.0 - delta) < 1e-14)
      throw estimation_error(EstimationErrorKind::singular_iterate,
                             "solve_fixed_point: delta iterate hit 1");
    alpha = (u3 - delta * beta * beta * (1.0 - beta)) /
            ((1.0 - delta) * (1.0 - a0) * (1.0 - a0));
    fp.iterations = it + 1;
    if (std::abs(alpha - a0) <= cfg.epsilon) {
      fp.converged = true;
      break;
    }
  }
  if (!fp.converged)
    throw estimation_error(EstimationErrorKind::divergence,
                           "solve_fixed_point: no convergence in " +
                               std::to_string(cfg.max_iterations) + " iterations");
  // Transient excursions outside [0,1] are normal for moment estimators;
  // only a clearly out-of-range final value is rejected.
  const double slack = 0.05;
  for (double v : {alpha, beta, delta})
    if (v < -slack || v > 1.0 + slack)
      throw estimation_error(EstimationErrorKind::invalid_region,
                             "solve_fixed_point: final estimate outside [-0.05, 1.05]");
  fp.alpha_hat = alpha;
  fp.beta_hat = beta;
  fp.delta_hat = delta;
  return fp;
}

KappaEstimate kappa_mme(const ReplicateSet& reps, const EstimatorConfig& cfg) {
  const UStats us = u_stats(reps);
  const FixedPoint fp = solve_fixed_point(us, cfg);
  KappaEstimate est;
  est.n = reps.n;
  est.alpha_hat = fp.alpha_hat;
  est.beta_hat = fp.beta_hat;
  est.delta_hat = fp.delta_hat;
  est.iterations = fp.iterations;
  est.converged = fp.converged;
  est.k3_hat = 1.0 - fp.alpha_hat - fp.beta_hat;
  if (!(est.k3_hat > 0))
    throw estimation_error(EstimationErrorKind::invalid_region,
                           "kappa_mme: 1 - alpha_hat - beta_hat must be positive");
  if (reps.graphs.size() > 3)
    est.warnings.push_back("replicates beyond the first three are ignored");

  const Graph& a = reps.graphs[0];
  const double n = static_cast<double>(reps.n);
  est.c1_hat = (us.u1_hat - est.alpha_hat) / est.k3_hat;
  est.c2_hat = centered_two_star_sum(a, est.alpha_hat) /
               (est.k3_hat * est.k3_hat * n * (n - 1.0) * (n - 2.0));
  if (!(est.c1_hat > 0))
    throw estimation_error(EstimationErrorKind::degenerate_density,
                           "kappa_mme: corrected edge density is not positive");
  est.kappa_hat = (n - 2.0) * est.c2_hat / est.c1_hat + 1.0;
  return est;
}

namespace {

struct PairSelection {
  double count = 0;      // selected pairs
  double weight_s = 0;   // Σ over selected pairs of (s_u + s_v)
};

// Independent Bernoulli(p) selection over the edge list, accumulating the
// count and the s-weight of selected edges.
PairSelection select_edges(const Graph& g, const std::vector<double>& s, double p, Rng& rng,
                           double total_count, double total_weight) {
  PairSelection sel;
  const bool complement = p > 0.5;
  const double q = complement ? 1.0 - p : p;
  const EdgeList& edges = g.edges();
  if (q > 0.0) {
    std::uint64_t t = rng.geometric_skip(q);
    while (t < edges.size()) {
      const auto& [u, v] = edges[t];
      sel.count += 1.0;
      sel.weight_s += s[u] + s[v];
      t += 1 + rng.geometric_skip(q);
    }
  }
  if (complement) {
    sel.count = total_count - sel.count;
    sel.weight_s = total_weight - sel.weight_s;
  }
  return sel;
}

// Independent Bernoulli(p) selection over non-edge pairs: skip through all
// pair indices and discard hits that are edges of g.
PairSelection select_non_edges(const Graph& g, const std::vector<double>& s, double p, Rng& rng,
                               double total_count, double total_weight) {
  PairSelection sel;
  const bool complement = p > 0.5;
  const double q = complement ? 1.0 - p : p;
  const std::uint64_t total = pair_count(g.num_vertices());
  if (q > 0.0) {
    std::uint64_t t = rng.geometric_skip(q);
    while (t < total) {
      const auto [u, v] = pair_from_index(g.num_vertices(), t);
      if (!g.has_edge(u, v)) {
        sel.count += 1.0;
        sel.weight_s += s[u] + s[v];
      }
      t += 1 + rng.geometric_skip(q);
    }
  }
  if (complement) {
    sel.count = total_count - sel.count;
    sel.weight_s = total_weight - sel.weight_s;
  }
  return sel;
}

void mat2_add(Mat2& a, const Mat2& b) {
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) a[i][j] += b[i][j];
}

Mat2 mul_23_32(const Mat23& a, const Mat23& b) {
  // a · bᵀ
  Mat2 out{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 3; ++k) out[i][j] += a[i][k] * b[j][k];
  return out;
}

Mat23 mul_23_33(const Mat23& a, const Mat3& b) {
  Mat23 out{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) out[i][j] += a[i][k] * b[k][j];
  return out;
}

Mat2 mul_22_22(const Mat2& a, const Mat2& b) {
  Mat2 out{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) out[i][j] += a[i][k] * b[k][j];
  return out;
}

Mat2 transpose(const Mat2& a) { return {{{a[0][0], a[1][0]}, {a[0][1], a[1][1]}}}; }

}  // namespace

std::pair<double, VarianceWorkspace> kappa_variance(const ReplicateSet& reps,
                                                    const KappaEstimate& est,
                                                    const EstimatorConfig& cfg, Seed seed) {
  cfg.validate();
  if (!(est.k3_hat > 0))
    throw estimation_error(EstimationErrorKind::invalid_region,
                           "kappa_variance: k3_hat must be positive");
  const Graph& a = reps.graphs[0];
  const std::size_t n = reps.n;
  const double nd = static_cast<double>(n);
  const double alpha = est.alpha_hat, beta = est.beta_hat, delta = est.delta_hat;
  const double k3 = est.k3_hat;

  VarianceWorkspace ws;
  ws.k1_hat = alpha * (1.0 - alpha);
  ws.k2_hat = beta * (1.0 - beta);
  ws.k3_hat = k3;
  ws.k4_hat = beta - alpha;

  // Resampling law: each pair keeps its observed value with probability xi1,
  // is forced to 1 with probability xi2, forced to 0 otherwise.
  if (std::abs(alpha - beta) < cfg.epsilon) {
    ws.xi2 = alpha;
    ws.xi1 = 1.0 - 2.0 * ws.xi2;
  } else {
    double r1 = 1.0 - 4.0 * alpha * (1.0 - beta);
    double r2 = 1.0 - 4.0 * beta * (1.0 - alpha);
    if (r1 < 0.0 || r2 < 0.0) {
      ws.warnings.push_back("resampling radicand negative; clamped to zero");
      r1 = std::max(r1, 0.0);
      r2 = std::max(r2, 0.0);
    }
    ws.t1 = std::sqrt(r1);
    ws.t2 = std::sqrt(r2);
    if (beta > alpha) {
      ws.xi2 = (1.0 - ws.t1) / 2.0;
      ws.xi1 = (ws.t1 + ws.t2 < 0.5) ? (ws.t1 + ws.t2) / 2.0 : (ws.t1 - ws.t2) / 2.0;
    } else {
      ws.xi2 = (1.0 + ws.t1) / 2.0;
      ws.xi1 = (ws.t2 - ws.t1) / 2.0;
    }
  }
  if (ws.xi1 < 0.0 || ws.xi2 < 0.0 || ws.xi1 + ws.xi2 > 1.0) {
    ws.warnings.push_back("resampling law clamped into the simplex");
    ws.xi1 = std::clamp(ws.xi1, 0.0, 1.0);
    ws.xi2 = std::clamp(ws.xi2, 0.0, 1.0);
    if (ws.xi1 + ws.xi2 > 1.0) ws.xi1 = 1.0 - ws.xi2;
  }

  const double p_edge = ws.xi1 + ws.xi2;  // P(resampled value = 1 | observed 1)
  const double p_non = ws.xi2;            // P(resampled value = 1 | observed 0)
  const double m_edges = static_cast<double>(a.num_edges());
  const double m_non = static_cast<double>(pair_count(n)) - m_edges;

  // s_j = Σ_{l≠j}(A_jl - alpha); the resampled statistics reduce to sums of
  // s-weights over the randomly selected pairs.
  std::vector<double> s(n);
  double base_rs = 0, sum_s_d = 0, sum_s_nond = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = a.degree(static_cast<VertexId>(j));
    s[j] = d - alpha * (nd - 1.0);
    base_rs += -(d * p_edge + (nd - 1.0 - d) * p_non) * s[j];
    sum_s_d += s[j] * d;
    sum_s_nond += s[j] * (nd - 1.0 - d);
  }

  const double scale1 = (1.0 / k3) * std::sqrt(2.0 / (nd * (nd - 1.0)));
  const double scale2 =
      (1.0 / (k3 * k3 * (nd - 2.0))) * std::sqrt(1.0 / (2.0 * nd * (nd - 1.0)));

  ws.s_samples.reserve(cfg.n_bootstrap);
  double mean1 = 0, mean2 = 0;
  for (std::size_t b = 0; b < cfg.n_bootstrap; ++b) {
    Rng rng(seed.derive(b));
    const PairSelection se = select_edges(a, s, p_edge, rng, m_edges, sum_s_d);
    const PairSelection sn = select_non_edges(a, s, p_non, rng, m_non, sum_s_nond);
    const double ce = se.count - m_edges * p_edge;
    const double cn = sn.count - m_non * p_non;
    const double sum_ring = ce + cn;
    const double w = (1.0 - alpha) * ce - alpha * cn;
    const double rs = base_rs + se.weight_s + sn.weight_s;
    const double s1 = scale1 * sum_ring;
    const double s2 = scale2 * 2.0 * (rs - 2.0 * w);
    ws.s_samples.emplace_back(s1, s2);
    mean1 += s1;
    mean2 += s2;
  }
  mean1 /= static_cast<double>(cfg.n_bootstrap);
  mean2 /= static_cast<double>(cfg.n_bootstrap);
  for (const auto& [s1, s2] : ws.s_samples) {
    ws.v1_hat[0][0] += (s1 - mean1) * (s1 - mean1);
    ws.v1_hat[0][1] += (s1 - mean1) * (s2 - mean2);
    ws.v1_hat[1][1] += (s2 - mean2) * (s2 - mean2);
  }
  const double denom = static_cast<double>(cfg.n_bootstrap - 1);
  ws.v1_hat[0][0] /= denom;
  ws.v1_hat[0][1] /= denom;
  ws.v1_hat[1][0] = ws.v1_hat[0][1];
  ws.v1_hat[1][1] /= denom;

  const double k1 = ws.k1_hat, k2 = ws.k2_hat, k4 = ws.k4_hat;
  ws.sigma_hat[0][0] = delta * k2 + (1.0 - delta) * k1;
  ws.sigma_hat[1][1] = delta * k2 * (0.5 - k2) + (1.0 - delta) * k1 * (0.5 - k1);
  ws.sigma_hat[2][2] = delta * beta * k2 * (1.0 / 3.0 - beta * k2) +
                       (1.0 - delta) * k1 * (1.0 - alpha) * (1.0 / 3.0 - k1 * (1.0 - alpha));
  ws.sigma_hat[0][1] = ws.sigma_hat[1][0] =
      delta * k2 * (beta - 0.5) + (1.0 - delta) * k1 * (0.5 - alpha);
  ws.sigma_hat[0][2] = ws.sigma_hat[2][0] =
      delta * k2 * (beta * beta / 3.0 - 2.0 * k2 / 3.0) +
      (1.0 - delta) * k1 * ((1.0 - alpha) * (1.0 - alpha) / 3.0 - 2.0 * k1 / 3.0);
  ws.sigma_hat[1][2] = ws.sigma_hat[2][1] =
      delta * beta * k2 * (1.0 / 3.0 - k2) +
      (1.0 - delta) * (1.0 - alpha) * k1 * (1.0 / 3.0 - k1);

  ws.delta_mat = {{{(est.c1_hat - 1.0) / k3, est.c1_hat / k3},
                   {(2.0 * est.c2_hat - 2.0 * est.c1_hat) / k3, 2.0 * est.c2_hat / k3}}};

  const bool delta_interior = delta > 1e-12 && delta < 1.0 - 1e-12;
  if (delta_interior) {
    const double id = 1.0 / delta, i1d = 1.0 / (1.0 - delta), ik32 = 1.0 / (k3 * k3);
    ws.g_mat = {{{ik32 * i1d * ((1.0 - 2.0 * beta) * alpha + beta * beta),
                  ik32 * i1d * (alpha - 2.0 * beta), ik32 * i1d},
                 {-ik32 * id * ((1.0 - 2.0 * alpha) * beta + alpha * alpha),
                  ik32 * id * (beta - 2.0 * alpha + 1.0), -ik32 * id}}};

    const double left[2][2] = {{est.c1_hat, 1.0 / k3},
                               {2.0 * est.c2_hat, 2.0 * est.c1_hat / k3}};
    const double right[2][3] = {
        {6.0 * k4, 3.0 * (k4 * k4 - k1 - k2),
         2.0 * (k4 * (-6.0 * alpha * beta + 3.0 * k3 * k3 - 4.0 * k3) +
                (1.0 - alpha) * (beta - 2.0 * alpha))},
        {6.0 * k1, 3.0 * k1 * (1.0 - 2.0 * alpha), 2.0 * k1 * (1.0 - alpha) * (1.0 - 3.0 * alpha)}};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 3; ++j)
        ws.h_mat[i][j] =
            (left[i][0] * right[0][j] + left[i][1] * right[1][j]) / 3.0;

    const Mat23 g_sigma = mul_23_33(ws.g_mat, ws.sigma_hat);
    const Mat2 g_sigma_gt = mul_23_32(g_sigma, ws.g_mat);
    ws.v2_hat = mul_22_22(mul_22_22(ws.delta_mat, g_sigma_gt), transpose(ws.delta_mat));

    const Mat2 h_gt = mul_23_32(ws.h_mat, ws.g_mat);  // Ĥ Ĝᵀ
    const Mat2 h_gt_dt = mul_22_22(h_gt, transpose(ws.delta_mat));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        ws.v3_hat[i][j] = (h_gt_dt[i][j] + h_gt_dt[j][i]) / 2.0;
  } else {
    ws.warnings.push_back("density estimate at a boundary; plug-in covariance terms skipped");
  }

  ws.v_hat = ws.v1_hat;
  mat2_add(ws.v_hat, ws.v2_hat);
  mat2_add(ws.v_hat, ws.v3_hat);

  const double g0 = -est.c2_hat / (est.c1_hat * est.c1_hat);
  const double g1 = 1.0 / est.c1_hat;
  double var = (nd - 2.0) * (nd - 2.0) *
               (g0 * (ws.v_hat[0][0] * g0 + ws.v_hat[0][1] * g1) +
                g1 * (ws.v_hat[1][0] * g0 + ws.v_hat[1][1] * g1));
  var *= variance_scale(n);
  if (var < 0.0) {
    ws.warnings.push_back("plug-in covariance terms drove the variance negative; clamped to zero");
    var = 0.0;
  }
  return {var, ws};
}

std::pair<double, double> confidence_interval(const KappaEstimate& est,
                                              const EstimatorConfig& cfg) {
  cfg.validate();
  if (est.variance_hat < 0)
    throw estimation_error(EstimationErrorKind::negative_variance,
                           "confidence_interval: negative variance");
  const double half = z_quantile(cfg.confidence_level) * std::sqrt(est.variance_hat);
  return {est.kappa_hat - half, est.kappa_hat + half};
}

KappaEstimate estimate_kappa(const ReplicateSet& reps, const EstimatorConfig& cfg, Seed seed) {
  KappaEstimate est = kappa_mme(reps, cfg);
  auto [var, ws] = kappa_variance(reps, est, cfg, seed);
  est.variance_hat = var;
  for (const auto& w : ws.warnings) est.warnings.push_back(w);
  est.ci = confidence_interval(est, cfg);
  return est;
}

std::pair<double, double> rate_variances(const KappaEstimate& est, const VarianceWorkspace& ws,
                                         std::size_t n) {
  (void)est;
  const Mat23 g_sigma = mul_23_33(ws.g_mat, ws.sigma_hat);
  const Mat2 g_sigma_gt = mul_23_32(g_sigma, ws.g_mat);
  const double scale = variance_scale(n);
  return {std::max(0.0, scale * g_sigma_gt[0][0]), std::max(0.0, scale * g_sigma_gt[1][1])};
}

void EpiParams::validate() const {
  if (!(theta > 0) || !(gamma > 0) || !(lambda > 0))
    throw std::invalid_argument("EpiParams: all rates must be strictly positive");
}

namespace {

ValueWithCI with_normal_ci(double value, double variance, double level) {
  ValueWithCI out;
  out.value = value;
  out.variance = variance;
  const double half = z_quantile(level) * std::sqrt(std::max(0.0, variance));
  out.ci = {value - half, value + half};
  return out;
}

}  // namespace

ValueWithCI reproduction_number(double kappa, double var_kappa, const EpiParams& p,
                                double level) {
  if (!(p.theta + p.gamma > 0))
    throw std::invalid_argument("reproduction_number: theta + gamma must be positive");
  const double slope = p.theta / (p.theta + p.gamma);
  return with_normal_ci(slope * (kappa - 1.0), slope * slope * var_kappa, level);
}

EpidemicThresholds thresholds(double kappa, double var_kappa, double lambda, double level) {
  if (!(lambda > 0)) throw std::invalid_argument("thresholds: lambda must be positive");
  EpidemicThresholds out;
  if (kappa <= 1.0) {
    out.subcritical = true;
  } else {
    const double value = 1.0 / (kappa - 1.0);
    const double deriv = 1.0 / ((kappa - 1.0) * (kappa - 1.0));
    out.percolation = with_normal_ci(value, deriv * deriv * var_kappa, level);
    out.epidemic = out.percolation;
  }
  const double imm = 1.0 - 1.0 / (lambda * kappa);
  const double imm_deriv = 1.0 / (lambda * kappa * kappa);
  out.immunization = with_normal_ci(imm, imm_deriv * imm_deriv * var_kappa, level);
  return out;
}

std::string to_json(const KappaEstimate& est) {
  nlohmann::json j;
  j["n"] = est.n;
  j["alpha_hat"] = est.alpha_hat;
  j["beta_hat"] = est.beta_hat;
  j["delta_hat"] = est.delta_hat;
  j["kappa_hat"] = est.kappa_hat;
  j["variance_hat"] = est.variance_hat;
  j["ci"] = {est.ci.first, est.ci.second};
  j["converged"] = est.converged;
  j["iterations"] = est.iterations;
  j["warnings"] = est.warnings;
  return j.dump(2);
}

}  // namespace branchkit
