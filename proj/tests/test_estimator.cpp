#include "branchkit/estimator.hpp"

#include <cmath>

#include "doctest.h"

#include "branchkit/generators.hpp"
#include "branchkit/noise.hpp"
#include "branchkit/pair_index.hpp"

using namespace branchkit;

namespace {

ReplicateSet identical_replicates(const Graph& g, std::size_t k = 3) {
  ReplicateSet reps;
  reps.n = g.num_vertices();
  for (std::size_t i = 0; i < k; ++i) reps.graphs.push_back(g);
  return reps;
}

// Pair-by-pair reference implementation of the agreement statistics.
UStats brute_u_stats(const ReplicateSet& reps) {
  const std::size_t n = reps.n;
  const double pairs = static_cast<double>(pair_count(n));
  double s1 = 0, s2 = 0, s3 = 0;
  for (VertexId i = 0; i + 1 < n; ++i)
    for (VertexId j = i + 1; j < n; ++j) {
      const int a = reps.graphs[0].has_edge(i, j) ? 1 : 0;
      const int b = reps.graphs[1].has_edge(i, j) ? 1 : 0;
      const int c = reps.graphs[2].has_edge(i, j) ? 1 : 0;
      s1 += a;
      s2 += std::abs(a - b);
      s3 += (a + b + c == 1) ? 1 : 0;
    }
  return {s1 / pairs, s2 / (2.0 * pairs), s3 / (3.0 * pairs)};
}

}  // namespace

TEST_CASE("u_stats hand-checked examples") {
  const Graph k3 = erdos_renyi(3, 1.0, {0, 0});
  const UStats same = u_stats(identical_replicates(k3));
  CHECK(same.u1_hat == doctest::Approx(1.0));
  CHECK(same.u2_hat == doctest::Approx(0.0));
  CHECK(same.u3_hat == doctest::Approx(0.0));

  const UStats empty = u_stats(identical_replicates(Graph(4, {})));
  CHECK(empty.u1_hat == 0.0);
  CHECK(empty.u2_hat == 0.0);
  CHECK(empty.u3_hat == 0.0);

  ReplicateSet reps;
  reps.n = 3;
  reps.graphs = {Graph(3, {{0, 1}}), Graph(3, {}), Graph(3, {})};
  const UStats us = u_stats(reps);
  CHECK(us.u1_hat == doctest::Approx(1.0 / 3.0));
  CHECK(us.u2_hat == doctest::Approx(1.0 / 6.0));
  CHECK(us.u3_hat == doctest::Approx(1.0 / 9.0));

  reps.graphs.pop_back();
  CHECK_THROWS_AS(u_stats(reps), estimation_error);
}

TEST_CASE("u_stats equals the pair loop on random triples") {
  const Graph truth = erdos_renyi(80, 0.1, {44, 0});
  for (std::uint64_t s = 0; s < 10; ++s) {
    const ReplicateSet reps = observe_replicates(truth, {0.03, 0.25}, {s, 5}, 3);
    const UStats fast = u_stats(reps);
    const UStats brute = brute_u_stats(reps);
    CHECK(fast.u1_hat == doctest::Approx(brute.u1_hat).epsilon(1e-12));
    CHECK(fast.u2_hat == doctest::Approx(brute.u2_hat).epsilon(1e-12));
    CHECK(fast.u3_hat == doctest::Approx(brute.u3_hat).epsilon(1e-12));
  }
}

TEST_CASE("u-statistics depend on replicate order as documented") {
  const Graph truth = erdos_renyi(60, 0.15, {3, 0});
  ReplicateSet reps = observe_replicates(truth, {0.02, 0.2}, {17, 1}, 3);
  const UStats base = u_stats(reps);
  std::swap(reps.graphs[1], reps.graphs[2]);
  const UStats swapped = u_stats(reps);
  // u1 fixed by the first replicate; u3 symmetric in all three; u2 moves
  CHECK(base.u1_hat == swapped.u1_hat);
  CHECK(base.u3_hat == doctest::Approx(swapped.u3_hat));
  CHECK(base.u2_hat != swapped.u2_hat);
}

TEST_CASE("fixed point: noiseless data gives (0, 0, u1)") {
  UStats us{0.2, 0.0, 0.0};
  const FixedPoint fp = solve_fixed_point(us, {});
  CHECK(fp.converged);
  CHECK(fp.alpha_hat == doctest::Approx(0.0));
  CHECK(fp.beta_hat == doctest::Approx(0.0));
  CHECK(fp.delta_hat == doctest::Approx(0.2));
}

TEST_CASE("fixed point satisfies the u1 identity and recovers known rates") {
  const double alpha = 0.01, beta = 0.15, delta = 0.08;
  UStats us;
  us.u1_hat = (1.0 - delta) * alpha + delta * (1.0 - beta);
  us.u2_hat = (1.0 - delta) * alpha * (1.0 - alpha) + delta * beta * (1.0 - beta);
  us.u3_hat =
      (1.0 - delta) * alpha * (1.0 - alpha) * (1.0 - alpha) + delta * beta * beta * (1.0 - beta);
  const FixedPoint fp = solve_fixed_point(us, {});
  CHECK(fp.converged);
  CHECK(fp.alpha_hat == doctest::Approx(alpha).epsilon(1e-6));
  CHECK(fp.beta_hat == doctest::Approx(beta).epsilon(1e-6));
  CHECK(fp.delta_hat == doctest::Approx(delta).epsilon(1e-6));
  const double u1_model = (1.0 - fp.delta_hat) * fp.alpha_hat + fp.delta_hat * (1.0 - fp.beta_hat);
  CHECK(u1_model == doctest::Approx(us.u1_hat).epsilon(1e-6));
}

TEST_CASE("fixed point guards") {
  EstimatorConfig cfg;
  cfg.alpha0 = 0.25;
  CHECK_THROWS_AS(solve_fixed_point({0.25, 0.1, 0.05}, cfg), estimation_error);

  EstimatorConfig bad;
  bad.epsilon = -1;
  CHECK_THROWS_AS(solve_fixed_point({0.2, 0.01, 0.001}, bad), std::invalid_argument);
}

TEST_CASE("noiseless replicates recover the branching factor exactly") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(Seed{s, 2});
    const std::size_t n = 20 + rng.uniform_below(80);
    const double p = 0.05 + 0.4 * rng.next_double();
    const Graph g = erdos_renyi(n, p, {s, 3});
    if (g.num_edges() == 0) continue;
    const KappaEstimate est = kappa_mme(identical_replicates(g), {});
    const double kappa = branching_factor(g);
    CHECK(est.kappa_hat == doctest::Approx(kappa).epsilon(1e-9));
    CHECK(est.alpha_hat == doctest::Approx(0.0));
    CHECK(est.beta_hat == doctest::Approx(0.0));
    CHECK(est.k3_hat == doctest::Approx(1.0));
  }
}

TEST_CASE("parameter recovery from noisy triples") {
  const Graph truth = erdos_renyi(500, 0.04, {71, 0});
  const NoiseParams params{0.005, 0.1};
  const std::size_t trials = 40;
  double sum_a = 0, sum_b = 0, sum_k = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const ReplicateSet reps = observe_replicates(truth, params, {500 + t, 0}, 3);
    const KappaEstimate est = kappa_mme(reps, {});
    sum_a += est.alpha_hat;
    sum_b += est.beta_hat;
    sum_k += est.kappa_hat;
  }
  const double td = static_cast<double>(trials);
  CHECK(sum_a / td == doctest::Approx(params.alpha).epsilon(0.15));
  CHECK(sum_b / td == doctest::Approx(params.beta).epsilon(0.10));
  CHECK(sum_k / td == doctest::Approx(branching_factor(truth)).epsilon(0.03));
}

TEST_CASE("label permutation leaves estimates unchanged") {
  const Graph truth = erdos_renyi(120, 0.08, {13, 0});
  const ReplicateSet reps = observe_replicates(truth, {0.01, 0.2}, {19, 0}, 3);

  std::vector<VertexId> perm(120);
  for (std::size_t i = 0; i < 120; ++i) perm[i] = static_cast<VertexId>((i * 7 + 3) % 120);
  ReplicateSet relabeled;
  relabeled.n = 120;
  for (const Graph& g : reps.graphs) {
    EdgeList edges;
    for (const auto& [u, v] : g.edges()) edges.emplace_back(perm[u], perm[v]);
    relabeled.graphs.emplace_back(120, std::move(edges));
  }
  const KappaEstimate a = kappa_mme(reps, {});
  const KappaEstimate b = kappa_mme(relabeled, {});
  CHECK(a.alpha_hat == doctest::Approx(b.alpha_hat).epsilon(1e-12));
  CHECK(a.beta_hat == doctest::Approx(b.beta_hat).epsilon(1e-12));
  CHECK(a.kappa_hat == doctest::Approx(b.kappa_hat).epsilon(1e-12));
}

TEST_CASE("variance bootstrap branch selection") {
  const Graph truth = erdos_renyi(100, 0.1, {23, 0});
  const ReplicateSet reps = observe_replicates(truth, {0.05, 0.1}, {29, 0}, 3);
  KappaEstimate est = kappa_mme(reps, {});

  SUBCASE("equal rates") {
    est.alpha_hat = est.beta_hat = 0.1;
    est.k3_hat = 0.8;
    EstimatorConfig cfg;
    cfg.n_bootstrap = 10;
    const auto [var, ws] = kappa_variance(reps, est, cfg, {1, 1});
    CHECK(ws.xi2 == doctest::Approx(0.1));
    CHECK(ws.xi1 == doctest::Approx(0.8));
    CHECK(var >= 0);
  }
  SUBCASE("beta above alpha") {
    est.alpha_hat = 0.01;
    est.beta_hat = 0.2;
    est.k3_hat = 0.79;
    EstimatorConfig cfg;
    cfg.n_bootstrap = 10;
    const auto [var, ws] = kappa_variance(reps, est, cfg, {1, 2});
    const double t1 = std::sqrt(1.0 - 4.0 * 0.01 * 0.8);
    const double t2 = std::sqrt(1.0 - 4.0 * 0.2 * 0.99);
    CHECK(ws.xi2 == doctest::Approx((1.0 - t1) / 2.0));
    CHECK(ws.xi1 == doctest::Approx((t1 - t2) / 2.0));  // t1 + t2 >= 0.5 here
    CHECK(ws.xi1 + ws.xi2 <= 1.0 + 1e-12);
    CHECK(var >= 0);
  }
  SUBCASE("alpha above beta") {
    est.alpha_hat = 0.2;
    est.beta_hat = 0.01;
    est.k3_hat = 0.79;
    EstimatorConfig cfg;
    cfg.n_bootstrap = 10;
    const auto [var, ws] = kappa_variance(reps, est, cfg, {1, 3});
    const double t1 = std::sqrt(1.0 - 4.0 * 0.2 * 0.99);
    const double t2 = std::sqrt(1.0 - 4.0 * 0.01 * 0.8);
    CHECK(ws.xi2 == doctest::Approx((1.0 + t1) / 2.0));
    CHECK(ws.xi1 == doctest::Approx((t2 - t1) / 2.0));
    CHECK(var >= 0);
  }
}

TEST_CASE("variance bootstrap is degenerate without noise") {
  const Graph g = erdos_renyi(80, 0.1, {31, 0});
  const KappaEstimate est = kappa_mme(identical_replicates(g), {});
  EstimatorConfig cfg;
  cfg.n_bootstrap = 50;
  const auto [var, ws] = kappa_variance(identical_replicates(g), est, cfg, {2, 0});
  CHECK(ws.xi1 == doctest::Approx(1.0));
  CHECK(ws.xi2 == doctest::Approx(0.0));
  for (const auto& [s1, s2] : ws.s_samples) {
    CHECK(s1 == doctest::Approx(0.0));
    CHECK(s2 == doctest::Approx(0.0));
  }
  CHECK(ws.v1_hat[0][0] == doctest::Approx(0.0));
  CHECK(var == doctest::Approx(0.0));
}

TEST_CASE("bootstrap samples have the centered-selection moments") {
  // Each resampled pair indicator is centered, so E[S1] = 0 and
  // Var(S1) = scale^2 (|E| p_e(1-p_e) + |nonedges| p_0(1-p_0)).
  const Graph truth = erdos_renyi(150, 0.08, {37, 0});
  const ReplicateSet reps = observe_replicates(truth, {0.01, 0.15}, {41, 0}, 3);
  const KappaEstimate est = kappa_mme(reps, {});
  EstimatorConfig cfg;
  cfg.n_bootstrap = 3000;
  const auto [var, ws] = kappa_variance(reps, est, cfg, {3, 0});
  (void)var;
  const double p_e = ws.xi1 + ws.xi2, p_0 = ws.xi2;
  const double n = 150.0;
  const double m = static_cast<double>(reps.graphs[0].num_edges());
  const double m0 = n * (n - 1.0) / 2.0 - m;
  const double scale1 = std::sqrt(2.0 / (n * (n - 1.0))) / est.k3_hat;
  const double theory =
      scale1 * scale1 * (m * p_e * (1.0 - p_e) + m0 * p_0 * (1.0 - p_0));
  double mean = 0, ss = 0;
  for (const auto& [s1, s2] : ws.s_samples) {
    (void)s2;
    mean += s1;
    ss += s1 * s1;
  }
  mean /= static_cast<double>(ws.s_samples.size());
  const double sample_var = ss / static_cast<double>(ws.s_samples.size()) - mean * mean;
  CHECK(std::abs(mean) < 3.0 * std::sqrt(theory / static_cast<double>(cfg.n_bootstrap)));
  CHECK(sample_var == doctest::Approx(theory).epsilon(0.1));
}

TEST_CASE("confidence interval arithmetic") {
  KappaEstimate est;
  est.kappa_hat = 10.0;
  est.variance_hat = 4.0;
  const auto [lo, hi] = confidence_interval(est, {});
  CHECK(lo == doctest::Approx(10.0 - 1.959964 * 2.0).epsilon(1e-6));
  CHECK(hi == doctest::Approx(10.0 + 1.959964 * 2.0).epsilon(1e-6));

  est.variance_hat = 0.0;
  const auto [l0, h0] = confidence_interval(est, {});
  CHECK(l0 == est.kappa_hat);
  CHECK(h0 == est.kappa_hat);

  est.variance_hat = -1.0;
  CHECK_THROWS_AS(confidence_interval(est, {}), estimation_error);
}

TEST_CASE("estimate_kappa brackets the truth on a realistic triple") {
  const Graph truth = erdos_renyi(400, 0.05, {53, 0});
  const ReplicateSet reps = observe_replicates(truth, {0.005, 0.1}, {59, 0}, 3);
  EstimatorConfig cfg;
  cfg.n_bootstrap = 200;
  const KappaEstimate est = estimate_kappa(reps, cfg, {61, 0});
  CHECK(est.converged);
  CHECK(est.ci.first <= est.kappa_hat);
  CHECK(est.kappa_hat <= est.ci.second);
  CHECK(est.variance_hat > 0);
  // wide sanity band; coverage is tested statistically elsewhere
  CHECK(std::abs(est.kappa_hat - branching_factor(truth)) <
        10.0 * std::sqrt(est.variance_hat));
}

TEST_CASE("reproduction number and thresholds") {
  EpiParams p{0.016, 0.125, 1.0};
  CHECK(reproduction_number(1.0, 0.0, p).value == doctest::Approx(0.0));
  const auto r0 = reproduction_number(10.0, 4.0, p);
  CHECK(r0.value == doctest::Approx(0.016 * 9.0 / 0.141).epsilon(1e-9));
  const double slope = 0.016 / 0.141;
  CHECK(r0.variance == doctest::Approx(slope * slope * 4.0));

  const auto th = thresholds(3.0, 0.0, 1.0);
  CHECK_FALSE(th.subcritical);
  CHECK(th.percolation->value == doctest::Approx(0.5));
  CHECK(th.epidemic->value == doctest::Approx(0.5));
  const auto th2 = thresholds(2.0, 0.0, 1.0);
  CHECK(th2.immunization.value == doctest::Approx(0.5));

  const auto sub = thresholds(1.0, 0.0, 1.0);
  CHECK(sub.subcritical);
  CHECK_FALSE(sub.percolation.has_value());

  CHECK_THROWS_AS(thresholds(3.0, 0.0, -1.0), std::invalid_argument);
}

TEST_CASE("estimate serializes to the documented schema") {
  KappaEstimate est;
  est.n = 42;
  est.alpha_hat = 0.01;
  est.kappa_hat = 5.5;
  est.ci = {5.0, 6.0};
  est.converged = true;
  est.iterations = 7;
  est.warnings.push_back("example");
  const std::string j = to_json(est);
  for (const char* key : {"\"n\"", "\"alpha_hat\"", "\"beta_hat\"", "\"delta_hat\"",
                          "\"kappa_hat\"", "\"variance_hat\"", "\"ci\"", "\"converged\"",
                          "\"iterations\"", "\"warnings\""})
    CHECK(j.find(key) != std::string::npos);
}
