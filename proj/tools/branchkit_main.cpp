#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "branchkit/estimator.hpp"
#include "branchkit/experiments.hpp"
#include "branchkit/generators.hpp"
#include "branchkit/ingest.hpp"
#include "branchkit/moments.hpp"
#include "branchkit/noise.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNoConvergence = 4;

using branchkit::Seed;
using nlohmann::json;

std::size_t resolve_threads(std::size_t flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("BRANCHKIT_THREADS")) {
    const long v = std::atol(env);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return 1;
}

branchkit::CanonicalGraph load_graph(const std::string& path) {
  return branchkit::read_canonical(path);
}

json graph_summary(const branchkit::Graph& g) {
  const auto stats = g.degree_stats();
  return {{"n", g.num_vertices()},
          {"edges", g.num_edges()},
          {"mean_degree", stats.mean_degree},
          {"kappa", branchkit::branching_factor(g)}};
}

struct GenerateArgs {
  std::string family;
  std::size_t n = 0;
  double p = -1;
  std::size_t m = 0;
  double zeta = 0;
  double mean_degree = 0;
  std::uint64_t seed = 0;
  std::string out;
};

int run_generate(const GenerateArgs& a) {
  branchkit::GeneratorSpec spec;
  spec.n = a.n;
  if (a.family == "er") {
    if (a.p < 0) {
      std::cerr << "generate: --family er requires --p\n";
      return kExitUsage;
    }
    spec.family = branchkit::GeneratorSpec::Family::er;
    spec.p = a.p;
  } else if (a.family == "ba") {
    if (a.m == 0) {
      std::cerr << "generate: --family ba requires --m\n";
      return kExitUsage;
    }
    spec.family = branchkit::GeneratorSpec::Family::ba;
    spec.m = a.m;
  } else if (a.family == "pareto") {
    if (!(a.zeta > 0) || !(a.mean_degree > 0)) {
      std::cerr << "generate: --family pareto requires --zeta and --mean-degree\n";
      return kExitUsage;
    }
    spec.family = branchkit::GeneratorSpec::Family::pareto;
    spec.zeta = a.zeta;
    spec.mean_degree = a.mean_degree;
  } else {
    std::cerr << "generate: unknown family '" << a.family << "'\n";
    return kExitUsage;
  }
  const branchkit::Graph g = spec.build(Seed{a.seed, 0});
  branchkit::write_canonical(a.out, g);
  json out;
  out["config"] = {{"subcommand", "generate"}, {"family", a.family}, {"n", a.n},
                   {"p", a.p},       {"m", a.m},
                   {"zeta", a.zeta}, {"mean_degree", a.mean_degree},
                   {"seed", a.seed}, {"out", a.out}};
  out["graph"] = graph_summary(g);
  std::cout << out.dump(2) << '\n';
  return 0;
}

int main_impl(int argc, char** argv) {
  CLI::App app{"branching-factor estimation toolkit for noisy contact networks"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* cmd_generate = app.add_subcommand("generate", "write a random graph");
  cmd_generate->add_option("--family", gen.family, "er | ba | pareto")->required();
  cmd_generate->add_option("--n", gen.n, "vertex count")->required();
  cmd_generate->add_option("--p", gen.p, "edge probability (er)");
  cmd_generate->add_option("--m", gen.m, "edges per new vertex (ba)");
  cmd_generate->add_option("--zeta", gen.zeta, "degree shape (pareto)");
  cmd_generate->add_option("--mean-degree", gen.mean_degree, "target mean degree (pareto)");
  cmd_generate->add_option("--seed", gen.seed, "random seed")->default_val(0);
  cmd_generate->add_option("--out", gen.out, "output edge-list path")->required();

  std::string in_path, out_path;
  double alpha = 0, beta = 0;
  bool edge_unbiased = false;
  std::size_t replicates = 1;
  std::uint64_t seed = 0;
  auto* cmd_perturb = app.add_subcommand("perturb", "write noisy observations of a graph");
  cmd_perturb->add_option("--in", in_path, "true-graph edge list")->required();
  cmd_perturb->add_option("--alpha", alpha, "false-positive rate");
  cmd_perturb->add_option("--beta", beta, "false-negative rate");
  cmd_perturb->add_flag("--edge-unbiased", edge_unbiased,
                        "derive alpha from beta so expected edge count is preserved");
  cmd_perturb->add_option("--replicates", replicates, "number of observations")->default_val(1);
  cmd_perturb->add_option("--seed", seed, "random seed")->default_val(0);
  cmd_perturb->add_option("--out", out_path, "output path (suffix .k added when replicates > 1)")
      ->required();

  std::string kappa_in;
  auto* cmd_kappa = app.add_subcommand("kappa", "branching factor of a graph");
  cmd_kappa->add_option("--in", kappa_in, "edge list")->required();

  std::string moments_in;
  double m_alpha = 0, m_beta = 0;
  bool m_edge_unbiased = false;
  auto* cmd_moments = app.add_subcommand("moments", "expected noisy degree-sum moments");
  cmd_moments->add_option("--in", moments_in, "true-graph edge list")->required();
  cmd_moments->add_option("--alpha", m_alpha, "false-positive rate");
  cmd_moments->add_option("--beta", m_beta, "false-negative rate");
  cmd_moments->add_flag("--edge-unbiased", m_edge_unbiased, "derive alpha from beta");

  std::vector<std::string> rep_paths;
  branchkit::EstimatorConfig est_cfg;
  double alpha0 = -1;
  std::uint64_t est_seed = 0;
  std::string est_out;
  auto* cmd_estimate = app.add_subcommand("estimate", "three-replicate estimation of kappa");
  cmd_estimate->add_option("--replicates", rep_paths, "three edge-list files")
      ->expected(3)
      ->required();
  cmd_estimate->add_option("--alpha0", alpha0, "fixed-point initializer (default: u2)");
  cmd_estimate->add_option("--eps", est_cfg.epsilon, "convergence tolerance")->default_val(1e-8);
  cmd_estimate->add_option("--nb", est_cfg.n_bootstrap, "variance bootstrap draws")
      ->default_val(1000);
  cmd_estimate->add_option("--level", est_cfg.confidence_level, "confidence level")
      ->default_val(0.95);
  cmd_estimate->add_option("--seed", est_seed, "random seed")->default_val(0);
  cmd_estimate->add_option("--out", est_out, "also write the JSON here");

  GenerateArgs bias_gen;
  std::vector<double> bias_betas;
  std::size_t n_noisy = 1000, bootstrap_reps = 1000, threads_flag = 0;
  std::string bias_out;
  auto* cmd_bias = app.add_subcommand("simulate-bias",
                                      "bias/variance of the observed branching factor");
  cmd_bias->add_option("--family", bias_gen.family, "er | ba | pareto")->required();
  cmd_bias->add_option("--n", bias_gen.n, "vertex count")->required();
  cmd_bias->add_option("--p", bias_gen.p, "edge probability (er)");
  cmd_bias->add_option("--m", bias_gen.m, "edges per new vertex (ba)");
  cmd_bias->add_option("--zeta", bias_gen.zeta, "degree shape (pareto)");
  cmd_bias->add_option("--mean-degree", bias_gen.mean_degree, "target mean degree (pareto)");
  cmd_bias->add_option("--betas", bias_betas, "false-negative rates")->required();
  cmd_bias->add_option("--n-noisy", n_noisy, "observations per cell")->default_val(1000);
  cmd_bias->add_option("--bootstrap", bootstrap_reps, "CI resamples")->default_val(1000);
  cmd_bias->add_option("--seed", bias_gen.seed, "random seed")->default_val(0);
  cmd_bias->add_option("--threads", threads_flag, "worker threads (0: BRANCHKIT_THREADS or 1)");
  cmd_bias->add_option("--out", bias_out, "output CSV path");

  std::string cov_in;
  std::vector<double> cov_alphas, cov_betas;
  std::size_t cov_trials = 300;
  branchkit::EstimatorConfig cov_est_cfg;
  std::uint64_t cov_seed = 0;
  std::size_t cov_threads = 0;
  std::string cov_out;
  auto* cmd_cov = app.add_subcommand("simulate-coverage",
                                     "MAE and interval coverage of the estimator");
  cmd_cov->add_option("--in", cov_in, "true-graph edge list")->required();
  cmd_cov->add_option("--alphas", cov_alphas, "false-positive rates")->required();
  cmd_cov->add_option("--betas", cov_betas, "false-negative rates")->required();
  cmd_cov->add_option("--trials", cov_trials, "trials per cell")->default_val(300);
  cmd_cov->add_option("--nb", cov_est_cfg.n_bootstrap, "variance bootstrap draws")
      ->default_val(1000);
  cmd_cov->add_option("--level", cov_est_cfg.confidence_level, "confidence level")
      ->default_val(0.95);
  cmd_cov->add_option("--seed", cov_seed, "random seed")->default_val(0);
  cmd_cov->add_option("--threads", cov_threads, "worker threads (0: BRANCHKIT_THREADS or 1)");
  cmd_cov->add_option("--out", cov_out, "output CSV path");

  double th_kappa = 0, th_variance = 0;
  std::string th_json;
  branchkit::EpiParams epi{0.016, 0.125, 1.0};
  double th_level = 0.95;
  auto* cmd_th = app.add_subcommand("thresholds", "epidemic quantities derived from kappa");
  cmd_th->add_option("--kappa", th_kappa, "branching factor");
  cmd_th->add_option("--variance", th_variance, "variance of the kappa estimate")
      ->default_val(0.0);
  cmd_th->add_option("--estimate-json", th_json, "read kappa/variance from an estimate JSON");
  cmd_th->add_option("--theta", epi.theta, "infection rate")->default_val(0.016);
  cmd_th->add_option("--gamma", epi.gamma, "recovery rate")->default_val(0.125);
  cmd_th->add_option("--lambda", epi.lambda, "spreading rate")->default_val(1.0);
  cmd_th->add_option("--level", th_level, "confidence level")->default_val(0.95);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (cmd_generate->parsed()) return run_generate(gen);

  if (cmd_perturb->parsed()) {
    const auto truth = load_graph(in_path);
    branchkit::NoiseParams params;
    params.beta = beta;
    params.alpha = edge_unbiased ? branchkit::edge_unbiased_alpha(truth.graph, beta) : alpha;
    for (std::size_t k = 0; k < replicates; ++k) {
      const branchkit::Graph obs =
          branchkit::perturb(truth.graph, params, Seed{seed, 0}.derive(k));
      const std::string path =
          replicates == 1 ? out_path : out_path + "." + std::to_string(k + 1);
      branchkit::write_canonical(path, obs);
    }
    json out;
    out["config"] = {{"subcommand", "perturb"}, {"in", in_path},
                     {"alpha", params.alpha},   {"beta", params.beta},
                     {"edge_unbiased", edge_unbiased},
                     {"replicates", replicates}, {"seed", seed},
                     {"out", out_path}};
    std::cout << out.dump(2) << '\n';
    return 0;
  }

  if (cmd_kappa->parsed()) {
    const auto g = load_graph(kappa_in);
    json out;
    out["config"] = {{"subcommand", "kappa"}, {"in", kappa_in}};
    out["graph"] = graph_summary(g.graph);
    std::cout << out.dump(2) << '\n';
    return 0;
  }

  if (cmd_moments->parsed()) {
    const auto g = load_graph(moments_in);
    branchkit::NoiseParams params;
    params.beta = m_beta;
    params.alpha =
        m_edge_unbiased ? branchkit::edge_unbiased_alpha(g.graph, m_beta) : m_alpha;
    const branchkit::MomentReport r = branchkit::expected_moments(g.graph, params);
    json out;
    out["config"] = {{"subcommand", "moments"}, {"in", moments_in},
                     {"alpha", params.alpha},   {"beta", params.beta},
                     {"edge_unbiased", m_edge_unbiased}};
    out["moments"] = {{"e_y", r.e_y},       {"e_x", r.e_x},
                      {"var_y", r.var_y},   {"cov_xy", r.cov_xy},
                      {"var_x", r.var_x},   {"ratio", r.ratio},
                      {"kappa_true", r.kappa_true},
                      {"assumption4_holds", r.assumption4_holds}};
    if (r.assumption4_holds)
      out["bias_leading_term"] = branchkit::bias_leading_term(g.graph, params);
    std::cout << out.dump(2) << '\n';
    return 0;
  }

  if (cmd_estimate->parsed()) {
    if (alpha0 >= 0) est_cfg.alpha0 = alpha0;
    branchkit::ReplicateSet reps;
    for (const auto& path : rep_paths) {
      auto g = load_graph(path);
      if (reps.graphs.empty()) reps.n = g.graph.num_vertices();
      if (g.graph.num_vertices() != reps.n) {
        std::cerr << "estimate: replicate vertex counts differ\n";
        return kExitData;
      }
      reps.graphs.push_back(std::move(g.graph));
    }
    branchkit::KappaEstimate est = branchkit::kappa_mme(reps, est_cfg);
    auto [var, ws] = branchkit::kappa_variance(reps, est, est_cfg, Seed{est_seed, 1});
    est.variance_hat = var;
    for (const auto& w : ws.warnings) est.warnings.push_back(w);
    est.ci = branchkit::confidence_interval(est, est_cfg);

    json out = json::parse(branchkit::to_json(est));
    out["config"] = {{"subcommand", "estimate"},
                     {"replicates", rep_paths},
                     {"alpha0", alpha0 >= 0 ? json(alpha0) : json("u2")},
                     {"eps", est_cfg.epsilon},
                     {"nb", est_cfg.n_bootstrap},
                     {"level", est_cfg.confidence_level},
                     {"seed", est_seed}};
    const auto [var_a, var_b] = branchkit::rate_variances(est, ws, reps.n);
    const double z = (est.ci.second - est.ci.first) /
                     (2.0 * std::sqrt(std::max(est.variance_hat, 1e-300)));
    const double za = est.variance_hat > 0 ? z : 1.959964;
    out["alpha_ci"] = {est.alpha_hat - za * std::sqrt(var_a),
                       est.alpha_hat + za * std::sqrt(var_a)};
    out["beta_ci"] = {est.beta_hat - za * std::sqrt(var_b),
                      est.beta_hat + za * std::sqrt(var_b)};
    const std::string text = out.dump(2);
    std::cout << text << '\n';
    if (!est_out.empty()) {
      std::ofstream f(est_out);
      f << text << '\n';
    }
    return 0;
  }

  if (cmd_bias->parsed()) {
    branchkit::BiasVarConfig cfg;
    branchkit::GeneratorSpec spec;
    spec.n = bias_gen.n;
    if (bias_gen.family == "er") {
      spec.family = branchkit::GeneratorSpec::Family::er;
      spec.p = bias_gen.p;
    } else if (bias_gen.family == "ba") {
      spec.family = branchkit::GeneratorSpec::Family::ba;
      spec.m = bias_gen.m;
    } else if (bias_gen.family == "pareto") {
      spec.family = branchkit::GeneratorSpec::Family::pareto;
      spec.zeta = bias_gen.zeta;
      spec.mean_degree = bias_gen.mean_degree;
    } else {
      std::cerr << "simulate-bias: unknown family '" << bias_gen.family << "'\n";
      return kExitUsage;
    }
    cfg.generator = spec;
    cfg.beta_grid = bias_betas;
    cfg.n_noisy = n_noisy;
    cfg.bootstrap_reps = bootstrap_reps;
    cfg.seed = Seed{bias_gen.seed, 0};
    cfg.threads = resolve_threads(threads_flag);
    const auto rows = branchkit::run_bias_variance(cfg);
    std::ostringstream header;
    header << "# subcommand=simulate-bias family=" << bias_gen.family << " n=" << bias_gen.n
           << " n_noisy=" << n_noisy << " bootstrap=" << bootstrap_reps
           << " seed=" << bias_gen.seed << " threads=" << cfg.threads << "\n";
    const std::string text = header.str() + branchkit::to_csv(rows);
    std::cout << text;
    if (!bias_out.empty()) {
      std::ofstream f(bias_out);
      f << text;
    }
    return 0;
  }

  if (cmd_cov->parsed()) {
    const auto truth = load_graph(cov_in);
    branchkit::CoverageConfig cfg;
    cfg.truth = truth.graph;
    cfg.family_name = "ingested";
    for (double a : cov_alphas)
      for (double b : cov_betas) cfg.cells.emplace_back(a, b);
    cfg.n_trials = cov_trials;
    cfg.estimator_cfg = cov_est_cfg;
    cfg.seed = Seed{cov_seed, 0};
    cfg.threads = resolve_threads(cov_threads);
    const auto rows = branchkit::run_coverage(cfg);
    std::ostringstream header;
    header << "# subcommand=simulate-coverage in=" << cov_in << " trials=" << cov_trials
           << " nb=" << cov_est_cfg.n_bootstrap << " level=" << cov_est_cfg.confidence_level
           << " seed=" << cov_seed << " threads=" << cfg.threads << "\n";
    const std::string text = header.str() + branchkit::to_csv(rows);
    std::cout << text;
    if (!cov_out.empty()) {
      std::ofstream f(cov_out);
      f << text;
    }
    return 0;
  }

  if (cmd_th->parsed()) {
    double kappa = th_kappa, variance = th_variance;
    if (!th_json.empty()) {
      std::ifstream f(th_json);
      if (!f) {
        std::cerr << "thresholds: cannot open " << th_json << '\n';
        return kExitData;
      }
      const json est = json::parse(f);
      kappa = est.at("kappa_hat").get<double>();
      variance = est.at("variance_hat").get<double>();
    } else if (th_kappa == 0) {
      std::cerr << "thresholds: --kappa or --estimate-json required\n";
      return kExitUsage;
    }
    const auto r0 = branchkit::reproduction_number(kappa, variance, epi, th_level);
    const auto th = branchkit::thresholds(kappa, variance, epi.lambda, th_level);
    json out;
    out["config"] = {{"subcommand", "thresholds"}, {"kappa", kappa},
                     {"variance", variance},       {"theta", epi.theta},
                     {"gamma", epi.gamma},         {"lambda", epi.lambda},
                     {"level", th_level}};
    out["r0"] = {{"value", r0.value}, {"variance", r0.variance}, {"ci", {r0.ci.first, r0.ci.second}}};
    out["subcritical"] = th.subcritical;
    if (th.percolation) {
      out["percolation_threshold"] = {{"value", th.percolation->value},
                                      {"variance", th.percolation->variance},
                                      {"ci", {th.percolation->ci.first, th.percolation->ci.second}}};
      out["epidemic_threshold"] = out["percolation_threshold"];
    }
    out["immunization_threshold"] = {{"value", th.immunization.value},
                                     {"variance", th.immunization.variance},
                                     {"ci", {th.immunization.ci.first, th.immunization.ci.second}}};
    std::cout << out.dump(2) << '\n';
    return 0;
  }

  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return main_impl(argc, argv);
  } catch (const branchkit::estimation_error& e) {
    std::cerr << "estimation failed: " << e.what() << '\n';
    return kExitNoConvergence;
  } catch (const branchkit::ingest_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid arguments: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
}
