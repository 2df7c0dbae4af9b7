#include "branchkit/experiments.hpp"

#include "branchkit/moments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

namespace branchkit {

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) fn(i);
    });
  for (auto& t : pool) t.join();
}

Graph GeneratorSpec::build(Seed seed) const {
  switch (family) {
    case Family::er:
      return erdos_renyi(n, p, seed);
    case Family::ba:
      return preferential_attachment(n, m, seed);
    case Family::pareto: {
      ParetoConfig cfg;
      cfg.shape = zeta;
      cfg.upper_bound = static_cast<double>(n - 1);
      cfg.lower_bound = solve_pareto_lower_bound(n, zeta, mean_degree);
      return pareto_configuration(n, cfg, seed);
    }
  }
  throw std::invalid_argument("GeneratorSpec: unknown family");
}

std::string GeneratorSpec::name() const {
  switch (family) {
    case Family::er:
      return "er";
    case Family::ba:
      return "ba";
    case Family::pareto:
      return "pareto";
  }
  return "unknown";
}

std::pair<double, double> bootstrap_percentile_ci(
    const std::vector<double>& draws,
    const std::function<double(const std::vector<double>&)>& stat, std::size_t resamples,
    double level, Rng& rng) {
  if (draws.size() < 2)
    throw std::invalid_argument("bootstrap_percentile_ci: need at least 2 draws");
  std::vector<double> stats(resamples);
  std::vector<double> sample(draws.size());
  for (std::size_t r = 0; r < resamples; ++r) {
    for (std::size_t i = 0; i < draws.size(); ++i)
      sample[i] = draws[rng.uniform_below(draws.size())];
    stats[r] = stat(sample);
  }
  std::sort(stats.begin(), stats.end());
  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(stats.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, stats.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return stats[lo] * (1.0 - frac) + stats[hi] * frac;
  };
  return {quantile((1.0 - level) / 2.0), quantile((1.0 + level) / 2.0)};
}

namespace {

double mean_of(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double variance_of(const std::vector<double>& xs) {
  const double m = mean_of(xs);
  double ss = 0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

}  // namespace

std::vector<BiasVarRow> run_bias_variance(const BiasVarConfig& cfg) {
  if (cfg.n_noisy < 2) throw std::invalid_argument("run_bias_variance: n_noisy must be >= 2");
  if (cfg.beta_grid.empty()) throw std::invalid_argument("run_bias_variance: empty beta grid");

  const Graph truth = cfg.generator.build(cfg.seed.derive(0));
  const double kappa = branching_factor(truth);
  const double mean_degree = truth.degree_stats().mean_degree;

  std::vector<BiasVarRow> rows;
  for (std::size_t c = 0; c < cfg.beta_grid.size(); ++c) {
    const double beta = cfg.beta_grid[c];
    NoiseParams params;
    params.beta = beta;
    params.alpha = edge_unbiased_alpha(truth, beta);
    const Seed cell_seed = cfg.seed.derive(1 + c);

    std::vector<double> kappas(cfg.n_noisy);
    parallel_for(cfg.n_noisy, cfg.threads, [&](std::size_t j) {
      Rng rng(cell_seed.derive(j));
      const NoisyDegreeSums sums = perturb_degree_sums(truth, params, rng);
      kappas[j] = sums.sum_d > 0
                      ? static_cast<double>(sums.sum_d2) / static_cast<double>(sums.sum_d)
                      : 0.0;
    });

    Rng boot_rng(cell_seed.derive(cfg.n_noisy));
    const auto bias_stat = [&](const std::vector<double>& xs) { return mean_of(xs) - kappa; };
    const auto var_stat = [](const std::vector<double>& xs) { return variance_of(xs); };
    const auto bias_ci =
        bootstrap_percentile_ci(kappas, bias_stat, cfg.bootstrap_reps, cfg.ci_level, boot_rng);
    const auto var_ci =
        bootstrap_percentile_ci(kappas, var_stat, cfg.bootstrap_reps, cfg.ci_level, boot_rng);

    BiasVarRow row;
    row.family = cfg.generator.name();
    row.n = truth.num_vertices();
    row.mean_degree = mean_degree;
    row.alpha = params.alpha;
    row.beta = beta;
    row.kappa_true = kappa;
    row.bias = mean_of(kappas) - kappa;
    row.bias_ci_lo = bias_ci.first;
    row.bias_ci_hi = bias_ci.second;
    row.variance = variance_of(kappas);
    row.var_ci_lo = var_ci.first;
    row.var_ci_hi = var_ci.second;
    row.theory_bias = bias_leading_term(truth, params);
    row.seed_master = cell_seed.master;
    row.seed_stream = cell_seed.stream;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<CoverageRow> run_coverage(const CoverageConfig& cfg) {
  if (cfg.n_trials < 2) throw std::invalid_argument("run_coverage: n_trials must be >= 2");
  if (cfg.cells.empty()) throw std::invalid_argument("run_coverage: empty cell grid");
  const double kappa = branching_factor(cfg.truth);
  const double mean_degree = cfg.truth.degree_stats().mean_degree;

  std::vector<CoverageRow> rows;
  for (std::size_t c = 0; c < cfg.cells.size(); ++c) {
    const auto [alpha, beta] = cfg.cells[c];
    NoiseParams params;
    params.alpha = alpha;
    params.beta = beta;
    const Seed cell_seed = cfg.seed.derive(1 + c);

    std::vector<double> abs_err(cfg.n_trials, 0.0);
    std::vector<double> ci_len(cfg.n_trials, 0.0);
    std::vector<int> covered(cfg.n_trials, 0);
    std::vector<int> failed(cfg.n_trials, 0);
    parallel_for(cfg.n_trials, cfg.threads, [&](std::size_t j) {
      const Seed trial_seed = cell_seed.derive(j);
      try {
        const ReplicateSet reps = observe_replicates(cfg.truth, params, trial_seed, 3);
        const KappaEstimate est =
            estimate_kappa(reps, cfg.estimator_cfg, trial_seed.derive(3));
        abs_err[j] = std::abs(est.kappa_hat - kappa);
        ci_len[j] = est.ci.second - est.ci.first;
        covered[j] = est.ci.first <= kappa && kappa <= est.ci.second ? 1 : 0;
      } catch (const std::exception&) {
        failed[j] = 1;
      }
    });

    CoverageRow row;
    row.family = cfg.family_name;
    row.n = cfg.truth.num_vertices();
    row.mean_degree = mean_degree;
    row.alpha = alpha;
    row.beta = beta;
    row.kappa_true = kappa;
    row.trials = cfg.n_trials;
    row.failures = static_cast<std::size_t>(
        std::accumulate(failed.begin(), failed.end(), 0));
    row.degenerate = alpha == 0.0 && beta == 0.0;
    const std::size_t ok = cfg.n_trials - row.failures;
    if (ok > 0) {
      double sum_err = 0, sum_len = 0, sum_cov = 0;
      for (std::size_t j = 0; j < cfg.n_trials; ++j) {
        if (failed[j]) continue;
        sum_err += abs_err[j];
        sum_len += ci_len[j];
        sum_cov += covered[j];
      }
      row.mae = sum_err / static_cast<double>(ok);
      row.mean_ci_len = sum_len / static_cast<double>(ok);
      row.rf = row.degenerate ? std::numeric_limits<double>::quiet_NaN()
                              : sum_cov / static_cast<double>(ok);
    }
    row.seed_master = cell_seed.master;
    row.seed_stream = cell_seed.stream;
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

std::string to_csv(const std::vector<BiasVarRow>& rows) {
  std::ostringstream os;
  os << "family,n,mean_degree,alpha,beta,kappa_true,bias,bias_ci_lo,bias_ci_hi,"
        "variance,var_ci_lo,var_ci_hi,theory_bias,seed_master,seed_stream\n";
  for (const auto& r : rows)
    os << r.family << ',' << r.n << ',' << fmt(r.mean_degree) << ',' << fmt(r.alpha) << ','
       << fmt(r.beta) << ',' << fmt(r.kappa_true) << ',' << fmt(r.bias) << ','
       << fmt(r.bias_ci_lo) << ',' << fmt(r.bias_ci_hi) << ',' << fmt(r.variance) << ','
       << fmt(r.var_ci_lo) << ',' << fmt(r.var_ci_hi) << ',' << fmt(r.theory_bias) << ','
       << r.seed_master << ',' << r.seed_stream << '\n';
  return os.str();
}

std::string to_csv(const std::vector<CoverageRow>& rows) {
  std::ostringstream os;
  os << "family,n,mean_degree,alpha,beta,kappa_true,mae,rf,mean_ci_len,trials,failures,"
        "degenerate,seed_master,seed_stream\n";
  for (const auto& r : rows)
    os << r.family << ',' << r.n << ',' << fmt(r.mean_degree) << ',' << fmt(r.alpha) << ','
       << fmt(r.beta) << ',' << fmt(r.kappa_true) << ',' << fmt(r.mae) << ',' << fmt(r.rf)
       << ',' << fmt(r.mean_ci_len) << ',' << r.trials << ',' << r.failures << ','
       << (r.degenerate ? 1 : 0) << ',' << r.seed_master << ',' << r.seed_stream << '\n';
  return os.str();
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

void write_csv(const std::filesystem::path& path, const std::vector<BiasVarRow>& rows) {
  write_text(path, to_csv(rows));
}

void write_csv(const std::filesystem::path& path, const std::vector<CoverageRow>& rows) {
  write_text(path, to_csv(rows));
}

}  // namespace branchkit
