#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "branchkit/estimator.hpp"
#include "branchkit/generators.hpp"
#include "branchkit/graph.hpp"
#include "branchkit/noise.hpp"
#include "branchkit/rng.hpp"

namespace branchkit {

// Runs fn(0..count-1) across at most `threads` workers. Results must go into
// index-addressed buffers; the partition is static so output never depends on
// scheduling.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

struct GeneratorSpec {
  enum class Family { er, ba, pareto };

  Family family = Family::er;
  std::size_t n = 0;
  double p = 0;            // er: edge probability
  std::size_t m = 0;       // ba: edges per new vertex
  double zeta = 0;         // pareto: shape
  double mean_degree = 0;  // pareto: target mean degree

  Graph build(Seed seed) const;
  std::string name() const;
};

// Percentile bootstrap interval for a statistic of i.i.d. draws.
std::pair<double, double> bootstrap_percentile_ci(
    const std::vector<double>& draws,
    const std::function<double(const std::vector<double>&)>& stat, std::size_t resamples,
    double level, Rng& rng);

struct BiasVarConfig {
  GeneratorSpec generator;
  std::vector<double> beta_grid;
  std::size_t n_noisy = 1000;        // noisy observations per cell
  std::size_t bootstrap_reps = 1000; // resamples for the bias/variance CIs
  double ci_level = 0.95;
  Seed seed;
  std::size_t threads = 1;
};

struct BiasVarRow {
  std::string family;
  std::size_t n = 0;
  double mean_degree = 0;
  double alpha = 0;
  double beta = 0;
  double kappa_true = 0;
  double bias = 0;
  double bias_ci_lo = 0;
  double bias_ci_hi = 0;
  double variance = 0;
  double var_ci_lo = 0;
  double var_ci_hi = 0;
  double theory_bias = 0;
  std::uint64_t seed_master = 0;
  std::uint64_t seed_stream = 0;
};

// Bias and variance of the observed branching factor per beta cell, with
// alpha set to the edge-balancing value for the generated graph.
std::vector<BiasVarRow> run_bias_variance(const BiasVarConfig& cfg);

struct CoverageConfig {
  Graph truth;
  std::string family_name = "custom";
  std::vector<std::pair<double, double>> cells;  // (alpha, beta) pairs
  std::size_t n_trials = 300;
  EstimatorConfig estimator_cfg;
  Seed seed;
  std::size_t threads = 1;
};

struct CoverageRow {
  std::string family;
  std::size_t n = 0;
  double mean_degree = 0;
  double alpha = 0;
  double beta = 0;
  double kappa_true = 0;
  double mae = 0;
  double rf = 0;           // fraction of intervals covering the true value
  double mean_ci_len = 0;
  std::size_t trials = 0;
  std::size_t failures = 0;  // trials where estimation threw
  bool degenerate = false;   // noiseless cell: rf is meaningless
  std::uint64_t seed_master = 0;
  std::uint64_t seed_stream = 0;
};

// Point-estimate error and interval coverage of the three-replicate
// estimator over the (alpha, beta) grid.
std::vector<CoverageRow> run_coverage(const CoverageConfig& cfg);

void write_csv(const std::filesystem::path& path, const std::vector<BiasVarRow>& rows);
void write_csv(const std::filesystem::path& path, const std::vector<CoverageRow>& rows);
std::string to_csv(const std::vector<BiasVarRow>& rows);
std::string to_csv(const std::vector<CoverageRow>& rows);

}  // namespace branchkit
