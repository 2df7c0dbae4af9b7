#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "branchkit/graph.hpp"
#include "branchkit/rng.hpp"

namespace branchkit {

// Pairwise agreement statistics across the first three replicates.
//   u1: edge density of replicate 1
//   u2: density of edge differences between replicates 1 and 2
//   u3: density of pairs linked in exactly one of the three replicates,
//       averaged over the three roles
struct UStats {
  double u1_hat = 0;
  double u2_hat = 0;
  double u3_hat = 0;
};

struct EstimatorConfig {
  std::optional<double> alpha0;       // fixed-point initializer; defaults to u2_hat
  double epsilon = 1e-8;              // convergence tolerance
  std::size_t max_iterations = 500;
  std::size_t n_bootstrap = 1000;     // variance bootstrap draws
  double confidence_level = 0.95;

  void validate() const;
};

enum class EstimationErrorKind {
  bad_input,
  singular_iterate,
  divergence,
  invalid_region,
  degenerate_density,
  negative_variance,
};

class estimation_error : public std::runtime_error {
 public:
  estimation_error(EstimationErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  EstimationErrorKind kind() const { return kind_; }

 private:
  EstimationErrorKind kind_;
};

struct FixedPoint {
  double alpha_hat = 0;
  double beta_hat = 0;
  double delta_hat = 0;
  std::size_t iterations = 0;
  bool converged = false;
};

struct KappaEstimate {
  std::size_t n = 0;
  double alpha_hat = 0;
  double beta_hat = 0;
  double delta_hat = 0;
  double k3_hat = 0;   // 1 - alpha_hat - beta_hat
  double c1_hat = 0;   // bias-corrected edge density
  double c2_hat = 0;   // bias-corrected two-star density
  double kappa_hat = 0;
  double variance_hat = 0;
  std::pair<double, double> ci{0, 0};
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

using Mat2 = std::array<std::array<double, 2>, 2>;
using Mat23 = std::array<std::array<double, 3>, 2>;
using Mat3 = std::array<std::array<double, 3>, 3>;

// Intermediate state of the variance bootstrap, exposed for inspection.
struct VarianceWorkspace {
  double xi1 = 0, xi2 = 0;  // resampling law over {keep, force-1, force-0}
  double t1 = 0, t2 = 0;
  double k1_hat = 0, k2_hat = 0, k3_hat = 0, k4_hat = 0;
  Mat3 sigma_hat{};
  Mat2 delta_mat{};
  Mat23 g_mat{};
  Mat23 h_mat{};
  Mat2 v1_hat{}, v2_hat{}, v3_hat{}, v_hat{};
  std::vector<std::pair<double, double>> s_samples;
  std::vector<std::string> warnings;
};

// Computed from the first three replicates; throws on fewer than three.
UStats u_stats(const ReplicateSet& reps);

// Iterates the moment equations for (alpha, beta, delta) to a fixed point.
FixedPoint solve_fixed_point(const UStats& us, const EstimatorConfig& cfg);

// Point estimate of the branching factor from three noisy replicates.
// Does not fill variance_hat / ci; see estimate_kappa for the full pipeline.
KappaEstimate kappa_mme(const ReplicateSet& reps, const EstimatorConfig& cfg);

// Bootstrap estimate of Var(kappa_hat); also returns the workspace.
std::pair<double, VarianceWorkspace> kappa_variance(const ReplicateSet& reps,
                                                    const KappaEstimate& est,
                                                    const EstimatorConfig& cfg, Seed seed);

// Normal-approximation interval kappa_hat ± z·sqrt(variance_hat).
std::pair<double, double> confidence_interval(const KappaEstimate& est,
                                              const EstimatorConfig& cfg);

// Point estimate + variance + interval in one call.
KappaEstimate estimate_kappa(const ReplicateSet& reps, const EstimatorConfig& cfg, Seed seed);

// First-order variance of (alpha_hat, beta_hat), for their own intervals.
std::pair<double, double> rate_variances(const KappaEstimate& est, const VarianceWorkspace& ws,
                                         std::size_t n);

struct EpiParams {
  double theta = 0;   // infection rate
  double gamma = 0;   // recovery rate
  double lambda = 0;  // spreading rate, for the immunization threshold

  void validate() const;
};

struct ValueWithCI {
  double value = 0;
  double variance = 0;
  std::pair<double, double> ci{0, 0};
};

// R0 = theta (kappa - 1) / (theta + gamma); variance by the delta method.
ValueWithCI reproduction_number(double kappa, double var_kappa, const EpiParams& p,
                                double level = 0.95);

struct EpidemicThresholds {
  bool subcritical = false;  // kappa <= 1: percolation/epidemic thresholds undefined
  std::optional<ValueWithCI> percolation;  // 1/(kappa-1)
  std::optional<ValueWithCI> epidemic;     // same quantity, reported separately
  ValueWithCI immunization;                // 1 - 1/(lambda kappa)
};

EpidemicThresholds thresholds(double kappa, double var_kappa, double lambda,
                              double level = 0.95);

// {n, alpha_hat, beta_hat, delta_hat, kappa_hat, variance_hat,
//  ci: [lo, hi], converged, iterations, warnings[]}
std::string to_json(const KappaEstimate& est);

}  // namespace branchkit
