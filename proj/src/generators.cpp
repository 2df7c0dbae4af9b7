#include "branchkit/generators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "branchkit/pair_index.hpp"

namespace branchkit {

namespace {

std::uint64_t edge_key(VertexId u, VertexId v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | v;
}

}  // namespace

void ParetoConfig::validate() const {
  if (!(shape > 0)) throw std::invalid_argument("ParetoConfig: shape must be positive");
  if (!(lower_bound > 0) || lower_bound > upper_bound)
    throw std::invalid_argument("ParetoConfig: need 0 < lower_bound <= upper_bound");
}

Graph erdos_renyi(std::size_t n, double p, Seed seed) {
  if (n < 1) throw std::invalid_argument("erdos_renyi: n must be >= 1");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("erdos_renyi: p outside [0,1]");
  Rng rng(seed);
  EdgeList edges;
  const std::uint64_t total = pair_count(n);
  if (p >= 1.0) {
    edges.reserve(total);
    for (VertexId i = 0; i + 1 < n; ++i)
      for (VertexId j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  } else if (p > 0.0) {
    edges.reserve(static_cast<std::size_t>(p * static_cast<double>(total) * 1.1) + 16);
    std::uint64_t t = rng.geometric_skip(p);
    while (t < total) {
      edges.push_back(pair_from_index(n, t));
      t += 1 + rng.geometric_skip(p);
    }
  }
  return Graph(n, std::move(edges));
}

Graph preferential_attachment(std::size_t n, std::size_t m, Seed seed) {
  if (m < 1 || n <= m) throw std::invalid_argument("preferential_attachment: need n > m >= 1");
  Rng rng(seed);
  EdgeList edges;
  std::vector<VertexId> endpoints;  // one entry per half-edge; uniform pick = degree-biased pick
  edges.reserve((m + 1) * m / 2 + (n - m - 1) * m);
  endpoints.reserve(2 * edges.capacity());
  for (VertexId i = 0; i < m + 1; ++i)
    for (VertexId j = i + 1; j < m + 1; ++j) {
      edges.emplace_back(i, j);
      endpoints.push_back(i);
      endpoints.push_back(j);
    }
  std::vector<VertexId> targets;
  targets.reserve(m);
  for (VertexId v = static_cast<VertexId>(m + 1); v < n; ++v) {
    targets.clear();
    while (targets.size() < m) {
      const VertexId cand = endpoints[rng.uniform_below(endpoints.size())];
      if (std::find(targets.begin(), targets.end(), cand) == targets.end())
        targets.push_back(cand);
    }
    for (VertexId t : targets) {
      edges.emplace_back(t, v);
      endpoints.push_back(t);
      endpoints.push_back(v);
    }
  }
  return Graph(n, std::move(edges));
}

double truncated_pareto_mean(double zeta, double d_l, double upper) {
  const double lr = std::log(d_l / upper);  // <= 0
  const double denom = -std::expm1(zeta * lr);  // 1 - (d_l/u)^ζ
  if (denom <= 0.0) return d_l;  // degenerate support
  if (std::abs(zeta - 1.0) < 1e-12) return d_l * (-lr) / denom;
  return zeta * d_l / (zeta - 1.0) * (-std::expm1((zeta - 1.0) * lr)) / denom;
}

double truncated_pareto_quantile(double zeta, double d_l, double upper, double u) {
  const double lr = std::log(d_l / upper);
  const double norm = -std::expm1(zeta * lr);  // 1 - (d_l/u)^ζ
  return d_l * std::pow(1.0 - u * norm, -1.0 / zeta);
}

double solve_pareto_lower_bound(std::size_t n, double zeta, double target_mean_degree) {
  if (n < 2 || !(zeta > 0) || !(target_mean_degree > 0))
    throw std::invalid_argument("solve_pareto_lower_bound: invalid arguments");
  const double upper = static_cast<double>(n - 1);
  double lo = std::min(1e-9, target_mean_degree * 1e-12);
  double hi = upper;
  // mean is increasing in d_L, from ~0 up to the upper bound
  if (truncated_pareto_mean(zeta, lo, upper) > target_mean_degree ||
      target_mean_degree > upper)
    throw std::domain_error("solve_pareto_lower_bound: unachievable target mean");
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (truncated_pareto_mean(zeta, mid, upper) < target_mean_degree)
      lo = mid;
    else
      hi = mid;
    if ((hi - lo) <= 1e-8 * std::max(1.0, lo)) break;
  }
  return 0.5 * (lo + hi);
}

std::vector<VertexId> pareto_degree_sequence(std::size_t n, const ParetoConfig& cfg, Seed seed) {
  cfg.validate();
  if (n < 2) throw std::invalid_argument("pareto_degree_sequence: n must be >= 2");
  if (cfg.upper_bound > static_cast<double>(n - 1))
    throw std::invalid_argument("pareto_degree_sequence: upper_bound exceeds n-1");
  Rng rng(seed);
  std::vector<VertexId> deg(n);
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x =
        truncated_pareto_quantile(cfg.shape, cfg.lower_bound, cfg.upper_bound, rng.next_double());
    double r = std::floor(x + 0.5);  // round half up
    r = std::min(r, cfg.upper_bound);
    deg[i] = static_cast<VertexId>(std::max(0.0, r));
    sum += deg[i];
  }
  if (sum % 2 == 1) {
    // parity fix: bump one uniformly chosen vertex that has headroom
    const VertexId cap = static_cast<VertexId>(n - 1);
    for (int attempt = 0; attempt < 10000; ++attempt) {
      const std::size_t pick = rng.uniform_below(n);
      if (deg[pick] < cap) {
        ++deg[pick];
        return deg;
      }
    }
    --deg[rng.uniform_below(n)];  // everyone saturated; shrink instead
  }
  return deg;
}

Graph configuration_model(std::size_t n, std::vector<VertexId> degrees, Rng& rng) {
  std::vector<VertexId> stubs;
  std::uint64_t sum = 0;
  for (VertexId d : degrees) sum += d;
  if (sum % 2 != 0) throw std::invalid_argument("configuration_model: odd degree sum");
  stubs.reserve(sum);
  for (VertexId v = 0; v < n; ++v)
    for (VertexId k = 0; k < degrees[v]; ++k) stubs.push_back(v);
  // Fisher-Yates with our stream
  for (std::size_t i = stubs.size(); i > 1; --i)
    std::swap(stubs[i - 1], stubs[rng.uniform_below(i)]);

  EdgeList edges;
  edges.reserve(stubs.size() / 2);
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(stubs.size());
  std::vector<Edge> conflicts;
  for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
    const VertexId u = stubs[i], v = stubs[i + 1];
    if (u == v || !seen.insert(edge_key(u, v)).second)
      conflicts.emplace_back(u, v);
    else
      edges.emplace_back(u, v);
  }
  // Repair collisions by swapping with random accepted edges, preserving the
  // degree sequence; anything unrepairable after the pass budget is dropped.
  std::size_t dropped = 0;
  for (int pass = 0; pass < 200 && !conflicts.empty(); ++pass) {
    std::vector<Edge> still;
    for (const auto& [u, v] : conflicts) {
      bool fixed = false;
      for (int attempt = 0; attempt < 50 && !fixed; ++attempt) {
        if (edges.empty()) break;
        const std::size_t k = rng.uniform_below(edges.size());
        const auto [x, y] = edges[k];
        // rewire (u,v) + (x,y) -> (u,x) + (v,y)
        if (u != x && v != y &&
            !seen.count(edge_key(u, x)) && !seen.count(edge_key(v, y)) &&
            edge_key(u, x) != edge_key(v, y)) {
          seen.erase(edge_key(x, y));
          seen.insert(edge_key(u, x));
          seen.insert(edge_key(v, y));
          edges[k] = {u, x};
          edges.emplace_back(v, y);
          fixed = true;
        }
      }
      if (!fixed) still.emplace_back(u, v);
    }
    conflicts.swap(still);
  }
  dropped = conflicts.size();
  (void)dropped;
  return Graph(n, std::move(edges));
}

Graph pareto_configuration(std::size_t n, const ParetoConfig& cfg, Seed seed) {
  auto degrees = pareto_degree_sequence(n, cfg, seed);
  Rng rng(seed.derive(1));
  return configuration_model(n, std::move(degrees), rng);
}

}  // namespace branchkit
