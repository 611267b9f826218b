#include "vmf/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vmf/bessel.hpp"
#include "vmf/errors.hpp"
#include "vmf/kernels.hpp"
#include "vmf/rng.hpp"

namespace vmf {

namespace {

void validate_k(std::size_t k, std::size_t n, const char* who) {
  if (k < 1 || k > n) {
    throw ConfigError(std::string(who) + ": invalid k=" + std::to_string(k) +
                      " for " + std::to_string(n) + " points");
  }
}

// Greedy farthest-point seeding on cosine distance: start from a seeded
// random point, then repeatedly take the unchosen point whose best cosine
// to the chosen set is smallest (ties toward the smaller index).
Matrix farthest_point_init(const SampleCloud& points, std::size_t k,
                           std::uint64_t seed) {
  const std::size_t n = points.size();
  Rng rng(derive_seed(seed, "clustering"));
  std::vector<std::size_t> chosen;
  chosen.push_back(rng.index(n));
  std::vector<double> best_cos(n, -2.0);
  while (chosen.size() < k) {
    const double* latest = points.points().row(chosen.back());
    for (std::size_t i = 0; i < n; ++i) {
      const double* r = points.points().row(i);
      double dot = 0.0;
      for (std::size_t j = 0; j < points.dim(); ++j) dot += latest[j] * r[j];
      if (dot > best_cos[i]) best_cos[i] = dot;
    }
    std::size_t next = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
      if (next == n || best_cos[i] < best_cos[next]) next = i;
    }
    chosen.push_back(next);
  }
  Matrix centroids(k, points.dim());
  for (std::size_t h = 0; h < k; ++h) {
    const double* src = points.points().row(chosen[h]);
    for (std::size_t j = 0; j < points.dim(); ++j) centroids(h, j) = src[j];
  }
  return centroids;
}

void copy_point(const SampleCloud& points, std::size_t idx, Matrix& centroids,
                std::size_t h) {
  const double* src = points.points().row(idx);
  for (std::size_t j = 0; j < points.dim(); ++j) centroids(h, j) = src[j];
}

constexpr double kKappaCeiling = 1e5;

// Maximizer of ln Z_p(kappa) + kappa*rbar over [0, ceiling]. The function is
// strictly concave with stationarity A_p(kappa) = rbar, where A_p is the
// Bessel ratio I_{p/2}/I_{p/2-1} = -d ln Z_p/d kappa, so a bisection-guarded
// Newton iteration converges fast from any warm start.
double concentration_root(int p, double rbar, double init) {
  const double nu_num = 0.5 * p;
  const double nu_den = 0.5 * p - 1.0;
  const auto ratio = [&](double k) {
    return std::exp(log_bessel_i(nu_num, k) - log_bessel_i(nu_den, k));
  };
  if (ratio(kKappaCeiling) <= rbar) return kKappaCeiling;
  double lo = 0.0, hi = kKappaCeiling;
  double k = std::min(std::max(init, 1e-8), kKappaCeiling);
  for (int it = 0; it < 60; ++it) {
    const double a = ratio(k);
    const double g = a - rbar;
    if (std::abs(g) < 1e-13) break;
    if (g > 0.0) {
      hi = k;
    } else {
      lo = k;
    }
    const double da = 1.0 - a * a - (p - 1) / k * a;  // A_p'(k) > 0
    double next = da > 1e-300 ? k - g / da : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - k) < 1e-12 * std::max(1.0, k)) {
      k = next;
      break;
    }
    k = next;
  }
  return k;
}

}  // namespace

ClusteringResult spherical_kmeans(const SampleCloud& points, std::size_t k,
                                  std::uint64_t seed, std::size_t max_iter,
                                  double tol) {
  validate_k(k, points.size(), "spherical_kmeans");
  const std::size_t n = points.size();
  const std::size_t p = points.dim();

  ClusteringResult result;
  result.centroids = farthest_point_init(points, k, seed);
  result.assignments.assign(n, -1);

  Matrix scores;
  std::vector<int> prev(n, -1);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    kernels::matmul_nt(points.points(), result.centroids, scores);
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double* s = scores.row(i);
      std::size_t best = 0;
      for (std::size_t h = 1; h < k; ++h) {
        if (s[h] > s[best]) best = h;
      }
      result.assignments[i] = static_cast<int>(best);
      objective += s[best];
    }
    result.iterations = iter + 1;
    const bool small_gain =
        !result.objective_trace.empty() &&
        objective - result.objective_trace.back() < tol;
    result.objective_trace.push_back(objective);
    if (result.assignments == prev || small_gain) break;
    prev = result.assignments;

    for (std::size_t h = 0; h < k; ++h) {
      std::vector<double> sum(p, 0.0);
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (result.assignments[i] != static_cast<int>(h)) continue;
        const double* r = points.points().row(i);
        for (std::size_t j = 0; j < p; ++j) sum[j] += r[j];
        ++count;
      }
      if (count == 0 || norm(sum) < 1e-12) {
        // Reseed at the worst-fit point: lowest cosine to its own centroid.
        std::size_t worst = 0;
        double worst_cos = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
          const double c = scores(i, static_cast<std::size_t>(result.assignments[i]));
          if (c < worst_cos) {
            worst_cos = c;
            worst = i;
          }
        }
        copy_point(points, worst, result.centroids, h);
        result.events.push_back("iteration " + std::to_string(iter) +
                                ": cluster " + std::to_string(h) +
                                " emptied, reseeded at point " +
                                std::to_string(worst));
        continue;
      }
      auto unit = normalize(sum);
      for (std::size_t j = 0; j < p; ++j) result.centroids(h, j) = unit[j];
    }
  }
  return result;
}

ClusteringResult movmf_em(const SampleCloud& points, std::size_t k, EmMode mode,
                          std::uint64_t seed, std::size_t max_iter, double tol) {
  validate_k(k, points.size(), "movmf_em");
  const std::size_t n = points.size();
  const std::size_t p = points.dim();
  const int ip = static_cast<int>(p);

  ClusteringResult result;
  result.centroids = farthest_point_init(points, k, seed);
  result.kappas.assign(k, 1.0);
  result.mixing.assign(k, 1.0 / static_cast<double>(k));
  result.assignments.assign(n, 0);

  Matrix resp(n, k);
  Matrix dots;
  std::vector<double> point_loglik(n, 0.0);

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    // E-step: responsibilities from log densities.
    kernels::matmul_nt(points.points(), result.centroids, dots);
    std::vector<double> log_norm(k);
    for (std::size_t h = 0; h < k; ++h) {
      log_norm[h] = std::log(result.mixing[h]) + log_normalizer(ip, result.kappas[h]);
    }
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double* d = dots.row(i);
      double mx = -std::numeric_limits<double>::infinity();
      std::size_t best = 0;
      std::vector<double> logdens(k);
      for (std::size_t h = 0; h < k; ++h) {
        logdens[h] = log_norm[h] + result.kappas[h] * d[h];
        if (logdens[h] > mx) {
          mx = logdens[h];
          best = h;
        }
      }
      double lse = 0.0;
      for (std::size_t h = 0; h < k; ++h) lse += std::exp(logdens[h] - mx);
      lse = mx + std::log(lse);
      point_loglik[i] = lse;
      result.assignments[i] = static_cast<int>(best);
      if (mode == EmMode::soft) {
        for (std::size_t h = 0; h < k; ++h) {
          resp(i, h) = std::exp(logdens[h] - lse);
        }
        objective += lse;
      } else {
        for (std::size_t h = 0; h < k; ++h) resp(i, h) = 0.0;
        resp(i, best) = 1.0;
        objective += logdens[best];  // classification log-likelihood
      }
    }
    result.iterations = iter + 1;
    if (!result.objective_trace.empty() && mode == EmMode::hard &&
        objective < result.objective_trace.back() - 1e-12) {
      result.events.push_back("iteration " + std::to_string(iter) +
                              ": hard-mode objective dipped");
    }
    const bool converged = !result.objective_trace.empty() &&
                           std::abs(objective - result.objective_trace.back()) < tol;
    result.objective_trace.push_back(objective);
    if (converged) break;

    // M-step.
    for (std::size_t h = 0; h < k; ++h) {
      double mass = 0.0;
      std::vector<double> weighted(p, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double g = resp(i, h);
        mass += g;
        const double* r = points.points().row(i);
        for (std::size_t j = 0; j < p; ++j) weighted[j] += g * r[j];
      }
      if (mass < 1e-12 || norm(weighted) < 1e-12) {
        std::size_t worst = 0;
        for (std::size_t i = 1; i < n; ++i) {
          if (point_loglik[i] < point_loglik[worst]) worst = i;
        }
        copy_point(points, worst, result.centroids, h);
        result.kappas[h] = 1.0;
        result.mixing[h] = 1.0 / static_cast<double>(n);
        result.events.push_back("iteration " + std::to_string(iter) +
                                ": component " + std::to_string(h) +
                                " emptied, reseeded at point " +
                                std::to_string(worst));
        continue;
      }
      result.mixing[h] = mass / static_cast<double>(n);
      auto unit = normalize(weighted);
      for (std::size_t j = 0; j < p; ++j) result.centroids(h, j) = unit[j];
      double rbar = norm(weighted) / mass;
      if (rbar > 1.0 - 1e-9) rbar = 1.0 - 1e-9;
      const double kappa =
          rbar * (static_cast<double>(p) - rbar * rbar) / (1.0 - rbar * rbar);
      const double candidate = std::min(kappa, kKappaCeiling);
      // The closed-form concentration update approximates the maximizer of
      // this component's complete-data term mass*(ln Z_p(kappa) + kappa*rbar)
      // and can overshoot it, which would send the soft-mode log-likelihood
      // downhill. When that happens, fall back to the exact maximizer
      // (generalized EM): the trace stays monotone and the fixed point does
      // not depend on the path taken to reach it.
      const auto term = [&](double kp) {
        return log_normalizer(ip, kp) + kp * rbar;
      };
      result.kappas[h] = term(candidate) >= term(result.kappas[h])
                             ? candidate
                             : concentration_root(ip, rbar, result.kappas[h]);
    }
    // Keep the mixture normalized after any reseeds.
    double total = 0.0;
    for (double w : result.mixing) total += w;
    for (double& w : result.mixing) w /= total;
  }

  if (mode == EmMode::soft) {
    result.responsibilities = std::move(resp);
  }
  return result;
}

}  // namespace vmf
