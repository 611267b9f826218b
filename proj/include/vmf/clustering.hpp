#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vmf/directional.hpp"
#include "vmf/matrix.hpp"

namespace vmf {

enum class EmMode { soft, hard };

struct ClusteringResult {
  std::vector<int> assignments;  // hard labels; argmax of responsibilities
  Matrix responsibilities;       // N x k, soft movMF only (empty otherwise)
  Matrix centroids;              // k x p, unit rows
  std::vector<double> kappas;    // movMF only (empty for k-means)
  std::vector<double> mixing;    // movMF mixture weights
  std::vector<double> objective_trace;  // one entry per iteration
  std::vector<std::string> events;      // empty-cluster reseeds and the like
  std::size_t iterations = 0;
};

// Cosine k-means: assign each point to the centroid of maximum cosine (ties
// toward the smaller cluster index), recompute centroids as normalized
// member resultants, stop when assignments are unchanged, the objective
// (sum of point-to-assigned-centroid cosines, non-decreasing) improves by
// less than tol, or max_iter is hit. Centroids start from a seeded greedy
// farthest-point pick. Requires 1 <= k <= N.
ClusteringResult spherical_kmeans(const SampleCloud& points, std::size_t k,
                                  std::uint64_t seed, std::size_t max_iter = 100,
                                  double tol = 0.0);

// EM for the mixture sum_h pi_h Z_p(kappa_h) exp(kappa_h mu_h.r). Soft mode
// uses responsibilities from log densities (row softmax); hard mode one-hot
// argmax. M-step: pi from responsibility masses, mu from weighted
// resultants, kappa from the resultant-length approximation with the
// additional 1e5 ceiling so a near-singleton cluster cannot overflow the
// normalizer; a kappa candidate that would lower its component's
// complete-data term is replaced by that term's exact maximizer (generalized
// EM), which keeps the soft trace monotone despite the approximation. The
// objective trace is the total data log-likelihood (classification
// log-likelihood in hard mode); soft mode is non-decreasing within 1e-8,
// hard mode's dips are logged in events, not asserted. An emptied component
// reseeds at the worst-fit point.
ClusteringResult movmf_em(const SampleCloud& points, std::size_t k, EmMode mode,
                          std::uint64_t seed, std::size_t max_iter = 100,
                          double tol = 1e-8);

}  // namespace vmf
