#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "vmf/dataset.hpp"
#include "vmf/directional.hpp"
#include "vmf/network.hpp"
#include "vmf/objective.hpp"

namespace vmf {

// Nearest-prototype rule: argmax of mu_i.r, ties toward the smallest class
// index. Equivalent to argmin Euclidean distance since d^2 = 2 - 2 cos on
// unit vectors.
int predict(const UnitVector& r, const PrototypeSet& protos);
std::vector<int> predict_batch(const Matrix& embeddings, const PrototypeSet& protos);

// Fraction of samples whose nearest prototype matches the label.
double accuracy(const Network& net, const PrototypeSet& protos,
                const LabeledDataset& data);

struct RetrievalResult {
  // Top max(ks) neighbor indices per query, cosine-descending, ties by
  // ascending index, query itself excluded.
  std::vector<std::vector<std::size_t>> neighbors;
  std::map<std::size_t, double> recall_at;  // K -> recall over eligible queries
  std::size_t evaluated_queries = 0;
  std::size_t skipped_queries = 0;  // no same-class candidate existed
};

// Recall@K: fraction of queries with at least one same-class item in the
// top K. Queries with no same-class candidate are excluded from the
// denominator and counted in skipped_queries. Requires N >= max(ks) + 1.
RetrievalResult recall_at_k(const Matrix& embeddings,
                            const std::vector<int>& labels,
                            std::vector<std::size_t> ks);

// Normalized mutual information I(A;B)/sqrt(H(A) H(B)) with natural logs.
// Both partitions single-cluster: 1.0 (zero-entropy convention). Exactly one
// single-cluster partition: 0.0 (no information either way).
double nmi(const std::vector<int>& labels_a, const std::vector<int>& labels_b);

struct SpaceDiagnostics {
  double average_kappa_hat = 0.0;  // mean per-class concentration estimate
  double average_cosine = 0.0;     // mean over unordered prototype pairs
  std::vector<int> skipped_classes;  // fewer than 2 samples
  bool kappa_clamped = false;        // some class hit the Rbar clamp
};

SpaceDiagnostics diagnostics(const Network& net, const PrototypeSet& protos,
                             const LabeledDataset& data);

}  // namespace vmf
