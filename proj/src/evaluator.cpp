#include "vmf/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vmf/errors.hpp"
#include "vmf/kernels.hpp"

namespace vmf {

namespace {

std::size_t argmax_strict(const double* v, std::size_t n) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (v[i] > v[best]) best = i;  // ties keep the smaller index
  }
  return best;
}

}  // namespace

int predict(const UnitVector& r, const PrototypeSet& protos) {
  if (r.dim() != protos.dim()) {
    throw ConfigError("predict: dimension mismatch");
  }
  std::vector<double> scores(protos.num_classes());
  for (std::size_t c = 0; c < protos.num_classes(); ++c) {
    auto mu = protos.prototype(c);
    double dot = 0.0;
    for (std::size_t j = 0; j < r.dim(); ++j) dot += mu[j] * r.coords()[j];
    scores[c] = dot;
  }
  return static_cast<int>(argmax_strict(scores.data(), scores.size()));
}

std::vector<int> predict_batch(const Matrix& embeddings,
                               const PrototypeSet& protos) {
  if (embeddings.cols() != protos.dim()) {
    throw ConfigError("predict_batch: dimension mismatch");
  }
  Matrix scores;
  kernels::matmul_nt(embeddings, protos.mus(), scores);
  std::vector<int> out(embeddings.rows());
  for (std::size_t n = 0; n < embeddings.rows(); ++n) {
    out[n] = static_cast<int>(argmax_strict(scores.row(n), scores.cols()));
  }
  return out;
}

double accuracy(const Network& net, const PrototypeSet& protos,
                const LabeledDataset& data) {
  Matrix embeddings = forward(net, data.features);
  std::vector<int> preds = predict_batch(embeddings, protos);
  std::size_t hits = 0;
  for (std::size_t n = 0; n < preds.size(); ++n) {
    if (preds[n] == data.labels[n]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

RetrievalResult recall_at_k(const Matrix& embeddings,
                            const std::vector<int>& labels,
                            std::vector<std::size_t> ks) {
  const std::size_t N = embeddings.rows();
  if (labels.size() != N) {
    throw ConfigError("recall_at_k: label count != embedding count");
  }
  if (ks.empty()) {
    throw ConfigError("recall_at_k: no K values given");
  }
  for (std::size_t k : ks) {
    if (k == 0) throw ConfigError("recall_at_k: K must be >= 1");
  }
  const std::size_t max_k = *std::max_element(ks.begin(), ks.end());
  if (N < max_k + 1) {
    throw DataError("recall_at_k: insufficient data, need at least " +
                    std::to_string(max_k + 1) + " points for K=" +
                    std::to_string(max_k));
  }

  // Full cosine score block; desk-scale N keeps N^2 doubles comfortable.
  Matrix scores;
  kernels::matmul_nt(embeddings, embeddings, scores);

  RetrievalResult result;
  result.neighbors.assign(N, {});
  std::vector<std::size_t> hit_counts(ks.size(), 0);
  for (std::size_t q = 0; q < N; ++q) {
    bool eligible = false;
    for (std::size_t j = 0; j < N && !eligible; ++j) {
      eligible = j != q && labels[j] == labels[q];
    }

    std::vector<std::size_t> order;
    order.reserve(N - 1);
    for (std::size_t j = 0; j < N; ++j) {
      if (j != q) order.push_back(j);
    }
    const double* s = scores.row(q);
    const std::size_t keep = std::min(max_k, order.size());
    std::partial_sort(order.begin(), order.begin() + keep, order.end(),
                      [s](std::size_t a, std::size_t b) {
                        if (s[a] != s[b]) return s[a] > s[b];
                        return a < b;
                      });
    order.resize(keep);
    result.neighbors[q] = order;

    if (!eligible) {
      ++result.skipped_queries;
      continue;
    }
    ++result.evaluated_queries;
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      const std::size_t k = std::min(ks[ki], order.size());
      for (std::size_t j = 0; j < k; ++j) {
        if (labels[order[j]] == labels[q]) {
          ++hit_counts[ki];
          break;
        }
      }
    }
  }

  for (std::size_t ki = 0; ki < ks.size(); ++ki) {
    result.recall_at[ks[ki]] =
        result.evaluated_queries == 0
            ? 0.0
            : static_cast<double>(hit_counts[ki]) /
                  static_cast<double>(result.evaluated_queries);
  }
  return result;
}

double nmi(const std::vector<int>& labels_a, const std::vector<int>& labels_b) {
  if (labels_a.size() != labels_b.size()) {
    throw DataError("nmi: length mismatch");
  }
  if (labels_a.empty()) {
    throw DataError("nmi: empty labelings");
  }
  const double N = static_cast<double>(labels_a.size());

  std::map<int, double> count_a, count_b;
  std::map<std::pair<int, int>, double> joint;
  for (std::size_t n = 0; n < labels_a.size(); ++n) {
    count_a[labels_a[n]] += 1.0;
    count_b[labels_b[n]] += 1.0;
    joint[{labels_a[n], labels_b[n]}] += 1.0;
  }

  auto entropy = [N](const std::map<int, double>& counts) {
    double h = 0.0;
    for (const auto& [label, c] : counts) {
      const double p = c / N;
      h -= p * std::log(p);
    }
    return h;
  };
  const double ha = entropy(count_a);
  const double hb = entropy(count_b);
  if (ha == 0.0 && hb == 0.0) return 1.0;  // both single-cluster
  if (ha == 0.0 || hb == 0.0) return 0.0;  // one constant, no shared info

  double mi = 0.0;
  for (const auto& [ab, c] : joint) {
    const double p = c / N;
    mi += p * std::log(p * N * N / (count_a[ab.first] * count_b[ab.second]));
  }
  const double value = mi / std::sqrt(ha * hb);
  return std::clamp(value, 0.0, 1.0);
}

SpaceDiagnostics diagnostics(const Network& net, const PrototypeSet& protos,
                             const LabeledDataset& data) {
  Matrix embeddings = forward(net, data.features);
  const std::size_t C = protos.num_classes();
  for (int y : data.labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= C) {
      throw DataError("diagnostics: label " + std::to_string(y) +
                      " outside prototype range");
    }
  }

  SpaceDiagnostics diag;
  double kappa_sum = 0.0;
  std::size_t kappa_classes = 0;
  for (std::size_t c = 0; c < C; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t n = 0; n < data.labels.size(); ++n) {
      if (static_cast<std::size_t>(data.labels[n]) == c) members.push_back(n);
    }
    if (members.size() < 2) {
      diag.skipped_classes.push_back(static_cast<int>(c));
      continue;
    }
    Matrix pts(members.size(), embeddings.cols());
    for (std::size_t m = 0; m < members.size(); ++m) {
      const double* src = embeddings.row(members[m]);
      double* dst = pts.row(m);
      for (std::size_t j = 0; j < pts.cols(); ++j) dst[j] = src[j];
    }
    SampleCloud cloud = SampleCloud::normalized(std::move(pts));
    std::vector<double> sum(cloud.dim(), 0.0);
    for (std::size_t m = 0; m < cloud.size(); ++m) {
      const double* r = cloud.points().row(m);
      for (std::size_t j = 0; j < cloud.dim(); ++j) sum[j] += r[j];
    }
    const double rbar = norm(sum) / static_cast<double>(cloud.size());
    if (rbar > 1.0 - 1e-9) diag.kappa_clamped = true;
    kappa_sum += estimate_kappa(cloud);
    ++kappa_classes;
  }
  diag.average_kappa_hat = kappa_classes > 0 ? kappa_sum / kappa_classes : 0.0;

  double cos_sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < C; ++i) {
    for (std::size_t j = i + 1; j < C; ++j) {
      auto a = protos.prototype(i);
      auto b = protos.prototype(j);
      double dot = 0.0;
      for (std::size_t t = 0; t < a.size(); ++t) dot += a[t] * b[t];
      cos_sum += dot;
      ++pairs;
    }
  }
  diag.average_cosine = cos_sum / static_cast<double>(pairs);
  return diag;
}

}  // namespace vmf
