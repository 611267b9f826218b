#include "vmf/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vmf/errors.hpp"
#include "vmf/kernels.hpp"

namespace vmf {

PrototypeSet::PrototypeSet(Matrix mus, double kappa)
    : mus_(std::move(mus)), kappa_(kappa) {
  if (mus_.rows() < 2 || mus_.cols() < 2) {
    throw ConfigError("PrototypeSet: needs >= 2 classes and dimension >= 2");
  }
  if (!(kappa_ >= 0.0) || !std::isfinite(kappa_)) {
    throw ConfigError("PrototypeSet: kappa must be finite and >= 0");
  }
  for (std::size_t c = 0; c < mus_.rows(); ++c) {
    const double len = norm(mus_.row_span(c));
    if (std::abs(len - 1.0) > 1e-9) {
      throw ConfigError("PrototypeSet: prototype " + std::to_string(c) +
                        " is not unit length");
    }
  }
}

std::vector<double> class_posterior(
    const UnitVector& r, const PrototypeSet& protos,
    const std::optional<std::vector<double>>& per_class_kappa) {
  if (r.dim() != protos.dim()) {
    throw ConfigError("class_posterior: dimension mismatch");
  }
  const std::size_t C = protos.num_classes();
  if (per_class_kappa) {
    if (per_class_kappa->size() != C) {
      throw ConfigError("class_posterior: per-class kappa length != C");
    }
    for (double k : *per_class_kappa) {
      if (!(k >= 0.0) || !std::isfinite(k)) {
        throw ConfigError("class_posterior: per-class kappa must be >= 0");
      }
    }
  }

  const int p = static_cast<int>(r.dim());
  std::vector<double> logits(C);
  for (std::size_t c = 0; c < C; ++c) {
    double dot = 0.0;
    auto mu = protos.prototype(c);
    for (std::size_t j = 0; j < r.dim(); ++j) dot += mu[j] * r.coords()[j];
    if (per_class_kappa) {
      const double k = (*per_class_kappa)[c];
      logits[c] = log_normalizer(p, k) + k * dot;
    } else {
      logits[c] = protos.kappa() * dot;  // shared kappa: normalizers cancel
    }
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& v : logits) {
    v = std::exp(v - mx);
    total += v;
  }
  for (double& v : logits) v /= total;
  return logits;
}

namespace {

void check_batch(const Matrix& embeddings, const std::vector<int>& labels,
                 const PrototypeSet& protos, const char* who) {
  if (embeddings.rows() == 0) {
    throw ConfigError(std::string(who) + ": empty batch");
  }
  if (embeddings.rows() != labels.size()) {
    throw ConfigError(std::string(who) + ": label count != embedding count");
  }
  if (embeddings.cols() != protos.dim()) {
    throw ConfigError(std::string(who) + ": embedding dimension != prototype dimension");
  }
  const int C = static_cast<int>(protos.num_classes());
  for (std::size_t n = 0; n < labels.size(); ++n) {
    if (labels[n] < 0 || labels[n] >= C) {
      throw DataError(std::string(who) + ": label " + std::to_string(labels[n]) +
                      " at row " + std::to_string(n) + " outside [0, " +
                      std::to_string(C) + ")");
    }
  }
}

}  // namespace

LossReport vmf_loss(const Matrix& embeddings, const std::vector<int>& labels,
                    const PrototypeSet& protos) {
  check_batch(embeddings, labels, protos, "vmf_loss");
  const std::size_t N = embeddings.rows();
  const std::size_t C = protos.num_classes();

  Matrix scores;
  kernels::matmul_nt(embeddings, protos.mus(), scores);

  LossReport report;
  report.per_sample.resize(N);
  const double kappa = protos.kappa();
  for (std::size_t n = 0; n < N; ++n) {
    const double* s = scores.row(n);
    double mx = kappa * s[0];
    for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, kappa * s[c]);
    double lse = 0.0;
    for (std::size_t c = 0; c < C; ++c) lse += std::exp(kappa * s[c] - mx);
    lse = mx + std::log(lse);
    report.per_sample[n] = lse - kappa * s[static_cast<std::size_t>(labels[n])];
  }
  double total = 0.0;
  for (double v : report.per_sample) total += v;
  report.mean_loss = total / static_cast<double>(N);
  return report;
}

Matrix vmf_loss_grad_embedding(const Matrix& embeddings,
                               const std::vector<int>& labels,
                               const PrototypeSet& protos) {
  check_batch(embeddings, labels, protos, "vmf_loss_grad_embedding");
  const std::size_t N = embeddings.rows();
  const double kappa = protos.kappa();

  Matrix scores;
  kernels::matmul_nt(embeddings, protos.mus(), scores);
  for (double& v : scores.data()) v *= kappa;

  Matrix probs;
  kernels::softmax_rows(scores, probs);
  for (std::size_t n = 0; n < N; ++n) {
    probs(n, static_cast<std::size_t>(labels[n])) -= 1.0;
  }

  // (P - onehot) * mus, scaled by kappa / N.
  Matrix grad;
  std::vector<double> zero_bias(protos.dim(), 0.0);
  kernels::affine(probs, protos.mus(), zero_bias, grad);
  const double scale = kappa / static_cast<double>(N);
  for (double& v : grad.data()) v *= scale;
  return grad;
}

std::vector<double> normalize_backward(std::span<const double> z,
                                       std::span<const double> upstream) {
  if (z.size() != upstream.size()) {
    throw ConfigError("normalize_backward: size mismatch");
  }
  const double len = norm(z);
  if (!(len >= 1e-12)) {
    throw ZeroNormError("normalize_backward: input norm below 1e-12");
  }
  double radial = 0.0;  // r . upstream with r = z/||z||
  for (std::size_t j = 0; j < z.size(); ++j) radial += (z[j] / len) * upstream[j];
  std::vector<double> grad(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    grad[j] = (upstream[j] - radial * (z[j] / len)) / len;
  }
  return grad;
}

}  // namespace vmf
