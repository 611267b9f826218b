#pragma once

#include <optional>
#include <span>
#include <vector>

#include "vmf/directional.hpp"
#include "vmf/matrix.hpp"

namespace vmf {

// One learned mean direction per class plus the shared concentration used
// by the loss. Rows of mus are unit vectors; kappa >= 0 (0 makes the loss
// the uniform baseline ln C, useful as a sanity limit).
class PrototypeSet {
 public:
  PrototypeSet(Matrix mus, double kappa);

  const Matrix& mus() const { return mus_; }
  double kappa() const { return kappa_; }
  std::size_t num_classes() const { return mus_.rows(); }
  std::size_t dim() const { return mus_.cols(); }
  std::span<const double> prototype(std::size_t c) const { return mus_.row_span(c); }

 private:
  Matrix mus_;
  double kappa_;
};

// Posterior over classes for one embedding: softmax of
// ln Z_p(kappa_i) + kappa_i mu_i.r, computed with max subtraction. With the
// shared kappa the normalizers cancel and this reduces to softmax of
// kappa mu_i.r, so the Z terms are skipped entirely in that path.
std::vector<double> class_posterior(
    const UnitVector& r, const PrototypeSet& protos,
    const std::optional<std::vector<double>>& per_class_kappa = std::nullopt);

struct LossReport {
  double mean_loss = 0.0;
  std::vector<double> per_sample;
};

// Negative log posterior of the true class, averaged over the batch.
// Embeddings are treated as free vectors (rows need not be exactly unit)
// so finite-difference probes stay well defined.
LossReport vmf_loss(const Matrix& embeddings, const std::vector<int>& labels,
                    const PrototypeSet& protos);

// d(mean loss)/d(embeddings): row n gets
// kappa (sum_i P(i|r_n) mu_i - mu_{y_n}) / N.
Matrix vmf_loss_grad_embedding(const Matrix& embeddings,
                               const std::vector<int>& labels,
                               const PrototypeSet& protos);

// Backward rule of r = z/||z||: maps the gradient wrt r to the gradient
// wrt z by projecting out the radial component and dividing by ||z||.
std::vector<double> normalize_backward(std::span<const double> z,
                                       std::span<const double> upstream);

}  // namespace vmf
