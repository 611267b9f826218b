#include "vmf/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "vmf/errors.hpp"
#include "vmf/rng.hpp"

namespace vmf {

namespace {

void validate_config(const TrainConfig& cfg) {
  if (!(cfg.kappa >= 0.0) || !std::isfinite(cfg.kappa)) {
    throw ConfigError("train: kappa must be finite and >= 0");
  }
  if (cfg.batch_size < 1) {
    throw ConfigError("train: batch_size must be >= 1");
  }
  if (cfg.lr_schedule.empty() || cfg.lr_schedule.front().iteration != 0) {
    throw ConfigError("train: lr schedule must start at iteration 0");
  }
  for (std::size_t i = 0; i < cfg.lr_schedule.size(); ++i) {
    const auto& pt = cfg.lr_schedule[i];
    if (!(pt.rate > 0.0) || !std::isfinite(pt.rate)) {
      throw ConfigError("train: lr schedule rates must be positive");
    }
    if (i > 0 && pt.iteration <= cfg.lr_schedule[i - 1].iteration) {
      throw ConfigError("train: lr schedule iterations must increase");
    }
  }
  if (!(cfg.momentum >= 0.0) || !(cfg.momentum < 1.0)) {
    throw ConfigError("train: momentum must lie in [0, 1)");
  }
}

double rate_at(const std::vector<LrPoint>& schedule, std::size_t iteration) {
  double rate = schedule.front().rate;
  for (const auto& pt : schedule) {
    if (pt.iteration > iteration) break;
    rate = pt.rate;
  }
  return rate;
}

}  // namespace

PrototypeSet prototypes_from_embeddings(const Matrix& embeddings,
                                        const std::vector<int>& labels,
                                        std::size_t num_classes, double kappa,
                                        const Matrix* previous,
                                        std::uint64_t fallback_seed,
                                        std::vector<int>* degenerate_out) {
  if (embeddings.rows() != labels.size()) {
    throw ConfigError("update_prototypes: label count != embedding count");
  }
  if (num_classes < 2) {
    throw ConfigError("update_prototypes: need at least 2 classes");
  }
  if (previous && (previous->rows() != num_classes ||
                   previous->cols() != embeddings.cols())) {
    throw ConfigError("update_prototypes: previous prototype shape mismatch");
  }
  const std::size_t p = embeddings.cols();
  Matrix sums(num_classes, p);
  std::vector<std::size_t> counts(num_classes, 0);
  for (std::size_t n = 0; n < embeddings.rows(); ++n) {
    const int y = labels[n];
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
      throw DataError("update_prototypes: label " + std::to_string(y) +
                      " outside [0, " + std::to_string(num_classes) + ")");
    }
    const double* r = embeddings.row(n);
    double* s = sums.row(static_cast<std::size_t>(y));
    for (std::size_t j = 0; j < p; ++j) s[j] += r[j];
    ++counts[static_cast<std::size_t>(y)];
  }

  Matrix mus(num_classes, p);
  if (degenerate_out) degenerate_out->clear();
  for (std::size_t c = 0; c < num_classes; ++c) {
    const bool degenerate = counts[c] == 0 || norm(sums.row_span(c)) < 1e-12;
    if (!degenerate) {
      auto unit = normalize(sums.row_span(c));
      for (std::size_t j = 0; j < p; ++j) mus(c, j) = unit[j];
      continue;
    }
    if (degenerate_out) degenerate_out->push_back(static_cast<int>(c));
    if (previous) {
      for (std::size_t j = 0; j < p; ++j) mus(c, j) = (*previous)(c, j);
    } else {
      // Keyed by class only, so a class that stays degenerate gets the same
      // fallback direction at every refresh.
      Rng rng(derive_seed(fallback_seed, "proto-fallback", c));
      auto unit = random_unit_vector(rng, p);
      for (std::size_t j = 0; j < p; ++j) mus(c, j) = unit[j];
    }
  }
  return PrototypeSet(std::move(mus), kappa);
}

PrototypeSet update_prototypes(const Network& net, const LabeledDataset& data,
                               double kappa, const Matrix* previous,
                               std::uint64_t fallback_seed,
                               std::vector<int>* degenerate_out) {
  Matrix embeddings = forward(net, data.features);
  return prototypes_from_embeddings(embeddings, data.labels, data.num_classes,
                                    kappa, previous, fallback_seed,
                                    degenerate_out);
}

TrainResult train(Network net, const LabeledDataset& data,
                  const TrainConfig& config, const RefreshHook& on_refresh) {
  validate_config(config);
  const std::size_t num_classes = validate_dense_labels(data.labels);
  if (num_classes < 2) {
    throw ConfigError("train: need at least 2 classes");
  }
  if (data.features.rows() != data.labels.size()) {
    throw ConfigError("train: feature/label count mismatch");
  }

  const std::size_t N = data.features.rows();
  const std::size_t batch = std::min(config.batch_size, N);
  const std::size_t iters_per_epoch = (N + batch - 1) / batch;
  const std::size_t total_iters = config.epochs * iters_per_epoch;
  const std::size_t interval = config.prototype_update_interval == 0
                                   ? iters_per_epoch
                                   : config.prototype_update_interval;

  TrainLog log;
  Rng shuffle_rng(derive_seed(config.shuffle_seed, "shuffle"));
  const std::uint64_t fallback_seed = config.shuffle_seed;
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);

  OptimizerState opt = make_optimizer(net, config.lr_schedule.front().rate,
                                      config.momentum);

  Matrix proto_mus;  // empty until the first refresh
  bool have_protos = false;
  const auto t0 = std::chrono::steady_clock::now();

  auto refresh = [&](std::size_t iteration) {
    Matrix embeddings = forward(net, data.features);
    std::vector<int> degenerate;
    PrototypeSet next = prototypes_from_embeddings(
        embeddings, data.labels, num_classes, config.kappa,
        have_protos ? &proto_mus : nullptr, fallback_seed, &degenerate);
    if (have_protos) {
      // Same embeddings, old vs new prototypes: the refresh is expected to
      // lower the full-dataset loss, but nothing guarantees it (moving one
      // class's mean shifts every denominator), hence a warning, not an error.
      const double before =
          vmf_loss(embeddings, data.labels,
                   PrototypeSet(proto_mus, config.kappa)).mean_loss;
      const double after = vmf_loss(embeddings, data.labels, next).mean_loss;
      if (after > before + 1e-12) {
        log.warnings.push_back("refresh at iteration " +
                               std::to_string(iteration) +
                               " increased full-data loss from " +
                               std::to_string(before) + " to " +
                               std::to_string(after));
      }
    }
    proto_mus = next.mus();
    have_protos = true;
    log.refreshes.push_back({iteration, proto_mus, degenerate});
    if (on_refresh) on_refresh(net, next, iteration);
    return next;
  };

  PrototypeSet protos = refresh(0);
  for (std::size_t it = 0; it < total_iters; ++it) {
    if (it % iters_per_epoch == 0) {
      shuffle_rng.shuffle(order);
    }
    if (it != 0 && it % interval == 0) {
      protos = refresh(it);
    }

    const std::size_t start = (it % iters_per_epoch) * batch;
    const std::size_t stop = std::min(start + batch, N);
    Matrix x(stop - start, data.features.cols());
    std::vector<int> y(stop - start);
    for (std::size_t b = start; b < stop; ++b) {
      const std::size_t src = order[b];
      const double* in = data.features.row(src);
      double* out = x.row(b - start);
      for (std::size_t j = 0; j < x.cols(); ++j) out[j] = in[j];
      y[b - start] = data.labels[src];
    }

    ForwardCache cache;
    Matrix embeddings = forward(net, x, &cache);
    LossReport report = vmf_loss(embeddings, y, protos);
    if (!std::isfinite(report.mean_loss)) {
      throw NumericError("train: non-finite loss at iteration " +
                         std::to_string(it));
    }
    Matrix grad_emb = vmf_loss_grad_embedding(embeddings, y, protos);
    Gradients grads = backward(net, cache, grad_emb);
    opt.learning_rate = rate_at(config.lr_schedule, it);
    sgd_step(net, grads, opt);

    log.losses.push_back(report.mean_loss);
    log.learning_rates.push_back(opt.learning_rate);
    log.timestamps.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count());
  }

  protos = refresh(total_iters);
  return TrainResult{std::move(net), std::move(protos), std::move(log)};
}

}  // namespace vmf
