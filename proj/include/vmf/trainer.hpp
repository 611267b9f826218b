#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vmf/dataset.hpp"
#include "vmf/network.hpp"
#include "vmf/objective.hpp"

namespace vmf {

// Piecewise-constant learning rate: the rate of the last entry whose
// iteration is <= the current one. The first entry must sit at iteration 0.
struct LrPoint {
  std::size_t iteration;
  double rate;
};

struct TrainConfig {
  double kappa = 15.0;
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  // SGD iterations between prototype refreshes; 0 means one epoch's worth.
  std::size_t prototype_update_interval = 0;
  std::vector<LrPoint> lr_schedule = {{0, 0.1}};
  double momentum = 0.9;
  std::uint64_t shuffle_seed = 0;
};

struct RefreshRecord {
  std::size_t iteration;        // refresh happened before this SGD iteration
  Matrix prototypes;            // snapshot, rows unit-norm
  std::vector<int> degenerate;  // classes that kept previous/fallback values
};

struct TrainLog {
  std::vector<double> losses;          // one per completed SGD iteration
  std::vector<double> learning_rates;  // rate used at each iteration
  std::vector<RefreshRecord> refreshes;
  std::vector<double> timestamps;  // seconds since start, per iteration; kept
                                   // in memory only so emitted logs stay
                                   // byte-identical across reruns
  std::vector<std::string> warnings;
};

// Mean directions per class from a full forward pass: class i gets the
// normalized sum of its embeddings. A class with no samples or a vanishing
// resultant keeps its previous prototype, or a seeded random unit vector
// when there is no previous set; such classes are listed in *degenerate_out.
PrototypeSet update_prototypes(const Network& net, const LabeledDataset& data,
                               double kappa, const Matrix* previous,
                               std::uint64_t fallback_seed,
                               std::vector<int>* degenerate_out = nullptr);

// Same, but from precomputed embeddings (the trainer reuses its full-pass
// result; tests exercise degenerate geometry directly).
PrototypeSet prototypes_from_embeddings(const Matrix& embeddings,
                                        const std::vector<int>& labels,
                                        std::size_t num_classes, double kappa,
                                        const Matrix* previous,
                                        std::uint64_t fallback_seed,
                                        std::vector<int>* degenerate_out = nullptr);

struct TrainResult {
  Network net;
  PrototypeSet prototypes;
  TrainLog log;
};

// Called right after each prototype refresh (and after the final
// re-estimation); the CLI hangs checkpoint writing off this.
using RefreshHook =
    std::function<void(const Network&, const PrototypeSet&, std::size_t iteration)>;

// The alternating schedule: refresh prototypes from a full forward pass,
// then run l SGD iterations against the frozen set; repeat until the epoch
// budget is spent; re-estimate once more from the final network. The first
// refresh happens before any SGD step, so the initial prototypes reflect
// the untrained network. Aborts with NumericError if a loss goes non-finite.
TrainResult train(Network net, const LabeledDataset& data,
                  const TrainConfig& config, const RefreshHook& on_refresh = {});

}  // namespace vmf
