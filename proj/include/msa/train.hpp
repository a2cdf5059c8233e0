#pragma once

#include <memory>
#include <vector>

#include "msa/dataset.hpp"
#include "msa/model.hpp"

namespace msa {

struct TrainConfig {
    double lr = 1e-3;
    int batch_size = 32;
    int max_epochs = 100;
    double lr_decay = 0.5;
    int decay_patience = 2;   // epochs without dev improvement before decay
    int stop_patience = 10;   // epochs without dev improvement before stopping
    uint64_t seed = 1;
    bool parallel = true;
    // Adam
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
};

struct EpochMetrics {
    int epoch = 0;
    double train_loss = 0.0;
    double dev_loss = 0.0;
    double lr = 0.0;
};

struct TrainResult {
    std::unique_ptr<SequenceModel> best;  // best-dev checkpoint
    int best_epoch = -1;
    double best_dev = 0.0;
    std::vector<EpochMetrics> history;
    bool stopped_early = false;
};

/// Mean-squared-error loss and gradient over a batch, averaged. The batch
/// is split into fixed-size chunks whose partial gradients are reduced in
/// chunk order, so the result is identical whether or not OpenMP fans the
/// chunks out over threads.
double batch_gradient(const SequenceModel& model,
                      const std::vector<Example>& examples,
                      const std::vector<int>& indices,
                      std::vector<double>& grad, bool parallel);

/// Serial reference path (no chunking): straight index-order accumulation.
/// Kept for testing the parallel kernel against.
double batch_gradient_serial(const SequenceModel& model,
                             const std::vector<Example>& examples,
                             const std::vector<int>& indices,
                             std::vector<double>& grad);

double dataset_loss(const SequenceModel& model,
                    const std::vector<Example>& examples, bool parallel);

/// Adam on MSE with lr decay and early stopping on the dev loss; fully
/// deterministic given the config seed. Throws std::runtime_error on a
/// non-finite loss (message carries the lr and batch id).
TrainResult train(const SequenceModel& initial, const Dataset& data,
                  const TrainConfig& cfg);

}  // namespace msa
