#include "msa/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "msa/parallel.hpp"
#include "msa/rng.hpp"

namespace msa {

namespace {

constexpr int kChunk = 8;  // fixed chunk size keeps reductions thread-count independent

double example_loss_grad(const SequenceModel& model, const Example& ex,
                         std::vector<double>* grad, double scale) {
    auto out = model.forward(ex.seq);
    double dre = out[0] - ex.target_re;
    double dim = out[1] - ex.target_im;
    if (grad) model.backward(ex.seq, scale * 2.0 * dre, scale * 2.0 * dim, *grad);
    return dre * dre + dim * dim;
}

}  // namespace

double batch_gradient_serial(const SequenceModel& model,
                             const std::vector<Example>& examples,
                             const std::vector<int>& indices,
                             std::vector<double>& grad) {
    const double scale = 1.0 / indices.size();
    double loss = 0.0;
    for (int idx : indices)
        loss += example_loss_grad(model, examples[idx], &grad, scale);
    return loss * scale;
}

double batch_gradient(const SequenceModel& model,
                      const std::vector<Example>& examples,
                      const std::vector<int>& indices,
                      std::vector<double>& grad, bool parallel) {
    const int n = static_cast<int>(indices.size());
    if (n == 0) return 0.0;
    const int n_chunks = (n + kChunk - 1) / kChunk;
    const double scale = 1.0 / n;
    const int p = model.param_count();

    std::vector<std::vector<double>> partials(n_chunks);
    std::vector<double> losses(n_chunks, 0.0);
#pragma omp parallel for schedule(dynamic) if (parallel && msa::thread_count() > 1) \
    num_threads(msa::thread_count())
    for (int c = 0; c < n_chunks; ++c) {
        partials[c].assign(p, 0.0);
        double loss = 0.0;
        const int begin = c * kChunk;
        const int end = std::min(n, begin + kChunk);
        for (int i = begin; i < end; ++i)
            loss += example_loss_grad(model, examples[indices[i]], &partials[c], scale);
        losses[c] = loss;
    }

    double loss = 0.0;
    for (int c = 0; c < n_chunks; ++c) {  // deterministic chunk-order reduction
        loss += losses[c];
        const auto& part = partials[c];
        for (int i = 0; i < p; ++i) grad[i] += part[i];
    }
    return loss * scale;
}

double dataset_loss(const SequenceModel& model,
                    const std::vector<Example>& examples, bool parallel) {
    const int n = static_cast<int>(examples.size());
    if (n == 0) return 0.0;
    std::vector<double> losses(n, 0.0);
#pragma omp parallel for schedule(static) if (parallel && msa::thread_count() > 1) \
    num_threads(msa::thread_count())
    for (int i = 0; i < n; ++i)
        losses[i] = example_loss_grad(model, examples[i], nullptr, 0.0);
    double total = 0.0;
    for (double l : losses) total += l;
    return total / n;
}

TrainResult train(const SequenceModel& initial, const Dataset& data,
                  const TrainConfig& cfg) {
    if (cfg.lr <= 0 || cfg.batch_size < 1 || cfg.max_epochs < 0)
        throw std::invalid_argument("train: bad hyperparameters");
    if (data.train.empty()) throw std::invalid_argument("train: empty training split");

    auto model = initial.clone();
    const int p = model->param_count();
    std::vector<double> m_adam(p, 0.0), v_adam(p, 0.0), grad(p);
    long step = 0;
    double lr = cfg.lr;

    TrainResult result;
    result.best = initial.clone();
    result.best_dev = dataset_loss(*model, data.dev.empty() ? data.train : data.dev,
                                   cfg.parallel);
    result.best_epoch = -1;

    auto shuffle_rng = make_stream(cfg.seed, "epoch-shuffle");
    std::vector<int> order(data.train.size());
    std::iota(order.begin(), order.end(), 0);
    int stale = 0;
    int stale_since_decay = 0;

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double epoch_loss = 0.0;
        int n_batches = 0;
        for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::vector<int> batch(order.begin() + start,
                                   order.begin() + std::min(order.size(),
                                                            start + cfg.batch_size));
            std::fill(grad.begin(), grad.end(), 0.0);
            double loss = batch_gradient(*model, data.train, batch, grad, cfg.parallel);
            if (!std::isfinite(loss))
                throw std::runtime_error("train: non-finite loss at lr " +
                                         std::to_string(lr) + ", batch " +
                                         std::to_string(n_batches) + " of epoch " +
                                         std::to_string(epoch));
            epoch_loss += loss;
            ++n_batches;
            ++step;
            const double bc1 = 1.0 - std::pow(cfg.beta1, double(step));
            const double bc2 = 1.0 - std::pow(cfg.beta2, double(step));
            auto& params = model->params();
            for (int i = 0; i < p; ++i) {
                m_adam[i] = cfg.beta1 * m_adam[i] + (1 - cfg.beta1) * grad[i];
                v_adam[i] = cfg.beta2 * v_adam[i] + (1 - cfg.beta2) * grad[i] * grad[i];
                params[i] -= lr * (m_adam[i] / bc1) /
                             (std::sqrt(v_adam[i] / bc2) + cfg.adam_eps);
            }
        }
        double dev_loss = dataset_loss(*model, data.dev.empty() ? data.train : data.dev,
                                       cfg.parallel);
        result.history.push_back({epoch, epoch_loss / std::max(1, n_batches),
                                  dev_loss, lr});
        if (dev_loss < result.best_dev) {
            result.best_dev = dev_loss;
            result.best_epoch = epoch;
            result.best = model->clone();
            stale = 0;
            stale_since_decay = 0;
        } else {
            ++stale;
            ++stale_since_decay;
            if (stale >= cfg.stop_patience) {
                result.stopped_early = true;
                break;
            }
            if (stale_since_decay >= cfg.decay_patience) {
                lr *= cfg.lr_decay;
                stale_since_decay = 0;
            }
        }
    }
    return result;
}

}  // namespace msa
