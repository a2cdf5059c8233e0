#include "msa/model.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "msa/rng.hpp"

namespace msa {

namespace {

void check_symbols(const std::vector<int>& seq, int vocab) {
    for (int s : seq)
        if (s < 0 || s >= vocab)
            throw std::domain_error("unknown symbol id " + std::to_string(s));
}

std::vector<int> sorted_copy(const std::vector<int>& seq) {
    std::vector<int> out = seq;
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

// --- ComplexMultisetModel ---

ComplexMultisetModel::ComplexMultisetModel(int vocab, int k, ComplexHead head,
                                           bool train_lambda, uint64_t seed)
    : vocab_(vocab), k_(k), head_(head), train_lambda_(train_lambda) {
    if (vocab < 1 || k < 1)
        throw std::invalid_argument("ComplexMultisetModel: bad dimensions");
    off_r_ = 0;
    off_a_ = vocab * k;
    off_b_ = 2 * vocab * k;
    int off = 3 * vocab * k;
    if (head == ComplexHead::Dense) {
        off_w_ = off;
        off += 3 * k;
        off_bias_ = off;
        off += 1;
    } else {
        off_w_ = off_bias_ = -1;
    }
    if (train_lambda) {
        off_lr_ = off; off += k;
        off_la_ = off; off += k;
        off_lb_ = off; off += k;
    } else {
        off_lr_ = off_la_ = off_lb_ = -1;
    }
    params_.assign(off, 0.0);

    auto rng = make_stream(seed, "init-complex");
    std::uniform_real_distribution<double> small(-0.05, 0.05);
    std::uniform_real_distribution<double> freq(0.0, 2.0 * M_PI);
    // Each component starts as a rotation whose angle is proportional to the
    // symbol id: after multiplying a multiset's embeddings the phase is a
    // Fourier feature of the id sum. Fully independent random angles make the
    // pooled phase an uninformative hash of the multiset and gradient descent
    // never escapes it on modular tasks. All angles remain free parameters.
    for (int j = 0; j < k; ++j) {
        double w = freq(rng);
        for (int s = 0; s < vocab; ++s) {
            int i = s * k + j;
            params_[off_r_ + i] = small(rng);
            params_[off_a_ + i] = std::cos(s * w);
            params_[off_b_ + i] = std::sin(s * w);
        }
    }
    if (head == ComplexHead::Dense) {
        double limit = std::sqrt(6.0 / (3 * k + 1));
        std::uniform_real_distribution<double> glorot(-limit, limit);
        for (int i = 0; i < 3 * k; ++i) params_[off_w_ + i] = glorot(rng);
        params_[off_bias_] = 0.0;
    }
    if (train_lambda)
        for (int j = 0; j < k; ++j) {
            params_[off_lr_ + j] = 0.0;
            params_[off_la_ + j] = 1.0;
            params_[off_lb_ + j] = 0.0;
        }
}

int ComplexMultisetModel::expected_param_count(int vocab, int k, ComplexHead head,
                                               bool train_lambda) {
    int n = 3 * vocab * k;
    if (head == ComplexHead::Dense) n += 3 * k + 1;
    if (train_lambda) n += 3 * k;
    return n;
}

std::vector<SequenceModel::Block> ComplexMultisetModel::param_blocks() const {
    std::vector<Block> blocks = {
        {"embed_r", off_r_, vocab_ * k_},
        {"embed_a", off_a_, vocab_ * k_},
        {"embed_b", off_b_, vocab_ * k_},
    };
    if (head_ == ComplexHead::Dense) {
        blocks.push_back({"dense_w", off_w_, 3 * k_});
        blocks.push_back({"dense_bias", off_bias_, 1});
    }
    if (train_lambda_) {
        blocks.push_back({"lambda_r", off_lr_, k_});
        blocks.push_back({"lambda_a", off_la_, k_});
        blocks.push_back({"lambda_b", off_lb_, k_});
    }
    return blocks;
}

struct ComplexMultisetModel::Cache {
    // per component j: states 0..n and per-step intermediates
    std::vector<double> A, B;          // (n+1) * k
    std::vector<double> pa, pb, np;    // n * k
    std::vector<double> af, bf, nf;    // n * k
    std::vector<double> R;             // final log-magnitudes, k
    std::vector<double> l_nf;          // lambda normalization, k
};

std::array<double, 2> ComplexMultisetModel::run(const std::vector<int>& seq,
                                                Cache* cache) const {
    const int n = static_cast<int>(seq.size());
    const int k = k_;
    const double* Pr = params_.data() + off_r_;
    const double* Pa = params_.data() + off_a_;
    const double* Pb = params_.data() + off_b_;

    if (cache) {
        cache->A.assign((n + 1) * k, 0.0);
        cache->B.assign((n + 1) * k, 0.0);
        cache->pa.assign(n * k, 0.0);
        cache->pb.assign(n * k, 0.0);
        cache->np.assign(n * k, 0.0);
        cache->af.assign(n * k, 0.0);
        cache->bf.assign(n * k, 0.0);
        cache->nf.assign(n * k, 0.0);
        cache->R.assign(k, 0.0);
        cache->l_nf.assign(k, 1.0);
    }

    double out_re = 0.0, out_im = 0.0;
    std::vector<double> pooled;
    if (head_ == ComplexHead::Dense) pooled.assign(3 * k, 0.0);

    for (int j = 0; j < k; ++j) {
        double R = 0.0, A = 1.0, B = 0.0;
        if (train_lambda_) {
            double la = params_[off_la_ + j], lb = params_[off_lb_ + j];
            double n0 = std::max(std::hypot(la, lb), 1e-30);
            R = params_[off_lr_ + j] + std::log(n0);
            A = la / n0;
            B = lb / n0;
            if (cache) cache->l_nf[j] = n0;
        }
        if (cache) {
            cache->A[j] = A;
            cache->B[j] = B;
        }
        for (int t = 0; t < n; ++t) {
            const int idx = seq[t] * k + j;
            double ar = Pa[idx], br = Pb[idx];
            double nf = std::max(std::hypot(ar, br), 1e-30);
            double af = ar / nf, bf = br / nf;
            double pa = A * af - B * bf;
            double pb = A * bf + B * af;
            double np = std::max(std::hypot(pa, pb), 1e-30);
            R += Pr[idx] + std::log(np);
            A = pa / np;
            B = pb / np;
            if (cache) {
                const int c = t * k + j;
                cache->af[c] = af;
                cache->bf[c] = bf;
                cache->nf[c] = nf;
                cache->pa[c] = pa;
                cache->pb[c] = pb;
                cache->np[c] = np;
                cache->A[(t + 1) * k + j] = A;
                cache->B[(t + 1) * k + j] = B;
            }
        }
        if (cache) cache->R[j] = R;
        switch (head_) {
            case ComplexHead::Dense:
                pooled[j] = R;
                pooled[k + j] = A;
                pooled[2 * k + j] = B;
                break;
            case ComplexHead::SumReal:
                out_re += std::exp(R) * A;
                break;
            case ComplexHead::SumComplex:
                out_re += std::exp(R) * A;
                out_im += std::exp(R) * B;
                break;
        }
    }
    if (head_ == ComplexHead::Dense) {
        const double* w = params_.data() + off_w_;
        out_re = params_[off_bias_];
        for (int i = 0; i < 3 * k; ++i) out_re += w[i] * pooled[i];
    }
    return {out_re, out_im};
}

std::array<double, 2> ComplexMultisetModel::forward(const std::vector<int>& seq) const {
    check_symbols(seq, vocab_);
    return run(sorted_copy(seq), nullptr);
}

void ComplexMultisetModel::backward(const std::vector<int>& seq, double g_re,
                                    double g_im, std::vector<double>& grad) const {
    check_symbols(seq, vocab_);
    if (static_cast<int>(grad.size()) != param_count())
        throw std::invalid_argument("backward: gradient buffer size mismatch");
    std::vector<int> sorted = sorted_copy(seq);
    Cache cache;
    auto out = run(sorted, &cache);
    const int n = static_cast<int>(sorted.size());
    const int k = k_;

    for (int j = 0; j < k; ++j) {
        double gR = 0.0, gA = 0.0, gB = 0.0;
        const double R = cache.R[j];
        const double A = cache.A[n * k + j], B = cache.B[n * k + j];
        switch (head_) {
            case ComplexHead::Dense: {
                const double* w = params_.data() + off_w_;
                gR = g_re * w[j];
                gA = g_re * w[k + j];
                gB = g_re * w[2 * k + j];
                grad[off_w_ + j] += g_re * R;
                grad[off_w_ + k + j] += g_re * A;
                grad[off_w_ + 2 * k + j] += g_re * B;
                break;
            }
            case ComplexHead::SumReal: {
                double m = std::exp(R);
                gR = g_re * m * A;
                gA = g_re * m;
                break;
            }
            case ComplexHead::SumComplex: {
                double m = std::exp(R);
                gR = m * (g_re * A + g_im * B);
                gA = g_re * m;
                gB = g_im * m;
                break;
            }
        }
        for (int t = n - 1; t >= 0; --t) {
            const int c = t * k + j;
            const int idx = sorted[t] * k + j;
            const double pa = cache.pa[c], pb = cache.pb[c], np = cache.np[c];
            const double af = cache.af[c], bf = cache.bf[c], nf = cache.nf[c];
            const double Ap = cache.A[t * k + j], Bp = cache.B[t * k + j];
            const double np2 = np * np, np3 = np2 * np;

            grad[off_r_ + idx] += gR;
            const double g_pa = gA * pb * pb / np3 - gB * pa * pb / np3 + gR * pa / np2;
            const double g_pb = -gA * pa * pb / np3 + gB * pa * pa / np3 + gR * pb / np2;
            const double gAp = g_pa * af + g_pb * bf;
            const double gBp = -g_pa * bf + g_pb * af;
            const double g_af = g_pa * Ap + g_pb * Bp;
            const double g_bf = -g_pa * Bp + g_pb * Ap;
            grad[off_a_ + idx] += bf * (g_af * bf - g_bf * af) / nf;
            grad[off_b_ + idx] += af * (g_bf * af - g_af * bf) / nf;
            gA = gAp;
            gB = gBp;
        }
        if (train_lambda_) {
            const double n0 = cache.l_nf[j];
            const double la = params_[off_la_ + j], lb = params_[off_lb_ + j];
            const double a0 = la / n0, b0 = lb / n0;
            grad[off_lr_ + j] += gR;
            // R picks up log(n0); (A0, B0) are the normalized direction
            const double g_a0 = gA, g_b0 = gB;
            grad[off_la_ + j] += (b0 * (g_a0 * b0 - g_b0 * a0) + gR * a0) / n0;
            grad[off_lb_ + j] += (a0 * (g_b0 * a0 - g_a0 * b0) + gR * b0) / n0;
        }
    }
    if (head_ == ComplexHead::Dense) grad[off_bias_] += g_re;
    (void)out;
}

// --- DeepSetsBaseline ---

DeepSetsBaseline::DeepSetsBaseline(int vocab, uint64_t seed, int embed_dim,
                                   int hidden_dim)
    : vocab_(vocab), embed_dim_(embed_dim), hidden_dim_(hidden_dim) {
    if (vocab < 1 || embed_dim < 1 || hidden_dim < 1)
        throw std::invalid_argument("DeepSetsBaseline: bad dimensions");
    off_e_ = 0;
    off_w1_ = vocab * embed_dim;
    off_b1_ = off_w1_ + hidden_dim * embed_dim;
    off_w2_ = off_b1_ + hidden_dim;
    off_b2_ = off_w2_ + hidden_dim;
    params_.assign(off_b2_ + 1, 0.0);

    auto rng = make_stream(seed, "init-deepsets");
    std::uniform_real_distribution<double> small(-0.05, 0.05);
    for (int i = 0; i < vocab * embed_dim; ++i) params_[off_e_ + i] = small(rng);
    double l1 = std::sqrt(6.0 / (embed_dim + hidden_dim));
    std::uniform_real_distribution<double> g1(-l1, l1);
    for (int i = 0; i < hidden_dim * embed_dim; ++i) params_[off_w1_ + i] = g1(rng);
    double l2 = std::sqrt(6.0 / (hidden_dim + 1));
    std::uniform_real_distribution<double> g2(-l2, l2);
    for (int i = 0; i < hidden_dim; ++i) params_[off_w2_ + i] = g2(rng);
}

int DeepSetsBaseline::expected_param_count(int vocab, int embed_dim,
                                           int hidden_dim) {
    return vocab * embed_dim + hidden_dim * embed_dim + hidden_dim + hidden_dim + 1;
}

std::vector<SequenceModel::Block> DeepSetsBaseline::param_blocks() const {
    return {
        {"embed", off_e_, vocab_ * embed_dim_},
        {"dense1_w", off_w1_, hidden_dim_ * embed_dim_},
        {"dense1_b", off_b1_, hidden_dim_},
        {"out_w", off_w2_, hidden_dim_},
        {"out_b", off_b2_, 1},
    };
}

std::array<double, 2> DeepSetsBaseline::forward(const std::vector<int>& seq) const {
    check_symbols(seq, vocab_);
    std::vector<int> sorted = sorted_copy(seq);
    std::vector<double> pooled(hidden_dim_, 0.0);
    for (int s : sorted) {
        const double* e = params_.data() + off_e_ + s * embed_dim_;
        for (int h = 0; h < hidden_dim_; ++h) {
            const double* w = params_.data() + off_w1_ + h * embed_dim_;
            double z = params_[off_b1_ + h];
            for (int i = 0; i < embed_dim_; ++i) z += w[i] * e[i];
            pooled[h] += std::tanh(z);
        }
    }
    double out = params_[off_b2_];
    for (int h = 0; h < hidden_dim_; ++h) out += params_[off_w2_ + h] * pooled[h];
    return {out, 0.0};
}

void DeepSetsBaseline::backward(const std::vector<int>& seq, double g_re,
                                double /*g_im*/, std::vector<double>& grad) const {
    check_symbols(seq, vocab_);
    if (static_cast<int>(grad.size()) != param_count())
        throw std::invalid_argument("backward: gradient buffer size mismatch");
    std::vector<int> sorted = sorted_copy(seq);

    std::vector<double> pooled(hidden_dim_, 0.0);
    std::vector<double> h_per(sorted.size() * hidden_dim_);
    for (size_t t = 0; t < sorted.size(); ++t) {
        const double* e = params_.data() + off_e_ + sorted[t] * embed_dim_;
        for (int h = 0; h < hidden_dim_; ++h) {
            const double* w = params_.data() + off_w1_ + h * embed_dim_;
            double z = params_[off_b1_ + h];
            for (int i = 0; i < embed_dim_; ++i) z += w[i] * e[i];
            double th = std::tanh(z);
            h_per[t * hidden_dim_ + h] = th;
            pooled[h] += th;
        }
    }
    grad[off_b2_] += g_re;
    for (int h = 0; h < hidden_dim_; ++h)
        grad[off_w2_ + h] += g_re * pooled[h];
    for (size_t t = 0; t < sorted.size(); ++t) {
        const double* e = params_.data() + off_e_ + sorted[t] * embed_dim_;
        double* ge = grad.data() + off_e_ + sorted[t] * embed_dim_;
        for (int h = 0; h < hidden_dim_; ++h) {
            double th = h_per[t * hidden_dim_ + h];
            double gz = g_re * params_[off_w2_ + h] * (1.0 - th * th);
            grad[off_b1_ + h] += gz;
            const double* w = params_.data() + off_w1_ + h * embed_dim_;
            double* gw = grad.data() + off_w1_ + h * embed_dim_;
            for (int i = 0; i < embed_dim_; ++i) {
                gw[i] += gz * e[i];
                ge[i] += gz * w[i];
            }
        }
    }
}

// --- gradient check ---

double grad_check(const SequenceModel& model, const std::vector<int>& seq,
                  double target_re, double target_im, double eps_fd,
                  uint64_t seed, int max_checked) {
    auto work = model.clone();
    const int n = work->param_count();

    auto loss = [&]() {
        auto out = work->forward(seq);
        double dre = out[0] - target_re;
        double dim = out[1] - target_im;
        return dre * dre + dim * dim;
    };

    std::vector<double> analytic(n, 0.0);
    {
        auto out = work->forward(seq);
        work->backward(seq, 2.0 * (out[0] - target_re), 2.0 * (out[1] - target_im),
                       analytic);
    }

    std::vector<int> indices(n);
    for (int i = 0; i < n; ++i) indices[i] = i;
    if (n > max_checked) {
        auto rng = make_stream(seed, "grad-check");
        std::shuffle(indices.begin(), indices.end(), rng);
        indices.resize(max_checked);
    }

    double worst = 0.0;
    for (int i : indices) {
        double saved = work->params()[i];
        work->params()[i] = saved + eps_fd;
        double lp = loss();
        work->params()[i] = saved - eps_fd;
        double lm = loss();
        work->params()[i] = saved;
        double fd = (lp - lm) / (2.0 * eps_fd);
        double denom = std::max({std::abs(fd), std::abs(analytic[i]), 1e-8});
        worst = std::max(worst, std::abs(fd - analytic[i]) / denom);
    }
    return worst;
}

// --- checkpoints ---

std::string checkpoint_to_json(const SequenceModel& model, int epoch,
                               double dev_metric) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["kind"] = model.kind();
    nlohmann::json config;
    config["vocab"] = model.vocab_size();
    if (auto* cm = dynamic_cast<const ComplexMultisetModel*>(&model)) {
        config["k"] = cm->components();
        config["head"] = cm->head() == ComplexHead::Dense ? "dense"
                         : cm->head() == ComplexHead::SumReal ? "sum_real"
                                                              : "sum_complex";
        config["train_lambda"] = cm->lambda_trainable();
    }
    j["config"] = config;
    nlohmann::json parameters;
    for (const auto& block : model.param_blocks()) {
        std::vector<double> values(model.params().begin() + block.offset,
                                   model.params().begin() + block.offset + block.size);
        parameters[block.name] = values;
    }
    j["parameters"] = parameters;
    j["epoch"] = epoch;
    j["dev_metric"] = dev_metric;
    return j.dump();
}

std::unique_ptr<SequenceModel> checkpoint_from_json(const std::string& text,
                                                    int* epoch,
                                                    double* dev_metric) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("format_version").get<int>() != 1)
        throw std::invalid_argument("checkpoint: unsupported format version");
    std::string kind = j.at("kind").get<std::string>();
    const auto& config = j.at("config");
    std::unique_ptr<SequenceModel> model;
    if (kind == "complex") {
        std::string head_name = config.at("head").get<std::string>();
        ComplexHead head = head_name == "dense" ? ComplexHead::Dense
                           : head_name == "sum_real" ? ComplexHead::SumReal
                                                     : ComplexHead::SumComplex;
        model = std::make_unique<ComplexMultisetModel>(
            config.at("vocab").get<int>(), config.at("k").get<int>(), head,
            config.at("train_lambda").get<bool>(), 0);
    } else if (kind == "deepsets") {
        model = std::make_unique<DeepSetsBaseline>(config.at("vocab").get<int>(), 0);
    } else {
        throw std::invalid_argument("checkpoint: unknown model kind " + kind);
    }
    for (const auto& block : model->param_blocks()) {
        auto values = j.at("parameters").at(block.name).get<std::vector<double>>();
        if (static_cast<int>(values.size()) != block.size)
            throw std::invalid_argument("checkpoint: block size mismatch for " + block.name);
        std::copy(values.begin(), values.end(), model->params().begin() + block.offset);
    }
    if (epoch) *epoch = j.at("epoch").get<int>();
    if (dev_metric) *dev_metric = j.at("dev_metric").get<double>();
    return model;
}

}  // namespace msa
