#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace msa {

/// Trainable regressor on symbol sequences. Predictions are (re, im);
/// real-output heads keep im at zero. Parameters live in one flat vector;
/// named blocks describe the layout for checkpoints.
class SequenceModel {
public:
    virtual ~SequenceModel() = default;

    virtual std::string kind() const = 0;
    virtual int vocab_size() const = 0;
    virtual bool complex_output() const = 0;

    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }
    int param_count() const { return static_cast<int>(params_.size()); }

    struct Block {
        std::string name;
        int offset;
        int size;
    };
    virtual std::vector<Block> param_blocks() const = 0;

    virtual std::array<double, 2> forward(const std::vector<int>& seq) const = 0;

    /// Accumulates d(g_re*out_re + g_im*out_im)/d(params) into grad.
    virtual void backward(const std::vector<int>& seq, double g_re, double g_im,
                          std::vector<double>& grad) const = 0;

    virtual std::unique_ptr<SequenceModel> clone() const = 0;

protected:
    std::vector<double> params_;
};

enum class ComplexHead {
    Dense,       // dense layer on the pooled (r, a, b) vector
    SumReal,     // sum of e^r * a over components
    SumComplex,  // (sum e^r a, sum e^r b)
};

/// Complex-diagonal multiset model: per-symbol log-polar embeddings
/// multiplied componentwise over the input, then a readout head. The
/// product is evaluated in sorted symbol order, so the output is exactly
/// permutation invariant.
class ComplexMultisetModel : public SequenceModel {
public:
    ComplexMultisetModel(int vocab, int k, ComplexHead head, bool train_lambda,
                         uint64_t seed);

    std::string kind() const override { return "complex"; }
    int vocab_size() const override { return vocab_; }
    bool complex_output() const override { return head_ == ComplexHead::SumComplex; }
    std::vector<Block> param_blocks() const override;
    std::array<double, 2> forward(const std::vector<int>& seq) const override;
    void backward(const std::vector<int>& seq, double g_re, double g_im,
                  std::vector<double>& grad) const override;
    std::unique_ptr<SequenceModel> clone() const override {
        return std::make_unique<ComplexMultisetModel>(*this);
    }

    int components() const { return k_; }
    ComplexHead head() const { return head_; }
    bool lambda_trainable() const { return train_lambda_; }

    static int expected_param_count(int vocab, int k, ComplexHead head,
                                    bool train_lambda);

private:
    struct Cache;
    std::array<double, 2> run(const std::vector<int>& sorted, Cache* cache) const;

    int vocab_;
    int k_;
    ComplexHead head_;
    bool train_lambda_;
    // offsets into params_
    int off_r_, off_a_, off_b_, off_w_, off_bias_, off_lr_, off_la_, off_lb_;
};

/// DeepSets baseline: embed, per-element tanh dense, sum, affine readout.
class DeepSetsBaseline : public SequenceModel {
public:
    DeepSetsBaseline(int vocab, uint64_t seed, int embed_dim = 100,
                     int hidden_dim = 30);

    std::string kind() const override { return "deepsets"; }
    int vocab_size() const override { return vocab_; }
    bool complex_output() const override { return false; }
    std::vector<Block> param_blocks() const override;
    std::array<double, 2> forward(const std::vector<int>& seq) const override;
    void backward(const std::vector<int>& seq, double g_re, double g_im,
                  std::vector<double>& grad) const override;
    std::unique_ptr<SequenceModel> clone() const override {
        return std::make_unique<DeepSetsBaseline>(*this);
    }

    static int expected_param_count(int vocab, int embed_dim = 100,
                                    int hidden_dim = 30);

private:
    int vocab_, embed_dim_, hidden_dim_;
    int off_e_, off_w1_, off_b1_, off_w2_, off_b2_;
};

/// Max relative error between analytic gradients and central finite
/// differences, denominators floored at 1e-8. Checks every parameter when
/// there are at most max_checked, else a seeded subsample of that size.
double grad_check(const SequenceModel& model, const std::vector<int>& seq,
                  double target_re, double target_im, double eps_fd,
                  uint64_t seed = 0, int max_checked = 400);

// Checkpoint JSON: {format_version, kind, config, parameters, epoch, dev_metric}.
std::string checkpoint_to_json(const SequenceModel& model, int epoch,
                               double dev_metric);
std::unique_ptr<SequenceModel> checkpoint_from_json(const std::string& text,
                                                    int* epoch = nullptr,
                                                    double* dev_metric = nullptr);

}  // namespace msa
