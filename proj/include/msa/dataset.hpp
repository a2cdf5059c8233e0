#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "msa/automaton.hpp"

namespace msa {

struct Example {
    std::vector<int> seq;
    double target_re = 0.0;
    double target_im = 0.0;
    bool complex_target = false;
};

struct DatasetMeta {
    std::string generator;
    uint64_t seed = 0;
    std::string params;  // generator-specific description, JSON text
};

struct Dataset {
    std::vector<Example> train, dev, test;
    DatasetMeta meta;
};

/// Haar-distributed d x d orthogonal matrix: sign-corrected QR of a
/// standard Gaussian matrix.
Eigen::MatrixXd haar_orthogonal(int d, uint64_t seed);

/// Unary automaton with Haar-orthogonal transition and Gaussian lambda,
/// rho; dataset = every string a^n for n = 0..20 (21 examples, all splits
/// pointing at the same strings).
std::pair<WeightedAutomaton, Dataset> gen_task0_unary(int d, uint64_t seed);

/// Diagonal automaton over m symbols, entries uniform in the unit square
/// renormalized by the largest modulus (spectral radius exactly 1);
/// dataset = all multisets of total size 5 (as sorted sequences), complex
/// targets.
std::pair<DiagonalAutomaton, Dataset> gen_task0_diag(int d, int m, uint64_t seed);

/// Digit-sum data: n_train random sequences of digits 1-9, lengths 1..50,
/// 99/1 train/dev split; test = per_test_length sequences at each length
/// in {5, 10, ..., 95}. units_only reduces targets mod 10.
Dataset gen_digitsum(int n_train, uint64_t seed, bool units_only,
                     int per_test_length = 100);

enum class EvalMode { Mse, RoundedAccuracy, UnitsAccuracy };

struct LengthMetrics {
    int length = 0;
    int count = 0;
    double mse = 0.0;
    double accuracy = 0.0;  // meaning depends on mode; 0 for Mse
};

class SequenceModel;

/// Per-length metric table; rows sorted by length. Predictions are
/// computed in parallel, metrics reduced in index order.
std::vector<LengthMetrics> evaluate(const SequenceModel& model,
                                    const std::vector<Example>& examples,
                                    EvalMode mode, bool parallel = true);

double overall_mse(const std::vector<LengthMetrics>& rows);
double min_accuracy(const std::vector<LengthMetrics>& rows);
double max_accuracy(const std::vector<LengthMetrics>& rows);

struct MeanBaseline {
    double mean_re = 0.0;
    double mean_im = 0.0;
    double mse = 0.0;  // on the data it was fit to
};

/// Constant predictor at the training-target mean (complex mean for
/// complex targets).
MeanBaseline mean_baseline(const std::vector<Example>& examples);

// JSONL: one example per line, {"seq":[int], "target": float | [re, im]}.
std::string examples_to_jsonl(const std::vector<Example>& examples);
std::vector<Example> examples_from_jsonl(const std::string& text);
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace msa
