// Acceptance suite: eight end-to-end criteria, one pass/fail line each.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "msa/dataset.hpp"
#include "msa/model.hpp"
#include "msa/train.hpp"
#include "msa/verify.hpp"

using namespace msa;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string details;
};

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(4);
    out << v;
    return out.str();
}

std::unique_ptr<SequenceModel> train_best(const SequenceModel& model,
                                          const Dataset& data,
                                          const TrainConfig& cfg) {
    return train(model, data, cfg).best;
}

// --- criterion 1: digit-sum regression generalizes for both model families

Outcome criterion_digit_sum() {
    Dataset data = gen_digitsum(20000, 1, false, 100);
    TrainConfig cfg;
    cfg.lr = 1e-2;
    cfg.batch_size = 32;
    cfg.max_epochs = 150;
    cfg.decay_patience = 3;
    cfg.stop_patience = 12;
    cfg.seed = 1;

    ComplexMultisetModel complex_model(11, 50, ComplexHead::Dense, false, 1);
    auto best_c = train_best(complex_model, data, cfg);
    double min_c = min_accuracy(evaluate(*best_c, data.test, EvalMode::RoundedAccuracy));

    DeepSetsBaseline deepsets(11, 1);
    auto best_d = train_best(deepsets, data, cfg);
    double min_d = min_accuracy(evaluate(*best_d, data.test, EvalMode::RoundedAccuracy));

    Outcome out;
    out.pass = min_c >= 0.99 && min_d >= 0.99;
    out.details = "min accuracy over lengths 5..95: complex " + fmt(min_c) +
                  ", deepsets " + fmt(min_d) + " (need >= 0.99)";
    return out;
}

// --- criterion 2: units digit; cyclic structure vs sum pooling

Outcome criterion_units_digit() {
    Dataset data = gen_digitsum(20000, 2, true, 100);
    // constant learning rate: decaying too early freezes the model in a
    // plateau before the rotation angles snap to the exact cyclic solution
    TrainConfig cfg;
    cfg.lr = 1e-2;
    cfg.batch_size = 32;
    cfg.max_epochs = 150;
    cfg.decay_patience = 150;
    cfg.stop_patience = 30;
    cfg.seed = 2;

    ComplexMultisetModel complex_model(11, 50, ComplexHead::Dense, false, 2);
    auto best_c = train_best(complex_model, data, cfg);
    double min_c = min_accuracy(evaluate(*best_c, data.test, EvalMode::UnitsAccuracy));

    TrainConfig cfg_d = cfg;  // the baseline stalls at chance; stop it early
    cfg_d.decay_patience = 4;
    cfg_d.stop_patience = 12;
    DeepSetsBaseline deepsets(11, 2);
    auto best_d = train_best(deepsets, data, cfg_d);
    auto rows_d = evaluate(*best_d, data.test, EvalMode::UnitsAccuracy);
    double max_d_long = 0.0;
    for (const auto& r : rows_d)
        if (r.length >= 55) max_d_long = std::max(max_d_long, r.accuracy);

    Outcome out;
    out.pass = min_c >= 0.95 && max_d_long <= 0.25;
    out.details = "complex min accuracy " + fmt(min_c) +
                  " (need >= 0.95); deepsets max accuracy at lengths >= 55 " +
                  fmt(max_d_long) + " (need <= 0.25)";
    return out;
}

// --- criterion 3: learning automaton weight functions beats the mean baseline

double best_of_10_mse(const Dataset& data, int vocab, int k, ComplexHead head,
                      const TrainConfig& base_cfg) {
    double best = std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < 10; ++restart) {
        TrainConfig cfg = base_cfg;
        cfg.seed = base_cfg.seed + restart;
        ComplexMultisetModel model(vocab, k, head, true, cfg.seed);
        auto trained = train_best(model, data, cfg);
        best = std::min(best, dataset_loss(*trained, data.train, true));
    }
    return best;
}

Outcome criterion_learn_automata() {
    TrainConfig cfg;
    cfg.lr = 5e-2;
    cfg.batch_size = 32;
    cfg.max_epochs = 2000;
    cfg.decay_patience = 50;
    cfg.stop_patience = 200;
    cfg.seed = 100;

    Outcome out;
    out.pass = true;
    for (int d : {2, 3, 4}) {
        auto [aut, data] = gen_task0_unary(d, 10 + d);
        double baseline = mean_baseline(data.train).mse;
        double mse = best_of_10_mse(data, 2, 4 * d, ComplexHead::SumReal, cfg);
        bool ok = mse <= 0.1 * baseline;
        out.pass = out.pass && ok;
        out.details += "unary d=" + std::to_string(d) + " ratio " +
                       fmt(mse / baseline) + (ok ? "; " : " FAIL; ");
    }
    for (int d : {2, 4}) {
        auto [aut, data] = gen_task0_diag(d, 5, 20 + d);
        double baseline = mean_baseline(data.train).mse;
        double mse = best_of_10_mse(data, 6, 4 * d, ComplexHead::SumComplex, cfg);
        bool ok = mse <= 0.1 * baseline;
        out.pass = out.pass && ok;
        out.details += "diag d=" + std::to_string(d) + " ratio " + fmt(mse / baseline) +
                       (ok ? "; " : " FAIL; ");
    }
    out.details += "(need <= 0.1 of the mean-baseline MSE)";
    return out;
}

// --- criteria 4-8: verification suites

Outcome from_rows(std::vector<CheckRow> rows, const std::string& what) {
    int failures = 0;
    std::string worst;
    for (const auto& r : rows)
        if (!r.pass) {
            ++failures;
            if (worst.empty())
                worst = "; first failure " + r.check + " [" + r.instance + "] " +
                        fmt(r.measured) + " vs " + fmt(r.bound);
        }
    Outcome out;
    out.pass = failures == 0;
    out.details = std::to_string(rows.size()) + " " + what + " checks, " +
                  std::to_string(failures) + " violations" + worst;
    return out;
}

Outcome criterion_posenc() {
    return from_rows(verify_posenc({4, 64, 512}, 200), "position-encoding");
}

Outcome criterion_power_bounds() {
    return from_rows(verify_power_bounds(60, 50, 60, 5), "power-bound");
}

Outcome criterion_asd() { return from_rows(verify_asd(3, 2, 5, 6), "construction"); }

Outcome criterion_algebra() { return from_rows(verify_algebra(50, 7), "algebra"); }

Outcome criterion_gradients() {
    return from_rows(verify_gradients(8), "gradient/representation");
}

}  // namespace

int main() {
    struct Entry {
        int id;
        const char* name;
        Outcome (*run)();
    };
    const Entry entries[] = {
        {1, "digit-sum regression generalizes to length 95", criterion_digit_sum},
        {2, "units digit: complex model succeeds, sum baseline fails",
         criterion_units_digit},
        {3, "learned automata beat the mean baseline by 10x", criterion_learn_automata},
        {4, "position encodings equal automaton forward weights", criterion_posenc},
        {5, "matrix-power perturbation bounds hold", criterion_power_bounds},
        {6, "state count and equivalence of the ASD construction", criterion_asd},
        {7, "algebra invariants on random automata", criterion_algebra},
        {8, "gradients, log-polar stability, parameter counts", criterion_gradients},
    };

    int failures = 0;
    for (const auto& e : entries) {
        auto t0 = Clock::now();
        Outcome out;
        try {
            out = e.run();
        } catch (const std::exception& ex) {
            out.pass = false;
            out.details = std::string("exception: ") + ex.what();
        }
        double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        std::printf("[%s] criterion %d: %s — %s (%.1fs)\n",
                    out.pass ? "PASS" : "FAIL", e.id, e.name, out.details.c_str(),
                    secs);
        std::fflush(stdout);
        if (!out.pass) ++failures;
    }
    return failures;
}
