// msa: single entry point for data generation, training, evaluation,
// theory verification, and encoding export.
//
// Exit codes: 0 success, 1 usage/IO, 2 numerical failure, 3 verification
// violation.

#include <CLI11.hpp>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "msa/algebra.hpp"
#include "msa/automaton.hpp"
#include "msa/dataset.hpp"
#include "msa/diagonalize.hpp"
#include "msa/model.hpp"
#include "msa/posenc.hpp"
#include "msa/train.hpp"
#include "msa/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct VerificationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string csv_num(double v) {
    std::ostringstream out;
    out.imbue(std::locale::classic());
    out.precision(17);
    out << v;
    return out.str();
}

// Binds each option of a subcommand to a key in a flat JSON config file.
// Precedence: command-line flag > file value > built-in default. Unknown
// keys and version mismatches are usage errors.
class Binder {
public:
    explicit Binder(CLI::App* sub) : sub_(sub) {
        sub->add_option("--config", config_path_,
                        "flat JSON config file (version 1); flags override it");
    }

    template <class T>
    CLI::Option* option(const std::string& name, T& var, const std::string& desc) {
        auto* o = sub_->add_option("--" + name, var, desc);
        register_key(name, o, [&var](const json& v) { var = v.get<T>(); });
        return o;
    }

    CLI::Option* flag(const std::string& name, bool& var, const std::string& desc) {
        auto* o = sub_->add_flag("--" + name, var, desc);
        register_key(name, o, [&var](const json& v) { var = v.get<bool>(); });
        return o;
    }

    void apply_config() {
        if (config_path_.empty()) return;
        json j;
        try {
            j = json::parse(msa::read_file(config_path_));
        } catch (const std::exception& e) {
            throw UsageError(std::string("config: ") + e.what());
        }
        if (!j.is_object()) throw UsageError("config: expected a JSON object");
        if (!j.contains("version") || j["version"] != 1)
            throw UsageError("config: missing or unsupported version (expected 1)");
        for (const auto& [key, value] : j.items()) {
            if (key == "version") continue;
            auto it = setters_.find(key);
            if (it == setters_.end())
                throw UsageError("config: unknown key '" + key + "'");
            try {
                if (opts_.at(key)->count() == 0) it->second(value);
            } catch (const json::exception& e) {
                throw UsageError("config: bad value for '" + key + "': " + e.what());
            }
        }
    }

private:
    void register_key(const std::string& name, CLI::Option* o,
                      std::function<void(const json&)> setter) {
        opts_[name] = o;
        setters_[name] = std::move(setter);
    }

    CLI::App* sub_;
    std::string config_path_;
    std::map<std::string, CLI::Option*> opts_;
    std::map<std::string, std::function<void(const json&)>> setters_;
};

void write_text(const std::string& out_path, const std::string& content) {
    if (out_path == "-") {
        std::cout << content;
        return;
    }
    msa::write_file(out_path, content);
}

// ---------------------------------------------------------------- gen

struct GenOpts {
    std::string task = "1";
    int n = 20000;
    int d = 4;
    int m = 5;
    int per_test_length = 100;
    uint64_t seed = 1;
    std::string out = ".";
};

void run_gen(const GenOpts& o) {
    fs::create_directories(o.out);
    msa::Dataset data;
    std::string automaton_json;
    if (o.task == "1" || o.task == "2") {
        data = msa::gen_digitsum(o.n, o.seed, o.task == "2", o.per_test_length);
    } else if (o.task == "0u") {
        auto [aut, d] = msa::gen_task0_unary(o.d, o.seed);
        automaton_json = msa::to_json_string(aut, 2);
        data = std::move(d);
    } else if (o.task == "0d") {
        auto [aut, d] = msa::gen_task0_diag(o.d, o.m, o.seed);
        automaton_json = msa::to_json_string(aut, 2);
        data = std::move(d);
    } else {
        throw UsageError("gen: unknown task '" + o.task + "' (use 1, 2, 0u, 0d)");
    }

    auto path = [&](const char* name) { return (fs::path(o.out) / name).string(); };
    msa::write_file(path("train.jsonl"), msa::examples_to_jsonl(data.train));
    msa::write_file(path("dev.jsonl"), msa::examples_to_jsonl(data.dev));
    msa::write_file(path("test.jsonl"), msa::examples_to_jsonl(data.test));
    if (!automaton_json.empty())
        msa::write_file(path("automaton.json"), automaton_json + "\n");

    json meta;
    meta["version"] = 1;
    meta["generator"] = data.meta.generator;
    meta["seed"] = data.meta.seed;
    meta["params"] = json::parse(data.meta.params);
    meta["counts"] = {{"train", data.train.size()},
                      {"dev", data.dev.size()},
                      {"test", data.test.size()}};
    msa::write_file(path("meta.json"), meta.dump(2) + "\n");
    std::cout << "wrote " << data.train.size() << "/" << data.dev.size() << "/"
              << data.test.size() << " train/dev/test examples to " << o.out << "\n";
}

// -------------------------------------------------------------- train

struct TrainOpts {
    std::string data = ".";
    std::string model = "complex";
    std::string task = "1";
    std::string head = "dense";
    int vocab = 11;
    int k = 50;
    bool train_lambda = false;
    double lr = 1e-3;
    int batch = 32;
    int epochs = 100;
    double lr_decay = 0.5;
    int decay_patience = 2;
    int stop_patience = 10;
    uint64_t seed = 1;
    bool serial = false;
    std::string out = ".";
};

msa::ComplexHead parse_head(const std::string& s) {
    if (s == "dense") return msa::ComplexHead::Dense;
    if (s == "sum_real") return msa::ComplexHead::SumReal;
    if (s == "sum_complex") return msa::ComplexHead::SumComplex;
    throw UsageError("unknown head '" + s + "' (dense, sum_real, sum_complex)");
}

std::unique_ptr<msa::SequenceModel> build_model(const TrainOpts& o) {
    if (o.model == "complex")
        return std::make_unique<msa::ComplexMultisetModel>(
            o.vocab, o.k, parse_head(o.head), o.train_lambda, o.seed);
    if (o.model == "deepsets")
        return std::make_unique<msa::DeepSetsBaseline>(o.vocab, o.seed);
    throw UsageError("unknown model '" + o.model + "' (complex, deepsets)");
}

void run_train(const TrainOpts& o) {
    msa::Dataset data;
    auto path = [&](const char* name) { return (fs::path(o.data) / name).string(); };
    data.train = msa::examples_from_jsonl(msa::read_file(path("train.jsonl")));
    data.dev = msa::examples_from_jsonl(msa::read_file(path("dev.jsonl")));

    auto model = build_model(o);
    msa::TrainConfig cfg;
    cfg.lr = o.lr;
    cfg.batch_size = o.batch;
    cfg.max_epochs = o.epochs;
    cfg.lr_decay = o.lr_decay;
    cfg.decay_patience = o.decay_patience;
    cfg.stop_patience = o.stop_patience;
    cfg.seed = o.seed;
    cfg.parallel = !o.serial;

    msa::TrainResult result;
    try {
        result = msa::train(*model, data, cfg);
    } catch (const std::runtime_error& e) {
        throw NumericalError(e.what());
    }

    fs::create_directories(o.out);
    auto out_path = [&](const char* name) { return (fs::path(o.out) / name).string(); };
    msa::write_file(out_path("checkpoint.json"),
                    msa::checkpoint_to_json(*result.best, result.best_epoch,
                                            result.best_dev) + "\n");

    std::string csv = "epoch,split,loss,accuracy\n";
    for (const auto& e : result.history) {
        csv += std::to_string(e.epoch) + ",train," + csv_num(e.train_loss) + ",\n";
        csv += std::to_string(e.epoch) + ",dev," + csv_num(e.dev_loss) + ",\n";
    }
    std::string acc = "";
    if (o.task == "1" || o.task == "2") {
        auto rows = msa::evaluate(*result.best, data.dev,
                                  o.task == "1" ? msa::EvalMode::RoundedAccuracy
                                                : msa::EvalMode::UnitsAccuracy,
                                  cfg.parallel);
        double correct = 0, total = 0;
        for (const auto& r : rows) {
            correct += r.accuracy * r.count;
            total += r.count;
        }
        acc = csv_num(total > 0 ? correct / total : 0.0);
    }
    csv += std::to_string(result.best_epoch) + ",best_dev," +
           csv_num(result.best_dev) + "," + acc + "\n";
    msa::write_file(out_path("metrics.csv"), csv);
    std::cout << "best dev loss " << result.best_dev << " at epoch "
              << result.best_epoch
              << (acc.empty() ? "" : ", dev accuracy " + acc)
              << (result.stopped_early ? " (stopped early)" : "") << "\n";
}

// --------------------------------------------------------------- eval

struct EvalOpts {
    std::string checkpoint;
    std::string data;
    std::string mode = "mse";
    bool mean_baseline = false;
    std::string out = "-";
};

void run_eval(const EvalOpts& o) {
    if (o.data.empty()) throw UsageError("eval: --data is required");
    auto examples = msa::examples_from_jsonl(msa::read_file(o.data));

    std::string csv = "length,count,mse,accuracy\n";
    if (o.mean_baseline) {
        auto b = msa::mean_baseline(examples);
        csv += "all," + std::to_string(examples.size()) + "," + csv_num(b.mse) + ",\n";
    } else {
        if (o.checkpoint.empty()) throw UsageError("eval: --checkpoint is required");
        auto model = msa::checkpoint_from_json(msa::read_file(o.checkpoint));
        msa::EvalMode mode;
        if (o.mode == "mse")
            mode = msa::EvalMode::Mse;
        else if (o.mode == "round")
            mode = msa::EvalMode::RoundedAccuracy;
        else if (o.mode == "units")
            mode = msa::EvalMode::UnitsAccuracy;
        else
            throw UsageError("eval: unknown mode '" + o.mode + "' (mse, round, units)");
        for (const auto& r : msa::evaluate(*model, examples, mode))
            csv += std::to_string(r.length) + "," + std::to_string(r.count) + "," +
                   csv_num(r.mse) + "," +
                   (mode == msa::EvalMode::Mse ? "" : csv_num(r.accuracy)) + "\n";
    }
    write_text(o.out, csv);
}

// ------------------------------------------------------------- verify

struct VerifyOpts {
    std::string check = "all";
    int d = 3;
    int m = 2;
    int nmax = 50;
    int nmax_zero = 60;
    long positions = 200;
    int instances = 50;
    uint64_t seed = 1;
    std::string out = "-";
};

void run_verify(const VerifyOpts& o) {
    std::vector<msa::CheckRow> rows;
    auto append = [&](std::vector<msa::CheckRow> more) {
        rows.insert(rows.end(), std::make_move_iterator(more.begin()),
                    std::make_move_iterator(more.end()));
    };
    const bool all = o.check == "all";
    bool matched = false;
    try {
        if (all || o.check == "power-bound") {
            matched = true;
            append(msa::verify_power_bounds(all ? 100 : o.instances, o.nmax,
                                            o.nmax_zero, o.seed));
        }
        if (all || o.check == "posenc") {
            matched = true;
            std::vector<int> dims = all ? std::vector<int>{4, 64, 512}
                                        : std::vector<int>{o.d};
            append(msa::verify_posenc(dims, o.positions));
        }
        if (all || o.check == "asd") {
            matched = true;
            append(msa::verify_asd(all ? 3 : o.d, all ? 2 : o.m,
                                   all ? 3 : std::min(o.instances, 10), o.seed));
        }
        if (all || o.check == "algebra") {
            matched = true;
            append(msa::verify_algebra(o.instances, o.seed));
        }
        if (all || o.check == "grad") {
            matched = true;
            append(msa::verify_gradients(o.seed));
        }
    } catch (const std::runtime_error& e) {
        throw NumericalError(e.what());
    }
    if (!matched)
        throw UsageError("verify: unknown check '" + o.check +
                         "' (all, power-bound, posenc, asd, algebra, grad)");

    write_text(o.out, msa::rows_to_csv(rows));
    int failures = 0;
    for (const auto& r : rows)
        if (!r.pass) ++failures;
    std::cout << rows.size() << " checks, " << failures << " violations\n";
    if (failures > 0) throw VerificationFailure("verification violations");
}

// ------------------------------------------------------------- encode

struct EncodeOpts {
    std::string mode = "sinusoidal";
    int d = 4;
    long n = 10;
    bool swap_pairs = false;
    std::string out = "-";
};

void run_encode(const EncodeOpts& o) {
    if (o.d < 2 || o.d % 2 != 0) throw UsageError("encode: --d must be even, >= 2");
    if (o.n < 1) throw UsageError("encode: --n must be >= 1");
    std::string csv = "p";
    for (int j = 0; j < o.d; ++j) csv += ",e" + std::to_string(j);
    csv += "\n";
    auto params = msa::transformer_params(o.d);
    for (long p = 1; p <= o.n; ++p) {
        Eigen::VectorXd row;
        if (o.mode == "sinusoidal")
            row = msa::sinusoidal_encoding(p, o.d);
        else if (o.mode == "automaton")
            row = msa::polar_forward_weights(params, p - 1);
        else
            throw UsageError("encode: unknown mode '" + o.mode +
                             "' (sinusoidal, automaton)");
        if (o.swap_pairs)
            for (int j = 0; j + 1 < o.d; j += 2) std::swap(row(j), row(j + 1));
        csv += std::to_string(p);
        for (int j = 0; j < o.d; ++j) csv += "," + csv_num(row(j));
        csv += "\n";
    }
    write_text(o.out, csv);
}

// --------------------------------------------------------------- demo

void print_automaton(const std::string& name, const msa::WeightedAutomaton& m,
                     const std::string& blurb) {
    std::cout << name << " (" << m.d << " states): " << blurb << "\n";
    std::cout << "  lambda = " << m.lambda << "\n";
    for (size_t i = 0; i < m.alphabet.size(); ++i)
        std::cout << "  mu(" << m.alphabet[i] << ") =\n" << m.mu[i] << "\n";
    std::cout << "  rho = " << m.rho.transpose() << "\n\n";
}

void run_demo() {
    std::cout.precision(4);
    auto m1 = msa::example_m1();
    auto m2 = msa::example_m2();
    auto m3 = msa::example_m3();
    print_automaton("M1", m1, "weight 1 iff the number of a's is divisible by 3");
    print_automaton("M2", m2, "weight 1 iff the input has exactly one b");
    print_automaton("M3", m3, "both conditions at once");

    std::cout << "weights on small multisets (columns M1, M2, M3):\n";
    for (const auto& w : msa::enumerate_multisets({"a", "b"}, 4)) {
        std::string label;
        for (const auto& [sym, c] : w.counts())
            for (int i = 0; i < c; ++i) label += sym;
        if (label.empty()) label = "(empty)";
        std::cout << "  " << label << ": "
                  << msa::weight(msa::pad_alphabet(m1, {"a", "b"}), w).real() << " "
                  << msa::weight(msa::pad_alphabet(m2, {"a", "b"}), w).real() << " "
                  << msa::weight(m3, w).real() << "\n";
    }

    auto s = msa::shuffle(m2, m1, true);
    double dev = (s.lambda - m3.lambda).norm() + (s.rho - m3.rho).norm();
    for (size_t i = 0; i < s.mu.size(); ++i) dev += (s.mu[i] - m3.mu[i]).norm();
    std::cout << "\nshuffle(M2, M1) equals M3 entrywise: deviation " << dev << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"complex-weighted multiset automata: data generation, training, "
                 "evaluation, theory verification, encoding export"};
    app.require_subcommand(1);

    auto gen_opts = std::make_shared<GenOpts>();
    auto* gen = app.add_subcommand("gen", "generate a dataset");
    auto gen_bind = std::make_shared<Binder>(gen);
    gen_bind->option("task", gen_opts->task, "1, 2, 0u, or 0d");
    gen_bind->option("n", gen_opts->n, "training set size (tasks 1, 2)");
    gen_bind->option("d", gen_opts->d, "automaton size (tasks 0u, 0d)");
    gen_bind->option("m", gen_opts->m, "alphabet size (task 0d)");
    gen_bind->option("per-test-length", gen_opts->per_test_length,
                     "test examples per length (tasks 1, 2)");
    gen_bind->option("seed", gen_opts->seed, "random seed");
    gen_bind->option("out", gen_opts->out, "output directory");
    gen->callback([gen_opts, gen_bind] {
        gen_bind->apply_config();
        run_gen(*gen_opts);
    });

    auto train_opts = std::make_shared<TrainOpts>();
    auto* train = app.add_subcommand("train", "train a model on a generated dataset");
    auto train_bind = std::make_shared<Binder>(train);
    train_bind->option("data", train_opts->data,
                       "directory with train.jsonl and dev.jsonl");
    train_bind->option("model", train_opts->model, "complex or deepsets");
    train_bind->option("task", train_opts->task,
                       "1, 2, or 0 (selects the reported accuracy mode)");
    train_bind->option("head", train_opts->head,
                       "complex readout: dense, sum_real, sum_complex");
    train_bind->option("vocab", train_opts->vocab, "vocabulary size");
    train_bind->option("k", train_opts->k, "complex components per symbol");
    train_bind->flag("train-lambda", train_opts->train_lambda,
                     "make the initial weights trainable (complex model)");
    train_bind->option("lr", train_opts->lr, "learning rate");
    train_bind->option("batch", train_opts->batch, "batch size");
    train_bind->option("epochs", train_opts->epochs, "max epochs");
    train_bind->option("lr-decay", train_opts->lr_decay, "lr decay factor");
    train_bind->option("decay-patience", train_opts->decay_patience,
                       "stagnant dev epochs before decaying lr");
    train_bind->option("stop-patience", train_opts->stop_patience,
                       "stagnant dev epochs before stopping");
    train_bind->option("seed", train_opts->seed, "random seed");
    train_bind->flag("serial", train_opts->serial, "disable OpenMP batching");
    train_bind->option("out", train_opts->out, "output directory");
    train->callback([train_opts, train_bind] {
        train_bind->apply_config();
        run_train(*train_opts);
    });

    auto eval_opts = std::make_shared<EvalOpts>();
    auto* eval = app.add_subcommand("eval", "per-length metrics for a checkpoint");
    auto eval_bind = std::make_shared<Binder>(eval);
    eval_bind->option("checkpoint", eval_opts->checkpoint, "checkpoint JSON path");
    eval_bind->option("data", eval_opts->data, "JSONL dataset path");
    eval_bind->option("mode", eval_opts->mode, "mse, round, or units");
    eval_bind->flag("mean-baseline", eval_opts->mean_baseline,
                    "score the constant mean predictor instead of a checkpoint");
    eval_bind->option("out", eval_opts->out, "CSV path, or - for stdout");
    eval->callback([eval_opts, eval_bind] {
        eval_bind->apply_config();
        run_eval(*eval_opts);
    });

    auto verify_opts = std::make_shared<VerifyOpts>();
    auto* verify = app.add_subcommand("verify", "run the theory-check suites");
    auto verify_bind = std::make_shared<Binder>(verify);
    verify_bind->option("check", verify_opts->check,
                        "all, power-bound, posenc, asd, algebra, grad");
    verify_bind->option("d", verify_opts->d, "dimension (posenc) or max size (asd)");
    verify_bind->option("m", verify_opts->m, "max alphabet size (asd)");
    verify_bind->option("nmax", verify_opts->nmax, "max power, nonzero-eigenvalue case");
    verify_bind->option("nmax-zero", verify_opts->nmax_zero,
                        "max power, nilpotent case");
    verify_bind->option("positions", verify_opts->positions, "positions (posenc)");
    verify_bind->option("instances", verify_opts->instances, "seeded instances");
    verify_bind->option("seed", verify_opts->seed, "random seed");
    verify_bind->option("out", verify_opts->out, "CSV path, or - for stdout");
    verify->callback([verify_opts, verify_bind] {
        verify_bind->apply_config();
        run_verify(*verify_opts);
    });

    auto encode_opts = std::make_shared<EncodeOpts>();
    auto* encode = app.add_subcommand("encode", "export position encodings as CSV");
    auto encode_bind = std::make_shared<Binder>(encode);
    encode_bind->option("mode", encode_opts->mode, "sinusoidal or automaton");
    encode_bind->option("d", encode_opts->d, "encoding dimension (even)");
    encode_bind->option("n", encode_opts->n, "number of positions");
    encode_bind->flag("swap-pairs", encode_opts->swap_pairs,
                      "swap the two components of each frequency pair");
    encode_bind->option("out", encode_opts->out, "CSV path, or - for stdout");
    encode->callback([encode_opts, encode_bind] {
        encode_bind->apply_config();
        run_encode(*encode_opts);
    });

    auto* demo = app.add_subcommand("demo", "print the worked example automata");
    demo->callback([] { run_demo(); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const VerificationFailure&) {
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
