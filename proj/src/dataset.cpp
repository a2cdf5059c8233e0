#include "msa/dataset.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "msa/model.hpp"
#include "msa/parallel.hpp"
#include "msa/rng.hpp"

namespace msa {

Eigen::MatrixXd haar_orthogonal(int d, uint64_t seed) {
    if (d < 1) throw std::invalid_argument("haar_orthogonal: d must be >= 1");
    auto rng = make_stream(seed, "haar");
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = gauss(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    Eigen::MatrixXd r = qr.matrixQR();
    // R-diagonal sign fix; without it the distribution is not Haar
    for (int i = 0; i < d; ++i)
        if (r(i, i) < 0) q.col(i) = -q.col(i);
    return q;
}

std::pair<WeightedAutomaton, Dataset> gen_task0_unary(int d, uint64_t seed) {
    Eigen::MatrixXd q = haar_orthogonal(d, seed);
    auto rng = make_stream(seed, "task0-unary-weights");
    std::normal_distribution<double> gauss(0.0, 1.0);
    RowVector lambda(d);
    Vector rho(d);
    for (int i = 0; i < d; ++i) lambda(i) = gauss(rng);
    for (int i = 0; i < d; ++i) rho(i) = gauss(rng);
    WeightedAutomaton m = WeightedAutomaton::create(
        {"a"}, lambda, {q.cast<Complex>()}, rho, AutomatonKind::Multiset);

    Dataset data;
    for (int n = 0; n <= 20; ++n) {
        Multiset w;
        w.add("a", n);
        Example ex;
        ex.seq.assign(n, 1);
        ex.target_re = weight(m, w).real();
        data.train.push_back(ex);
    }
    data.dev = data.train;  // loss is monitored on the training strings
    data.test = data.train;
    data.meta = {"task0_unary", seed, "{\"d\":" + std::to_string(d) + "}"};
    return {std::move(m), std::move(data)};
}

std::pair<DiagonalAutomaton, Dataset> gen_task0_diag(int d, int m, uint64_t seed) {
    if (d < 1 || m < 1) throw std::invalid_argument("gen_task0_diag: bad dimensions");
    auto rng = make_stream(seed, "task0-diag");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    DiagonalAutomaton aut;
    aut.d = d;
    for (int s = 1; s <= m; ++s) aut.alphabet.push_back(std::to_string(s));
    for (int s = 0; s < m; ++s) {
        Vector z(d);
        for (int i = 0; i < d; ++i) z(i) = Complex(unif(rng), unif(rng));
        double top = z.cwiseAbs().maxCoeff();
        aut.diag.push_back(z / top);  // spectral radius exactly 1
    }
    aut.lambda = RowVector(d);
    aut.rho = Vector(d);
    for (int i = 0; i < d; ++i) aut.lambda(i) = Complex(unif(rng), unif(rng));
    for (int i = 0; i < d; ++i) aut.rho(i) = Complex(unif(rng), unif(rng));

    Dataset data;
    // all multisets of total size 5 over m symbols, as sorted sequences
    std::vector<int> counts(m, 0);
    auto emit = [&](const std::vector<int>& c) {
        Multiset w;
        Example ex;
        ex.complex_target = true;
        for (int s = 0; s < m; ++s) {
            w.add(aut.alphabet[s], c[s]);
            ex.seq.insert(ex.seq.end(), c[s], s + 1);
        }
        Complex t = weight(aut, w);
        ex.target_re = t.real();
        ex.target_im = t.imag();
        data.train.push_back(std::move(ex));
    };
    auto rec = [&](auto&& self, int pos, int remaining) -> void {
        if (pos + 1 == m) {
            counts[pos] = remaining;
            emit(counts);
            return;
        }
        for (int c = 0; c <= remaining; ++c) {
            counts[pos] = c;
            self(self, pos + 1, remaining - c);
        }
    };
    rec(rec, 0, 5);
    data.dev = data.train;
    data.test = data.train;
    data.meta = {"task0_diag", seed,
                 "{\"d\":" + std::to_string(d) + ",\"m\":" + std::to_string(m) + "}"};
    return {std::move(aut), std::move(data)};
}

Dataset gen_digitsum(int n_train, uint64_t seed, bool units_only,
                     int per_test_length) {
    if (n_train < 100) throw std::invalid_argument("gen_digitsum: need n_train >= 100");
    auto rng = make_stream(seed, "digitsum-train");
    std::uniform_int_distribution<int> length(1, 50);
    std::uniform_int_distribution<int> digit(1, 9);

    auto make_example = [&](std::mt19937_64& r, int len) {
        Example ex;
        ex.seq.resize(len);
        int sum = 0;
        for (int i = 0; i < len; ++i) {
            ex.seq[i] = digit(r);
            sum += ex.seq[i];
        }
        ex.target_re = units_only ? sum % 10 : sum;
        return ex;
    };

    Dataset data;
    const int n_dev = std::max(1, n_train / 100);  // ~99/1 split
    for (int i = 0; i < n_train; ++i) {
        Example ex = make_example(rng, length(rng));
        if (i < n_train - n_dev)
            data.train.push_back(std::move(ex));
        else
            data.dev.push_back(std::move(ex));
    }
    auto test_rng = make_stream(seed, "digitsum-test");
    for (int len = 5; len <= 95; len += 5)
        for (int i = 0; i < per_test_length; ++i)
            data.test.push_back(make_example(test_rng, len));
    data.meta = {units_only ? "task2_digitsum_units" : "task1_digitsum", seed,
                 "{\"n_train\":" + std::to_string(n_train) + "}"};
    return data;
}

std::vector<LengthMetrics> evaluate(const SequenceModel& model,
                                    const std::vector<Example>& examples,
                                    EvalMode mode, bool parallel) {
    const int n = static_cast<int>(examples.size());
    std::vector<std::array<double, 2>> preds(n);
#pragma omp parallel for schedule(static) if (parallel && msa::thread_count() > 1) \
    num_threads(msa::thread_count())
    for (int i = 0; i < n; ++i) preds[i] = model.forward(examples[i].seq);

    std::map<int, LengthMetrics> by_length;
    for (int i = 0; i < n; ++i) {
        const Example& ex = examples[i];
        auto& row = by_length[static_cast<int>(ex.seq.size())];
        row.length = static_cast<int>(ex.seq.size());
        ++row.count;
        double dre = preds[i][0] - ex.target_re;
        double dim = preds[i][1] - ex.target_im;
        row.mse += dre * dre + dim * dim;
        long rounded = std::lround(preds[i][0]);
        if (mode == EvalMode::RoundedAccuracy)
            row.accuracy += rounded == std::lround(ex.target_re) ? 1.0 : 0.0;
        else if (mode == EvalMode::UnitsAccuracy)
            row.accuracy += ((rounded % 10) + 10) % 10 == std::lround(ex.target_re) ? 1.0 : 0.0;
    }
    std::vector<LengthMetrics> rows;
    for (auto& [len, row] : by_length) {
        row.mse /= row.count;
        row.accuracy /= row.count;
        rows.push_back(row);
    }
    return rows;
}

double overall_mse(const std::vector<LengthMetrics>& rows) {
    double total = 0.0;
    int count = 0;
    for (const auto& r : rows) {
        total += r.mse * r.count;
        count += r.count;
    }
    return count > 0 ? total / count : 0.0;
}

double min_accuracy(const std::vector<LengthMetrics>& rows) {
    double out = 1.0;
    for (const auto& r : rows) out = std::min(out, r.accuracy);
    return rows.empty() ? 0.0 : out;
}

double max_accuracy(const std::vector<LengthMetrics>& rows) {
    double out = 0.0;
    for (const auto& r : rows) out = std::max(out, r.accuracy);
    return out;
}

MeanBaseline mean_baseline(const std::vector<Example>& examples) {
    if (examples.empty()) throw std::invalid_argument("mean_baseline: empty dataset");
    MeanBaseline b;
    for (const auto& ex : examples) {
        b.mean_re += ex.target_re;
        b.mean_im += ex.target_im;
    }
    b.mean_re /= examples.size();
    b.mean_im /= examples.size();
    for (const auto& ex : examples) {
        double dre = ex.target_re - b.mean_re;
        double dim = ex.target_im - b.mean_im;
        b.mse += dre * dre + dim * dim;
    }
    b.mse /= examples.size();
    return b;
}

std::string examples_to_jsonl(const std::vector<Example>& examples) {
    std::string out;
    for (const auto& ex : examples) {
        nlohmann::json j;
        j["seq"] = ex.seq;
        if (ex.complex_target)
            j["target"] = {ex.target_re, ex.target_im};
        else
            j["target"] = ex.target_re;
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<Example> examples_from_jsonl(const std::string& text) {
    std::vector<Example> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        Example ex;
        ex.seq = j.at("seq").get<std::vector<int>>();
        const auto& t = j.at("target");
        if (t.is_array()) {
            ex.complex_target = true;
            ex.target_re = t[0].get<double>();
            ex.target_im = t[1].get<double>();
        } else {
            ex.target_re = t.get<double>();
        }
        out.push_back(std::move(ex));
    }
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << content;
    if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::ostringstream out;
    out << f.rdbuf();
    return out.str();
}

}  // namespace msa
