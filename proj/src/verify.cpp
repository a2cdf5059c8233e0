#include "msa/verify.hpp"

#include <cmath>
#include <sstream>

#include "msa/algebra.hpp"
#include "msa/logpolar.hpp"
#include "msa/model.hpp"
#include "msa/posenc.hpp"
#include "msa/rng.hpp"

namespace msa {

namespace {

Matrix random_matrix(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = Complex(gauss(rng), gauss(rng));
    return m;
}

CheckRow ratio_row(std::string check, std::string instance, double measured,
                   double bound) {
    CheckRow row;
    row.check = std::move(check);
    row.instance = std::move(instance);
    row.measured = measured;
    row.bound = bound;
    row.pass = measured <= bound;
    return row;
}

}  // namespace

WeightedAutomaton random_automaton(int d, const std::vector<std::string>& alphabet,
                                   uint64_t seed) {
    auto rng = make_stream(seed, "random-automaton");
    RowVector lambda = random_matrix(1, d, rng).row(0);
    Vector rho = random_matrix(d, 1, rng).col(0);
    std::vector<Matrix> mu;
    for (size_t i = 0; i < alphabet.size(); ++i) mu.push_back(random_matrix(d, d, rng));
    return WeightedAutomaton::create(alphabet, lambda, std::move(mu), rho,
                                     AutomatonKind::String);
}

WeightedAutomaton random_commuting_triangular(int d, int m, uint64_t seed) {
    auto rng = make_stream(seed, "random-commuting");
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.2, 1.0);
    Matrix t = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) t(i, j) = Complex(gauss(rng), gauss(rng));
    t /= std::max(1.0, t.norm());  // keep powers tame

    std::vector<std::string> alphabet;
    std::vector<Matrix> mu;
    for (int s = 0; s < m; ++s) {
        alphabet.push_back(std::string(1, char('a' + s)));
        // polynomial in t => commutes with every other symbol's matrix
        Matrix p = Matrix::Zero(d, d);
        Matrix power = Matrix::Identity(d, d);
        for (int deg = 0; deg < d; ++deg) {
            p += Complex(gauss(rng), gauss(rng)) * power;
            power = power * t;
        }
        mu.push_back(p / std::max(1.0, p.norm()));
    }
    RowVector lambda(d);
    Vector rho(d);
    for (int i = 0; i < d; ++i) lambda(i) = Complex(unif(rng) * (gauss(rng) > 0 ? 1 : -1), 0.0);
    for (int i = 0; i < d; ++i) rho(i) = Complex(unif(rng) * (gauss(rng) > 0 ? 1 : -1), 0.0);
    return WeightedAutomaton::create(alphabet, lambda, std::move(mu), rho,
                                     AutomatonKind::Multiset, 1e-9);
}

std::vector<CheckRow> verify_power_bounds(int n_instances, int nmax_nonzero,
                                          int nmax_zero, uint64_t seed) {
    std::vector<CheckRow> rows;
    auto rng = make_stream(seed, "power-bounds");
    std::uniform_int_distribution<int> size_dist(1, 5);
    std::uniform_real_distribution<double> mag(0.5, 2.0);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    const double eps = 0.01;

    for (int i = 0; i < n_instances; ++i) {
        int k = size_dist(rng);
        Complex lambda = std::polar(mag(rng), angle(rng));
        Matrix j = jordan_block(k, lambda);
        Matrix d = perturb_jordan_nonzero(k, lambda, eps, seed + i);
        auto sweep = power_error_sweep(j, d, nmax_nonzero, 0.5, eps);
        double worst = 0.0;
        for (const auto& rep : sweep)
            if (rep.n > 0 && std::isfinite(rep.rel_err) && rep.bound > 0)
                worst = std::max(worst, rep.rel_err / rep.bound);
        rows.push_back(ratio_row("lemma-nonzero",
                                 "k=" + std::to_string(k) + " seed=" + std::to_string(i),
                                 worst, 1.0));
    }
    for (int i = 0; i < n_instances; ++i) {
        int d = size_dist(rng);
        double r = (i % 2 == 0) ? 0.5 : 0.9;
        Matrix j = jordan_block(d, 0.0);
        Matrix pert = perturb_jordan_zero(d, eps, r, seed + 1000 + i);
        auto sweep = power_error_sweep(j, pert, nmax_zero, r, eps);
        double worst = 0.0;
        for (const auto& rep : sweep)
            if (rep.bound > 0) worst = std::max(worst, rep.abs_err / rep.bound);
        rows.push_back(ratio_row("lemma-zero",
                                 "d=" + std::to_string(d) + " r=" + std::to_string(r) +
                                     " seed=" + std::to_string(i),
                                 worst, 1.0));
    }
    return rows;
}

std::vector<CheckRow> verify_posenc(const std::vector<int>& dims, long positions) {
    std::vector<CheckRow> rows;
    for (int d : dims)
        rows.push_back(ratio_row("posenc-equality", "d=" + std::to_string(d),
                                 posenc_max_deviation(d, positions), 1e-9));
    return rows;
}

std::vector<CheckRow> verify_asd(int max_d, int max_m, int n_instances,
                                 uint64_t seed, int equiv_size) {
    std::vector<CheckRow> rows;

    {
        // worked-example identity: shuffle of the two small examples is the
        // six-state example, entrywise
        WeightedAutomaton s = shuffle(example_m2(), example_m1(), true);
        WeightedAutomaton m3 = example_m3();
        double dev = (s.lambda - m3.lambda).norm() + (s.rho - m3.rho).norm();
        for (size_t i = 0; i < s.mu.size(); ++i) dev += (s.mu[i] - m3.mu[i]).norm();
        rows.push_back(ratio_row("shuffle-identity", "m2<<m1 == m3", dev, 1e-15));

        auto m3_asd = make_asd(m3, 1e-9);
        auto rep = equivalent(m3, m3_asd, 4, 1e-6);
        rows.push_back(ratio_row("asd-equivalence", "example-m3 size<=4",
                                 rep.max_deviation, 1e-6));
    }

    for (int d = 1; d <= max_d; ++d)
        for (int m = 1; m <= max_m; ++m)
            for (int i = 0; i < n_instances; ++i) {
                auto a = random_commuting_triangular(d, m, seed + i * 97 + d * 7 + m);
                auto asd = make_asd(a, 1e-9);
                std::string inst = "d=" + std::to_string(d) + " m=" + std::to_string(m) +
                                   " seed=" + std::to_string(i);
                unsigned long long want = asd_state_count(m, d);
                rows.push_back(ratio_row("asd-state-count", inst,
                                         double(asd.d), double(want)));
                rows.back().pass = (unsigned long long)asd.d == want;
                auto rep = equivalent(a, asd, equiv_size, 1e-6);
                rows.push_back(ratio_row("asd-equivalence", inst, rep.max_deviation, 1e-6));
            }
    return rows;
}

std::vector<CheckRow> verify_algebra(int n_instances, uint64_t seed) {
    std::vector<CheckRow> rows;
    for (int i = 0; i < n_instances; ++i) {
        uint64_t s = seed + 131 * i;
        auto rng = make_stream(s, "algebra-instance");
        std::string inst = "seed=" + std::to_string(i);

        // direct-sum additivity and shuffle multiplicativity
        WeightedAutomaton a = random_automaton(2, {"a"}, s);
        WeightedAutomaton b = random_automaton(3, {"b"}, s + 1);
        WeightedAutomaton sum = direct_sum(a, b, true);
        WeightedAutomaton prod = shuffle(a, b, true);
        double worst_sum = 0.0, worst_prod = 0.0;
        for (const auto& w : enumerate_multisets({"a", "b"}, 6)) {
            Multiset wa, wb;
            for (const auto& [sym, c] : w.counts())
                (sym == "a" ? wa : wb).add(sym, c);
            Complex va = weight(pad_alphabet(a, {"a", "b"}), w);
            Complex vb = weight(pad_alphabet(b, {"a", "b"}), w);
            Complex expect_sum = va + vb;
            Complex expect_prod = weight(a, wa) * weight(b, wb);
            worst_sum = std::max(worst_sum, std::abs(weight(sum, w) - expect_sum) /
                                                (1.0 + std::abs(expect_sum)));
            worst_prod = std::max(worst_prod, std::abs(weight(prod, w) - expect_prod) /
                                                  (1.0 + std::abs(expect_prod)));
        }
        rows.push_back(ratio_row("direct-sum-additivity", inst, worst_sum, 1e-8));
        rows.push_back(ratio_row("shuffle-multiplicativity", inst, worst_prod, 1e-8));

        // basis invariance
        WeightedAutomaton c = random_automaton(4, {"a", "b"}, s + 2);
        Matrix p = random_matrix(4, 4, rng) + 3.0 * Matrix::Identity(4, 4);
        WeightedAutomaton cb = change_of_basis(c, p);
        double worst_basis = 0.0;
        for (const auto& w : enumerate_multisets({"a", "b"}, 5)) {
            Complex v0 = weight(c, w);
            worst_basis = std::max(worst_basis,
                                   std::abs(weight(cb, w) - v0) / (1.0 + std::abs(v0)));
        }
        rows.push_back(ratio_row("basis-invariance", inst, worst_basis, 1e-8));

        // Kronecker conjugation identity
        Matrix a1 = random_matrix(2, 2, rng), a2 = random_matrix(3, 3, rng);
        Matrix p1 = random_matrix(2, 2, rng) + 2.0 * Matrix::Identity(2, 2);
        Matrix p2 = random_matrix(3, 3, rng) + 2.0 * Matrix::Identity(3, 3);
        Matrix pk = kron(p1, p2);
        Matrix lhs = pk * kronecker_sum(a1, a2) * invert_checked(pk).inverse;
        Matrix rhs = kronecker_sum(p1 * a1 * invert_checked(p1).inverse,
                                   p2 * a2 * invert_checked(p2).inverse);
        rows.push_back(ratio_row("kronecker-conjugation", inst, (lhs - rhs).norm(),
                                 1e-9 * (1.0 + rhs.norm())));

        // norm bound ||E1 << E2||_F <= ||E1|| d2 + d1 ||E2||
        Matrix e1 = random_matrix(2, 2, rng), e2 = random_matrix(3, 3, rng);
        rows.push_back(ratio_row("kronecker-sum-norm-bound", inst,
                                 kronecker_sum(e1, e2).norm(),
                                 e1.norm() * 3 + 2 * e2.norm()));
    }
    return rows;
}

std::vector<CheckRow> verify_gradients(uint64_t seed) {
    std::vector<CheckRow> rows;
    auto rng = make_stream(seed, "verify-gradients");
    std::uniform_int_distribution<int> digit(1, 9);
    std::vector<int> seq(17);
    for (auto& s : seq) s = digit(rng);

    ComplexMultisetModel complex_model(11, 50, ComplexHead::Dense, false, seed);
    rows.push_back(ratio_row("grad-check", "complex dense",
                             grad_check(complex_model, seq, 3.0, 0.0, 1e-5, seed), 1e-4));
    ComplexMultisetModel sum_model(6, 4, ComplexHead::SumComplex, true, seed + 1);
    std::vector<int> short_seq(seq.begin(), seq.begin() + 5);
    for (auto& s : short_seq) s = 1 + s % 5;
    rows.push_back(ratio_row("grad-check", "complex sum",
                             grad_check(sum_model, short_seq, 0.5, -0.25, 1e-5, seed), 1e-4));
    DeepSetsBaseline deepsets(11, seed + 2);
    rows.push_back(ratio_row("grad-check", "deepsets",
                             grad_check(deepsets, seq, 3.0, 0.0, 1e-5, seed), 1e-4));

    // 1000-factor log-polar chain keeps (a, b) on the unit circle
    std::uniform_real_distribution<double> mag(0.1, 10.0);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    LogPolarComplex acc = LogPolarComplex::identity();
    double drift = 0.0;
    for (int i = 0; i < 1000; ++i) {
        LogPolarComplex f{std::log(mag(rng)), std::cos(angle(rng)), std::sin(angle(rng))};
        acc = logpolar_mul(acc, f);
        drift = std::max(drift, std::abs(acc.a * acc.a + acc.b * acc.b - 1.0));
    }
    CheckRow chain = ratio_row("logpolar-chain-drift", "1000 factors", drift, 1e-9);
    chain.pass = chain.pass && std::isfinite(acc.r);
    rows.push_back(chain);

    rows.push_back(ratio_row("param-count", "complex 1801",
                             ComplexMultisetModel::expected_param_count(
                                 11, 50, ComplexHead::Dense, false),
                             1801));
    rows.back().pass = rows.back().measured == 1801;
    rows.push_back(ratio_row("param-count", "deepsets 4161",
                             DeepSetsBaseline::expected_param_count(11), 4161));
    rows.back().pass = rows.back().measured == 4161;
    return rows;
}

std::string rows_to_csv(const std::vector<CheckRow>& rows) {
    std::ostringstream out;
    out << "check,instance,measured,bound,pass\n";
    out.precision(17);
    for (const auto& r : rows)
        out << r.check << "," << r.instance << "," << r.measured << "," << r.bound
            << "," << (r.pass ? "pass" : "FAIL") << "\n";
    return out.str();
}

std::string power_reports_csv(const std::vector<PowerErrorReport>& reports) {
    std::ostringstream out;
    out << "n,abs_err,rel_err,bound,violated\n";
    out.precision(17);
    for (const auto& r : reports)
        out << r.n << "," << r.abs_err << "," << r.rel_err << "," << r.bound << ","
            << (r.violated ? "true" : "false") << "\n";
    return out.str();
}

bool all_pass(const std::vector<CheckRow>& rows) {
    for (const auto& r : rows)
        if (!r.pass) return false;
    return true;
}

}  // namespace msa
