#include "msa/automaton.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "msa/rng.hpp"

namespace msa {

namespace {

bool all_finite(const Matrix& m) { return m.allFinite(); }

void check_finite(const char* what, bool ok) {
    if (!ok) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

}  // namespace

WeightedAutomaton WeightedAutomaton::create(std::vector<std::string> alphabet,
                                            RowVector lambda,
                                            std::vector<Matrix> mu, Vector rho,
                                            AutomatonKind kind,
                                            double commute_tol) {
    const int d = static_cast<int>(lambda.size());
    if (d <= 0) throw std::invalid_argument("automaton: empty state space");
    if (rho.size() != d)
        throw std::invalid_argument("automaton: rho length mismatch");
    if (mu.size() != alphabet.size())
        throw std::invalid_argument("automaton: one matrix per symbol required");
    for (const auto& m : mu)
        if (m.rows() != d || m.cols() != d)
            throw std::invalid_argument("automaton: transition matrix dimension mismatch");
    for (size_t i = 0; i < alphabet.size(); ++i)
        for (size_t j = i + 1; j < alphabet.size(); ++j)
            if (alphabet[i] == alphabet[j])
                throw std::invalid_argument("automaton: duplicate symbol " + alphabet[i]);
    check_finite("lambda", lambda.allFinite());
    check_finite("rho", rho.allFinite());
    for (const auto& m : mu) check_finite("mu", all_finite(m));

    WeightedAutomaton a;
    a.d = d;
    a.alphabet = std::move(alphabet);
    a.lambda = std::move(lambda);
    a.mu = std::move(mu);
    a.rho = std::move(rho);
    a.kind = kind;
    if (kind == AutomatonKind::Multiset && commutation_defect(a) > commute_tol)
        throw std::invalid_argument("automaton: transition matrices do not commute within tolerance");
    return a;
}

int WeightedAutomaton::symbol_index(const std::string& symbol) const {
    auto it = std::find(alphabet.begin(), alphabet.end(), symbol);
    if (it == alphabet.end())
        throw std::domain_error("unknown symbol: " + symbol);
    return static_cast<int>(it - alphabet.begin());
}

WeightedAutomaton DiagonalAutomaton::to_weighted() const {
    std::vector<Matrix> mats;
    mats.reserve(diag.size());
    for (const auto& v : diag) mats.push_back(Matrix(v.asDiagonal()));
    return WeightedAutomaton::create(alphabet, lambda, std::move(mats), rho,
                                     AutomatonKind::Multiset);
}

Matrix matrix_power(const Matrix& a, long n) {
    if (n < 0) throw std::invalid_argument("matrix_power: negative exponent");
    Matrix result = Matrix::Identity(a.rows(), a.cols());
    Matrix base = a;
    while (n > 0) {
        if (n & 1) result = result * base;
        n >>= 1;
        if (n > 0) base = base * base;
    }
    return result;
}

double commutation_defect(const WeightedAutomaton& m) {
    double worst = 0.0;
    for (size_t i = 0; i < m.mu.size(); ++i)
        for (size_t j = i + 1; j < m.mu.size(); ++j) {
            double defect = (m.mu[i] * m.mu[j] - m.mu[j] * m.mu[i]).norm();
            worst = std::max(worst, defect);
        }
    return worst;
}

RowVector forward_weights(const WeightedAutomaton& m, const Multiset& w) {
    RowVector fw = m.lambda;
    for (const auto& [symbol, count] : w.counts())
        fw = fw * matrix_power(m.mu_of(symbol), count);
    return fw;
}

Complex weight(const WeightedAutomaton& m, const Multiset& w) {
    return (forward_weights(m, w) * m.rho).value();
}

Complex weight(const DiagonalAutomaton& m, const Multiset& w) {
    Vector acc = Vector::Ones(m.d);
    for (const auto& [symbol, count] : w.counts()) {
        auto it = std::find(m.alphabet.begin(), m.alphabet.end(), symbol);
        if (it == m.alphabet.end()) throw std::domain_error("unknown symbol: " + symbol);
        const Vector& z = m.diag[it - m.alphabet.begin()];
        for (int i = 0; i < m.d; ++i) acc(i) *= std::pow(z(i), count);
    }
    Complex total = 0.0;
    for (int i = 0; i < m.d; ++i) total += m.lambda(i) * acc(i) * m.rho(i);
    return total;
}

std::vector<Complex> weight_by_permutation_oracle(const WeightedAutomaton& m,
                                                  const Multiset& w,
                                                  int n_orders, uint64_t seed) {
    std::vector<int> symbols;
    for (const auto& [symbol, count] : w.counts()) {
        int idx = m.symbol_index(symbol);
        symbols.insert(symbols.end(), count, idx);
    }
    auto rng = make_stream(seed, "permutation-oracle");
    std::vector<Complex> values;
    values.reserve(n_orders);
    for (int k = 0; k < n_orders; ++k) {
        std::shuffle(symbols.begin(), symbols.end(), rng);
        RowVector fw = m.lambda;
        for (int idx : symbols) fw = fw * m.mu[idx];
        values.push_back((fw * m.rho).value());
    }
    return values;
}

// --- serialization ---

namespace {

using nlohmann::json;

json complex_to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2)
        throw std::invalid_argument("expected [re, im] pair");
    return Complex(j[0].get<double>(), j[1].get<double>());
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
        rows.push_back(row);
    }
    return rows;
}

Matrix matrix_from_json(const json& j, int d) {
    Matrix m(d, d);
    if (static_cast<int>(j.size()) != d)
        throw std::invalid_argument("matrix row count mismatch");
    for (int i = 0; i < d; ++i) {
        if (static_cast<int>(j[i].size()) != d)
            throw std::invalid_argument("matrix column count mismatch");
        for (int k = 0; k < d; ++k) m(i, k) = complex_from_json(j[i][k]);
    }
    return m;
}

json cvector_to_json(const Vector& v) {
    json out = json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
    return out;
}

Vector cvector_from_json(const json& j) {
    Vector v(j.size());
    for (size_t i = 0; i < j.size(); ++i) v(i) = complex_from_json(j[i]);
    return v;
}

}  // namespace

std::string to_json_string(const WeightedAutomaton& m, int indent) {
    json j;
    j["d"] = m.d;
    j["alphabet"] = m.alphabet;
    j["lambda"] = cvector_to_json(m.lambda.transpose());
    json mu = json::object();
    for (size_t i = 0; i < m.alphabet.size(); ++i)
        mu[m.alphabet[i]] = matrix_to_json(m.mu[i]);
    j["mu"] = mu;
    j["rho"] = cvector_to_json(m.rho);
    j["kind"] = m.kind == AutomatonKind::Multiset ? "multiset" : "string";
    return j.dump(indent);
}

WeightedAutomaton automaton_from_json_string(const std::string& text) {
    json j = json::parse(text);
    const int d = j.at("d").get<int>();
    auto alphabet = j.at("alphabet").get<std::vector<std::string>>();
    RowVector lambda = cvector_from_json(j.at("lambda")).transpose();
    std::vector<Matrix> mu;
    for (const auto& s : alphabet) mu.push_back(matrix_from_json(j.at("mu").at(s), d));
    Vector rho = cvector_from_json(j.at("rho"));
    std::string kind = j.at("kind").get<std::string>();
    if (kind != "multiset" && kind != "string")
        throw std::invalid_argument("unknown automaton kind: " + kind);
    if (static_cast<int>(lambda.size()) != d)
        throw std::invalid_argument("lambda length mismatch against d");
    return WeightedAutomaton::create(
        std::move(alphabet), std::move(lambda), std::move(mu), std::move(rho),
        kind == "multiset" ? AutomatonKind::Multiset : AutomatonKind::String);
}

std::string to_json_string(const DiagonalAutomaton& m, int indent) {
    json j;
    j["d"] = m.d;
    j["alphabet"] = m.alphabet;
    j["lambda"] = cvector_to_json(m.lambda.transpose());
    json diag = json::object();
    for (size_t i = 0; i < m.alphabet.size(); ++i)
        diag[m.alphabet[i]] = cvector_to_json(m.diag[i]);
    j["diag"] = diag;
    j["rho"] = cvector_to_json(m.rho);
    j["kind"] = "diagonal";
    return j.dump(indent);
}

DiagonalAutomaton diagonal_from_json_string(const std::string& text) {
    json j = json::parse(text);
    DiagonalAutomaton m;
    m.d = j.at("d").get<int>();
    m.alphabet = j.at("alphabet").get<std::vector<std::string>>();
    m.lambda = cvector_from_json(j.at("lambda")).transpose();
    for (const auto& s : m.alphabet) m.diag.push_back(cvector_from_json(j.at("diag").at(s)));
    m.rho = cvector_from_json(j.at("rho"));
    if (static_cast<int>(m.lambda.size()) != m.d || static_cast<int>(m.rho.size()) != m.d)
        throw std::invalid_argument("diagonal automaton dimension mismatch");
    return m;
}

// --- worked examples ---

WeightedAutomaton example_m1() {
    RowVector lambda(3);
    lambda << 1, 0, 0;
    Vector rho(3);
    rho << 1, 0, 0;
    Matrix a(3, 3);
    a << 0, 1, 0,
         0, 0, 1,
         1, 0, 0;
    return WeightedAutomaton::create({"a"}, lambda, {a}, rho, AutomatonKind::Multiset);
}

WeightedAutomaton example_m2() {
    RowVector lambda(2);
    lambda << 1, 0;
    Vector rho(2);
    rho << 0, 1;
    Matrix b(2, 2);
    b << 0, 1,
         0, 0;
    return WeightedAutomaton::create({"b"}, lambda, {b}, rho, AutomatonKind::Multiset);
}

WeightedAutomaton example_m3() {
    RowVector lambda = RowVector::Zero(6);
    lambda(0) = 1;
    Vector rho = Vector::Zero(6);
    rho(3) = 1;
    Matrix a = Matrix::Zero(6, 6), b = Matrix::Zero(6, 6);
    a(0, 1) = 1; a(1, 2) = 1; a(2, 0) = 1;
    a(3, 4) = 1; a(4, 5) = 1; a(5, 3) = 1;
    b(0, 3) = 1; b(1, 4) = 1; b(2, 5) = 1;
    return WeightedAutomaton::create({"a", "b"}, lambda, {a, b}, rho,
                                     AutomatonKind::Multiset);
}

}  // namespace msa
