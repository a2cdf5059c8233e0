#include "msa/algebra.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <limits>
#include <set>

namespace msa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

AutomatonKind combined_kind(const WeightedAutomaton& a, const WeightedAutomaton& b) {
    return (a.kind == AutomatonKind::Multiset && b.kind == AutomatonKind::Multiset)
               ? AutomatonKind::Multiset
               : AutomatonKind::String;
}

std::vector<std::string> union_alphabet(const WeightedAutomaton& a,
                                        const WeightedAutomaton& b, bool pad,
                                        const char* op) {
    std::set<std::string> sa(a.alphabet.begin(), a.alphabet.end());
    std::set<std::string> sb(b.alphabet.begin(), b.alphabet.end());
    if (!pad && sa != sb)
        throw std::invalid_argument(std::string(op) +
                                    ": alphabet mismatch (pass pad=true to fill "
                                    "missing symbols with zero matrices)");
    sa.insert(sb.begin(), sb.end());
    return {sa.begin(), sa.end()};
}

}  // namespace

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

RowVector kron(const RowVector& a, const RowVector& b) {
    RowVector out(a.size() * b.size());
    for (int i = 0; i < a.size(); ++i)
        out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

Vector kron(const Vector& a, const Vector& b) {
    Vector out(a.size() * b.size());
    for (int i = 0; i < a.size(); ++i)
        out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

Matrix kronecker_sum(const Matrix& a, const Matrix& b) {
    return kron(a, Matrix::Identity(b.rows(), b.cols())) +
           kron(Matrix::Identity(a.rows(), a.cols()), b);
}

InverseResult invert_checked(const Matrix& p, double kappa_max) {
    if (p.rows() != p.cols()) throw std::invalid_argument("invert: matrix not square");
    Eigen::PartialPivLU<Matrix> lu(p);
    Matrix inv = lu.inverse();
    double kappa = p.norm() * inv.norm();
    if (!inv.allFinite() || !(kappa <= kappa_max))
        throw std::invalid_argument("invert: matrix singular or ill-conditioned, kappa ~ " +
                                    std::to_string(kappa));
    return {std::move(inv), kappa};
}

WeightedAutomaton pad_alphabet(const WeightedAutomaton& m,
                               const std::vector<std::string>& alphabet) {
    std::vector<Matrix> mu;
    mu.reserve(alphabet.size());
    for (const auto& s : alphabet) {
        auto it = std::find(m.alphabet.begin(), m.alphabet.end(), s);
        mu.push_back(it == m.alphabet.end() ? Matrix::Zero(m.d, m.d)
                                            : m.mu[it - m.alphabet.begin()]);
    }
    return WeightedAutomaton::create(alphabet, m.lambda, std::move(mu), m.rho,
                                     m.kind, kInf);
}

WeightedAutomaton direct_sum(const WeightedAutomaton& ma,
                             const WeightedAutomaton& mb, bool pad) {
    auto alphabet = union_alphabet(ma, mb, pad, "direct_sum");
    WeightedAutomaton a = pad_alphabet(ma, alphabet);
    WeightedAutomaton b = pad_alphabet(mb, alphabet);
    const int d = a.d + b.d;
    RowVector lambda(d);
    lambda << a.lambda, b.lambda;
    Vector rho(d);
    rho << a.rho, b.rho;
    std::vector<Matrix> mu;
    for (size_t i = 0; i < alphabet.size(); ++i) {
        Matrix m = Matrix::Zero(d, d);
        m.topLeftCorner(a.d, a.d) = a.mu[i];
        m.bottomRightCorner(b.d, b.d) = b.mu[i];
        mu.push_back(std::move(m));
    }
    return WeightedAutomaton::create(alphabet, std::move(lambda), std::move(mu),
                                     std::move(rho), combined_kind(ma, mb), kInf);
}

WeightedAutomaton shuffle(const WeightedAutomaton& ma,
                          const WeightedAutomaton& mb, bool pad) {
    auto alphabet = union_alphabet(ma, mb, pad, "shuffle");
    WeightedAutomaton a = pad_alphabet(ma, alphabet);
    WeightedAutomaton b = pad_alphabet(mb, alphabet);
    RowVector lambda = kron(a.lambda, b.lambda);
    Vector rho = kron(a.rho, b.rho);
    std::vector<Matrix> mu;
    for (size_t i = 0; i < alphabet.size(); ++i)
        mu.push_back(kronecker_sum(a.mu[i], b.mu[i]));
    return WeightedAutomaton::create(alphabet, std::move(lambda), std::move(mu),
                                     std::move(rho), combined_kind(ma, mb), kInf);
}

WeightedAutomaton change_of_basis(const WeightedAutomaton& m, const Matrix& p,
                                  double kappa_max) {
    if (p.rows() != m.d || p.cols() != m.d)
        throw std::invalid_argument("change_of_basis: basis dimension mismatch");
    auto inv = invert_checked(p, kappa_max);
    RowVector lambda = m.lambda * inv.inverse;
    Vector rho = p * m.rho;
    std::vector<Matrix> mu;
    for (const auto& t : m.mu) mu.push_back(p * t * inv.inverse);
    return WeightedAutomaton::create(m.alphabet, std::move(lambda), std::move(mu),
                                     std::move(rho), m.kind, kInf);
}

WeightedAutomaton scale(const WeightedAutomaton& m, Complex c, ScaleSide side) {
    WeightedAutomaton out = m;
    if (side == ScaleSide::Initial)
        out.lambda *= c;
    else
        out.rho *= c;
    return out;
}

std::vector<Multiset> enumerate_multisets(const std::vector<std::string>& alphabet,
                                          int max_size) {
    std::vector<std::string> symbols = alphabet;
    std::sort(symbols.begin(), symbols.end());
    std::vector<Multiset> out;
    std::vector<int> counts(symbols.size(), 0);
    // compositions of `remaining` over symbols[pos..]
    auto rec = [&](auto&& self, size_t pos, int remaining) -> void {
        if (pos + 1 == symbols.size() || symbols.empty()) {
            if (!symbols.empty()) counts[pos] = remaining;
            Multiset w;
            for (size_t i = 0; i < symbols.size(); ++i) w.add(symbols[i], counts[i]);
            out.push_back(std::move(w));
            return;
        }
        for (int c = 0; c <= remaining; ++c) {
            counts[pos] = c;
            self(self, pos + 1, remaining - c);
        }
    };
    if (symbols.empty()) {
        out.emplace_back();
        return out;
    }
    for (int size = 0; size <= max_size; ++size) rec(rec, 0, size);
    return out;
}

EquivalenceReport equivalent(const WeightedAutomaton& ma,
                             const WeightedAutomaton& mb, int max_size,
                             double tol, long budget) {
    std::set<std::string> sa(ma.alphabet.begin(), ma.alphabet.end());
    std::set<std::string> sb(mb.alphabet.begin(), mb.alphabet.end());
    if (sa != sb) throw std::invalid_argument("equivalent: automata must share an alphabet");

    const int m = static_cast<int>(sa.size());
    // multiset count is C(max_size + m, m); guard before enumerating
    double estimate = 1.0;
    for (int i = 1; i <= m; ++i) estimate *= double(max_size + i) / i;
    if (estimate > double(budget))
        throw std::invalid_argument("equivalent: enumeration budget exceeded, reduce max_size");

    EquivalenceReport report;
    report.equivalent = true;
    for (const auto& w : enumerate_multisets(ma.alphabet, max_size)) {
        Complex wa = weight(ma, w);
        Complex wb = weight(mb, w);
        double dev = std::abs(wa - wb) / (1.0 + std::abs(wa));
        ++report.checked;
        if (dev > report.max_deviation) {
            report.max_deviation = dev;
            report.argmax = w;
        }
        if (dev > tol) report.equivalent = false;
    }
    return report;
}

}  // namespace msa
