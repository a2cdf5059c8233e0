#pragma once

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace msa {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RowVector = Eigen::RowVectorXcd;

constexpr double kCommuteTol = 1e-10;

/// Count map from symbols to nonnegative multiplicities.
class Multiset {
public:
    Multiset() = default;

    static Multiset from_sequence(const std::vector<std::string>& seq) {
        Multiset w;
        for (const auto& s : seq) w.add(s);
        return w;
    }

    void add(const std::string& symbol, int n = 1) {
        if (n < 0) throw std::invalid_argument("Multiset: negative count");
        if (n == 0) return;
        counts_[symbol] += n;
        size_ += n;
    }

    const std::map<std::string, int>& counts() const { return counts_; }
    int size() const { return size_; }
    bool empty() const { return size_ == 0; }

private:
    std::map<std::string, int> counts_;  // sorted: canonical evaluation order
    int size_ = 0;
};

enum class AutomatonKind { Multiset, String };

/// Matrix-tuple automaton (lambda, mu, rho) over complex scalars. Real
/// automata are stored as complex with zero imaginary parts.
/// Immutable after construction; all operations on it are pure.
struct WeightedAutomaton {
    int d = 0;
    std::vector<std::string> alphabet;
    RowVector lambda;
    std::vector<Matrix> mu;  // aligned with alphabet
    Vector rho;
    AutomatonKind kind = AutomatonKind::String;

    static WeightedAutomaton create(std::vector<std::string> alphabet,
                                    RowVector lambda, std::vector<Matrix> mu,
                                    Vector rho,
                                    AutomatonKind kind = AutomatonKind::String,
                                    double commute_tol = kCommuteTol);

    int symbol_index(const std::string& symbol) const;
    const Matrix& mu_of(const std::string& symbol) const {
        return mu[symbol_index(symbol)];
    }
};

/// Per-symbol complex diagonal transitions; trivially a multiset automaton.
struct DiagonalAutomaton {
    int d = 0;
    std::vector<std::string> alphabet;
    RowVector lambda;
    std::vector<Vector> diag;  // aligned with alphabet
    Vector rho;

    WeightedAutomaton to_weighted() const;
};

/// A^n by repeated squaring; n >= 0.
Matrix matrix_power(const Matrix& a, long n);

/// Max over symbol pairs of ||mu(a)mu(b) - mu(b)mu(a)||_F.
double commutation_defect(const WeightedAutomaton& m);

/// lambda * mu(w) * rho, product in sorted symbol order.
Complex weight(const WeightedAutomaton& m, const Multiset& w);
Complex weight(const DiagonalAutomaton& m, const Multiset& w);

/// lambda * mu(w).
RowVector forward_weights(const WeightedAutomaton& m, const Multiset& w);

/// Evaluates lambda mu(w1)...mu(wn) rho over n_orders random orderings of
/// w's symbols. Test oracle for order independence.
std::vector<Complex> weight_by_permutation_oracle(const WeightedAutomaton& m,
                                                  const Multiset& w,
                                                  int n_orders, uint64_t seed);

// JSON round trip: {d, alphabet, lambda:[[re,im]], mu:{sym:[[[re,im]]]},
// rho:[[re,im]], kind}. Bit-exact for finite doubles.
std::string to_json_string(const WeightedAutomaton& m, int indent = -1);
WeightedAutomaton automaton_from_json_string(const std::string& text);
std::string to_json_string(const DiagonalAutomaton& m, int indent = -1);
DiagonalAutomaton diagonal_from_json_string(const std::string& text);

// Worked examples from the background literature; used by tests and demo.
WeightedAutomaton example_m1();  // #a divisible by three
WeightedAutomaton example_m2();  // exactly one b
WeightedAutomaton example_m3();  // both conditions, 6 states

}  // namespace msa
