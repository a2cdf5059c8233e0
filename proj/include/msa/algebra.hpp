#pragma once

#include "msa/automaton.hpp"

namespace msa {

Matrix kron(const Matrix& a, const Matrix& b);
RowVector kron(const RowVector& a, const RowVector& b);
Vector kron(const Vector& a, const Vector& b);

/// Kronecker sum A (x) I + I (x) B.
Matrix kronecker_sum(const Matrix& a, const Matrix& b);

/// Inverse via partial-pivoting LU with a Frobenius condition estimate.
/// Throws (message carries the estimate) when kappa exceeds kappa_max.
struct InverseResult {
    Matrix inverse;
    double kappa;
};
InverseResult invert_checked(const Matrix& p, double kappa_max = 1e12);

/// Extends M to a larger alphabet; missing symbols get zero matrices.
WeightedAutomaton pad_alphabet(const WeightedAutomaton& m,
                               const std::vector<std::string>& alphabet);

/// Block-diagonal combination; weights add. Padding to the union alphabet
/// is opt-in so accidental alphabet mismatches surface as errors.
WeightedAutomaton direct_sum(const WeightedAutomaton& ma,
                             const WeightedAutomaton& mb, bool pad = false);

/// Shuffle (Kronecker-sum) product; on disjoint effective alphabets the
/// weights multiply.
WeightedAutomaton shuffle(const WeightedAutomaton& ma,
                          const WeightedAutomaton& mb, bool pad = false);

/// (lambda P^-1, P mu P^-1, P rho); computes the same multiset weights.
WeightedAutomaton change_of_basis(const WeightedAutomaton& m, const Matrix& p,
                                  double kappa_max = 1e12);

enum class ScaleSide { Initial, Final };
WeightedAutomaton scale(const WeightedAutomaton& m, Complex c, ScaleSide side);

/// All multisets over `alphabet` with total count <= max_size, in a fixed
/// deterministic order (by size, then lexicographic counts).
std::vector<Multiset> enumerate_multisets(const std::vector<std::string>& alphabet,
                                          int max_size);

struct EquivalenceReport {
    bool equivalent = false;
    double max_deviation = 0.0;
    Multiset argmax;
    int checked = 0;
};

/// Brute-force equivalence on all multisets with total count <= max_size:
/// |w_A - w_B| <= tol * (1 + |w_A|) everywhere.
EquivalenceReport equivalent(const WeightedAutomaton& ma,
                             const WeightedAutomaton& mb, int max_size,
                             double tol = 1e-8, long budget = 2000000);

}  // namespace msa
