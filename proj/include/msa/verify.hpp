#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msa/automaton.hpp"
#include "msa/diagonalize.hpp"

namespace msa {

struct CheckRow {
    std::string check;
    std::string instance;
    double measured = 0.0;
    double bound = 0.0;
    bool pass = false;
};

/// Random d x d automaton over `alphabet` with Gaussian entries.
WeightedAutomaton random_automaton(int d, const std::vector<std::string>& alphabet,
                                   uint64_t seed);

/// Random commuting upper-triangular multiset automaton: transition
/// matrices are polynomials of one random upper-triangular matrix, so
/// they commute exactly; lambda and rho are dense (no zero entries).
WeightedAutomaton random_commuting_triangular(int d, int m, uint64_t seed);

/// Jordan-block perturbation bounds: n_instances seeded cases for the
/// nonzero-eigenvalue branch (k <= 5, |lambda| in [0.5, 2], n <= nmax_nonzero)
/// and the nilpotent branch (d <= 5, r in {0.5, 0.9}, n <= nmax_zero).
/// One row per instance with the worst error/bound ratio.
std::vector<CheckRow> verify_power_bounds(int n_instances, int nmax_nonzero,
                                          int nmax_zero, uint64_t seed);

/// Sinusoidal encodings vs polar-automaton forward weights, one row per
/// dimension, bound 1e-9.
std::vector<CheckRow> verify_posenc(const std::vector<int>& dims, long positions);

/// Appendix-style construction: state counts and brute-force equivalence
/// for random commuting triangular automata up to (max_d, max_m), plus the
/// shuffle identity between the worked examples.
std::vector<CheckRow> verify_asd(int max_d, int max_m, int n_instances,
                                 uint64_t seed, int equiv_size = 4);

/// Algebra invariants on seeded random automata: direct-sum additivity,
/// shuffle multiplicativity on disjoint alphabets, basis invariance,
/// the Kronecker conjugation identity, and the Kronecker-sum norm bound.
std::vector<CheckRow> verify_algebra(int n_instances, uint64_t seed);

/// Gradient checks for both model families, log-polar chain drift, and
/// the reference parameter counts.
std::vector<CheckRow> verify_gradients(uint64_t seed);

std::string rows_to_csv(const std::vector<CheckRow>& rows);
std::string power_reports_csv(const std::vector<PowerErrorReport>& reports);
bool all_pass(const std::vector<CheckRow>& rows);

}  // namespace msa
