#pragma once

#include "msa/automaton.hpp"

namespace msa {

struct DiagonalizationResult {
    Matrix p;            // eigenvector basis: (A+E) = P diag(eigenvalues) P^-1
    Vector eigenvalues;
    Matrix e;            // applied perturbation
    double e_norm = 0.0;
    double kappa = 0.0;  // ||P|| ||P^-1||
};

/// Perturbs A by at most eps (Frobenius) until it has a full, well-
/// conditioned eigenbasis. E = 0 when A already does.
DiagonalizationResult approx_diagonalize(const Matrix& a, double eps,
                                         uint64_t seed);

/// Jordan block of size k: lambda on the diagonal, ones above it.
Matrix jordan_block(int k, Complex lambda);

/// Diagonal perturbation for a Jordan block with eigenvalue lambda != 0:
/// distinct entries shrinking the diagonal along lambda's phase, so that
/// ||(J+D)^n - J^n|| / ||J^n|| <= n*eps for all n.
Matrix perturb_jordan_nonzero(int k, Complex lambda, double eps, uint64_t seed);

/// Diagonal perturbation for a nilpotent Jordan block of size d: distinct
/// entries in (0, delta], delta = min{r/2, (r/2)^d * eps/d}, so that
/// ||(J+D)^n - J^n|| <= r^n * eps for all n >= 0.
Matrix perturb_jordan_zero(int d, double eps, double r, uint64_t seed);

struct PowerErrorReport {
    int n = 0;
    double abs_err = 0.0;
    double rel_err = 0.0;  // NaN when ||A^n|| == 0
    double bound = 0.0;    // r^n*eps (nilpotent A) or n*eps (relative)
    bool nilpotent_branch = false;
    bool violated = false;
};

/// ||(A+E)^n - A^n|| against the applicable bound for n = 0..n_max.
std::vector<PowerErrorReport> power_error_sweep(const Matrix& a, const Matrix& e,
                                                int n_max, double r, double eps);

/// ||A^d||_F <= 1e-12 * max(1, ||A||_F^d).
bool is_nilpotent(const Matrix& a);

struct TriangularizationResult {
    Matrix p;  // unitary-derived basis: P A_i P^-1 upper triangular
    std::vector<Matrix> triangular;
};

/// Simultaneous unitary triangularization of a commuting family by
/// recursive common-eigenvector deflation.
TriangularizationResult simultaneous_triangularize(const std::vector<Matrix>& mats,
                                                   double tol = kCommuteTol);

/// Unary automaton over {a} computing [mu_M(a)^k]_{q,r} on a^k; states
/// trimmed to the span q..r (0-based, inclusive). Requires M upper
/// triangular and q <= r.
WeightedAutomaton unary_section(const WeightedAutomaton& m, int q,
                                const std::string& a, int r);

/// Equivalent automaton with C(2m+d, d-1) states built from direct sums of
/// shuffle products of unary sections; its transition matrices are ASD.
/// prune drops terms whose initial or final scalar weight is zero (state
/// count then only upper-bounded by the binomial).
WeightedAutomaton make_asd(const WeightedAutomaton& m, double tol = kCommuteTol,
                           bool prune = true);

/// C(2m+d, d-1), exact; throws on overflow.
unsigned long long asd_state_count(int m, int d);

}  // namespace msa
