#include <doctest.h>

#include <cmath>

#include "msa/algebra.hpp"
#include "msa/diagonalize.hpp"
#include "msa/verify.hpp"

using namespace msa;

TEST_CASE("diagonal matrices need no perturbation") {
    Vector d(3);
    d << Complex(1, 0), Complex(2, 1), Complex(-0.5, 0);
    auto res = approx_diagonalize(Matrix(d.asDiagonal()), 1e-3, 1);
    CHECK(res.e.norm() == 0.0);
    CHECK((res.p - Matrix::Identity(3, 3)).norm() == 0.0);
    CHECK((res.eigenvalues - d).norm() == 0.0);
}

TEST_CASE("diagonalizable matrices come back exactly reconstructed") {
    Matrix a(2, 2);
    a << 1, 2, 3, 4;
    auto res = approx_diagonalize(a, 1e-6, 1);
    CHECK(res.e_norm == 0.0);
    Matrix recon = res.p * Matrix(res.eigenvalues.asDiagonal()) *
                   invert_checked(res.p).inverse;
    CHECK((recon - a).norm() <= 1e-8 * a.norm());
    CHECK(res.kappa < 1e10);
}

TEST_CASE("defective matrices get a perturbation within budget") {
    // eps must leave room for the eigenbasis conditioning gate: the
    // eigenvector condition number of a perturbed k-Jordan block grows
    // like gap^-(k-1), so tiny budgets on large blocks are refused
    const double eps = 1e-2;
    Matrix j = jordan_block(3, Complex(2.0, 1.0));
    auto res = approx_diagonalize(j, eps, 3);
    CHECK(res.e_norm > 0.0);
    CHECK(res.e_norm <= eps);
    Matrix recon = res.p * Matrix(res.eigenvalues.asDiagonal()) *
                   invert_checked(res.p, 1e10).inverse;
    CHECK((recon - (j + res.e)).norm() <= 1e-7 * (1.0 + j.norm()));
    // all eigenvalues distinct
    for (int i = 0; i < 3; ++i)
        for (int k = i + 1; k < 3; ++k)
            CHECK(std::abs(res.eigenvalues(i) - res.eigenvalues(k)) > 0.0);
    CHECK_THROWS_AS(approx_diagonalize(j, -1.0, 1), std::invalid_argument);
    // a budget too small for the conditioning gate fails loudly
    CHECK_THROWS_AS(approx_diagonalize(jordan_block(4, Complex(2.0, 1.0)), 1e-4, 3),
                    std::runtime_error);
}

TEST_CASE("jordan block layout") {
    Matrix j = jordan_block(3, Complex(5, -1));
    CHECK(j(0, 0) == Complex(5, -1));
    CHECK(j(0, 1) == Complex(1, 0));
    CHECK(j(1, 0) == Complex(0, 0));
    CHECK(j(2, 2) == Complex(5, -1));
}

TEST_CASE("nonzero-eigenvalue perturbation keeps relative power error within n*eps") {
    const double eps = 0.01;
    for (uint64_t seed : {1u, 2u, 3u}) {
        Complex lambda = std::polar(0.5 + 0.3 * seed, 0.7 * seed);
        Matrix j = jordan_block(4, lambda);
        Matrix d = perturb_jordan_nonzero(4, lambda, eps, seed);
        CHECK(d.isDiagonal(0.0));
        for (const auto& rep : power_error_sweep(j, d, 50, 0.5, eps)) {
            INFO("n=", rep.n, " rel=", rep.rel_err, " bound=", rep.bound);
            CHECK_FALSE(rep.violated);
            CHECK_FALSE(rep.nilpotent_branch);
        }
    }
    CHECK_THROWS_AS(perturb_jordan_nonzero(3, 0.0, eps, 1), std::invalid_argument);
}

TEST_CASE("nilpotent perturbation keeps absolute power error within r^n*eps") {
    const double eps = 0.01;
    for (int d = 1; d <= 5; ++d)
        for (double r : {0.5, 0.9}) {
            Matrix j = jordan_block(d, 0.0);
            CHECK(is_nilpotent(j));
            Matrix pert = perturb_jordan_zero(d, eps, r, 7 + d);
            double delta = std::min(r / 2, std::pow(r / 2, d) * eps / d);
            CHECK(pert.diagonal().cwiseAbs().maxCoeff() <= delta);
            CHECK(pert.diagonal().cwiseAbs().minCoeff() > 0.0);
            for (const auto& rep : power_error_sweep(j, pert, 60, r, eps)) {
                INFO("d=", d, " r=", r, " n=", rep.n, " abs=", rep.abs_err,
                     " bound=", rep.bound);
                CHECK_FALSE(rep.violated);
                CHECK(rep.nilpotent_branch);
            }
        }
    CHECK_THROWS_AS(perturb_jordan_zero(3, 0.01, 1.5, 1), std::invalid_argument);
}

TEST_CASE("nilpotency test") {
    CHECK(is_nilpotent(jordan_block(5, 0.0)));
    CHECK_FALSE(is_nilpotent(jordan_block(5, 1e-3)));
    CHECK_FALSE(is_nilpotent(Matrix::Identity(3, 3)));
    CHECK(is_nilpotent(Matrix::Zero(2, 2)));
}

TEST_CASE("power-bound sweep passes on many seeded instances") {
    for (const auto& row : verify_power_bounds(20, 50, 60, 99)) {
        INFO(row.check, " ", row.instance, " measured=", row.measured);
        CHECK(row.pass);
    }
}

TEST_CASE("simultaneous triangularization of a commuting family") {
    auto m = random_commuting_triangular(4, 2, 5);
    // rotate into a dense basis first so the fast path cannot trigger
    Matrix p(4, 4);
    p.setZero();
    p(0, 3) = 1;
    p(1, 0) = 1;
    p(2, 1) = 1;
    p(3, 2) = 1;
    Matrix q = p + 0.3 * Matrix::Ones(4, 4);
    auto rotated = change_of_basis(m, q);
    auto tri = simultaneous_triangularize(rotated.mu, 1e-7);
    Matrix pinv = invert_checked(tri.p).inverse;
    for (size_t i = 0; i < rotated.mu.size(); ++i) {
        Matrix t = tri.p * rotated.mu[i] * pinv;
        CHECK((t - tri.triangular[i]).norm() <= 1e-8 * (1.0 + t.norm()));
        double lower = 0.0;
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < r; ++c) lower += std::abs(t(r, c));
        CHECK(lower <= 1e-6 * (1.0 + t.norm()));
    }
    // already-triangular input takes the identity fast path
    auto fast = simultaneous_triangularize(m.mu, 1e-7);
    CHECK((fast.p - Matrix::Identity(4, 4)).norm() == 0.0);
    // non-commuting families are rejected
    Matrix a(2, 2), b(2, 2);
    a << 0, 1, 0, 0;
    b << 0, 0, 1, 0;
    CHECK_THROWS_AS(simultaneous_triangularize({a, b}, 1e-10), std::invalid_argument);
}

TEST_CASE("unary sections compute matrix-power entries") {
    auto m = random_commuting_triangular(4, 1, 9);
    for (int q = 0; q < 4; ++q)
        for (int r = q; r < 4; ++r) {
            auto sec = unary_section(m, q, "a", r);
            CHECK(sec.d == r - q + 1);
            for (int n = 0; n <= 5; ++n) {
                Multiset w;
                w.add("a", n);
                Complex want = matrix_power(m.mu[0], n)(q, r);
                CHECK(std::abs(weight(sec, w) - want) <= 1e-10 * (1.0 + std::abs(want)));
            }
        }
    CHECK_THROWS_AS(unary_section(m, 2, "a", 1), std::invalid_argument);
    CHECK_THROWS_AS(unary_section(m, 0, "a", 4), std::invalid_argument);
}

TEST_CASE("state count formula") {
    CHECK(asd_state_count(1, 2) == 4);
    CHECK(asd_state_count(2, 1) == 1);
    CHECK(asd_state_count(2, 6) == 252);  // C(10, 5)
    CHECK(asd_state_count(1, 1) == 1);
    CHECK_THROWS_AS(asd_state_count(0, 2), std::invalid_argument);
    CHECK_THROWS_AS(asd_state_count(60, 60), std::overflow_error);
}

TEST_CASE("ASD construction matches the formula and the original weights") {
    auto m = random_commuting_triangular(2, 1, 21);
    auto asd = make_asd(m, 1e-9);
    CHECK(asd.d == 4);
    CHECK(equivalent(m, asd, 6, 1e-8).equivalent);

    auto m2 = random_commuting_triangular(3, 2, 22);
    auto asd2 = make_asd(m2, 1e-9);
    CHECK((unsigned long long)asd2.d == asd_state_count(2, 3));
    CHECK(equivalent(m2, asd2, 4, 1e-7).equivalent);
    CHECK(commutation_defect(asd2) <= 1e-9);
}

TEST_CASE("ASD construction handles the non-triangular worked example") {
    auto m3 = example_m3();
    auto asd = make_asd(m3, 1e-9);
    auto rep = equivalent(m3, asd, 4, 1e-6);
    INFO("max deviation ", rep.max_deviation);
    CHECK(rep.equivalent);
}

TEST_CASE("pruning drops zero-weight terms but keeps the weights") {
    // lambda touching only state 0 prunes every sequence not starting at 0
    auto base = random_commuting_triangular(3, 1, 33);
    RowVector lambda = RowVector::Zero(3);
    lambda(0) = 1.0;
    WeightedAutomaton m = WeightedAutomaton::create(
        base.alphabet, lambda, base.mu, Vector(Vector::Ones(3)),
        AutomatonKind::Multiset);
    auto pruned = make_asd(m, 1e-9, true);
    auto full = make_asd(m, 1e-9, false);
    CHECK((unsigned long long)full.d == asd_state_count(1, 3));
    CHECK(pruned.d < full.d);
    CHECK(equivalent(m, pruned, 6, 1e-8).equivalent);
    CHECK(equivalent(m, full, 6, 1e-8).equivalent);
}
