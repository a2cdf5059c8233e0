#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "msa/logpolar.hpp"
#include "msa/model.hpp"
#include "msa/rng.hpp"

using namespace msa;

TEST_CASE("log-polar arithmetic") {
    auto i = LogPolarComplex::from_complex({0.0, 1.0});
    auto sq = logpolar_mul(i, i);  // i * i = -1
    CHECK(sq.to_complex().real() == doctest::Approx(-1.0));
    CHECK(std::abs(sq.to_complex().imag()) <= 1e-15);

    auto z = LogPolarComplex::from_complex({3.0, -4.0});
    CHECK(std::exp(z.r) == doctest::Approx(5.0));
    CHECK(z.a * z.a + z.b * z.b == doctest::Approx(1.0));
    CHECK(std::abs(z.to_complex() - std::complex<double>(3.0, -4.0)) <= 1e-12);

    auto zero = LogPolarComplex::from_complex({0.0, 0.0});
    CHECK(std::isinf(zero.r));
    CHECK(zero.to_complex() == std::complex<double>(0.0, 0.0));
}

TEST_CASE("long log-polar products stay on the unit circle") {
    auto rng = make_stream(5, "logpolar-test");
    std::uniform_real_distribution<double> mag(1e-3, 1e3);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    LogPolarComplex acc = LogPolarComplex::identity();
    for (int i = 0; i < 1000; ++i) {
        double m = mag(rng), t = angle(rng);
        acc = logpolar_mul(acc, {std::log(m), std::cos(t), std::sin(t)});
        CHECK(std::abs(acc.a * acc.a + acc.b * acc.b - 1.0) <= 1e-9);
    }
    CHECK(std::isfinite(acc.r));
}

TEST_CASE("parameter counts match the reference configurations") {
    CHECK(ComplexMultisetModel::expected_param_count(11, 50, ComplexHead::Dense,
                                                     false) == 1801);
    CHECK(DeepSetsBaseline::expected_param_count(11) == 4161);
    ComplexMultisetModel cm(11, 50, ComplexHead::Dense, false, 1);
    CHECK(cm.param_count() == 1801);
    DeepSetsBaseline ds(11, 1);
    CHECK(ds.param_count() == 4161);
    // counts track the configuration
    ComplexMultisetModel lam(6, 4, ComplexHead::SumComplex, true, 1);
    CHECK(lam.param_count() ==
          ComplexMultisetModel::expected_param_count(6, 4, ComplexHead::SumComplex,
                                                     true));
    CHECK(lam.param_count() == 3 * 6 * 4 + 3 * 4);
}

TEST_CASE("parameter blocks tile the flat vector exactly") {
    for (const SequenceModel* m :
         {static_cast<const SequenceModel*>(
              new ComplexMultisetModel(5, 3, ComplexHead::Dense, true, 2)),
          static_cast<const SequenceModel*>(new DeepSetsBaseline(5, 2, 8, 4))}) {
        int covered = 0;
        int expected_offset = 0;
        for (const auto& b : m->param_blocks()) {
            CHECK(b.offset == expected_offset);
            expected_offset += b.size;
            covered += b.size;
        }
        CHECK(covered == m->param_count());
        delete m;
    }
}

TEST_CASE("model output is exactly permutation invariant") {
    std::vector<int> seq = {3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8, 9, 7, 9};
    std::vector<int> perm = seq;
    auto rng = make_stream(9, "perm-test");
    ComplexMultisetModel cm(10, 8, ComplexHead::Dense, false, 4);
    DeepSetsBaseline ds(10, 4, 16, 6);
    for (int trial = 0; trial < 10; ++trial) {
        std::shuffle(perm.begin(), perm.end(), rng);
        // bitwise identical, not just close
        CHECK(cm.forward(perm)[0] == cm.forward(seq)[0]);
        CHECK(ds.forward(perm)[0] == ds.forward(seq)[0]);
    }
}

TEST_CASE("models reject out-of-vocabulary symbols") {
    ComplexMultisetModel cm(5, 2, ComplexHead::SumReal, false, 1);
    CHECK_THROWS_AS(cm.forward({1, 5}), std::domain_error);
    CHECK_THROWS_AS(cm.forward({-1}), std::domain_error);
    DeepSetsBaseline ds(5, 1, 4, 3);
    CHECK_THROWS_AS(ds.forward({7}), std::domain_error);
    std::vector<double> g(cm.param_count(), 0.0);
    CHECK_THROWS_AS(cm.backward({9}, 1.0, 0.0, g), std::domain_error);
    std::vector<double> wrong(3, 0.0);
    CHECK_THROWS_AS(cm.backward({1}, 1.0, 0.0, wrong), std::invalid_argument);
}

TEST_CASE("analytic gradients agree with finite differences") {
    std::vector<int> seq = {1, 4, 4, 2, 9, 7, 3, 3, 3, 8};
    SUBCASE("complex model, dense head") {
        ComplexMultisetModel m(10, 6, ComplexHead::Dense, false, 3);
        CHECK(grad_check(m, seq, 2.5, 0.0, 1e-5, 1) <= 1e-4);
    }
    SUBCASE("complex model, real-sum head with trainable initial weights") {
        ComplexMultisetModel m(10, 6, ComplexHead::SumReal, true, 3);
        CHECK(grad_check(m, seq, -1.0, 0.0, 1e-5, 1) <= 1e-4);
    }
    SUBCASE("complex model, complex-sum head") {
        ComplexMultisetModel m(10, 6, ComplexHead::SumComplex, true, 3);
        CHECK(grad_check(m, seq, 0.25, -0.5, 1e-5, 1) <= 1e-4);
    }
    SUBCASE("deepsets baseline") {
        DeepSetsBaseline m(10, 3, 20, 10);
        CHECK(grad_check(m, seq, 2.5, 0.0, 1e-5, 1) <= 1e-4);
    }
    SUBCASE("empty sequence") {
        ComplexMultisetModel m(10, 4, ComplexHead::Dense, true, 3);
        CHECK(grad_check(m, {}, 1.0, 0.0, 1e-5, 1) <= 1e-4);
    }
}

TEST_CASE("checkpoints round-trip bit-exactly") {
    ComplexMultisetModel cm(7, 5, ComplexHead::SumComplex, true, 11);
    std::string text = checkpoint_to_json(cm, 42, 0.125);
    int epoch = -1;
    double dev = 0.0;
    auto back = checkpoint_from_json(text, &epoch, &dev);
    CHECK(epoch == 42);
    CHECK(dev == 0.125);
    CHECK(back->kind() == "complex");
    CHECK(back->params() == cm.params());
    CHECK(checkpoint_to_json(*back, 42, 0.125) == text);

    DeepSetsBaseline ds(7, 11);
    auto ds_back = checkpoint_from_json(checkpoint_to_json(ds, 0, 1.0));
    CHECK(ds_back->params() == ds.params());

    CHECK_THROWS_AS(checkpoint_from_json("{\"format_version\": 2}"),
                    std::invalid_argument);
}

TEST_CASE("clone is an independent deep copy") {
    ComplexMultisetModel cm(4, 3, ComplexHead::Dense, false, 1);
    auto copy = cm.clone();
    copy->params()[0] += 1.0;
    CHECK(copy->params()[0] != cm.params()[0]);
    CHECK(copy->forward({0, 1})[0] != cm.forward({0, 1})[0]);
}
