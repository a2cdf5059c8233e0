#include <doctest.h>

#include <cmath>
#include <numeric>

#include "msa/dataset.hpp"
#include "msa/model.hpp"
#include "msa/train.hpp"

using namespace msa;

TEST_CASE("Haar sampling yields orthogonal matrices and is deterministic") {
    for (int d : {2, 3, 5}) {
        auto q = haar_orthogonal(d, 3);
        CHECK((q * q.transpose() - Eigen::MatrixXd::Identity(d, d)).norm() <= 1e-12);
        CHECK(std::abs(std::abs(q.determinant()) - 1.0) <= 1e-12);
        auto q2 = haar_orthogonal(d, 3);
        CHECK((q - q2).norm() == 0.0);
        CHECK((q - haar_orthogonal(d, 4)).norm() > 1e-6);
    }
    CHECK_THROWS_AS(haar_orthogonal(0, 1), std::invalid_argument);
}

TEST_CASE("unary regression dataset has 21 strings labeled by the automaton") {
    auto [aut, data] = gen_task0_unary(3, 5);
    CHECK(aut.d == 3);
    REQUIRE(data.train.size() == 21);
    CHECK(data.dev.size() == 21);
    for (int n = 0; n <= 20; ++n) {
        CHECK(data.train[n].seq.size() == size_t(n));
        Multiset w;
        w.add("a", n);
        CHECK(data.train[n].target_re == doctest::Approx(weight(aut, w).real()));
        CHECK_FALSE(data.train[n].complex_target);
    }
    // transition is orthogonal, so targets stay bounded
    CHECK((aut.mu[0] * aut.mu[0].adjoint() - Matrix::Identity(3, 3)).norm() <= 1e-12);
}

TEST_CASE("diagonal regression dataset enumerates all 126 size-5 multisets") {
    auto [aut, data] = gen_task0_diag(4, 5, 9);
    REQUIRE(data.train.size() == 126);  // C(5 + 4, 4) over 5 symbols
    double max_mod = 0.0;
    for (const auto& z : aut.diag) max_mod = std::max(max_mod, z.cwiseAbs().maxCoeff());
    CHECK(max_mod == doctest::Approx(1.0));  // spectral radius exactly 1
    for (const auto& ex : data.train) {
        CHECK(ex.seq.size() == 5);
        CHECK(ex.complex_target);
        CHECK(std::is_sorted(ex.seq.begin(), ex.seq.end()));
        Multiset w;
        for (int s : ex.seq) w.add(std::to_string(s));
        Complex want = weight(aut, w);
        CHECK(ex.target_re == doctest::Approx(want.real()));
        CHECK(ex.target_im == doctest::Approx(want.imag()));
    }
}

TEST_CASE("digit-sum datasets have the right shape and targets") {
    auto data = gen_digitsum(1000, 4, false, 3);
    CHECK(data.train.size() == 990);
    CHECK(data.dev.size() == 10);
    CHECK(data.test.size() == 19 * 3);  // lengths 5,10,...,95
    for (const auto& ex : data.train) {
        CHECK(ex.seq.size() >= 1);
        CHECK(ex.seq.size() <= 50);
        int sum = std::accumulate(ex.seq.begin(), ex.seq.end(), 0);
        CHECK(ex.target_re == double(sum));
        for (int s : ex.seq) {
            CHECK(s >= 1);
            CHECK(s <= 9);
        }
    }
    auto units = gen_digitsum(1000, 4, true, 3);
    for (const auto& ex : units.test) {
        int sum = std::accumulate(ex.seq.begin(), ex.seq.end(), 0);
        CHECK(ex.target_re == double(sum % 10));
    }
    // same seed, same bytes; different seed, different data
    auto again = gen_digitsum(1000, 4, false, 3);
    CHECK(examples_to_jsonl(again.train) == examples_to_jsonl(data.train));
    auto other = gen_digitsum(1000, 5, false, 3);
    CHECK(examples_to_jsonl(other.train) != examples_to_jsonl(data.train));
    CHECK_THROWS_AS(gen_digitsum(10, 1, false), std::invalid_argument);
}

TEST_CASE("JSONL round trip preserves examples bit-exactly") {
    auto data = gen_digitsum(200, 7, false, 1);
    std::string text = examples_to_jsonl(data.train);
    auto back = examples_from_jsonl(text);
    REQUIRE(back.size() == data.train.size());
    for (size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].seq == data.train[i].seq);
        CHECK(back[i].target_re == data.train[i].target_re);
    }
    // complex targets serialize as [re, im]
    auto [aut, cdata] = gen_task0_diag(2, 2, 1);
    auto cback = examples_from_jsonl(examples_to_jsonl(cdata.train));
    for (size_t i = 0; i < cback.size(); ++i) {
        CHECK(cback[i].complex_target);
        CHECK(cback[i].target_re == cdata.train[i].target_re);
        CHECK(cback[i].target_im == cdata.train[i].target_im);
    }
}

TEST_CASE("per-length evaluation and the three accuracy modes") {
    // a model that always predicts 12.4: build from deepsets with zeroed
    // weights and a bias
    DeepSetsBaseline model(11, 1);
    std::fill(model.params().begin(), model.params().end(), 0.0);
    model.params()[model.param_count() - 1] = 12.4;  // output bias is last

    std::vector<Example> examples;
    for (int len : {2, 4}) {
        for (int i = 0; i < 3; ++i) {
            Example ex;
            ex.seq.assign(len, 1);
            ex.target_re = (len == 2) ? 12.0 : 5.0;
            examples.push_back(ex);
        }
    }
    auto rows = msa::evaluate(model, examples, EvalMode::RoundedAccuracy);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].length == 2);
    CHECK(rows[0].count == 3);
    CHECK(rows[0].accuracy == 1.0);  // round(12.4) == 12
    CHECK(rows[1].accuracy == 0.0);
    CHECK(rows[0].mse == doctest::Approx(0.16));

    auto units = msa::evaluate(model, examples, EvalMode::UnitsAccuracy);
    CHECK(units[0].accuracy == 0.0);  // 12 mod 10 = 2 != 12... target is 12
    // against a units target the mod-10 reading matches
    for (auto& ex : examples) ex.target_re = 2.0;
    auto units2 = msa::evaluate(model, examples, EvalMode::UnitsAccuracy);
    CHECK(units2[0].accuracy == 1.0);
    CHECK(min_accuracy(units2) == 1.0);
    CHECK(max_accuracy(units2) == 1.0);
    CHECK(overall_mse(rows) ==
          doctest::Approx((0.16 * 3 + 7.4 * 7.4 * 3) / 6.0));
}

TEST_CASE("mean baseline") {
    std::vector<Example> ex(2);
    ex[0].target_re = 1.0;
    ex[1].target_re = 3.0;
    auto b = mean_baseline(ex);
    CHECK(b.mean_re == 2.0);
    CHECK(b.mse == 1.0);
    CHECK_THROWS_AS(mean_baseline({}), std::invalid_argument);
}

TEST_CASE("serial and parallel batch gradients agree bitwise") {
    auto data = gen_digitsum(300, 11, false, 1);
    ComplexMultisetModel model(11, 10, ComplexHead::Dense, false, 2);
    std::vector<int> indices(100);
    std::iota(indices.begin(), indices.end(), 0);

    std::vector<double> g_par(model.param_count(), 0.0);
    std::vector<double> g_seq(model.param_count(), 0.0);
    double l_par = batch_gradient(model, data.train, indices, g_par, true);
    double l_seq = batch_gradient(model, data.train, indices, g_seq, false);
    // chunked path must not depend on whether OpenMP fans it out
    CHECK(l_par == l_seq);
    CHECK(g_par == g_seq);

    // unchunked reference agrees to floating-point reassociation noise
    std::vector<double> g_ref(model.param_count(), 0.0);
    double l_ref = batch_gradient_serial(model, data.train, indices, g_ref);
    CHECK(l_ref == doctest::Approx(l_par).epsilon(1e-12));
    for (int i = 0; i < model.param_count(); ++i)
        CHECK(g_ref[i] == doctest::Approx(g_par[i]).epsilon(1e-9));
}

TEST_CASE("training decreases the loss and is deterministic") {
    auto data = gen_digitsum(400, 13, false, 1);
    ComplexMultisetModel model(11, 10, ComplexHead::Dense, false, 3);
    TrainConfig cfg;
    cfg.max_epochs = 5;
    cfg.lr = 1e-2;
    cfg.seed = 17;
    auto r1 = train(model, data, cfg);
    auto r2 = train(model, data, cfg);
    CHECK(r1.best_dev == r2.best_dev);
    CHECK(r1.best->params() == r2.best->params());
    CHECK(r1.history.size() == 5);
    double initial = dataset_loss(model, data.dev, true);
    CHECK(r1.best_dev < initial);
}

TEST_CASE("training contract: zero epochs, empty data, early stopping") {
    auto data = gen_digitsum(200, 13, false, 1);
    ComplexMultisetModel model(11, 4, ComplexHead::Dense, false, 3);
    TrainConfig cfg;
    cfg.max_epochs = 0;
    auto r = train(model, data, cfg);
    CHECK(r.best_epoch == -1);
    CHECK(r.best->params() == model.params());  // untouched initial checkpoint
    CHECK(r.history.empty());

    Dataset empty;
    cfg.max_epochs = 1;
    CHECK_THROWS_AS(train(model, empty, cfg), std::invalid_argument);
    cfg.lr = -1.0;
    CHECK_THROWS_AS(train(model, data, cfg), std::invalid_argument);

    // an absurd learning rate stops early once the dev loss stops improving
    TrainConfig stuck;
    stuck.lr = 1e9;
    stuck.max_epochs = 100;
    stuck.stop_patience = 3;
    stuck.decay_patience = 1;
    ComplexMultisetModel small(11, 2, ComplexHead::Dense, false, 3);
    try {
        auto rs = train(small, data, stuck);
        CHECK(rs.stopped_early);
        CHECK(rs.history.size() < 100);
    } catch (const std::runtime_error&) {
        // non-finite loss abort is also an acceptable outcome at lr = 1e9
        CHECK(true);
    }
}
