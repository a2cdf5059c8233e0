#include <doctest.h>

#include <sstream>

#include "msa/verify.hpp"

using namespace msa;

TEST_CASE("random commuting triangular automata really commute and are triangular") {
    for (uint64_t seed : {1, 2, 3}) {
        auto m = random_commuting_triangular(4, 3, seed);
        CHECK(m.kind == AutomatonKind::Multiset);
        CHECK(commutation_defect(m) <= 1e-9);
        for (const auto& t : m.mu)
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < i; ++j) CHECK(t(i, j) == Complex(0.0));
        // dense boundary weights, so nothing gets pruned downstream
        for (int i = 0; i < 4; ++i) {
            CHECK(m.lambda(i) != Complex(0.0));
            CHECK(m.rho(i) != Complex(0.0));
        }
    }
}

TEST_CASE("verification suites pass at reduced sizes") {
    CHECK(all_pass(verify_power_bounds(10, 30, 40, 1)));
    CHECK(all_pass(verify_posenc({2, 4}, 100)));
    CHECK(all_pass(verify_asd(2, 2, 2, 1)));
    CHECK(all_pass(verify_algebra(5, 1)));
    CHECK(all_pass(verify_gradients(1)));
}

TEST_CASE("check rows serialize to CSV with a header") {
    std::vector<CheckRow> rows = {{"a-check", "case 1", 0.5, 1.0, true},
                                  {"b-check", "case 2", 2.0, 1.0, false}};
    std::string csv = rows_to_csv(rows);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "check,instance,measured,bound,pass");
    std::getline(in, line);
    CHECK(line == "a-check,case 1,0.5,1,pass");
    std::getline(in, line);
    CHECK(line == "b-check,case 2,2,1,FAIL");
    CHECK_FALSE(all_pass(rows));
    rows.pop_back();
    CHECK(all_pass(rows));
}

TEST_CASE("power reports serialize to CSV") {
    Matrix j = jordan_block(3, 0.0);
    Matrix e = perturb_jordan_zero(3, 0.01, 0.5, 1);
    auto reports = power_error_sweep(j, e, 5, 0.5, 0.01);
    std::string csv = power_reports_csv(reports);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "n,abs_err,rel_err,bound,violated");
    int count = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++count;
    CHECK(count == 6);
    CHECK(csv.find("true") == std::string::npos);  // no violations
}
