// Benchmark: serial vs OpenMP batch-gradient kernel on digit-sum data.
// Also reports the max elementwise gradient deviation between the two
// paths, which should be at floating-point noise level (the chunked
// parallel path reduces in a fixed order; the serial reference does not
// chunk, so tiny reassociation differences are expected).

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numeric>
#include <vector>

#include "msa/dataset.hpp"
#include "msa/model.hpp"
#include "msa/parallel.hpp"
#include "msa/train.hpp"

using Clock = std::chrono::steady_clock;

static double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm up
    auto t0 = Clock::now();
    for (int i = 0; i < reps; ++i) fn();
    auto t1 = Clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

int main(int argc, char** argv) {
    int n_examples = argc > 1 ? std::atoi(argv[1]) : 4096;
    int reps = argc > 2 ? std::atoi(argv[2]) : 5;

    msa::Dataset data = msa::gen_digitsum(n_examples, 1, false, 1);
    msa::ComplexMultisetModel model(11, 50, msa::ComplexHead::Dense, false, 1);
    std::vector<int> indices(data.train.size());
    std::iota(indices.begin(), indices.end(), 0);

    std::vector<double> g_serial(model.param_count(), 0.0);
    std::vector<double> g_parallel(model.param_count(), 0.0);

    double ms_serial = time_ms(
        [&] {
            std::fill(g_serial.begin(), g_serial.end(), 0.0);
            msa::batch_gradient_serial(model, data.train, indices, g_serial);
        },
        reps);
    double ms_parallel = time_ms(
        [&] {
            std::fill(g_parallel.begin(), g_parallel.end(), 0.0);
            msa::batch_gradient(model, data.train, indices, g_parallel, true);
        },
        reps);

    double max_dev = 0.0;
    for (size_t i = 0; i < g_serial.size(); ++i)
        max_dev = std::max(max_dev, std::abs(g_serial[i] - g_parallel[i]));

    std::cout << "examples:          " << indices.size() << "\n"
              << "threads:           " << msa::thread_count() << "\n"
              << "serial:            " << ms_serial << " ms/batch\n"
              << "parallel:          " << ms_parallel << " ms/batch\n"
              << "speedup:           " << ms_serial / ms_parallel << "x\n"
              << "max gradient dev:  " << max_dev << "\n";
    return 0;
}
