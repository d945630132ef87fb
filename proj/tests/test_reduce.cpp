#include <doctest.h>

#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vpy/reduce.hpp"

using namespace vpy;

TEST_SUITE_BEGIN("reduce");

TEST_CASE("serial and parallel drivers agree bitwise at any thread count") {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (std::size_t n : {std::size_t(0), std::size_t(1), std::size_t(5), std::size_t(4096),
                          std::size_t(4097), std::size_t(100000)}) {
        std::vector<double> x(n);
        for (auto& v : x) v = dist(rng) * std::pow(10.0, dist(rng) * 8);
        const double serial = deterministic_sum(x.data(), n);
        for (int threads : {1, 2, 3, 7}) {
#ifdef _OPENMP
            omp_set_num_threads(threads);
#else
            (void)threads;
#endif
            const double par = deterministic_sum_parallel(x.data(), n);
            CHECK(par == serial);
        }
    }
#ifdef _OPENMP
    omp_set_num_threads(omp_get_num_procs());
#endif
}

TEST_CASE("blocked pairwise sum tracks a long double reference") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::vector<double> x(250000);
    long double ref = 0;
    for (auto& v : x) {
        v = dist(rng);
        ref += v;
    }
    const double got = deterministic_sum(x.data(), x.size());
    CHECK(std::abs(got - static_cast<double>(ref)) < 1e-9 * static_cast<double>(ref));
}

TEST_CASE("generator form matches array form") {
    std::vector<double> x(10001);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.1 * static_cast<double>(i));
    CHECK(deterministic_sum(x.size(), [&](std::size_t i) { return x[i]; }) ==
          deterministic_sum(x.data(), x.size()));
}

TEST_SUITE_END();
