// Benchmark of the pairwise field kernel: serial reference against the
// OpenMP driver, with a bitwise-equality check between the two.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vpy/field.hpp"
#include "vpy/rng.hpp"

using namespace vpy;

namespace {

double time_of(const std::function<void()>& fn, int reps) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t max_n = argc > 1 ? std::stoul(argv[1]) : 20000;
    std::printf("%4s %8s %10s %10s %8s %8s\n", "d", "N", "serial[s]", "omp[s]", "speedup",
                "bitwise");
    for (int d : {2, 3}) {
        for (std::size_t n = 2000; n <= max_n; n *= 2) {
            Rng rng(7);
            std::vector<Vec> src(n);
            std::vector<double> w(n, 1.0 / static_cast<double>(n));
            for (auto& s : src) s = rng.in_ball(d, 1.0);
            const KernelSpec spec{d, 1.0, default_regularization(d, n)};
            std::vector<Vec> out_serial, out_omp;
            const int reps = n <= 4000 ? 3 : 1;
            const double ts = time_of(
                [&]() { out_serial = field_at_points_serial(spec, src, w, src, true); }, reps);
            const double tp =
                time_of([&]() { out_omp = field_at_points(spec, src, w, src, true); }, reps);
            bool same = true;
            for (std::size_t i = 0; i < n; ++i) same = same && (out_serial[i] == out_omp[i]);
            std::printf("%4d %8zu %10.4f %10.4f %8.2f %8s\n", d, n, ts, tp, ts / tp,
                        same ? "yes" : "NO");
            if (!same) return 1;
        }
    }
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: OpenMP disabled\n");
#endif
    return 0;
}
