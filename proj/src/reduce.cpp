#include "vpy/reduce.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vpy {

double deterministic_sum(const double* x, std::size_t n) {
    return deterministic_sum(n, [x](std::size_t i) { return x[i]; });
}

double deterministic_sum_parallel(const double* x, std::size_t n) {
    if (n == 0) return 0.0;
    if (n <= kReduceBlock) return detail::block_sum(0, n, [x](std::size_t i) { return x[i]; });
    const std::size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
    std::vector<double> partial(nblocks);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nblocks); ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kReduceBlock;
        partial[static_cast<std::size_t>(b)] =
            detail::block_sum(lo, std::min(lo + kReduceBlock, n), [x](std::size_t i) { return x[i]; });
    }
    return detail::fold_pairwise(partial.data(), nblocks);
}

}  // namespace vpy
