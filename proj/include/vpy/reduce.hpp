#pragma once

#include <cstddef>
#include <vector>

#include "vpy/common.hpp"

namespace vpy {

// Deterministic summation.  The reduction tree is a function of the element
// count alone: values are consumed in fixed blocks of kReduceBlock, each block
// is summed with four interleaved partial sums combined as (s0+s1)+(s2+s3),
// and block partials are folded with recursive halving.  Serial and OpenMP
// drivers share these shapes, so results are bit-identical at any thread
// count.
inline constexpr std::size_t kReduceBlock = 4096;

namespace detail {

template <class F>
double block_sum(std::size_t begin, std::size_t end, F&& value_at) {
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
    std::size_t j = begin;
    for (; j + 4 <= end; j += 4) {
        s0 += value_at(j);
        s1 += value_at(j + 1);
        s2 += value_at(j + 2);
        s3 += value_at(j + 3);
    }
    if (j < end) s0 += value_at(j++);
    if (j < end) s1 += value_at(j++);
    if (j < end) s2 += value_at(j++);
    return (s0 + s1) + (s2 + s3);
}

inline double fold_pairwise(const double* x, std::size_t n) {
    if (n == 1) return x[0];
    if (n == 2) return x[0] + x[1];
    const std::size_t half = n / 2;
    return fold_pairwise(x, half) + fold_pairwise(x + half, n - half);
}

}  // namespace detail

// Generator form: sums value_at(0..n-1).
template <class F>
double deterministic_sum(std::size_t n, F&& value_at) {
    if (n == 0) return 0.0;
    if (n <= kReduceBlock) return detail::block_sum(0, n, value_at);
    const std::size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
    std::vector<double> partial(nblocks);
    for (std::size_t b = 0; b < nblocks; ++b) {
        const std::size_t lo = b * kReduceBlock;
        partial[b] = detail::block_sum(lo, std::min(lo + kReduceBlock, n), value_at);
    }
    return detail::fold_pairwise(partial.data(), nblocks);
}

double deterministic_sum(const double* x, std::size_t n);

// OpenMP over blocks; bit-identical to the serial driver.
double deterministic_sum_parallel(const double* x, std::size_t n);

}  // namespace vpy
