#include "peum/reduce.hpp"

#include <algorithm>

namespace peum {

double pairwise_sum(const double* x, std::size_t n) {
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

namespace {

template <class F>
double blocked(std::size_t n, F&& block) {
    const std::size_t nb = (n + simd::kBlock - 1) / simd::kBlock;
    if (nb <= 1) return n ? block(0, n) : 0.0;
    std::vector<double> part(nb);
    for (std::size_t b = 0; b < nb; ++b) {
        std::size_t lo = b * simd::kBlock;
        std::size_t len = std::min(simd::kBlock, n - lo);
        part[b] = block(lo, len);
    }
    return pairwise_sum(part.data(), nb);
}

}  // namespace

double sum(const double* x, std::size_t n, const simd::Kernels& k) {
    return blocked(n, [&](std::size_t lo, std::size_t len) { return k.block_sum(x + lo, len); });
}

double dot(const double* x, const double* y, std::size_t n, const simd::Kernels& k) {
    return blocked(n, [&](std::size_t lo, std::size_t len) { return k.block_dot(x + lo, y + lo, len); });
}

double l1_diff(const double* x, const double* y, std::size_t n, const simd::Kernels& k) {
    return blocked(n, [&](std::size_t lo, std::size_t len) { return k.block_l1_diff(x + lo, y + lo, len); });
}

}  // namespace peum
