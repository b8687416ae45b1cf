#pragma once

#include <cstddef>
#include <vector>

#include "peum/simd.hpp"

namespace peum {

// Block-wise kernel reductions combined pairwise; deterministic for a given
// kernel set and independent of thread count.
double sum(const double* x, std::size_t n, const simd::Kernels& k = simd::active());
double dot(const double* x, const double* y, std::size_t n, const simd::Kernels& k = simd::active());
double l1_diff(const double* x, const double* y, std::size_t n, const simd::Kernels& k = simd::active());

inline double sum(const std::vector<double>& x) { return sum(x.data(), x.size()); }
inline double dot(const std::vector<double>& x, const std::vector<double>& y) { return dot(x.data(), y.data(), x.size()); }

// Pairwise sum of a small vector in index order.
double pairwise_sum(const double* x, std::size_t n);
inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

}  // namespace peum
