#pragma once

#include <cstdint>
#include <vector>

#include "peum/family.hpp"
#include "peum/observable.hpp"
#include "peum/simd.hpp"

namespace peum {

// Perturbation added after each step of Monte Carlo orbits; keeps floating
// point orbits from collapsing onto dyadic fixed points (tent at t = 2).
constexpr double kDefaultDither = 0x1p-48;

std::uint64_t splitmix64(std::uint64_t& state);

struct SampleStats {
    double mean = 0.0;
    double variance = 0.0;  // unbiased sample variance
    double std_error = 0.0; // of the mean
    double variance_std_error = 0.0;
    std::uint64_t count = 0;
};

SampleStats summarize(const std::vector<double>& v);

/// Start point and generator state of Monte Carlo sample i; depends only on (seed, i).
struct SampleSeed {
    double x0;
    std::uint64_t rng;
};
SampleSeed sample_seed(std::uint64_t seed, std::uint64_t i);

// For each sample i (Lebesgue-uniform start): sum_{k_begin <= k < steps} phi(f^k x_i).
std::vector<double> birkhoff_samples(const MapSlice& f, const Observable& phi, std::uint64_t samples, int k_begin,
                                     int steps, std::uint64_t seed, double dither = kDefaultDither,
                                     const simd::Kernels& kernels = simd::active());

}  // namespace peum
