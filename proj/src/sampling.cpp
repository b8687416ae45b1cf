#include "peum/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "peum/error.hpp"
#include "peum/reduce.hpp"

namespace peum {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

SampleSeed sample_seed(std::uint64_t seed, std::uint64_t i) {
    std::uint64_t s = seed ^ (0xD1B54A32D192ED03ULL * (i + 1));
    double x0 = simd::to_unit(splitmix64(s));
    std::uint64_t r = splitmix64(s) | 1ULL;
    return {x0, r};
}

SampleStats summarize(const std::vector<double>& v) {
    SampleStats st;
    st.count = v.size();
    if (v.empty()) return st;
    const double n = static_cast<double>(v.size());
    st.mean = pairwise_sum(v) / n;
    std::vector<double> d2(v.size()), d4(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double d = v[i] - st.mean;
        d2[i] = d * d;
        d4[i] = d2[i] * d2[i];
    }
    double m2 = pairwise_sum(d2) / n, m4 = pairwise_sum(d4) / n;
    if (v.size() > 1) {
        st.variance = m2 * n / (n - 1.0);
        st.std_error = std::sqrt(st.variance / n);
        st.variance_std_error = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
    }
    return st;
}

std::vector<double> birkhoff_samples(const MapSlice& f, const Observable& phi, std::uint64_t samples, int k_begin,
                                     int steps, std::uint64_t seed, double dither, const simd::Kernels& kernels) {
    std::vector<double> out(samples, 0.0);
    if (samples == 0) return out;
    const auto coeffs = phi.poly_coefficients();
    const bool fast = f.affine() && coeffs.has_value();
    constexpr std::uint64_t shard = 4096;
    const std::uint64_t nshards = (samples + shard - 1) / shard;

#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t sh = 0; sh < static_cast<std::int64_t>(nshards); ++sh) {
        const std::uint64_t lo = static_cast<std::uint64_t>(sh) * shard;
        const std::uint64_t len = std::min(shard, samples - lo);
        const std::size_t lanes = (len + 3) & ~std::size_t{3};
        std::vector<double> x(lanes), sums(lanes, 0.0);
        std::vector<std::uint64_t> rng(lanes);
        for (std::size_t i = 0; i < lanes; ++i) {
            auto s = sample_seed(seed, lo + i);
            x[i] = s.x0;
            rng[i] = s.rng;
        }
        if (fast) {
            simd::AffineOrbit p;
            p.c = f.c();
            p.aL = f.branch(Symbol::L).a0;
            p.bL = f.branch(Symbol::L).a1;
            p.aR = f.branch(Symbol::R).a0;
            p.bR = f.branch(Symbol::R).a1;
            p.phi = coeffs->data();
            p.phi_len = static_cast<int>(coeffs->size());
            p.dither = dither;
            kernels.affine_birkhoff(p, lanes, x.data(), rng.data(), sums.data(), k_begin, steps);
        } else {
            for (std::size_t i = 0; i < lanes; ++i) {
                double xi = x[i], s = 0.0;
                for (int k = 0; k < steps; ++k) {
                    if (k >= k_begin) s += phi(xi);
                    xi = f.value(f.symbol(xi), xi);
                    if (dither != 0.0) xi += dither * (simd::to_unit(simd::xorshift64(rng[i])) - 0.5);
                    xi = std::fabs(xi);
                    if (xi > 1.0) xi = 2.0 - xi;
                }
                sums[i] = s;
            }
        }
        std::copy(sums.begin(), sums.begin() + static_cast<std::ptrdiff_t>(len), out.begin() + static_cast<std::ptrdiff_t>(lo));
    }
    return out;
}

}  // namespace peum
