#pragma once

#include <cstddef>
#include <cstdint>

namespace peum::simd {

enum class Isa { Scalar, Avx2 };

const char* isa_name(Isa isa);

// Reductions process at most kBlock elements per call; callers combine block
// results pairwise (see reduce.hpp). Four interleaved lane accumulators are
// used by every variant, so results are bitwise identical across ISAs.
constexpr std::size_t kBlock = 1024;

/// Affine branches y = a + b x on [0,c] (L) and [c,1] (R); contributions of each
/// branch are multiplied by its weight (1 for the plain operator).
struct AffineUlam {
    std::size_t n = 0;
    double c = 0.5;
    double aL = 0, bL = 1, aR = 0, bR = 1;
    double wL = 1, wR = 1;
};

struct CsrView {
    std::size_t rows = 0;
    const std::uint32_t* row_ptr = nullptr;  // rows + 1
    const std::uint32_t* col = nullptr;
    const double* val = nullptr;
};

/// Batched orbits of an affine unimodal map with polynomial observable.
struct AffineOrbit {
    double c = 0.5;
    double aL = 0, bL = 1, aR = 0, bR = 1;
    const double* phi = nullptr;  // observable coefficients, ascending
    int phi_len = 0;
    double dither = 0.0;          // amplitude of the uniform perturbation added after each step
    double rL = 0, rR = 0;        // per-branch R increments v'/Df (r_weighted only)
};

struct Kernels {
    Isa isa;
    double (*block_sum)(const double* x, std::size_t n);
    double (*block_dot)(const double* x, const double* y, std::size_t n);
    double (*block_l1_diff)(const double* x, const double* y, std::size_t n);
    void (*scale)(double* x, std::size_t n, double s);
    void (*average)(double* x, const double* y, std::size_t n);  // x = (x + y) / 2
    void (*affine_ulam_apply)(const AffineUlam& p, const double* in, double* out);
    void (*csr_apply)(const CsrView& m, const double* in, double* out);
    // lanes must be a multiple of 4. For k in [0, steps): if k >= k_begin add phi(x_k)
    // to sums[i]; then x <- f(x) (+ dither). On return x holds x_steps.
    void (*affine_birkhoff)(const AffineOrbit& p, std::size_t lanes, double* x, std::uint64_t* rng, double* sums,
                            int k_begin, int steps);
    // For n in [0, steps]: out[n * lanes + i] = phi(x_n) * R_n with R_0 = 0 and
    // R_{n+1} = R_n + r_{branch(x_n)}.
    void (*affine_r_weighted)(const AffineOrbit& p, std::size_t lanes, double* x, std::uint64_t* rng, double* out,
                              int steps);
};

const Kernels& scalar_kernels();
const Kernels* avx2_kernels();  // nullptr when not compiled in or unsupported by the CPU

// Active kernels: AVX2 when available unless PEUMLAB_SIMD=scalar or force() was used.
const Kernels& active();
void force(Isa isa);

// xorshift64 step and [0,1) conversion shared by all variants.
inline std::uint64_t xorshift64(std::uint64_t& s) {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return s;
}

inline double to_unit(std::uint64_t r) {
    std::uint64_t bits = (r >> 12) | 0x3FF0000000000000ULL;
    double d;
    __builtin_memcpy(&d, &bits, sizeof d);
    return d - 1.0;
}

}  // namespace peum::simd
