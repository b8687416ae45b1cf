// Compiled with -mavx2 -ffp-contract=off; every operation mirrors the scalar
// reference in order so that results are bitwise identical (CSR excepted).
#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "peum/simd.hpp"

namespace peum::simd {

namespace {

inline __m256d vabs(__m256d v) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v); }

inline double finish(__m256d acc, const double* x, const double* y, std::size_t i, std::size_t n, int mode) {
    alignas(32) double a[4];
    _mm256_store_pd(a, acc);
    for (; i < n; ++i) {
        double v = mode == 0 ? x[i] : (mode == 1 ? x[i] * y[i] : std::fabs(x[i] - y[i]));
        a[i & 3] += v;
    }
    return (a[0] + a[1]) + (a[2] + a[3]);
}

double block_sum(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    return finish(acc, x, nullptr, i, n, 0);
}

double block_dot(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    return finish(acc, x, y, i, n, 1);
}

double block_l1_diff(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, vabs(_mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i))));
    return finish(acc, x, y, i, n, 2);
}

void scale(double* x, std::size_t n, double s) {
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), vs));
    for (; i < n; ++i) x[i] *= s;
}

void average(double* x, const double* y, std::size_t n) {
    const __m256d half = _mm256_set1_pd(0.5);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)), half));
    for (; i < n; ++i) x[i] = (x[i] + y[i]) * 0.5;
}

// ------------------------------------------------------------ Ulam, affine

inline double branch_gather_1(const double* in, std::size_t n, double inv_n, double y0, double y1, double a, double b,
                              double lo, double hi) {
    double p = (y0 - a) / b, q = (y1 - a) / b;
    if (b < 0) std::swap(p, q);
    p = std::max(p, lo);
    q = std::min(q, hi);
    double fi = std::floor(p * static_cast<double>(n));
    fi = std::min(std::max(fi, 0.0), static_cast<double>(n - 1));
    auto i0 = static_cast<std::size_t>(fi);
    std::size_t i1 = std::min(i0 + 1, n - 1);
    double bnd = (fi + 1.0) * inv_n;
    double l0 = std::max(std::min(q, bnd) - p, 0.0);
    double l1 = std::max(q - bnd, 0.0);
    if (q <= p) {
        l0 = 0.0;
        l1 = 0.0;
    }
    return in[i0] * l0 + in[i1] * l1;
}

inline __m256d branch_gather_4(const double* in, std::size_t n, __m256d inv_n, __m256d y0, __m256d y1, double a,
                               double b, double lo, double hi) {
    const __m256d va = _mm256_set1_pd(a), vb = _mm256_set1_pd(b);
    __m256d p = _mm256_div_pd(_mm256_sub_pd(y0, va), vb);
    __m256d q = _mm256_div_pd(_mm256_sub_pd(y1, va), vb);
    if (b < 0) std::swap(p, q);
    p = _mm256_max_pd(p, _mm256_set1_pd(lo));
    q = _mm256_min_pd(q, _mm256_set1_pd(hi));
    const __m256d vn = _mm256_set1_pd(static_cast<double>(n));
    __m256d fi = _mm256_floor_pd(_mm256_mul_pd(p, vn));
    fi = _mm256_min_pd(_mm256_max_pd(fi, _mm256_setzero_pd()), _mm256_set1_pd(static_cast<double>(n - 1)));
    __m128i i0 = _mm256_cvttpd_epi32(fi);
    __m128i i1 = _mm_min_epi32(_mm_add_epi32(i0, _mm_set1_epi32(1)), _mm_set1_epi32(static_cast<int>(n - 1)));
    __m256d bnd = _mm256_mul_pd(_mm256_add_pd(fi, _mm256_set1_pd(1.0)), inv_n);
    const __m256d zero = _mm256_setzero_pd();
    __m256d l0 = _mm256_max_pd(_mm256_sub_pd(_mm256_min_pd(q, bnd), p), zero);
    __m256d l1 = _mm256_max_pd(_mm256_sub_pd(q, bnd), zero);
    __m256d empty = _mm256_cmp_pd(q, p, _CMP_LE_OQ);
    l0 = _mm256_blendv_pd(l0, zero, empty);
    l1 = _mm256_blendv_pd(l1, zero, empty);
    __m256d d0 = _mm256_i32gather_pd(in, i0, 8);
    __m256d d1 = _mm256_i32gather_pd(in, i1, 8);
    return _mm256_add_pd(_mm256_mul_pd(d0, l0), _mm256_mul_pd(d1, l1));
}

void affine_ulam_apply(const AffineUlam& p, const double* in, double* out) {
    const std::size_t n = p.n;
    const double inv_n = 1.0 / static_cast<double>(n);
    const double scaleL = p.wL * static_cast<double>(n), scaleR = p.wR * static_cast<double>(n);
    const __m256d vinv = _mm256_set1_pd(inv_n), one = _mm256_set1_pd(1.0);
    const __m256d vsl = _mm256_set1_pd(scaleL), vsr = _mm256_set1_pd(scaleR);
    __m256d jv = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
    const __m256d four = _mm256_set1_pd(4.0);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4, jv = _mm256_add_pd(jv, four)) {
        __m256d y0 = _mm256_mul_pd(jv, vinv), y1 = _mm256_mul_pd(_mm256_add_pd(jv, one), vinv);
        __m256d cl = branch_gather_4(in, n, vinv, y0, y1, p.aL, p.bL, 0.0, p.c);
        __m256d cr = branch_gather_4(in, n, vinv, y0, y1, p.aR, p.bR, p.c, 1.0);
        _mm256_storeu_pd(out + j, _mm256_add_pd(_mm256_mul_pd(cl, vsl), _mm256_mul_pd(cr, vsr)));
    }
    for (; j < n; ++j) {
        double y0 = static_cast<double>(j) * inv_n, y1 = (static_cast<double>(j) + 1.0) * inv_n;
        double cl = branch_gather_1(in, n, inv_n, y0, y1, p.aL, p.bL, 0.0, p.c);
        double cr = branch_gather_1(in, n, inv_n, y0, y1, p.aR, p.bR, p.c, 1.0);
        out[j] = cl * scaleL + cr * scaleR;
    }
}

void csr_apply(const CsrView& m, const double* in, double* out) {
    for (std::size_t r = 0; r < m.rows; ++r) {
        std::uint32_t k = m.row_ptr[r], e = m.row_ptr[r + 1];
        __m256d acc = _mm256_setzero_pd();
        for (; k + 4 <= e; k += 4) {
            __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(m.col + k));
            acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(m.val + k), _mm256_i32gather_pd(in, idx, 8)));
        }
        alignas(32) double a[4];
        _mm256_store_pd(a, acc);
        double s = (a[0] + a[1]) + (a[2] + a[3]);
        for (; k < e; ++k) s += m.val[k] * in[m.col[k]];
        out[r] = s;
    }
}

// ---------------------------------------------------------------- orbits

struct Vec {
    __m256d c, aL, bL, aR, bR, dither, half, one, two, rL, rR;
    explicit Vec(const AffineOrbit& p)
        : c(_mm256_set1_pd(p.c)), aL(_mm256_set1_pd(p.aL)), bL(_mm256_set1_pd(p.bL)), aR(_mm256_set1_pd(p.aR)),
          bR(_mm256_set1_pd(p.bR)), dither(_mm256_set1_pd(p.dither)), half(_mm256_set1_pd(0.5)),
          one(_mm256_set1_pd(1.0)), two(_mm256_set1_pd(2.0)), rL(_mm256_set1_pd(p.rL)), rR(_mm256_set1_pd(p.rR)) {}
};

inline __m256d vpoly(const AffineOrbit& p, __m256d x) {
    __m256d r = _mm256_setzero_pd();
    for (int k = p.phi_len - 1; k >= 0; --k) r = _mm256_add_pd(_mm256_mul_pd(r, x), _mm256_set1_pd(p.phi[k]));
    return r;
}

inline __m256d vstep(const AffineOrbit& p, const Vec& v, __m256d x, __m256i& rng) {
    __m256d left = _mm256_cmp_pd(x, v.c, _CMP_LE_OQ);
    __m256d yl = _mm256_add_pd(v.aL, _mm256_mul_pd(v.bL, x));
    __m256d yr = _mm256_add_pd(v.aR, _mm256_mul_pd(v.bR, x));
    __m256d y = _mm256_blendv_pd(yr, yl, left);
    if (p.dither != 0.0) {
        rng = _mm256_xor_si256(rng, _mm256_slli_epi64(rng, 13));
        rng = _mm256_xor_si256(rng, _mm256_srli_epi64(rng, 7));
        rng = _mm256_xor_si256(rng, _mm256_slli_epi64(rng, 17));
        __m256i bits = _mm256_or_si256(_mm256_srli_epi64(rng, 12), _mm256_set1_epi64x(0x3FF0000000000000LL));
        __m256d u = _mm256_sub_pd(_mm256_castsi256_pd(bits), v.one);
        y = _mm256_add_pd(y, _mm256_mul_pd(v.dither, _mm256_sub_pd(u, v.half)));
        y = vabs(y);
        __m256d over = _mm256_cmp_pd(y, v.one, _CMP_GT_OQ);
        y = _mm256_blendv_pd(y, _mm256_sub_pd(v.two, y), over);
    }
    return y;
}

void affine_birkhoff(const AffineOrbit& p, std::size_t lanes, double* x, std::uint64_t* rng, double* sums,
                     int k_begin, int steps) {
    const Vec v(p);
    for (std::size_t i = 0; i + 4 <= lanes; i += 4) {
        __m256d xi = _mm256_loadu_pd(x + i), s = _mm256_loadu_pd(sums + i);
        __m256i r = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(rng + i));
        for (int k = 0; k < steps; ++k) {
            if (k >= k_begin) s = _mm256_add_pd(s, vpoly(p, xi));
            xi = vstep(p, v, xi, r);
        }
        _mm256_storeu_pd(x + i, xi);
        _mm256_storeu_pd(sums + i, s);
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(rng + i), r);
    }
}

void affine_r_weighted(const AffineOrbit& p, std::size_t lanes, double* x, std::uint64_t* rng, double* out,
                       int steps) {
    const Vec v(p);
    for (std::size_t i = 0; i + 4 <= lanes; i += 4) {
        __m256d xi = _mm256_loadu_pd(x + i), r = _mm256_setzero_pd();
        __m256i st = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(rng + i));
        for (int k = 0; k <= steps; ++k) {
            _mm256_storeu_pd(out + static_cast<std::size_t>(k) * lanes + i, _mm256_mul_pd(vpoly(p, xi), r));
            if (k == steps) break;
            __m256d left = _mm256_cmp_pd(xi, v.c, _CMP_LE_OQ);
            r = _mm256_add_pd(r, _mm256_blendv_pd(v.rR, v.rL, left));
            xi = vstep(p, v, xi, st);
        }
        _mm256_storeu_pd(x + i, xi);
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(rng + i), st);
    }
}

}  // namespace

const Kernels* avx2_kernels_impl() {
    static const Kernels k{Isa::Avx2,         block_sum, block_dot,       block_l1_diff,    scale, average,
                           affine_ulam_apply, csr_apply, affine_birkhoff, affine_r_weighted};
    return &k;
}

}  // namespace peum::simd
