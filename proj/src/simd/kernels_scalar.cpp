#include <algorithm>
#include <cmath>

#include "peum/simd.hpp"

namespace peum::simd {

namespace {

double combine(const double a[4]) { return (a[0] + a[1]) + (a[2] + a[3]); }

double block_sum(const double* x, std::size_t n) {
    double a[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) a[i & 3] += x[i];
    return combine(a);
}

double block_dot(const double* x, const double* y, std::size_t n) {
    double a[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) a[i & 3] += x[i] * y[i];
    return combine(a);
}

double block_l1_diff(const double* x, const double* y, std::size_t n) {
    double a[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) a[i & 3] += std::fabs(x[i] - y[i]);
    return combine(a);
}

void scale(double* x, std::size_t n, double s) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= s;
}

void average(double* x, const double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] = (x[i] + y[i]) * 0.5;
}

// Mass arriving in target cell j through one affine branch.
inline double branch_gather(const double* in, std::size_t n, double inv_n, double y0, double y1, double a, double b,
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

void affine_ulam_apply(const AffineUlam& p, const double* in, double* out) {
    const std::size_t n = p.n;
    const double inv_n = 1.0 / static_cast<double>(n);
    const double scaleL = p.wL * static_cast<double>(n), scaleR = p.wR * static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
        double y0 = static_cast<double>(j) * inv_n, y1 = (static_cast<double>(j) + 1.0) * inv_n;
        double cl = branch_gather(in, n, inv_n, y0, y1, p.aL, p.bL, 0.0, p.c);
        double cr = branch_gather(in, n, inv_n, y0, y1, p.aR, p.bR, p.c, 1.0);
        out[j] = cl * scaleL + cr * scaleR;
    }
}

void csr_apply(const CsrView& m, const double* in, double* out) {
    for (std::size_t r = 0; r < m.rows; ++r) {
        double acc = 0.0;
        for (std::uint32_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) acc += m.val[k] * in[m.col[k]];
        out[r] = acc;
    }
}

inline double poly(const double* c, int len, double x) {
    double r = 0.0;
    for (int k = len - 1; k >= 0; --k) r = r * x + c[k];
    return r;
}

inline double step(const AffineOrbit& p, double x, std::uint64_t& rng) {
    double y = x <= p.c ? p.aL + p.bL * x : p.aR + p.bR * x;
    if (p.dither != 0.0) {
        double u = to_unit(xorshift64(rng));
        y = y + p.dither * (u - 0.5);
        y = std::fabs(y);
        if (y > 1.0) y = 2.0 - y;
    }
    return y;
}

void affine_birkhoff(const AffineOrbit& p, std::size_t lanes, double* x, std::uint64_t* rng, double* sums,
                     int k_begin, int steps) {
    for (std::size_t i = 0; i < lanes; ++i) {
        double xi = x[i], s = sums[i];
        for (int k = 0; k < steps; ++k) {
            if (k >= k_begin) s = s + poly(p.phi, p.phi_len, xi);
            xi = step(p, xi, rng[i]);
        }
        x[i] = xi;
        sums[i] = s;
    }
}

void affine_r_weighted(const AffineOrbit& p, std::size_t lanes, double* x, std::uint64_t* rng, double* out,
                       int steps) {
    for (std::size_t i = 0; i < lanes; ++i) {
        double xi = x[i], r = 0.0;
        for (int k = 0; k <= steps; ++k) {
            out[static_cast<std::size_t>(k) * lanes + i] = poly(p.phi, p.phi_len, xi) * r;
            if (k == steps) break;
            r = r + (xi <= p.c ? p.rL : p.rR);
            xi = step(p, xi, rng[i]);
        }
        x[i] = xi;
    }
}

}  // namespace

const Kernels& scalar_kernels() {
    static const Kernels k{Isa::Scalar,       block_sum, block_dot,       block_l1_diff,    scale, average,
                           affine_ulam_apply, csr_apply, affine_birkhoff, affine_r_weighted};
    return k;
}

}  // namespace peum::simd
