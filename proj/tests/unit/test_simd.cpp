#include <doctest.h>

#include <cstdlib>
#include <cstring>
#include <string>
#include <random>
#include <vector>

#include "peum/family.hpp"
#include "peum/reduce.hpp"
#include "peum/simd.hpp"
#include "peum/transfer_operator.hpp"

using namespace peum;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_SUITE("simd") {
    TEST_CASE("scalar reductions are self-consistent") {
        const auto& s = simd::scalar_kernels();
        std::vector<double> x{1, 2, 3, 4, 5, 6, 7};
        CHECK(s.block_sum(x.data(), x.size()) == 28.0);
        CHECK(s.block_dot(x.data(), x.data(), x.size()) == 140.0);
        std::vector<double> y(7, 1.0);
        CHECK(s.block_l1_diff(x.data(), y.data(), 7) == 21.0);
    }

    TEST_CASE("avx2 kernels are bitwise equal to scalar") {
        const simd::Kernels* v = simd::avx2_kernels();
        if (!v) {
            MESSAGE("AVX2 not available; skipping");
            return;
        }
        const auto& s = simd::scalar_kernels();
        for (std::size_t n : {1u, 3u, 4u, 17u, 1000u, 1024u}) {
            auto x = random_vec(n, n), y = random_vec(n, n + 7);
            CHECK(s.block_sum(x.data(), n) == v->block_sum(x.data(), n));
            CHECK(s.block_dot(x.data(), y.data(), n) == v->block_dot(x.data(), y.data(), n));
            CHECK(s.block_l1_diff(x.data(), y.data(), n) == v->block_l1_diff(x.data(), y.data(), n));
            auto a = x, b = x;
            s.scale(a.data(), n, 1.7);
            v->scale(b.data(), n, 1.7);
            CHECK(same_bits(a, b));
            s.average(a.data(), y.data(), n);
            v->average(b.data(), y.data(), n);
            CHECK(same_bits(a, b));
        }

        for (double t : {1.5, 1.9, 2.0}) {
            simd::AffineUlam p;
            p.n = 1 << 12;
            p.aL = 0;
            p.bL = t;
            p.aR = t;
            p.bR = -t;
            auto in = random_vec(p.n, 3);
            std::vector<double> o1(p.n), o2(p.n);
            s.affine_ulam_apply(p, in.data(), o1.data());
            v->affine_ulam_apply(p, in.data(), o2.data());
            CHECK(same_bits(o1, o2));
        }

        std::vector<double> phi{0.1, -0.5, 2.0};
        simd::AffineOrbit o;
        o.bL = 1.9;
        o.aR = 1.9;
        o.bR = -1.9;
        o.phi = phi.data();
        o.phi_len = 3;
        o.dither = 0x1p-48;
        o.rL = 1.0 / 1.9;
        o.rR = -1.0 / 1.9;
        const std::size_t lanes = 64;
        auto x1 = random_vec(lanes, 5);
        for (auto& e : x1) e = std::abs(e);
        auto x2 = x1;
        std::vector<std::uint64_t> r1(lanes), r2(lanes);
        for (std::size_t i = 0; i < lanes; ++i) r1[i] = r2[i] = 0x9E3779B97F4A7C15ULL * (i + 1);
        std::vector<double> s1(lanes, 0.0), s2(lanes, 0.0);
        s.affine_birkhoff(o, lanes, x1.data(), r1.data(), s1.data(), 3, 40);
        v->affine_birkhoff(o, lanes, x2.data(), r2.data(), s2.data(), 3, 40);
        CHECK(same_bits(s1, s2));
        CHECK(same_bits(x1, x2));
        CHECK(r1 == r2);

        std::vector<double> w1(lanes * 11), w2(lanes * 11);
        s.affine_r_weighted(o, lanes, x1.data(), r1.data(), w1.data(), 10);
        v->affine_r_weighted(o, lanes, x2.data(), r2.data(), w2.data(), 10);
        CHECK(same_bits(w1, w2));
    }

    TEST_CASE("csr apply agrees across variants") {
        const simd::Kernels* v = simd::avx2_kernels();
        if (!v) return;
        auto op = build_ulam(PeumFamily::tent(), 1.8, 1 << 10, WeightMode::Plain, Assembly::Sparse);
        auto in = random_vec(1 << 10, 9);
        std::vector<double> a(1 << 10), b(1 << 10);
        op.apply(in.data(), a.data(), simd::scalar_kernels());
        op.apply(in.data(), b.data(), *v);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-14));
    }

    TEST_CASE("pairwise reduction matches naive sum to rounding") {
        auto x = random_vec(100000, 1);
        long double naive = 0;
        for (double e : x) naive += e;
        CHECK(pairwise_sum(x.data(), x.size()) == doctest::Approx(static_cast<double>(naive)).epsilon(1e-12));
    }

    TEST_CASE("environment override selects scalar") {
        const char* env = std::getenv("PEUMLAB_SIMD");
        const simd::Isa original = simd::active().isa;
        if (env && std::string(env) == "scalar") CHECK(simd::active().isa == simd::Isa::Scalar);
        simd::force(simd::Isa::Scalar);
        CHECK(simd::active().isa == simd::Isa::Scalar);
        if (simd::avx2_kernels() && !(env && std::string(env) == "scalar")) {
            simd::force(simd::Isa::Avx2);
            CHECK(simd::active().isa == simd::Isa::Avx2);
        }
        simd::force(original);
    }
}
