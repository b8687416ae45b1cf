#include <doctest.h>

#include <cmath>

#include "families.hpp"
#include "peum/error.hpp"
#include "peum/modulus.hpp"

using namespace peum;

TEST_SUITE("modulus") {
    TEST_CASE("scaling denominator") {
        const double h = std::exp(-std::exp(std::exp(1.0)));
        // |log h| = e^e and log log |log h| = 1
        CHECK(scaling_denominator(h) == doctest::Approx(h * std::sqrt(std::exp(std::exp(1.0)))).epsilon(1e-12));
        CHECK_THROWS_AS(scaling_denominator(std::exp(-std::exp(1.0))), DomainError);
        CHECK_THROWS_AS(scaling_denominator(0.5), DomainError);
        CHECK_THROWS_AS(scaling_denominator(0.0), DomainError);
        double prev = 0.0;
        for (double e = -30.0; e <= -5.0; e += 0.25) {
            double v = scaling_denominator(std::exp(e));
            CHECK(v > prev);
            prev = v;
        }
    }

    TEST_CASE("constant composition") {
        const double k = compose_constant(1.0, 0.5, 1.0 / std::sqrt(12.0), std::log(2.0));
        CHECK(k == doctest::Approx(std::sqrt(1.0 / (6.0 * std::log(2.0)))).epsilon(1e-12));
        CHECK(k == doctest::Approx(0.4905).epsilon(1e-3));
    }

    TEST_CASE("theoretical constant") {
        ConstantOptions opt;
        opt.n = 1 << 14;
        auto full = theoretical_constant(PeumFamily::tent(), 2.0, Observable::centered_half(), opt);
        CHECK(full.K == doctest::Approx(std::sqrt(1.0 / (6.0 * std::log(2.0)))).epsilon(1e-5));
        CHECK(full.rho_c.value == doctest::Approx(1.0));
        CHECK(full.J.value == doctest::Approx(0.5));
        auto k = theoretical_constant(PeumFamily::tent(), 1.9, Observable::constant(1.0), opt);
        CHECK(k.K == 0.0);
        CHECK(k.sigma_zero);
        auto fz = theoretical_constant(testfam::frozen(), 1.5, Observable::identity(), opt);
        CHECK(fz.K == 0.0);
        CHECK(fz.J_zero);
        auto t19 = theoretical_constant(PeumFamily::tent(), 1.9, Observable::identity(), opt);
        CHECK(t19.K > 0.0);
        CHECK(t19.lyapunov.value == doctest::Approx(std::log(1.9)));
        CHECK(t19.relative_error < 0.05);
    }

    TEST_CASE("schedule and resolution") {
        auto hs = h_schedule(1e-2, 0.5, 5);
        REQUIRE(hs.size() == 5);
        for (std::size_t i = 1; i < hs.size(); ++i) CHECK(hs[i] < hs[i - 1]);
        CHECK(hs[4] == doctest::Approx(1e-2 / 16));
        ScanOptions opt;
        CHECK(resolution_for(1e-2, opt) == 1 << 14);
        CHECK(resolution_for(1e-1, opt) == opt.n_min);
        CHECK(resolution_for(1e-9, opt) == opt.n_cap);
        CHECK_THROWS(h_schedule(1e-2, 1.5, 3));
    }

    TEST_CASE("scan degenerate cases") {
        ScanOptions opt;
        opt.n_cap = 1 << 16;
        auto k = modulus_scan(PeumFamily::tent(), 1.9, Observable::constant(2.0), 1e-2, 0.5, 3, 0.0, opt);
        for (const auto& e : k.entries) {
            CHECK(std::abs(e.delta_gamma) <= k.noise_floor);
            CHECK(e.lipschitz_ratio * e.h <= k.noise_floor);
        }
        auto fz = modulus_scan(testfam::frozen(), 1.5, Observable::identity(), 1e-2, 0.5, 3, 0.0, opt);
        for (const auto& e : fz.entries) CHECK(e.delta_gamma == 0.0);
    }

    TEST_CASE("scan is invariant under adding a constant") {
        ScanOptions opt;
        opt.n_cap = 1 << 16;
        auto a = modulus_scan(PeumFamily::tent(), 1.83, Observable::identity(), 1e-2, 0.5, 4, 0.0, opt);
        auto b = modulus_scan(PeumFamily::tent(), 1.83, Observable::poly({3.0, 1.0}), 1e-2, 0.5, 4, 0.0, opt);
        REQUIRE(a.entries.size() == b.entries.size());
        for (std::size_t i = 0; i < a.entries.size(); ++i)
            CHECK(std::abs(a.entries[i].delta_gamma - b.entries[i].delta_gamma) <= 1e-12);
    }

    TEST_CASE("running maxima") {
        ScanOptions opt;
        opt.n_cap = 1 << 18;
        opt.negative_h = true;
        auto s = modulus_scan(PeumFamily::tent(), 1.9, Observable::identity(), 1e-2, 0.5, 6, 0.22, opt);
        CHECK(s.K == 0.22);
        REQUIRE(s.entries.size() == 6);
        CHECK(s.negative.size() == 6);
        double ml = 0, ms = 0;
        for (const auto& e : s.entries) {
            if (e.trusted) {
                ml = std::max(ml, e.lipschitz_ratio);
                ms = std::max(ms, e.scaled_ratio);
            }
            CHECK(e.running_max_lip == doctest::Approx(ml));
            CHECK(e.running_max_scaled == doctest::Approx(ms));
            CHECK(e.scaled_ratio == doctest::Approx(std::abs(e.delta_gamma) / scaling_denominator(e.h)));
        }
    }

    TEST_CASE("decomposition audit: frozen family") {
        auto a = decomposition_audit(testfam::frozen(), 1.5, 1e-3, Observable::identity(), 1 << 14);
        CHECK(a.delta_gamma == 0.0);
        CHECK(a.iterated_difference == 0.0);
        CHECK(a.r_term == 0.0);
        CHECK(a.a_term == 0.0);
        CHECK(a.b_term == 0.0);
        CHECK(a.n == 6);
    }

    TEST_CASE("decomposition audit: residual is second order") {
        double C = 0.0;
        for (double h : {1e-2, 1e-3, 1e-4}) {
            auto a = decomposition_audit(PeumFamily::tent(), 1.9, h, Observable::identity(), 1 << 16);
            const double hn = h * a.n;
            MESSAGE("h=" << h << " residual_iterated=" << a.residual_iterated << " bound=" << a.second_order_bound);
            if (C == 0.0) C = std::abs(a.residual_iterated) / (hn * hn);
            CHECK(std::abs(a.residual_iterated) <= 2.0 * C * hn * hn);
            CHECK(a.measure_A - a.measure_B == doctest::Approx(hn / 1.9).epsilon(0.2));
        }
    }

    TEST_CASE("decomposition audit: constant observable") {
        auto a = decomposition_audit(PeumFamily::tent(), 1.9, 1e-3, Observable::constant(1.0), 1 << 14);
        CHECK(std::abs(a.delta_gamma) <= 1e-12);
        CHECK(std::abs(a.a_term) <= 1e-12);
        CHECK(std::abs(a.b_term) <= 1e-12);
    }
}
