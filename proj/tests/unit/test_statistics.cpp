#include <doctest.h>

#include <cmath>

#include "families.hpp"
#include "oracles/brute_force.hpp"
#include "peum/error.hpp"
#include "peum/srb_measure.hpp"
#include "peum/statistics.hpp"

using namespace peum;

TEST_SUITE("statistics") {
    TEST_CASE("Green-Kubo examples") {
        auto tent = PeumFamily::tent();
        auto k = green_kubo_sigma(tent, 1.8, Observable::constant(3.0), 20, 1 << 12);
        CHECK(k.sigma == doctest::Approx(0.0).scale(1.0).epsilon(1e-7));
        auto full = green_kubo_sigma(tent, 2.0, Observable::centered_half(), 30, 1 << 12);
        CHECK(full.sigma == doctest::Approx(1.0 / std::sqrt(12.0)).epsilon(1e-6));
        CHECK(full.a[0] == doctest::Approx(1.0 / 12.0).epsilon(1e-6));
        for (int j = 1; j <= 30; ++j) CHECK(std::abs(full.a[j]) <= 1e-9);
        auto one = green_kubo_sigma(tent, 2.0, Observable::centered_half(), 1, 1 << 12);
        CHECK(std::abs(one.sigma - full.sigma) <= 1e-6);
        CHECK_THROWS_AS(green_kubo_sigma(tent, 2.0, Observable::centered_half(), 0, 1 << 12), DomainError);
    }

    TEST_CASE("a_k against orbit-average correlations") {
        const double t = 1.8;
        auto tent = PeumFamily::tent();
        auto est = green_kubo_sigma(tent, t, Observable::identity(), 6, 1 << 16);
        const double m = est.mean;
        for (int k = 0; k <= 3; ++k) {
            double ref = oracle::birkhoff_average(
                [&](double x) { return oracle::tent(t, x); },
                [&](double x) {
                    double y = x;
                    for (int j = 0; j < k; ++j) y = oracle::tent(t, y);
                    return (x - m) * (y - m);
                },
                4000000, 17 + k);
            CHECK(std::abs(est.a[k] - ref) <= 5e-4);
        }
    }

    TEST_CASE("Green-Kubo agrees with CLT Monte Carlo") {
        for (double t : {1.7, 1.9, 2.0}) {
            const std::size_t n = 1 << 14;
            auto gk = green_kubo_sigma(PeumFamily::tent(), t, Observable::centered_half(), 60, n);
            auto mc = clt_monte_carlo(PeumFamily::tent(), t, Observable::centered_half(), 1000, 1 << 15, 11, 200);
            MESSAGE("t=" << t << " GK " << gk.sigma * gk.sigma << " MC " << mc.variance << " +- " << mc.std_error);
            CHECK(std::abs(gk.sigma * gk.sigma - mc.variance) <= 3.0 * mc.std_error + 10.0 / n);
        }
    }

    TEST_CASE("autocorrelations decay geometrically") {
        auto est = green_kubo_sigma(PeumFamily::tent(), 1.9, Observable::identity(), 25, 1 << 14);
        CHECK(est.theta > 0.0);
        CHECK(est.theta < 1.0);
        double C = 0.0;
        for (int k = 0; k <= 3; ++k) C = std::max(C, std::abs(est.a[k]) / std::pow(est.theta, k));
        for (int k = 0; k <= 25; ++k) CHECK(std::abs(est.a[k]) <= 2.0 * C * std::pow(est.theta, k) + 1e-12);
    }

    TEST_CASE("CLT Monte Carlo preconditions") {
        auto c = clt_monte_carlo(PeumFamily::tent(), 1.9, Observable::constant(1.0), 100, 1000, 1);
        CHECK(c.variance == doctest::Approx(0.0).scale(1.0).epsilon(1e-20));
        CHECK_THROWS_AS(clt_monte_carlo(PeumFamily::tent(), 1.9, Observable::identity(), 100, 1, 1), DomainError);
        auto a = clt_monte_carlo(PeumFamily::tent(), 1.9, Observable::identity(), 100, 5000, 3);
        auto b = clt_monte_carlo(PeumFamily::tent(), 1.9, Observable::identity(), 100, 5000, 3);
        CHECK(a.variance == b.variance);
    }

    TEST_CASE("LIL traces") {
        auto tent = PeumFamily::tent();
        auto z = lil_trace(tent, 1.9, Observable::constant(0.0), 100, 0.3);
        for (double s : z.S) CHECK(s == 0.0);
        CHECK_THROWS_AS(lil_trace(tent, 1.9, Observable::identity(), 100, 0.0), DomainError);
        CHECK_THROWS_AS(lil_trace(tent, 1.9, Observable::identity(), 10, 0.3), DomainError);

        // full tent: c -> 1 -> 0 -> 0 ..., so S_n grows like -n/2
        auto ab = lil_trace(tent, 2.0, Observable::centered_half(), 1000, 1.0 / std::sqrt(12.0));
        CHECK(ab.S[999] == doctest::Approx(0.5 - 999 * 0.5));
        CHECK(ab.running_max.back() > 10.0);

        const double g = gamma(tent, 1.9, Observable::identity(), 1 << 18, 1e-13).value;
        auto sig = green_kubo_sigma(tent, 1.9, Observable::identity(), 60, 1 << 14);
        auto tr = lil_trace(tent, 1.9, Observable::identity().zero_mean(g), 1000000, sig.sigma);
        MESSAGE("running max at 1e6: " << tr.running_max.back());
        CHECK(tr.running_max.back() > 0.0);
        CHECK(std::isfinite(tr.running_max.back()));
        for (int n = 0; n < LilTrace::kFirst - 1; ++n) CHECK(tr.scaled[n] == 0.0);
    }

    TEST_CASE("Birkhoff Lyapunov along the critical orbit") {
        for (int n : {1, 10, 1000}) CHECK(lyapunov_birkhoff(PeumFamily::tent(), 1.77, n).value == doctest::Approx(std::log(1.77)));
        auto q = testfam::quadratic();
        auto b = lyapunov_birkhoff(q, 1.66, 1000000);
        CHECK(std::abs(b.value - lyapunov(q, 1.66, 1 << 16)) <= 1e-3);
        auto s = q.slice(1.66);
        CHECK(lyapunov_birkhoff(q, 1.66, 1, Side::Left).value == doctest::Approx(std::log(std::abs(s.df(Symbol::L, 0.5)))));
        CHECK(lyapunov_birkhoff(q, 1.66, 1, Side::Right).value == doctest::Approx(std::log(std::abs(s.df(Symbol::R, 0.5)))));
    }
}
