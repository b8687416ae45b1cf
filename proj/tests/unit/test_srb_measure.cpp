#include <doctest.h>

#include <cmath>
#include <random>

#include "families.hpp"
#include "oracles/brute_force.hpp"
#include "oracles/tent_density.hpp"
#include "peum/srb_measure.hpp"

using namespace peum;

TEST_SUITE("srb_measure") {
    TEST_CASE("gamma examples") {
        auto tent = PeumFamily::tent();
        CHECK(gamma(tent, 1.83, Observable::constant(1.0), 1 << 12, 1e-12).value == doctest::Approx(1.0));
        CHECK(gamma(testfam::quadratic(), 1.6, Observable::constant(1.0), 1 << 12, 1e-12).value ==
              doctest::Approx(1.0));
        CHECK(gamma(tent, 2.0, Observable::centered_half(), 1 << 12, 1e-12).value ==
              doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
        const double t = std::sqrt(2.0);
        oracle::TentDensity ref(t);
        CHECK(gamma(tent, t, Observable::identity(), 1 << 16, 1e-12).value ==
              doctest::Approx(ref.moment(1)).epsilon(1e-4));
    }

    TEST_CASE("gamma converges to the closed form as N grows") {
        oracle::TentDensity ref(1.9);
        double prev = INFINITY;
        for (std::size_t n : {1u << 12, 1u << 15, 1u << 18}) {
            double err = std::abs(gamma(PeumFamily::tent(), 1.9, Observable::identity(), n, 1e-13).value - ref.moment(1));
            CHECK(err < prev);
            prev = err;
        }
        CHECK(prev < 1e-5);
    }

    TEST_CASE("gamma_iterated examples") {
        auto tent = PeumFamily::tent();
        auto r0 = gamma_iterated(tent, 1.7, Observable::identity(), 0);
        CHECK(r0.value == doctest::Approx(0.5));
        CHECK_FALSE(r0.monte_carlo);
        auto r1 = gamma_iterated(tent, 2.0, Observable::centered_half(), 1);
        CHECK(r1.value == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
        IteratedOptions opt;
        opt.lap_budget = 1000000;
        opt.mc_samples = 1 << 14;
        auto r30 = gamma_iterated(tent, 1.9, Observable::identity(), 30, opt);
        CHECK(r30.monte_carlo);
        CHECK(r30.std_error > 0.0);
        CHECK_THROWS(gamma_iterated(tent, 1.9, Observable::identity(), -1));
    }

    TEST_CASE("lap quadrature matches brute-force iteration") {
        for (auto fam : {PeumFamily::tent(), testfam::quadratic()}) {
            const double t = fam.kind() == PeumFamily::Kind::Tent ? 1.77 : 1.61;
            auto s = fam.slice(t);
            auto phi = Observable::poly({0.2, -1.0, 1.5});
            auto all = gamma_iterated_all(fam, t, phi, 6);
            for (int n = 0; n <= 6; ++n) {
                double ref = oracle::midpoint(1 << 22, [&](double x) {
                    for (int j = 0; j < n; ++j) x = s(x);
                    return phi(x);
                });
                CHECK(all[n] == doctest::Approx(ref).epsilon(1e-6));
                CHECK(gamma_iterated(fam, t, phi, n).value == doctest::Approx(all[n]).epsilon(1e-12));
            }
        }
    }

    TEST_CASE("quadrature and Monte Carlo agree within three standard errors") {
        auto tent = PeumFamily::tent();
        IteratedOptions mc;
        mc.force_monte_carlo = true;
        mc.mc_samples = 1 << 16;
        mc.seed = 3;
        for (int n = 0; n <= 12; ++n) {
            auto q = gamma_iterated(tent, 1.9, Observable::identity(), n);
            auto m = gamma_iterated(tent, 1.9, Observable::identity(), n, mc);
            CHECK(m.monte_carlo);
            CHECK(std::abs(q.value - m.value) <= 3.0 * m.std_error + 1e-12);
        }
        auto q = gamma_iterated(testfam::quadratic(), 1.66, Observable::identity(), 8);
        auto m = gamma_iterated(testfam::quadratic(), 1.66, Observable::identity(), 8, mc);
        CHECK(std::abs(q.value - m.value) <= 3.0 * m.std_error);
    }

    TEST_CASE("iterated integrals decay geometrically to gamma") {
        oracle::TentDensity ref(1.9);
        auto phi = Observable::identity().zero_mean(ref.moment(1));
        auto all = gamma_iterated_all(PeumFamily::tent(), 1.9, phi, 25);
        std::vector<double> x, y;
        for (int n = 1; n <= 25; ++n) {
            x.push_back(n);
            y.push_back(std::log(std::abs(all[n])));
        }
        auto fit = oracle::fit_line(x, y);
        MESSAGE("R2 = " << fit.r2 << ", delta = " << std::exp(fit.b));
        CHECK(fit.r2 >= 0.9);
        CHECK(std::exp(fit.b) < 1.0);
    }

    TEST_CASE("lyapunov exponent of the tent is log t") {
        std::mt19937_64 rng(17);
        for (int i = 0; i < 20; ++i) {
            double t = std::uniform_real_distribution<double>(1.45, 2.0)(rng);
            CHECK(std::abs(lyapunov(PeumFamily::tent(), t, 1 << 12) - std::log(t)) <= 1e-6);
        }
        CHECK(lyapunov(PeumFamily::tent(), 2.0, 1 << 12) == doctest::Approx(0.693147).epsilon(1e-6));
        CHECK(lyapunov(PeumFamily::tent(), 1.9, 1 << 12) == doctest::Approx(0.641854).epsilon(1e-6));
    }

    TEST_CASE("lyapunov exponent of a nonlinear family matches a Birkhoff average") {
        auto q = testfam::quadratic();
        const double t = 1.68;
        auto s = q.slice(t);
        double ref = oracle::birkhoff_average(
            [&](double x) { return s(x); },
            [&](double x) { return std::log(std::abs(x <= 0.5 ? s.df(Symbol::L, x) : s.df(Symbol::R, x))); },
            1000000, 99);
        CHECK(std::abs(lyapunov(q, t, 1 << 16) - ref) <= 1e-3);
    }

    TEST_CASE("sweep") {
        auto one = gamma_sweep(PeumFamily::tent(), {1.8}, Observable::identity(), 1 << 10, 1e-12);
        REQUIRE(one.size() == 1);
        CHECK(one[0].status == "ok");
        CHECK(one[0].gamma == doctest::Approx(gamma(PeumFamily::tent(), 1.8, Observable::identity(), 1 << 10, 1e-12).value));
        std::vector<double> grid;
        for (int i = 0; i <= 20; ++i) grid.push_back(1.5 + 0.02 * i);
        auto flat = gamma_sweep(PeumFamily::tent(), grid, Observable::constant(1.0), 1 << 10, 1e-12);
        for (const auto& p : flat) CHECK(p.gamma == doctest::Approx(1.0));
        grid.push_back(2.5);
        auto bad = gamma_sweep(PeumFamily::tent(), grid, Observable::identity(), 1 << 10, 1e-12);
        CHECK(bad.back().status != "ok");
        CHECK(std::isnan(bad.back().gamma));
        CHECK(bad.front().status == "ok");
        for (const auto& p : bad)
            if (p.status == "ok") CHECK(std::abs(p.gamma) <= 1.0);
    }

    TEST_CASE("integrate_composed with a weight") {
        auto s = PeumFamily::tent().slice(1.9);
        auto phi = Observable::identity();
        auto psi = Observable::poly({0.0, 2.0});
        double got = integrate_composed(s, 0.1, 0.9, 3, phi, &psi);
        double ref = 0.8 * oracle::midpoint(1 << 20, [&](double u) {
            double x = 0.1 + 0.8 * u, y = x;
            for (int j = 0; j < 3; ++j) y = s(y);
            return y * 2.0 * x;
        });
        CHECK(got == doctest::Approx(ref).epsilon(1e-8));
    }
}
