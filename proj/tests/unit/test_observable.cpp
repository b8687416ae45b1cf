#include <doctest.h>

#include <cmath>

#include "oracles/brute_force.hpp"
#include "peum/error.hpp"
#include "peum/observable.hpp"

using namespace peum;

TEST_SUITE("observable") {
    TEST_CASE("built-in observables") {
        auto id = Observable::identity();
        CHECK(id(0.3) == 0.3);
        CHECK(id.integral(0.0, 1.0) == doctest::Approx(0.5));
        CHECK(id.lipschitz() == 1.0);
        auto ch = Observable::centered_half();
        CHECK(ch(0.3) == doctest::Approx(-0.2));
        CHECK(ch.integral(0.0, 1.0) == doctest::Approx(0.0));
        auto k = Observable::constant(2.5);
        CHECK(k.is_constant());
        CHECK(k.lipschitz() == 0.0);
        CHECK(k.integral(0.2, 0.6) == doctest::Approx(1.0));
    }

    TEST_CASE("polynomial primitive matches midpoint rule") {
        auto p = Observable::poly({0.5, -1.0, 3.0, -2.0});
        double ref = oracle::midpoint(200000, [&](double x) { return p(x); });
        CHECK(p.integral(0.0, 1.0) == doctest::Approx(ref).epsilon(1e-9));
        CHECK(p.primitive(0.0) == 0.0);
        CHECK(p.poly_coefficients().has_value());
    }

    TEST_CASE("table observable is piecewise linear") {
        auto tb = Observable::table({0.0, 0.5, 1.0}, {0.0, 1.0, 0.0});
        CHECK(tb(0.25) == doctest::Approx(0.5));
        CHECK(tb(0.75) == doctest::Approx(0.5));
        CHECK(tb.integral(0.0, 1.0) == doctest::Approx(0.5));
        CHECK(tb.lipschitz() == doctest::Approx(2.0));
        CHECK(tb.sup_abs() == doctest::Approx(1.0));
        CHECK_FALSE(tb.poly_coefficients().has_value());
        CHECK_THROWS_AS(Observable::table({0.0, 0.5}, {1.0, 2.0}), ConfigError);
        CHECK_THROWS_AS(Observable::table({0.0, 0.6, 0.4, 1.0}, {0, 0, 0, 0}), ConfigError);
    }

    TEST_CASE("zero-mean adjustment") {
        auto id = Observable::identity().zero_mean(0.4);
        CHECK(id.zero_mean_adjusted());
        CHECK(id.stored_mean() == 0.4);
        CHECK(id(0.4) == doctest::Approx(0.0));
        CHECK(id.integral(0.0, 1.0) == doctest::Approx(0.1));
    }

    TEST_CASE("cell averages integrate exactly") {
        auto p = Observable::poly({0.0, 0.0, 1.0});
        auto a = p.cell_averages(4);
        REQUIRE(a.size() == 4);
        for (int i = 0; i < 4; ++i) {
            double lo = i / 4.0, hi = (i + 1) / 4.0;
            CHECK(a[i] == doctest::Approx((hi * hi * hi - lo * lo * lo) / 3.0 * 4.0));
        }
    }
}
