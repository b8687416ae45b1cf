#include <doctest.h>

#include <cmath>
#include <random>

#include "families.hpp"
#include "peum/error.hpp"
#include "peum/map_family.hpp"
#include "peum/transversality.hpp"

using namespace peum;

namespace {

// Critical series summed directly from the orbit, tent only.
double tent_j(double t, int k) {
    if (k == 0) return 0.0;
    double s = 0.5;  // v(c) / Df^0
    double x = t * 0.5, d = 1.0;
    for (int j = 1; j < k; ++j) {
        d *= x <= 0.5 ? t : -t;
        s += std::min(x, 1 - x) / d;
        x = x <= 0.5 ? t * x : t * (1 - x);
    }
    return s;
}

}  // namespace

TEST_SUITE("transversality") {
    TEST_CASE("examples at the full tent") {
        auto tent = PeumFamily::tent();
        CHECK(j_truncated(tent, 2.0, 1) == doctest::Approx(0.5));
        CHECK(j_truncated(tent, 2.0, 0) == 0.0);
        CHECK(j_truncated(tent, 2.0, 40) == doctest::Approx(0.5));
        auto lim = j_limit(tent, 2.0, 1e-10);
        CHECK(lim.value == doctest::Approx(0.5));
        CHECK(lim.tail_bound <= 1e-10);
        auto scan = j_positivity_scan(tent, {2.0}, 1e-3);
        CHECK(scan.min_abs == doctest::Approx(0.5));
    }

    TEST_CASE("series against a direct orbit sum") {
        for (double t : {1.5, 1.73, 1.9}) {
            for (int k : {1, 2, 5, 17})
                CHECK(j_truncated(PeumFamily::tent(), t, k) == doctest::Approx(tent_j(t, k)).epsilon(1e-12));
        }
        CHECK(j_limit(PeumFamily::tent(), 1.9, 1e-14).value == doctest::Approx(0.40419).epsilon(1e-4));
    }

    TEST_CASE("loose tolerance and frozen family") {
        auto tent = PeumFamily::tent();
        double big = sup_velocity(tent, 1.8) / (1 - 1 / tent.lambda());
        auto lim = j_limit(tent, 1.8, big * 1.01);
        CHECK(lim.k_used == 0);
        CHECK(lim.value == 0.0);
        CHECK(j_limit(testfam::frozen(), 1.5, 1e-12).value == 0.0);
        CHECK(sup_velocity(testfam::frozen(), 1.5) == 0.0);
    }

    TEST_CASE("tail bounds dominate the remainder") {
        std::mt19937_64 rng(2);
        auto tent = PeumFamily::tent();
        for (int i = 0; i < 30; ++i) {
            double t = std::uniform_real_distribution<double>(1.42, 2.0)(rng);
            auto s = j_series(tent, t, 40);
            for (int k = 0; k <= 40; ++k)
                CHECK(std::abs(s.partial_sums[40] - s.partial_sums[k]) <= s.tail_bounds[k] * (1 + 1e-12));
        }
        auto q = testfam::quadratic();
        for (int i = 0; i < 10; ++i) {
            double t = std::uniform_real_distribution<double>(1.5, 1.75)(rng);
            auto s = j_series(q, t, 40);
            for (int k = 0; k <= 40; ++k)
                CHECK(std::abs(s.partial_sums[40] - s.partial_sums[k]) <= s.tail_bounds[k] * (1 + 1e-12));
        }
        CHECK(tail_bound(1.0, 2.0, 0) == doctest::Approx(2.0));
        CHECK(tail_bound(1.0, 2.0, 3) == doctest::Approx(0.25));
    }

    TEST_CASE("orbit hitting the critical point needs a side policy") {
        const double t = (1.0 + std::sqrt(5.0)) / 2.0;
        auto tent = PeumFamily::tent();
        CHECK_THROWS_AS(j_truncated(tent, t, 10), CriticalHitError);
        CHECK_NOTHROW(j_truncated(tent, t, 10, Side::Left));
        double l = j_truncated(tent, t, 10, Side::Left), r = j_truncated(tent, t, 10, Side::Right);
        CHECK(l != r);
    }

    TEST_CASE("shadow convention at c is the negated critical series") {
        auto q = testfam::quadratic();
        for (int k : {0, 1, 4, 12}) {
            CHECK(j_shadow(q, 1.6, 0.5, k, Side::Left) == doctest::Approx(-j_truncated(q, 1.6, k, Side::Left)));
        }
    }

    TEST_CASE("positivity scan") {
        std::vector<double> grid;
        for (int i = 0; i <= 50; ++i) grid.push_back(1.5 + 0.01 * i);
        auto scan = j_positivity_scan(PeumFamily::tent(), grid, 1e-12);
        CHECK(scan.min_abs > 0.0);
        CHECK(scan.flagged.empty());
        CHECK(scan.values.size() == grid.size());
        CHECK_THROWS(j_positivity_scan(PeumFamily::tent(), {}, 1e-12));
        auto frozen = j_positivity_scan(testfam::frozen(), {1.2, 1.7}, 1e-12);
        CHECK(frozen.flagged.size() == 2);
    }
}
