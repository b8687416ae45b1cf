#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <unistd.h>

#include "families.hpp"
#include "oracles/brute_force.hpp"
#include "oracles/tent_density.hpp"
#include "peum/error.hpp"
#include "peum/transfer_operator.hpp"

using namespace peum;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& tag) {
    auto p = fs::temp_directory_path() / ("peum_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_SUITE("transfer_operator") {
    TEST_CASE("full tent has the uniform density") {
        auto op = build_ulam(PeumFamily::tent(), 2.0, 1 << 12);
        auto r = stationary_density(op, 1e-13);
        for (double v : r.density.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(density_at_c(r.density, 0.5) == doctest::Approx(1.0));
    }

    TEST_CASE("cell masses approach the closed-form tent density") {
        for (double t : {1.5, 1.7, 1.9}) {
            const std::size_t n = 1 << 14;
            auto op = build_ulam(PeumFamily::tent(), t, n);
            auto r = stationary_density(op, 1e-13);
            oracle::TentDensity ref(t);
            double l1 = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                l1 += std::abs(r.density[i] / n - ref.mass(double(i) / n, double(i + 1) / n));
            CHECK(l1 < 5e-3);
            CHECK(r.density.mass() == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(r.residual < 1e-12);
        }
    }

    TEST_CASE("operator entries match brute-force cell intersections") {
        const std::size_t n = 16;
        for (auto fam : {PeumFamily::tent(), testfam::quadratic()}) {
            double t = fam.kind() == PeumFamily::Kind::Tent ? 1.8 : 1.6;
            auto op = build_ulam(fam, t, n, WeightMode::Plain, Assembly::Sparse);
            std::vector<std::vector<double>> ref(n, std::vector<double>(n, 0.0));
            const int m = 200000;
            for (std::size_t i = 0; i < n; ++i)
                for (int k = 0; k < m; ++k) {
                    double x = (i + (k + 0.5) / m) / n;
                    double y = fam.map(t, x);
                    std::size_t j = std::min<std::size_t>(n - 1, static_cast<std::size_t>(y * n));
                    ref[i][j] += 1.0 / m;
                }
            std::vector<std::vector<double>> got(n, std::vector<double>(n, 0.0));
            for (auto e : op.entries()) got[e.source][e.target] += e.value;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) CHECK(got[i][j] == doctest::Approx(ref[i][j]).epsilon(1e-4).scale(1.0));
        }
    }

    TEST_CASE("matrix-free and sparse assembly agree") {
        const std::size_t n = 1 << 11;
        std::mt19937_64 rng(4);
        std::vector<double> in(n);
        for (auto& x : in) x = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
        for (double t : {1.45, 1.8, 2.0}) {
            auto a = build_ulam(PeumFamily::tent(), t, n, WeightMode::Plain, Assembly::MatrixFree);
            auto b = build_ulam(PeumFamily::tent(), t, n, WeightMode::Plain, Assembly::Sparse);
            CHECK(a.matrix_free());
            CHECK_FALSE(b.matrix_free());
            std::vector<double> oa(n), ob(n);
            a.apply(in.data(), oa.data());
            b.apply(in.data(), ob.data());
            double sin = 0, sa = 0;
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(oa[i] == doctest::Approx(ob[i]).epsilon(1e-12));
                sin += in[i];
                sa += oa[i];
            }
            CHECK(sa == doctest::Approx(sin).epsilon(1e-12));
        }
        CHECK_THROWS_AS(build_ulam(testfam::quadratic(), 1.6, n, WeightMode::Plain, Assembly::MatrixFree),
                        DomainError);
    }

    TEST_CASE("mass preservation for a nonlinear family") {
        auto op = build_ulam(testfam::quadratic(), 1.7, 1 << 12);
        auto d = DensityGrid::uniform(1 << 12);
        for (int k = 0; k < 5; ++k) {
            d = op.apply(d);
            CHECK(d.mass() == doctest::Approx(1.0).epsilon(1e-12));
        }
    }

    TEST_CASE("resolution limits") {
        CHECK_THROWS_AS(build_ulam(PeumFamily::tent(), 1.9, 3), DomainError);
        CHECK_THROWS_AS(build_ulam(PeumFamily::tent(), 1.9, 1), DomainError);
        CHECK_NOTHROW(build_ulam(PeumFamily::tent(), 1.9, 4));
    }

    TEST_CASE("spectral gap is detected") {
        auto op = build_ulam(PeumFamily::tent(), 1.9, 1 << 12);
        auto r = stationary_density(op, 1e-13);
        auto g = spectral_gap_estimate(op, r.density, 3);
        CHECK(g.theta > 0.0);
        CHECK(g.theta < 1.0);
    }

    TEST_CASE("warm start converges to the same density") {
        auto op = build_ulam(PeumFamily::tent(), 1.75, 1 << 12);
        auto cold = stationary_density(op, 1e-13);
        auto op2 = build_ulam(PeumFamily::tent(), 1.7501, 1 << 12);
        auto a = stationary_density(op2, 1e-13);
        auto b = stationary_density(op2, 1e-13, 20000, &cold.density);
        double d = 0;
        for (std::size_t i = 0; i < a.density.size(); ++i) d += std::abs(a.density[i] - b.density[i]);
        CHECK(d / a.density.size() < 1e-10);
    }

    TEST_CASE("density cache round trip, tolerance rule and lock") {
        auto dir = scratch_dir("cache");
        auto fam = PeumFamily::tent();
        {
            DensityCache cache(dir);
            CHECK_THROWS_AS(DensityCache{dir}, Error);
            bool hit = true;
            auto r1 = cached_stationary_density(fam, 1.8, 1 << 10, 1e-12, &cache, &hit);
            CHECK_FALSE(hit);
            auto r2 = cached_stationary_density(fam, 1.8, 1 << 10, 1e-12, &cache, &hit);
            CHECK(hit);
            CHECK(r1.density.values() == r2.density.values());
            // looser request reuses the entry, tighter one does not
            CHECK(cache.load(fam.hash(), 1.8, 1 << 10, 1e-10).has_value());
            CHECK_FALSE(cache.load(fam.hash(), 1.8, 1 << 10, 1e-14).has_value());
            CHECK_FALSE(cache.load(fam.hash(), 1.8, 1 << 11, 1e-12).has_value());
            CHECK_FALSE(cache.load(testfam::quadratic().hash(), 1.8, 1 << 10, 1e-12).has_value());
        }
        CHECK_NOTHROW(DensityCache{dir});
        fs::remove_all(dir);
    }

    TEST_CASE("density grid norms") {
        DensityGrid g({1.0, 3.0, 2.0, 2.0});
        CHECK(g.mass() == doctest::Approx(2.0));
        CHECK(g.sup() == 3.0);
        CHECK(g.total_variation() == 3.0);
        g.normalize();
        CHECK(g.mass() == doctest::Approx(1.0));
        DensityGrid z({0.0, 0.0});
        CHECK_THROWS_AS(z.normalize(), DomainError);
    }
}

TEST_SUITE("transfer_operator") {
    TEST_CASE("sqrt2 tent density is supported on the core") {
        const double t = std::sqrt(2.0);
        const std::size_t n = 4096;
        auto r = stationary_density(build_ulam(PeumFamily::tent(), t, n), 1e-12);
        const double lo = t - 1.0, hi = t / 2.0;
        for (std::size_t i = 0; i < n; ++i) {
            double a = double(i) / n, b = double(i + 1) / n;
            if (b < lo - 1.0 / n || a > hi + 1.0 / n) CHECK(r.density[i] == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
        }
        auto r2 = stationary_density(build_ulam(PeumFamily::tent(), t, 2 * n), 1e-12);
        oracle::TentDensity ref(t);
        CHECK(density_at_c(r.density, 0.5) == doctest::Approx(ref(0.5)).epsilon(1e-2));
        CHECK(density_at_c(r2.density, 0.5) == doctest::Approx(density_at_c(r.density, 0.5)).epsilon(1e-2));
        CHECK(density_at_c(DensityGrid({1.0, 3.0}), 0.5) == 2.0);
    }

    TEST_CASE("tolerance must be positive") {
        auto op = build_ulam(PeumFamily::tent(), 1.9, 64);
        CHECK_THROWS_AS(stationary_density(op, 0.0), DomainError);
        auto r = stationary_density(op, 1e-10);
        CHECK_THROWS_AS(spectral_gap_estimate(op, r.density, 0), DomainError);
    }

    TEST_CASE("mass conservation on random densities") {
        auto op = build_ulam(testfam::quadratic(), 1.65, 1024);
        std::mt19937_64 rng(21);
        for (int k = 0; k < 100; ++k) {
            std::vector<double> v(1024);
            for (auto& x : v) x = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            DensityGrid d(v);
            CHECK(std::abs(op.apply(d).mass() - d.mass()) <= 1e-10);
        }
    }

    TEST_CASE("duality on indicators") {
        const std::size_t n = 4096;
        std::mt19937_64 rng(8);
        for (auto fam : {PeumFamily::tent(), testfam::quadratic()}) {
            const double t = fam.kind() == PeumFamily::Kind::Tent ? 1.85 : 1.7;
            auto op = build_ulam(fam, t, n);
            auto s = fam.slice(t);
            for (int trial = 0; trial < 4; ++trial) {
                double a = std::uniform_real_distribution<double>(0.0, 0.8)(rng);
                double b = a + std::uniform_real_distribution<double>(0.05, 0.2)(rng);
                auto d = DensityGrid::uniform(n);
                for (int k = 1; k <= 5; ++k) {
                    d = op.apply(d);
                    double lhs = 0.0;
                    for (std::size_t i = 0; i < n; ++i) {
                        double lo = std::max(a, double(i) / n), hi = std::min(b, double(i + 1) / n);
                        if (hi > lo) lhs += d[i] * (hi - lo);
                    }
                    double rhs = oracle::grid_measure(1 << 21, [&](double x) {
                        for (int j = 0; j < k; ++j) x = s(x);
                        return a <= x && x < b;
                    });
                    CHECK(std::abs(lhs - rhs) <= 2.0 / n + 1e-4);
                }
            }
        }
    }

    TEST_CASE("spectral gap law") {
        auto op = build_ulam(PeumFamily::tent(), 1.9, 2048);
        auto rho = stationary_density(op, 1e-13).density;
        auto g = spectral_gap_estimate(op, rho, 4);
        std::mt19937_64 rng(5);
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> v(2048);
            for (auto& x : v) x = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
            DensityGrid d(v);
            const double m = d.mass();
            const double base = std::abs(m) + 1.0;
            for (int k = 1; k <= 30; ++k) {
                d = op.apply(d);
                double e = 0.0;
                for (std::size_t i = 0; i < 2048; ++i) e += std::abs(d[i] - m * rho[i]) / 2048.0;
                worst = std::max(worst, e / (base * std::pow(g.theta, k)));
            }
        }
        MESSAGE("theta = " << g.theta << ", fitted C = " << worst);
        CHECK(std::isfinite(worst));
        CHECK(worst < 1e3);
    }

    TEST_CASE("weighted operator contracts") {
        const double t = 1.9;
        auto op = build_ulam(PeumFamily::tent(), t, 2048, WeightMode::SignedExtraWeight);
        auto d = DensityGrid::uniform(2048);
        double bound = 1.0;
        for (int i = 1; i <= 20; ++i) {
            d = op.apply(d);
            bound *= 2.0 / (t * t);
            double mx = 0;
            for (double v : d.values()) mx = std::max(mx, std::abs(v));
            CHECK(mx <= bound * (1 + 1e-12));
        }
        CHECK_THROWS_AS(stationary_density(op, 1e-10), DomainError);
    }

    TEST_CASE("doubling tent decorrelates at rate one half") {
        auto op = build_ulam(PeumFamily::tent(), 2.0, 4096);
        auto rho = DensityGrid::uniform(4096);
        auto g = spectral_gap_estimate(op, rho, 3);
        MESSAGE("theta(t=2) = " << g.theta);
        CHECK(g.theta < 0.75);
    }
}
