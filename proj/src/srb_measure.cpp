#include "peum/srb_measure.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "peum/error.hpp"
#include "peum/laps.hpp"
#include "peum/reduce.hpp"
#include "peum/sampling.hpp"

namespace peum {

namespace {

// Neumaier compensated accumulator.
struct Accumulator {
    double s = 0.0, comp = 0.0;
    void add(double x) {
        double t = s + x;
        if (std::fabs(s) >= std::fabs(x)) comp += (s - t) + x;
        else comp += (x - t) + s;
        s = t;
    }
    double value() const { return s + comp; }
};

constexpr double kGL8x[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
                             0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr double kGL8w[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                             0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

template <class F>
double gl8(double a, double b, F&& g) {
    const double m = 0.5 * (a + b), r = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 8; ++i) s += kGL8w[i] * g(m + r * kGL8x[i]);
    return r * s;
}

// f^depth along the branches of a lap: the interior point stays off c.
double lap_image(const MapSlice& f, double x, int depth) {
    for (int i = 0; i < depth; ++i) x = f(x);
    return x;
}

// Integral of phi(f^depth x) over one lap.
double lap_integral(const MapSlice& f, const Lap& lap, const Observable& phi) {
    const double len = lap.b - lap.a;
    if (f.affine()) {
        if (lap.w == lap.u) return len * phi(lap.u);
        return len * (phi.primitive(lap.w) - phi.primitive(lap.u)) / (lap.w - lap.u);
    }
    return gl8(lap.a, lap.b, [&](double x) { return phi(lap_image(f, x, lap.depth)); });
}

}  // namespace

double integrate_against(const DensityGrid& rho, const Observable& phi) {
    if (rho.size() == 0) throw DomainError("empty density");
    auto avg = phi.cell_averages(rho.size());
    return dot(rho.values(), avg) / static_cast<double>(rho.size());
}

GammaResult gamma(const PeumFamily& family, double t, const Observable& phi, std::size_t n, double tol,
                  DensityCache* cache) {
    auto st = cached_stationary_density(family, t, n, tol, cache);
    GammaResult r;
    r.value = integrate_against(st.density, phi);
    r.residual = st.residual;
    r.iterations = st.iterations;
    r.n = n;
    return r;
}

IteratedResult gamma_iterated(const PeumFamily& family, double t, const Observable& phi, int n,
                              const IteratedOptions& opt) {
    if (n < 0) throw DomainError("gamma_iterated: n must be >= 0");
    const MapSlice f = family.slice(t);
    IteratedResult res;
    if (!opt.force_monte_carlo) {
        try {
            Accumulator acc;
            res.laps = walk_laps(f, 0.0, 1.0, n, opt.lap_budget, [&](const Lap& lap) {
                if (lap.depth == n) acc.add(lap_integral(f, lap, phi));
            });
            res.value = acc.value();
            return res;
        } catch (const BudgetError&) {
        }
    }
    auto samples = birkhoff_samples(f, phi, opt.mc_samples, n, n + 1, opt.seed);
    auto st = summarize(samples);
    res.value = st.mean;
    res.std_error = st.std_error;
    res.monte_carlo = true;
    res.laps = 0;
    return res;
}

std::vector<double> gamma_iterated_all(const PeumFamily& family, double t, const Observable& phi, int n_max,
                                       std::uint64_t lap_budget) {
    if (n_max < 0) throw DomainError("gamma_iterated_all: n_max must be >= 0");
    const MapSlice f = family.slice(t);
    std::vector<Accumulator> acc(static_cast<std::size_t>(n_max) + 1);
    walk_laps(f, 0.0, 1.0, n_max, lap_budget,
              [&](const Lap& lap) { acc[static_cast<std::size_t>(lap.depth)].add(lap_integral(f, lap, phi)); });
    std::vector<double> out;
    out.reserve(acc.size());
    for (const auto& a : acc) out.push_back(a.value());
    return out;
}

double integrate_composed(const MapSlice& f, double a, double b, int n, const Observable& phi, const Observable* psi,
                          std::uint64_t lap_budget) {
    if (!(b >= a)) throw DomainError("integrate_composed: empty interval");
    if (b == a) return 0.0;
    Accumulator acc;
    walk_laps(f, a, b, n, lap_budget, [&](const Lap& lap) {
        if (lap.depth != n) return;
        if (psi == nullptr) {
            acc.add(lap_integral(f, lap, phi));
        } else {
            acc.add(gl8(lap.a, lap.b, [&](double x) { return phi(lap_image(f, x, n)) * (*psi)(x); }));
        }
    });
    return acc.value();
}

double lyapunov_of_density(const MapSlice& f, const DensityGrid& rho) {
    const std::size_t n = rho.size();
    if (n == 0) throw DomainError("empty density");
    const double c = f.c(), h = 1.0 / static_cast<double>(n);
    auto log_df = [&](Symbol s, double lo, double hi) {
        if (!(hi > lo)) return 0.0;
        if (f.branch(s).affine) return (hi - lo) * std::log(std::fabs(f.branch(s).a1));
        return gl8(lo, hi, [&](double x) { return std::log(std::fabs(f.df(s, x))); });
    };
    std::vector<double> cell(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = static_cast<double>(i) * h, hi = static_cast<double>(i + 1) * h;
        double v;
        if (hi <= c) v = log_df(Symbol::L, lo, hi);
        else if (lo >= c) v = log_df(Symbol::R, lo, hi);
        else v = log_df(Symbol::L, lo, c) + log_df(Symbol::R, c, hi);
        cell[i] = v;
    }
    return dot(rho.values(), cell);
}

double lyapunov(const PeumFamily& family, double t, std::size_t n, double tol, DensityCache* cache) {
    auto st = cached_stationary_density(family, t, n, tol, cache);
    return lyapunov_of_density(family.slice(t), st.density);
}

std::vector<GammaPoint> gamma_sweep(const PeumFamily& family, const std::vector<double>& t_grid,
                                    const Observable& phi, std::size_t n, double tol, DensityCache* cache) {
    std::vector<GammaPoint> out(t_grid.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(t_grid.size()); ++i) {
        auto& p = out[static_cast<std::size_t>(i)];
        p.t = t_grid[static_cast<std::size_t>(i)];
        p.n = n;
        auto t0 = std::chrono::steady_clock::now();
        try {
            auto g = gamma(family, p.t, phi, n, tol, cache);
            p.gamma = g.value;
            p.tol_achieved = g.residual;
        } catch (const std::exception& e) {
            p.gamma = std::numeric_limits<double>::quiet_NaN();
            p.tol_achieved = std::numeric_limits<double>::quiet_NaN();
            p.status = e.what();
        }
        p.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
    return out;
}

}  // namespace peum
