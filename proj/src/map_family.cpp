#include "peum/map_family.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "peum/error.hpp"

namespace peum {

std::string Itinerary::str() const {
    std::string s;
    s.reserve(symbols.size());
    for (Symbol sym : symbols) s += to_char(sym);
    return s;
}

std::vector<double> eval_orbit(const PeumFamily& family, double t, double x, int n) {
    if (n < 0) throw DomainError("orbit length must be non-negative");
    family.map(t, x);  // domain checks
    MapSlice f = family.slice(t);
    std::vector<double> pts(static_cast<std::size_t>(n) + 1);
    pts[0] = x;
    for (int k = 0; k < n; ++k) pts[k + 1] = f(pts[k]);
    return pts;
}

Itinerary itinerary(const PeumFamily& family, double t, double x, int n) {
    auto pts = eval_orbit(family, t, x, n);
    Itinerary it;
    it.symbols.reserve(pts.size());
    for (double p : pts) it.symbols.push_back(p <= family.c() ? Symbol::L : Symbol::R);
    return it;
}

CriticalOrbit critical_orbit(const PeumFamily& family, double t, int n, Side near_critical_side) {
    if (n < 0) throw DomainError("orbit length must be non-negative");
    MapSlice f = family.slice(t);
    const double c = family.c();
    CriticalOrbit co;
    co.t = t;
    co.points.resize(static_cast<std::size_t>(n) + 1);
    co.cumulative_derivative.resize(static_cast<std::size_t>(n) + 1);
    co.points[0] = c;
    co.cumulative_derivative[0] = 1.0;
    for (int j = 1; j <= n; ++j) {
        co.points[j] = f(co.points[j - 1]);
        double p = co.points[j];
        Symbol s = f.symbol(p);
        if (std::abs(p - c) <= kNearCriticalTol) {
            co.near_critical.push_back(j);
            if (near_critical_side != Side::Auto) s = f.resolve(near_critical_side, p);
        }
        co.cumulative_derivative[j] = co.cumulative_derivative[j - 1] * f.df(s, p);
    }
    return co;
}

RecurrenceResult critical_recurrence(const PeumFamily& family, double t, int N, double m) {
    if (N < 2) throw DomainError("recurrence scan needs N >= 2");
    if (!(m > 1.0)) throw DomainError("recurrence exponent m must exceed 1");
    MapSlice f = family.slice(t);
    const double c = family.c();
    std::vector<double> val(static_cast<std::size_t>(N) + 1, 0.0);
    double x = c;
    x = f(x);
    RecurrenceResult r;
    r.min_value = INFINITY;
    for (int j = 2; j <= N; ++j) {
        x = f(x);
        val[j] = std::pow(static_cast<double>(j), m) * std::abs(x - c);
        if (val[j] < r.min_value) {
            r.min_value = val[j];
            r.argmin = j;
        }
    }
    int j0 = N + 1;
    for (int j = N; j >= 2 && val[j] >= 1.0; --j) j0 = j;
    r.threshold = j0 <= N ? j0 : -1;
    return r;
}

double cumulative_derivative(const MapSlice& f, double x, int n) {
    double d = 1.0;
    for (int k = 0; k < n; ++k) {
        d *= f.df(f.resolve(Side::Auto, x), x);
        x = f(x);
    }
    return d;
}

namespace {

Interval image(const MapSlice& f, Interval I) {
    double a = f(I.lo), b = f(I.hi);
    Interval out{std::min(a, b), std::max(a, b)};
    if (I.lo < f.c() && f.c() < I.hi) {
        double v = f(f.c());
        out.lo = std::min(out.lo, v);
        out.hi = std::max(out.hi, v);
    }
    return out;
}

std::vector<Interval> merge(std::vector<Interval> v) {
    std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> out;
    for (const auto& I : v) {
        if (!out.empty() && I.lo <= out.back().hi) out.back().hi = std::max(out.back().hi, I.hi);
        else out.push_back(I);
    }
    return out;
}

// Forward-iterates a small interval around the core midpoint; mixing maps
// eventually spread it over the whole core [min(c1,c2), max(c1,c2)].
int mixing_steps(const MapSlice& f, Interval core, int max_steps) {
    const double mid = 0.5 * (core.lo + core.hi);
    const double eps = 1e-3 * core.length();
    std::vector<Interval> set{{mid - eps, mid + eps}};
    const double margin = 1e-9;
    for (int step = 1; step <= max_steps; ++step) {
        std::vector<Interval> next;
        next.reserve(set.size() * 2);
        for (const auto& I : set) {
            if (I.lo < f.c() && f.c() < I.hi) {
                next.push_back(image(f, {I.lo, f.c()}));
                next.push_back(image(f, {f.c(), I.hi}));
            } else {
                next.push_back(image(f, I));
            }
        }
        set = merge(std::move(next));
        for (const auto& I : set)
            if (I.lo <= core.lo + margin && I.hi >= core.hi - margin) return step;
        if (set.size() > 4096) set.resize(4096);
    }
    return -1;
}

}  // namespace

std::vector<AssumptionReport> check_assumptions(const PeumFamily& family, const std::vector<double>& t_grid,
                                                int n_orbit) {
    std::vector<AssumptionReport> out;
    out.reserve(t_grid.size());
    const double c = family.c();
    for (double t : t_grid) {
        MapSlice f = family.slice(t);
        AssumptionReport r;
        r.t = t;

        double mind = INFINITY;
        for (int s = 0; s < 2; ++s) {
            const auto& b = f.branch(static_cast<Symbol>(s));
            for (int k = 0; k <= 1024; ++k) {
                double x = b.lo + (b.hi - b.lo) * k / 1024.0;
                mind = std::min(mind, std::abs(f.df(static_cast<Symbol>(s), x)));
            }
        }
        r.min_abs_derivative = mind;
        r.expansion_ok = mind >= family.lambda() * (1.0 - 1e-12);

        std::vector<double> pts(static_cast<std::size_t>(std::max(n_orbit, 3)) + 1);
        pts[0] = c;
        for (std::size_t j = 1; j < pts.size(); ++j) pts[j] = f(pts[j - 1]);
        const int n = static_cast<int>(pts.size()) - 1;

        r.min_distance_to_c = INFINITY;
        for (int j = 1; j <= std::min(n, std::max(n_orbit, 1)); ++j)
            r.min_distance_to_c = std::min(r.min_distance_to_c, std::abs(pts[j] - c));
        r.periodic = r.min_distance_to_c <= 1e-10;

        // Eventual periodicity: a repeated orbit point confirmed over the next steps.
        std::vector<int> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), 1);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return pts[a] < pts[b]; });
        int best_j = -1, best_i = -1;
        for (std::size_t a = 0; a < idx.size(); ++a) {
            for (std::size_t b = a + 1; b < idx.size() && pts[idx[b]] - pts[idx[a]] <= 1e-10; ++b) {
                int i = std::min(idx[a], idx[b]), j = std::max(idx[a], idx[b]);
                bool confirmed = true;
                for (int k = 1; k <= 3 && j + k <= n; ++k)
                    if (std::abs(pts[i + k] - pts[j + k]) > 1e-8) confirmed = false;
                if (confirmed && (best_j < 0 || j < best_j || (j == best_j && i < best_i))) {
                    best_j = j;
                    best_i = i;
                }
            }
        }
        if (best_j > 0) {
            r.eventually_periodic = true;
            r.preperiod = best_i;
            r.period = best_j - best_i;
        }

        double c1 = pts[1], c2 = pts[2];
        Interval core{std::min(c1, c2), std::max(c1, c2)};
        if (core.length() > 0.0) {
            r.mixing_steps = mixing_steps(f, core, 400);
            r.mixing_heuristic = r.mixing_steps > 0;
            std::vector<char> seen(256, 0);
            for (int j = 1; j <= n; ++j) {
                double u = (pts[j] - core.lo) / core.length();
                if (u < 0.0 || u > 1.0) continue;
                seen[std::min(255, static_cast<int>(u * 256.0))] = 1;
            }
            r.orbit_density = std::count(seen.begin(), seen.end(), 1) / 256.0;
        }
        out.push_back(r);
    }
    return out;
}

}  // namespace peum
