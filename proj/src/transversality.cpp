#include "peum/transversality.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "peum/error.hpp"
#include "peum/map_family.hpp"

namespace peum {

namespace {

Symbol orbit_symbol(const MapSlice& f, double x, Side side_policy, int j) {
    if (std::abs(x - f.c()) <= kNearCriticalTol) {
        if (side_policy == Side::Auto)
            throw CriticalHitError("orbit point " + std::to_string(j) + " hits the critical point at t = " +
                                   std::to_string(f.t()));
        return side_policy == Side::Left ? Symbol::L : Symbol::R;
    }
    return f.symbol(x);
}

// sum_{j<k} v(f^j y) / Df^j(f y), with the j = 0 point taken as given (y may be c).
std::vector<double> series_terms(const MapSlice& f, double y, Symbol s0, int k, Side side_policy) {
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(k));
    double x = y, d = 1.0;
    Symbol s = s0;
    for (int j = 0; j < k; ++j) {
        if (j > 0) {
            s = orbit_symbol(f, x, side_policy, j);
            d *= f.df(s, x);
        }
        terms.push_back(f.v(s, x) / d);
        x = f.value(s, x);
        x = x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x);
    }
    return terms;
}

}  // namespace

double tail_bound(double sup_v, double lambda, int k) {
    return sup_v * std::pow(lambda, -k) / (1.0 - 1.0 / lambda);
}

double sup_velocity(const PeumFamily& family, double t) {
    const MapSlice f = family.slice(t);
    const double c = f.c();
    double m = 0.0;
    constexpr int kSamples = 4096;
    for (int s = 0; s < 2; ++s) {
        const Symbol sym = s == 0 ? Symbol::L : Symbol::R;
        const double lo = s == 0 ? 0.0 : c, hi = s == 0 ? c : 1.0;
        for (int i = 0; i <= kSamples; ++i) {
            double x = lo + (hi - lo) * i / kSamples;
            m = std::max(m, std::abs(f.v(sym, x)));
        }
    }
    return m;
}

TransversalitySeries j_series(const PeumFamily& family, double t, int K, Side side_policy) {
    if (K < 0) throw DomainError("truncation index must be >= 0");
    const MapSlice f = family.slice(t);
    TransversalitySeries s;
    s.t = t;
    s.terms = series_terms(f, f.c(), Symbol::L, K, side_policy);
    s.partial_sums.assign(static_cast<std::size_t>(K) + 1, 0.0);
    for (int k = 0; k < K; ++k) s.partial_sums[k + 1] = s.partial_sums[k] + s.terms[k];
    s.sup_v = sup_velocity(family, t);
    s.lambda = family.lambda();
    for (int k = 0; k <= K; ++k) s.tail_bounds.push_back(tail_bound(s.sup_v, s.lambda, k));
    return s;
}

double j_truncated(const PeumFamily& family, double t, int k, Side side_policy) {
    return j_series(family, t, k, side_policy).partial_sums.back();
}

double j_shadow(const PeumFamily& family, double t, double y, int k, Side side_policy) {
    if (k < 0) throw DomainError("truncation index must be >= 0");
    const MapSlice f = family.slice(t);
    Symbol s0 = std::abs(y - f.c()) <= kNearCriticalTol
                    ? (side_policy == Side::Right ? Symbol::R : Symbol::L)
                    : f.symbol(y);
    double sum = 0.0;
    for (double term : series_terms(f, y, s0, k, side_policy)) sum += term;
    return -sum;
}

JLimit j_limit(const PeumFamily& family, double t, double tol, Side side_policy) {
    if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
    const double sv = sup_velocity(family, t), lam = family.lambda();
    int k = 0;
    while (tail_bound(sv, lam, k) > tol) {
        if (++k > 100000) throw ConvergenceError("tail bound does not reach tolerance");
    }
    JLimit r;
    r.k_used = k;
    r.tail_bound = tail_bound(sv, lam, k);
    r.value = j_truncated(family, t, k, side_policy);
    return r;
}

JScan j_positivity_scan(const PeumFamily& family, const std::vector<double>& t_grid, double tol, Side side_policy) {
    if (t_grid.empty()) throw DomainError("empty parameter grid");
    JScan scan;
    scan.min_abs = std::numeric_limits<double>::infinity();
    for (double t : t_grid) {
        JLimit v = j_limit(family, t, tol, side_policy);
        scan.t.push_back(t);
        scan.values.push_back(v);
        if (std::abs(v.value) < scan.min_abs) {
            scan.min_abs = std::abs(v.value);
            scan.argmin = t;
        }
        if (std::abs(v.value) <= tol) scan.flagged.push_back(t);
    }
    return scan;
}

}  // namespace peum
