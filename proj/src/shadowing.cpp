#include "peum/shadowing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "peum/error.hpp"
#include "peum/laps.hpp"
#include "peum/map_family.hpp"
#include "peum/sampling.hpp"
#include "peum/srb_measure.hpp"
#include "peum/transversality.hpp"

namespace peum {

namespace {

constexpr double kJTol = 1e-14;

void check_step(const PeumFamily& family, double t, double h) {
    family.check_parameter(t);
    if (!(h >= 0.0)) throw DomainError("h must be >= 0");
    family.check_parameter(t + h);
}

struct Gap {
    Interval iv;
    bool empty = true;
};

// Gaps attached to A (f_{t+h} pullbacks) and B (f_t pullbacks) for m = 0..n.
void gap_intervals(const PeumFamily& family, double t, double h, int n, GapModel model, std::vector<Gap>& a,
                   std::vector<Gap>& b, std::vector<OrientedInterval>& I, std::vector<OrientedInterval>& It) {
    const MapSlice f = family.slice(t);
    const double c = f.c(), dl = f.df(Symbol::L, c), dr = f.df(Symbol::R, c);
    auto series = j_series(family, t, n, Side::Left);
    a.assign(static_cast<std::size_t>(n) + 1, Gap{});
    b.assign(static_cast<std::size_t>(n) + 1, Gap{});
    I.clear();
    It.clear();
    for (int m = 0; m <= n; ++m) {
        const double J = series.partial_sums[m];
        OrientedInterval ik = J <= 0.0 ? OrientedInterval{c + h * J / dl, c} : OrientedInterval{c, c - h * J / dr};
        OrientedInterval it = J > 0.0 ? OrientedInterval{c - h * J / dl, c} : OrientedInterval{c, c + h * J / dr};
        I.push_back(ik);
        It.push_back(it);
        if (model == GapModel::Printed) {
            a[m] = {ik.hull(), ik.length() == 0.0};
            b[m] = {it.hull(), it.length() == 0.0};
        } else {
            const double wl = h * std::abs(J) / std::abs(dl), wr = h * std::abs(J) / std::abs(dr);
            Gap g{{c - wl, c + wr}, !(wl + wr > 0.0)};
            if (J * dl > 0.0) a[m] = g;
            else if (J * dl < 0.0) b[m] = g;
        }
    }
}

ComplementSet pull_gaps(const MapSlice& f, const std::vector<Gap>& gaps, int n, std::uint64_t budget) {
    ComplementSet cs;
    std::uint64_t used = 0;
    std::vector<Interval> all;
    for (int k = 0; k <= n && cs.complete; ++k) {
        const Gap& g = gaps[static_cast<std::size_t>(n - k)];
        if (g.empty) continue;
        std::vector<Interval> pre;
        cs.complete = pullback(f, g.iv, k, budget, used, pre);
        for (const auto& iv : pre) {
            cs.components.push_back({iv.lo, iv.hi, k});
            all.push_back(iv);
        }
    }
    std::sort(cs.components.begin(), cs.components.end(), [](const Component& x, const Component& y) {
        return x.lo != y.lo ? x.lo < y.lo : x.generation < y.generation;
    });
    cs.merged = merge_intervals(std::move(all));
    cs.measure = union_measure(cs.merged);
    return cs;
}

// Measure of the intersection of two sorted disjoint interval lists.
double intersection_measure(const std::vector<Interval>& a, const std::vector<Interval>& b) {
    double m = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double lo = std::max(a[i].lo, b[j].lo), hi = std::min(a[i].hi, b[j].hi);
        if (hi > lo) m += hi - lo;
        if (a[i].hi < b[j].hi) ++i;
        else ++j;
    }
    return m;
}

double psi_integral(const Observable* psi, const Interval& iv) {
    return psi ? psi->integral(iv.lo, iv.hi) : iv.length();
}

// R_{t,n}(y) and the orbit, without the near-critical check.
struct ROrbit {
    double r = 0.0;
    double end = 0.0;
    bool near_critical = false;
};

ROrbit r_orbit(const MapSlice& f, double y, int n) {
    ROrbit out;
    double S = 0.0, d_prev = 1.0, x = y;
    for (int k = 0; k < n; ++k) {
        if (std::abs(x - f.c()) <= kNearCriticalTol) out.near_critical = true;
        const Symbol s = f.symbol(x);
        const double d = f.df(s, x);
        // S_k = sum_{j<=k} xi(y_j) / Df^{k-j}(y_j)
        S = (k == 0 ? 0.0 : S / d_prev) + f.d2f(s, x) / d;
        out.r += f.dv(s, x) / d - f.v(s, x) / d * S;
        d_prev = d;
        x = f(x);
    }
    out.end = x;
    return out;
}

}  // namespace

std::vector<Interval> merge_intervals(std::vector<Interval> v) {
    std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> out;
    for (const auto& iv : v) {
        if (!out.empty() && iv.lo <= out.back().hi) out.back().hi = std::max(out.back().hi, iv.hi);
        else out.push_back(iv);
    }
    return out;
}

double union_measure(const std::vector<Interval>& merged) {
    double m = 0.0;
    for (const auto& iv : merged) m += iv.length();
    return m;
}

bool pullback(const MapSlice& f, Interval I, int k, std::uint64_t budget, std::uint64_t& used,
              std::vector<Interval>& out) {
    if (!(I.hi > I.lo)) return true;
    std::vector<Interval> cur{I}, next;
    for (int level = 0; level < k; ++level) {
        next.clear();
        for (const auto& iv : cur) {
            for (Symbol s : {Symbol::L, Symbol::R}) {
                const Interval r = f.range(s);
                const double lo = std::max(iv.lo, r.lo), hi = std::min(iv.hi, r.hi);
                if (!(hi > lo)) continue;
                auto a = f.inverse(s, lo), b = f.inverse(s, hi);
                if (!a || !b) continue;
                if (++used > budget) {
                    out.insert(out.end(), next.begin(), next.end());
                    return false;
                }
                next.push_back({std::min(*a, *b), std::max(*a, *b)});
            }
        }
        cur.swap(next);
        if (cur.empty()) return true;
    }
    out.insert(out.end(), cur.begin(), cur.end());
    return true;
}

BarInterval bar_interval(const PeumFamily& family, double t, double h) {
    if (!(h > 0.0)) throw DomainError("bar interval needs h > 0");
    check_step(family, t, h);
    const double c = family.c();
    BarInterval b;
    b.J = j_limit(family, t, kJTol, Side::Left).value;
    const double w = h * b.J;
    b.interval = {std::min(c - w, c + w), std::max(c - w, c + w)};
    b.flagged = !(b.J > 0.0);
    return b;
}

OrientedInterval interval_I_k(const PeumFamily& family, double t, double h, int k) {
    if (k < 0) throw DomainError("k must be >= 0");
    std::vector<Gap> a, b;
    std::vector<OrientedInterval> I, It;
    gap_intervals(family, t, h, k, GapModel::Printed, a, b, I, It);
    return I.back();
}

OrientedInterval interval_I_tilde_k(const PeumFamily& family, double t, double h, int k) {
    if (k < 0) throw DomainError("k must be >= 0");
    std::vector<Gap> a, b;
    std::vector<OrientedInterval> I, It;
    gap_intervals(family, t, h, k, GapModel::Printed, a, b, I, It);
    return It.back();
}

ShadowReport complement_A(const PeumFamily& family, double t, double h, int n, std::uint64_t budget,
                          GapModel model) {
    if (n < 0) throw DomainError("n must be >= 0");
    check_step(family, t, h);
    ShadowReport rep;
    rep.t = t;
    rep.h = h;
    rep.n = n;
    rep.model = model;
    if (h > 0.0) {
        rep.bar = bar_interval(family, t, h);
    } else {
        rep.bar.interval = {family.c(), family.c()};
        rep.bar.J = j_limit(family, t, kJTol, Side::Left).value;
    }
    std::vector<Gap> a, b;
    gap_intervals(family, t, h, n, model, a, b, rep.I, rep.I_tilde);
    rep.complement_A = pull_gaps(family.slice(t + h), a, n, budget);
    rep.complement_B = pull_gaps(family.slice(t), b, n, budget);
    return rep;
}

std::optional<ShadowPartner> shadow_partner(const PeumFamily& family, double t, double h, double x, int n) {
    if (n < 0) throw DomainError("n must be >= 0");
    check_step(family, t, h);
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("x must lie in [0,1]");
    const MapSlice g = family.slice(t + h), f = family.slice(t);
    ShadowPartner sp;
    sp.itinerary.reserve(static_cast<std::size_t>(n));
    double xs = x, dg = 1.0;
    for (int j = 0; j < n; ++j) {
        const Symbol s = g.symbol(xs);
        sp.itinerary.push_back(s);
        dg *= g.df(s, xs);
        xs = g(xs);
    }
    double y = xs;
    for (int j = n - 1; j >= 0; --j) {
        auto p = f.inverse(sp.itinerary[j], y);
        if (!p) return std::nullopt;
        y = *p;
    }
    sp.y = y;
    sp.itinerary_match = true;
    double yy = y, df = 1.0;
    for (int j = 0; j < n; ++j) {
        const Symbol s = sp.itinerary[j];
        if (f.symbol(yy) != s && yy != f.c()) sp.itinerary_match = false;
        df *= f.df(s, yy);
        yy = f.value(s, yy);
    }
    sp.endpoint_error = std::abs(yy - xs);
    sp.dx_dy = df / dg;
    return sp;
}

double r_function(const PeumFamily& family, double t, double y, int n) {
    if (n < 0) throw DomainError("n must be >= 0");
    const MapSlice f = family.slice(t);
    ROrbit o = r_orbit(f, y, n);
    if (o.near_critical) throw CriticalHitError("orbit of y passes within 1e-12 of c");
    return o.r;
}

Interval forward_image(const MapSlice& f, Interval I) {
    const double a = f(I.lo), b = f(I.hi);
    Interval out{std::min(a, b), std::max(a, b)};
    if (I.lo < f.c() && f.c() < I.hi) {
        const double v = f(f.c());
        out.lo = std::min(out.lo, v);
        out.hi = std::max(out.hi, v);
    }
    return out;
}

ReturnTimes return_times(const PeumFamily& family, double t, double h, int s_grid_size) {
    if (s_grid_size < 1) throw DomainError("s grid needs at least one point");
    const BarInterval bar = bar_interval(family, t, h);
    const Interval I = bar.interval;
    const int cap = static_cast<int>(std::ceil(10.0 * std::abs(std::log(h))));
    ReturnTimes rt;
    rt.s_grid_size = s_grid_size;
    rt.n1 = std::numeric_limits<int>::max();
    for (int i = 0; i < s_grid_size; ++i) {
        const double s = s_grid_size == 1 ? t : t + h * i / (s_grid_size - 1);
        const MapSlice f = family.slice(s);
        Interval img = I;
        for (int k = 1; k <= std::min(cap, rt.n1 - 1); ++k) {
            img = forward_image(f, img);
            if (img.lo <= I.hi && I.lo <= img.hi) {
                rt.n1 = k;
                rt.s_at_n1 = s;
                break;
            }
        }
    }
    if (rt.n1 == std::numeric_limits<int>::max()) throw ConvergenceError("no return of the bar interval within cap");

    const MapSlice g = family.slice(t + h);
    rt.hat_interval = I;
    for (int k = 0; k < rt.n1 - 1; ++k) rt.hat_interval = forward_image(g, rt.hat_interval);

    const int n_cap = cap + 200;
    auto co = critical_orbit(family, t + h, n_cap, Side::Left);
    const double c = family.c();
    const double dmin = std::min(std::abs(g.df(Symbol::L, c)), std::abs(g.df(Symbol::R, c)));
    rt.n2 = -1;
    for (int m = 1; m <= n_cap; ++m) {
        if (dmin * std::abs(co.cumulative_derivative[m - 1]) * I.length() >= 1.0) {
            rt.n2 = m;
            break;
        }
    }
    if (rt.n2 < 0) throw ConvergenceError("n2 search exceeded cap");
    return rt;
}

DistortionTable distortion_ratios(const PeumFamily& family, double t, double h, int n_max, int s_count) {
    if (n_max < 0) throw DomainError("n_max must be >= 0");
    if (s_count < 2) throw DomainError("need at least two s samples");
    const BarInterval bar = bar_interval(family, t, h);
    DistortionTable tab;
    tab.n_max = n_max;
    std::vector<std::vector<double>> len(static_cast<std::size_t>(s_count));
    std::vector<std::vector<double>> cn(static_cast<std::size_t>(s_count));
    for (int i = 0; i < s_count; ++i) {
        const double s = t + h * i / (s_count - 1);
        tab.s.push_back(s);
        const MapSlice f = family.slice(s);
        Interval img = bar.interval;
        double cc = family.c();
        for (int n = 0; n <= n_max; ++n) {
            if (n > 0) {
                img = forward_image(f, img);
                cc = f(cc);
            }
            if (!(img.length() > 0.0)) throw DomainError("degenerate image interval");
            len[i].push_back(img.length());
            cn[i].push_back(cc);
        }
    }
    tab.ratio_max = 1.0;
    for (int n = 0; n <= n_max; ++n) {
        double lo = INFINITY, hi = 0.0;
        for (int i = 0; i < s_count; ++i) {
            lo = std::min(lo, len[i][n]);
            hi = std::max(hi, len[i][n]);
        }
        tab.ratio_max = std::max(tab.ratio_max, hi / lo);
    }
    tab.ratio_min = 1.0 / tab.ratio_max;
    // Orbit ratio between the endpoints s1 = t and t + h only: for s1 -> t + h the
    // denominator vanishes while the numerator does not.
    const auto& top = cn[static_cast<std::size_t>(s_count - 1)];
    tab.orbit_ratio_min = INFINITY;
    tab.orbit_ratio_max = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        const double d = std::abs(top[n] - cn[0][n]);
        if (!(d > 0.0)) continue;
        const double r = len[0][n] / d;
        tab.orbit_ratio_min = std::min(tab.orbit_ratio_min, r);
        tab.orbit_ratio_max = std::max(tab.orbit_ratio_max, r);
        tab.orbit_ratio_available = true;
    }
    if (!tab.orbit_ratio_available) tab.orbit_ratio_min = 0.0;
    return tab;
}

OverlapResult overlap_sum(const PeumFamily& family, double t, double h, int n, const Observable* psi,
                          std::uint64_t budget) {
    if (n < 0) throw DomainError("n must be >= 0");
    const BarInterval bar = bar_interval(family, t, h);
    const MapSlice g = family.slice(t + h);
    std::vector<std::vector<Interval>> L;
    std::uint64_t used = 0;
    OverlapResult res;
    for (int k = 0; k <= n; ++k) {
        std::vector<Interval> pre;
        if (!pullback(g, bar.interval, k, budget, used, pre)) {
            res.complete = false;
            break;
        }
        L.push_back(merge_intervals(std::move(pre)));
        res.components.push_back(L.back().size());
    }
    for (std::size_t a = 0; a < L.size(); ++a)
        for (std::size_t b = a + 1; b < L.size(); ++b) res.sum += intersection_measure(L[a], L[b]);

    double separate = 0.0;
    std::vector<Interval> all;
    for (const auto& lk : L) {
        for (const auto& iv : lk) separate += psi_integral(psi, iv);
        all.insert(all.end(), lk.begin(), lk.end());
    }
    double joint = 0.0;
    for (const auto& iv : merge_intervals(std::move(all))) joint += psi_integral(psi, iv);
    res.defect = std::abs(separate - joint);
    res.bound = (psi ? psi->sup_abs() : 1.0) * res.sum;
    return res;
}

LIntegral integral_over_L(const PeumFamily& family, double t, double h, Interval L, const Observable& phi,
                          const Observable* psi, int m) {
    if (m < 0) throw DomainError("m must be >= 0");
    check_step(family, t, h);
    const MapSlice g = family.slice(t + h);
    LIntegral out;
    for (int k = 0; k <= m; ++k) out.value += integrate_composed(g, L.lo, L.hi, k, phi, psi);
    const double len = L.length();
    if (len > 0.0 && len < 1.0) out.ratio = out.value / (len * std::abs(std::log(len)));
    return out;
}

RIntegralTrace r_integral_monte_carlo(const PeumFamily& family, double t, const Observable& phi, int n_max,
                                      std::uint64_t samples, std::uint64_t seed) {
    if (n_max < 0) throw DomainError("n_max must be >= 0");
    if (samples < 2) throw DomainError("need at least two samples");
    const MapSlice f = family.slice(t);
    const auto coeffs = phi.poly_coefficients();
    const bool fast = f.affine() && coeffs.has_value();
    const std::size_t steps = static_cast<std::size_t>(n_max) + 1;
    constexpr std::uint64_t shard = 4096;
    const std::uint64_t nshards = (samples + shard - 1) / shard;
    std::vector<std::vector<double>> s1(nshards), s2(nshards);
    std::vector<std::uint64_t> rejected(nshards, 0);
    const simd::Kernels& kern = simd::active();

#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t sh = 0; sh < static_cast<std::int64_t>(nshards); ++sh) {
        const std::uint64_t lo = static_cast<std::uint64_t>(sh) * shard;
        const std::size_t len = static_cast<std::size_t>(std::min(shard, samples - lo));
        auto& a1 = s1[static_cast<std::size_t>(sh)];
        auto& a2 = s2[static_cast<std::size_t>(sh)];
        a1.assign(steps, 0.0);
        a2.assign(steps, 0.0);
        if (fast) {
            const std::size_t lanes = (len + 3) & ~std::size_t{3};
            std::vector<double> x(lanes), out(steps * lanes);
            std::vector<std::uint64_t> rng(lanes);
            for (std::size_t i = 0; i < lanes; ++i) {
                auto sd = sample_seed(seed, lo + i);
                x[i] = sd.x0;
                rng[i] = sd.rng;
            }
            simd::AffineOrbit p;
            p.c = f.c();
            p.aL = f.branch(Symbol::L).a0;
            p.bL = f.branch(Symbol::L).a1;
            p.aR = f.branch(Symbol::R).a0;
            p.bR = f.branch(Symbol::R).a1;
            p.phi = coeffs->data();
            p.phi_len = static_cast<int>(coeffs->size());
            p.dither = kDefaultDither;
            p.rL = f.dv(Symbol::L, 0.5 * f.c()) / p.bL;
            p.rR = f.dv(Symbol::R, 0.5 * (1.0 + f.c())) / p.bR;
            kern.affine_r_weighted(p, lanes, x.data(), rng.data(), out.data(), n_max);
            for (std::size_t n = 0; n < steps; ++n) {
                const double* row = out.data() + n * lanes;
                for (std::size_t i = 0; i < len; ++i) {
                    a1[n] += row[i];
                    a2[n] += row[i] * row[i];
                }
            }
        } else {
            std::vector<double> vals(steps);
            for (std::size_t i = 0; i < len; ++i) {
                auto sd = sample_seed(seed, lo + i);
                double x = sd.x0, S = 0.0, R = 0.0, d_prev = 1.0;
                bool bad = false;
                for (std::size_t n = 0; n < steps; ++n) {
                    vals[n] = phi(x) * R;
                    if (n + 1 == steps) break;
                    if (std::abs(x - f.c()) <= kNearCriticalTol) {
                        bad = true;
                        break;
                    }
                    const Symbol s = f.symbol(x);
                    const double d = f.df(s, x);
                    S = (n == 0 ? 0.0 : S / d_prev) + f.d2f(s, x) / d;
                    R += f.dv(s, x) / d - f.v(s, x) / d * S;
                    d_prev = d;
                    x = f.value(s, x) + kDefaultDither * (simd::to_unit(simd::xorshift64(sd.rng)) - 0.5);
                    x = std::fabs(x);
                    if (x > 1.0) x = 2.0 - x;
                }
                if (bad) {
                    ++rejected[static_cast<std::size_t>(sh)];
                    continue;
                }
                for (std::size_t n = 0; n < steps; ++n) {
                    a1[n] += vals[n];
                    a2[n] += vals[n] * vals[n];
                }
            }
        }
    }
    std::uint64_t rej = 0;
    for (auto r : rejected) rej += r;
    const double m = static_cast<double>(samples - rej);
    RIntegralTrace tr;
    tr.samples = samples - rej;
    tr.rejected_fraction = static_cast<double>(rej) / static_cast<double>(samples);
    for (std::size_t n = 0; n < steps; ++n) {
        double t1 = 0.0, t2 = 0.0;
        for (std::uint64_t sh = 0; sh < nshards; ++sh) {
            t1 += s1[sh][n];
            t2 += s2[sh][n];
        }
        // the kept samples estimate the integral over the unrejected set; scale back to [0,1]
        const double mean = t1 / m, var = std::max(t2 / m - mean * mean, 0.0) * m / (m - 1.0);
        tr.mean.push_back(mean * (1.0 - tr.rejected_fraction));
        tr.std_error.push_back(std::sqrt(var / m));
    }
    return tr;
}

double r_integral_quadrature(const PeumFamily& family, double t, const Observable& phi, int n,
                             std::uint64_t lap_budget) {
    if (n < 0) throw DomainError("n must be >= 0");
    const MapSlice f = family.slice(t);
    static constexpr double gx[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                     -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                     0.7966664774136267,  0.9602898564975363};
    static constexpr double gw[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                     0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                     0.2223810344533745, 0.1012285362903763};
    double s = 0.0, comp = 0.0;
    walk_laps(f, 0.0, 1.0, n, lap_budget, [&](const Lap& lap) {
        if (lap.depth != n) return;
        const double mid = 0.5 * (lap.a + lap.b), r = 0.5 * (lap.b - lap.a);
        double acc = 0.0;
        for (int i = 0; i < 8; ++i) {
            ROrbit o = r_orbit(f, mid + r * gx[i], n);
            acc += gw[i] * phi(o.end) * o.r;
        }
        const double v = r * acc, tt = s + v;
        comp += std::abs(s) >= std::abs(v) ? (s - tt) + v : (v - tt) + s;
        s = tt;
    });
    return s + comp;
}

}  // namespace peum
