#include "peum/statistics.hpp"

#include <cmath>

#include "peum/error.hpp"
#include "peum/map_family.hpp"
#include "peum/reduce.hpp"
#include "peum/sampling.hpp"
#include "peum/srb_measure.hpp"

namespace peum {

namespace {

// Cell averages of g by 4-point Gauss-Legendre.
template <class G>
std::vector<double> cell_averages_of(G&& g, std::size_t n) {
    static const double xg[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
    static const double wg[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
    std::vector<double> out(n);
    const double dn = static_cast<double>(n), half = 0.5 / dn;
    for (std::size_t i = 0; i < n; ++i) {
        const double mid = (static_cast<double>(i) + 0.5) / dn;
        double acc = 0.0;
        for (int k = 0; k < 4; ++k) acc += wg[k] * g(mid + half * xg[k]);
        out[i] = 0.5 * acc;
    }
    return out;
}

}  // namespace

DiffusionEstimate green_kubo_sigma(const PeumFamily& family, double t, const Observable& phi, int K, std::size_t n,
                                   double tol, DensityCache* cache) {
    if (K < 1) throw DomainError("Green-Kubo truncation K must be >= 1");
    auto st = cached_stationary_density(family, t, n, tol, cache);
    const DensityGrid& rho = st.density;
    DiffusionEstimate est;
    est.t = t;
    est.K = K;
    est.n = n;
    est.mean = integrate_against(rho, phi);
    if (phi.is_constant()) {
        // phi - mean vanishes identically; skip the roundoff-level correlations
        est.a.assign(static_cast<std::size_t>(K) + 1, 0.0);
        return est;
    }
    const Observable pbar = phi.zero_mean(est.mean);
    const auto pc = pbar.cell_averages(n);
    const double dn = static_cast<double>(n);

    auto sq = cell_averages_of([&](double x) { double v = pbar(x); return v * v; }, n);
    est.a.push_back(dot(rho.values(), sq) / dn);

    auto op = build_ulam(family, t, n);
    std::vector<double> g(n), next(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = pc[i] * rho[i];
    for (int k = 1; k <= K; ++k) {
        op.apply(g.data(), next.data());
        g.swap(next);
        est.a.push_back(dot(pc, g) / dn);
    }
    double s = 0.0;
    for (int k = K; k >= 1; --k) s += est.a[k];
    est.sigma2 = est.a[0] + 2.0 * s;

    try {
        est.theta = spectral_gap_estimate(op, rho, 2, 7).theta;
    } catch (const ConvergenceError&) {
        est.theta = 0.9;
    }
    const double th = std::min(est.theta, 0.99);
    est.tail = 2.0 * std::abs(est.a[K]) * th / (1.0 - th);

    const double allowance = est.tail + 10.0 / dn;
    if (est.sigma2 < 0.0) {
        if (est.sigma2 < -allowance) throw ConvergenceError("negative truncated sigma^2 beyond tail tolerance");
        est.clamped = true;
    }
    est.sigma = std::sqrt(std::max(est.sigma2, 0.0));
    return est;
}

CltEstimate clt_monte_carlo(const PeumFamily& family, double t, const Observable& phi, int n, std::uint64_t samples,
                            std::uint64_t seed, int burn_in) {
    if (n < 1) throw DomainError("n must be >= 1");
    if (samples < 2) throw DomainError("variance needs at least two samples");
    if (burn_in < 0) throw DomainError("burn_in must be >= 0");
    const MapSlice f = family.slice(t);
    auto sums = birkhoff_samples(f, phi, samples, burn_in, burn_in + n, seed);
    const double rn = std::sqrt(static_cast<double>(n));
    for (auto& v : sums) v /= rn;
    auto st = summarize(sums);
    CltEstimate c;
    c.variance = st.variance;
    c.std_error = st.variance_std_error;
    c.mean = st.mean / rn;
    c.samples = samples;
    return c;
}

LilTrace lil_trace(const PeumFamily& family, double t, const Observable& phi, int n_max, double sigma) {
    if (n_max < LilTrace::kFirst) throw DomainError("LIL trace needs n_max >= 16");
    if (!(sigma > 0.0)) throw DomainError("LIL scaling needs sigma > 0");
    const MapSlice f = family.slice(t);
    LilTrace tr;
    tr.t = t;
    tr.sigma = sigma;
    tr.S.reserve(static_cast<std::size_t>(n_max));
    tr.scaled.reserve(static_cast<std::size_t>(n_max));
    tr.running_max.reserve(static_cast<std::size_t>(n_max));
    double x = f.c(), s = 0.0, comp = 0.0, rm = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        x = f(x);
        const double v = phi(x), tt = s + v;
        comp += std::abs(s) >= std::abs(v) ? (s - tt) + v : (v - tt) + s;
        s = tt;
        const double Sn = s + comp;
        tr.S.push_back(Sn);
        double sc = 0.0;
        if (n >= LilTrace::kFirst) {
            const double dn = static_cast<double>(n);
            sc = std::abs(Sn) / std::sqrt(2.0 * sigma * sigma * dn * std::log(std::log(dn)));
            rm = std::max(rm, sc);
        }
        tr.scaled.push_back(sc);
        tr.running_max.push_back(rm);
    }
    return tr;
}

BirkhoffLyapunov lyapunov_birkhoff(const PeumFamily& family, double t, int n, Side side_policy) {
    if (n < 1) throw DomainError("n must be >= 1");
    const MapSlice f = family.slice(t);
    BirkhoffLyapunov out;
    double x = f.c(), s = 0.0;
    for (int j = 0; j < n; ++j) {
        Symbol sym = f.symbol(x);
        if (std::abs(x - f.c()) <= kNearCriticalTol) {
            if (j > 0) ++out.near_critical;
            sym = side_policy == Side::Right ? Symbol::R : Symbol::L;
        }
        s += std::log(std::abs(f.df(sym, x)));
        x = f.value(sym, x);
        x = x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x);
    }
    out.value = s / n;
    return out;
}

}  // namespace peum
