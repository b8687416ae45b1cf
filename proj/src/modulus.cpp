#include "peum/modulus.hpp"

#include <cmath>

#include "peum/error.hpp"
#include "peum/reduce.hpp"
#include "peum/srb_measure.hpp"
#include "peum/statistics.hpp"
#include "peum/transversality.hpp"

namespace peum {

double compose_constant(double rho_c, double J, double sigma, double lyapunov) {
    if (!(lyapunov > 0.0)) throw DomainError("Lyapunov exponent must be positive");
    return 2.0 * std::sqrt(2.0) * rho_c * J * sigma / std::sqrt(lyapunov);
}

ModulusConstant theoretical_constant(const PeumFamily& family, double t, const Observable& phi,
                                     const ConstantOptions& opt, DensityCache* cache) {
    ModulusConstant mc;
    const auto fine = cached_stationary_density(family, t, opt.n, opt.tol, cache);
    const auto coarse = cached_stationary_density(family, t, opt.n / 2, opt.tol, cache);
    const double c = family.c();
    mc.rho_c.value = density_at_c(fine.density, c);
    mc.rho_c.error = std::abs(mc.rho_c.value - density_at_c(coarse.density, c));

    const auto jl = j_limit(family, t, 1e-14, Side::Left);
    mc.J.value = jl.value;
    mc.J.error = jl.tail_bound;

    const auto gk = green_kubo_sigma(family, t, phi, opt.K, opt.n, opt.tol, cache);
    mc.sigma.value = gk.sigma;
    mc.sigma.error = gk.sigma > 0.0 ? (gk.tail + 10.0 / static_cast<double>(opt.n)) / (2.0 * gk.sigma) : 0.0;

    const MapSlice f = family.slice(t);
    mc.lyapunov.value = lyapunov_of_density(f, fine.density);
    mc.lyapunov.error = std::abs(mc.lyapunov.value - lyapunov_of_density(f, coarse.density));

    mc.sigma_zero = !(gk.sigma > mc.sigma.error);
    mc.J_zero = std::abs(mc.J.value) <= mc.J.error;
    if (mc.sigma_zero || mc.J_zero) return mc;
    mc.K = compose_constant(mc.rho_c.value, mc.J.value, mc.sigma.value, mc.lyapunov.value);
    auto rel = [](const FactorBudget& b) { return b.value != 0.0 ? std::abs(b.error / b.value) : 0.0; };
    mc.relative_error = rel(mc.rho_c) + rel(mc.J) + rel(mc.sigma) + 0.5 * rel(mc.lyapunov);
    return mc;
}

double scaling_denominator(double h) {
    if (!(h > 0.0 && h < std::exp(-std::exp(1.0))))
        throw DomainError("scaling denominator needs 0 < h < e^-e");
    const double L = std::abs(std::log(h));
    return h * std::sqrt(L * std::log(std::log(L)));
}

std::vector<double> h_schedule(double h0, double r, int steps) {
    if (!(h0 > 0.0) || !(r > 0.0 && r < 1.0) || steps < 1) throw DomainError("invalid h schedule");
    std::vector<double> hs;
    for (int j = 0; j < steps; ++j) hs.push_back(h0 * std::pow(r, j));
    return hs;
}

std::size_t resolution_for(double h, const ScanOptions& opt) {
    std::size_t n = opt.n_min;
    const double want = opt.cells_per_h / std::abs(h);
    while (static_cast<double>(n) < want && n < opt.n_cap) n <<= 1;
    return std::min(n, opt.n_cap);
}

namespace {

std::vector<ScanEntry> scan_direction(const PeumFamily& family, double t, const Observable& phi,
                                      const std::vector<double>& hs, double sign, const ScanOptions& opt,
                                      DensityCache* cache, double& floor) {
    std::vector<ScanEntry> out;
    floor = 2.0 * opt.tol;
    std::size_t cur_n = 0;
    StationaryResult base;
    std::vector<double> centered;
    double rm_lip = 0.0, rm_sc = 0.0;
    for (double h0 : hs) {
        ScanEntry e;
        e.h = sign * h0;
        e.n = resolution_for(h0, opt);
        e.capped = static_cast<double>(e.n) < opt.cells_per_h / h0;
        if (e.n != cur_n) {
            base = cached_stationary_density(family, t, e.n, opt.tol, cache, nullptr,
                                             nullptr);
            cur_n = e.n;
            // phi - Gamma_t: differences are unchanged, rounding is not
            const double mean = integrate_against(base.density, phi);
            centered = phi.zero_mean(mean).cell_averages(e.n);
        }
        auto moved = cached_stationary_density(family, t + e.h, e.n, opt.tol, cache, nullptr, &base.density);
        std::vector<double> diff(e.n);
        for (std::size_t i = 0; i < e.n; ++i) diff[i] = moved.density[i] - base.density[i];
        e.delta_gamma = dot(centered, diff) / static_cast<double>(e.n);
        e.lipschitz_ratio = std::abs(e.delta_gamma) / h0;
        e.scaled_ratio = std::abs(e.delta_gamma) / scaling_denominator(h0);
        e.trusted = std::abs(e.delta_gamma) >= floor;
        if (e.trusted) {
            rm_lip = std::max(rm_lip, e.lipschitz_ratio);
            rm_sc = std::max(rm_sc, e.scaled_ratio);
        }
        e.running_max_lip = rm_lip;
        e.running_max_scaled = rm_sc;
        out.push_back(e);
    }
    return out;
}

}  // namespace

ModulusScan modulus_scan(const PeumFamily& family, double t, const Observable& phi, double h0, double r, int steps,
                         double K, const ScanOptions& opt, DensityCache* cache) {
    const auto hs = h_schedule(h0, r, steps);
    for (double h : hs) {
        scaling_denominator(h);
        family.check_parameter(t + h);
        if (opt.negative_h) family.check_parameter(t - h);
    }
    ModulusScan scan;
    scan.t = t;
    scan.phi = phi.describe();
    scan.K = K;
    scan.entries = scan_direction(family, t, phi, hs, 1.0, opt, cache, scan.noise_floor);
    if (opt.negative_h) scan.negative = scan_direction(family, t, phi, hs, -1.0, opt, cache, scan.noise_floor);
    return scan;
}

DecompositionAudit decomposition_audit(const PeumFamily& family, double t, double h, const Observable& phi,
                                       std::size_t n_grid, double tol, GapModel model, DensityCache* cache) {
    if (!(h > 0.0 && h < 1.0)) throw DomainError("audit needs 0 < h < 1");
    DecompositionAudit au;
    au.t = t;
    au.h = h;
    au.model = model;
    au.n = static_cast<int>(std::floor(std::abs(std::log(h))));
    const int n = au.n;

    const auto base = cached_stationary_density(family, t, n_grid, tol, cache);
    const auto moved = cached_stationary_density(family, t + h, n_grid, tol, cache, nullptr, &base.density);
    const Observable pbar = phi.zero_mean(integrate_against(base.density, phi));
    au.delta_gamma = integrate_against(moved.density, pbar) - integrate_against(base.density, pbar);

    au.iterated_difference =
        gamma_iterated(family, t + h, pbar, n).value - gamma_iterated(family, t, pbar, n).value;
    au.r_term = -h * r_integral_quadrature(family, t, pbar, n);

    const auto rep = complement_A(family, t, h, n, 1ULL << 24, model);
    const MapSlice g = family.slice(t + h), f = family.slice(t);
    for (const auto& iv : rep.complement_A.merged) au.a_term += integrate_composed(g, iv.lo, iv.hi, n, pbar);
    for (const auto& iv : rep.complement_B.merged) au.b_term += integrate_composed(f, iv.lo, iv.hi, n, pbar);
    au.measure_A = rep.complement_A.measure;
    au.measure_B = rep.complement_B.measure;
    au.second_order_bound = h * h * n * n;
    const double model_sum = au.r_term + au.a_term - au.b_term;
    au.residual = au.delta_gamma - model_sum;
    au.residual_iterated = au.iterated_difference - model_sum;
    return au;
}

}  // namespace peum
