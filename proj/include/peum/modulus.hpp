#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "peum/family.hpp"
#include "peum/observable.hpp"
#include "peum/shadowing.hpp"
#include "peum/transfer_operator.hpp"

namespace peum {

struct ConstantOptions {
    std::size_t n = 1 << 16;  // Ulam resolution for rho, sigma, Lyapunov
    double tol = 1e-12;
    int K = 80;               // Green-Kubo truncation
};

struct FactorBudget {
    double value = 0.0;
    double error = 0.0;  // estimated absolute error
};

struct ModulusConstant {
    double K = 0.0;
    FactorBudget rho_c, J, sigma, lyapunov;
    double relative_error = 0.0;  // first-order propagation of the factor errors
    bool sigma_zero = false;
    bool J_zero = false;          // transversality fails, K is 0
};

// 2 sqrt(2) rho_t(c) J_t(c) sigma_t(phi) (∫ log|Df_t| dmu_t)^{-1/2}
ModulusConstant theoretical_constant(const PeumFamily& family, double t, const Observable& phi,
                                     const ConstantOptions& opt = {}, DensityCache* cache = nullptr);

double compose_constant(double rho_c, double J, double sigma, double lyapunov);

// h sqrt(|log h| log log |log h|), for 0 < h < e^{-e}.
double scaling_denominator(double h);

struct ScanOptions {
    std::size_t n_min = 1 << 12;
    double cells_per_h = 100.0;     // N >= cells_per_h / h
    std::size_t n_cap = 1 << 22;
    double tol = 1e-13;             // stationary-density tolerance; noise floor is 2 tol
    bool negative_h = false;
};

struct ScanEntry {
    double h = 0.0;
    std::size_t n = 0;
    double delta_gamma = 0.0;
    double lipschitz_ratio = 0.0;  // |ΔΓ| / h
    double scaled_ratio = 0.0;     // |ΔΓ| / scaling_denominator(h)
    double running_max_lip = 0.0;
    double running_max_scaled = 0.0;
    bool trusted = true;           // |ΔΓ| >= noise floor
    bool capped = false;           // N limited by n_cap
};

struct ModulusScan {
    double t = 0.0;
    std::string phi;
    double K = 0.0;
    double noise_floor = 0.0;
    std::vector<ScanEntry> entries;
    std::vector<ScanEntry> negative;  // h -> -h, when requested
};

std::vector<double> h_schedule(double h0, double r, int steps);
std::size_t resolution_for(double h, const ScanOptions& opt);

// K is stored, not computed: pass theoretical_constant(...).K or 0.
ModulusScan modulus_scan(const PeumFamily& family, double t, const Observable& phi, double h0, double r, int steps,
                         double K, const ScanOptions& opt = {}, DensityCache* cache = nullptr);

struct DecompositionAudit {
    double t = 0.0, h = 0.0;
    int n = 0;
    GapModel model = GapModel::Shadow;
    double delta_gamma = 0.0;          // Ulam, matched resolution
    double iterated_difference = 0.0;  // ∫phī(f_{t+h}^n) - ∫phī(f_t^n)
    double r_term = 0.0;               // -h ∫ phī(f_t^n) R_{t,n}
    double a_term = 0.0;               // ∫_{[0,1]\A} phī(f_{t+h}^n)
    double b_term = 0.0;               // ∫_{[0,1]\B} phī(f_t^n)
    double second_order_bound = 0.0;   // h^2 n^2
    double residual = 0.0;             // delta_gamma - (r + a - b)
    double residual_iterated = 0.0;    // iterated_difference - (r + a - b)
    double measure_A = 0.0, measure_B = 0.0;
};

DecompositionAudit decomposition_audit(const PeumFamily& family, double t, double h, const Observable& phi,
                                       std::size_t n_grid = 1 << 18, double tol = 1e-13,
                                       GapModel model = GapModel::Shadow, DensityCache* cache = nullptr);

}  // namespace peum
