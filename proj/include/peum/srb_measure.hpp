#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "peum/family.hpp"
#include "peum/observable.hpp"
#include "peum/transfer_operator.hpp"

namespace peum {

struct GammaResult {
    double value = 0.0;
    double residual = 0.0;  // stationary-density L1 residual
    int iterations = 0;
    std::size_t n = 0;
};

// sum_i rho_i * integral of phi over cell i
double integrate_against(const DensityGrid& rho, const Observable& phi);

GammaResult gamma(const PeumFamily& family, double t, const Observable& phi, std::size_t n, double tol,
                  DensityCache* cache = nullptr);

struct IteratedOptions {
    std::uint64_t lap_budget = 1ULL << 25;
    std::uint64_t mc_samples = 1ULL << 20;
    std::uint64_t seed = 1;
    bool force_monte_carlo = false;
};

struct IteratedResult {
    double value = 0.0;
    double std_error = 0.0;  // zero for quadrature
    bool monte_carlo = false;
    std::uint64_t laps = 0;
};

// Integral of phi(f^n x) over [0,1]: lap quadrature, or Monte Carlo once the
// lap budget is exceeded.
IteratedResult gamma_iterated(const PeumFamily& family, double t, const Observable& phi, int n,
                              const IteratedOptions& opt = {});

// Lap quadrature for every n = 0..n_max in one pass; throws BudgetError.
std::vector<double> gamma_iterated_all(const PeumFamily& family, double t, const Observable& phi, int n_max,
                                       std::uint64_t lap_budget = 1ULL << 26);

// Integral over [a,b] of phi(f^n x) * psi(x) by lap-aware Gauss-Legendre
// (exact lap formula when psi == nullptr and the map is affine).
double integrate_composed(const MapSlice& f, double a, double b, int n, const Observable& phi,
                          const Observable* psi = nullptr, std::uint64_t lap_budget = 1ULL << 26);

double lyapunov(const PeumFamily& family, double t, std::size_t n, double tol = 1e-12, DensityCache* cache = nullptr);
double lyapunov_of_density(const MapSlice& f, const DensityGrid& rho);

struct GammaPoint {
    double t = 0.0;
    double gamma = 0.0;
    std::size_t n = 0;
    double tol_achieved = 0.0;
    double wall_ms = 0.0;
    std::string status = "ok";
};

std::vector<GammaPoint> gamma_sweep(const PeumFamily& family, const std::vector<double>& t_grid,
                                    const Observable& phi, std::size_t n, double tol, DensityCache* cache = nullptr);

}  // namespace peum
