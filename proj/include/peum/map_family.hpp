#pragma once

#include <string>
#include <vector>

#include "peum/family.hpp"

namespace peum {

constexpr double kNearCriticalTol = 1e-12;

struct Itinerary {
    std::vector<Symbol> symbols;
    std::string str() const;
    bool operator==(const Itinerary&) const = default;
};

struct CriticalOrbit {
    double t = 0.0;
    std::vector<double> points;                 // c_0 .. c_n
    std::vector<double> cumulative_derivative;  // Df^k(f(c)), k = 0..n
    std::vector<int> near_critical;             // indices j >= 1 with |c_j - c| <= 1e-12
};

struct RecurrenceResult {
    double min_value = 0.0;  // min_{2<=j<=N} j^m |c_j - c|
    int argmin = 2;
    int threshold = -1;      // smallest j0 with j^m |c_j - c| >= 1 for all j0 <= j <= N; -1 if none
};

struct AssumptionReport {
    double t = 0.0;
    double min_abs_derivative = 0.0;
    bool expansion_ok = false;
    double min_distance_to_c = 0.0;  // min over 1 <= j <= n_orbit
    bool periodic = false;           // c_j returns to c
    bool eventually_periodic = false;
    int preperiod = -1, period = -1;
    bool mixing_heuristic = false;
    int mixing_steps = -1;           // steps until a small interval covered the core
    double orbit_density = 0.0;      // fraction of 256 core cells visited by the critical orbit
    bool passes() const { return expansion_ok && !periodic && !eventually_periodic && mixing_heuristic; }
};

std::vector<double> eval_orbit(const PeumFamily& family, double t, double x, int n);
Itinerary itinerary(const PeumFamily& family, double t, double x, int n);

// Side used for Df at orbit points within 1e-12 of c (k >= 1).
CriticalOrbit critical_orbit(const PeumFamily& family, double t, int n, Side near_critical_side = Side::Left);

RecurrenceResult critical_recurrence(const PeumFamily& family, double t, int N, double m);

std::vector<AssumptionReport> check_assumptions(const PeumFamily& family, const std::vector<double>& t_grid,
                                                int n_orbit);

// Df_t^n(x) along the orbit of x; Auto side at each point (throws at c).
double cumulative_derivative(const MapSlice& f, double x, int n);

}  // namespace peum
