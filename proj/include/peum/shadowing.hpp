#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "peum/family.hpp"
#include "peum/observable.hpp"

namespace peum {

/// Interval with orientation: runs from `from` to `to` (either order).
struct OrientedInterval {
    double from = 0.0, to = 0.0;
    Interval hull() const { return {std::min(from, to), std::max(from, to)}; }
    double length() const { return std::abs(to - from); }
};

struct BarInterval {
    Interval interval;
    double J = 0.0;
    bool flagged = false;  // J <= 0: orientation swapped or degenerate
};

// [c - h J, c + h J] with J the converged critical series at t.
BarInterval bar_interval(const PeumFamily& family, double t, double h);

// First-order gap intervals, O(h^2) dropped, with the critical-series J_k(c) at t:
//   I_k = [c + h J_k / Df_L(c), c]  if J_k <= 0,   [c, c - h J_k / Df_R(c)]  if J_k > 0
//   Ĩ_k = [c - h J_k / Df_L(c), c]  if J_k > 0,    [c, c + h J_k / Df_R(c)]  if J_k <= 0
OrientedInterval interval_I_k(const PeumFamily& family, double t, double h, int k);
OrientedInterval interval_I_tilde_k(const PeumFamily& family, double t, double h, int k);

enum class GapModel {
    Printed,  // one-sided intervals above
    Shadow,   // two-sided first-order gap of the shadowing condition, attached to A or B by the sign of J_k Df_L(c)
};

struct Component {
    double lo = 0.0, hi = 0.0;
    int generation = 0;  // number of pullback steps
};

struct ComplementSet {
    std::vector<Component> components;  // sorted by (lo, generation)
    std::vector<Interval> merged;       // disjoint union
    double measure = 0.0;
    bool complete = true;               // false if the budget cut the enumeration
};

struct ShadowReport {
    double t = 0.0, h = 0.0;
    int n = 0;
    GapModel model = GapModel::Printed;
    std::vector<OrientedInterval> I, I_tilde;  // k = 0..n
    BarInterval bar;
    ComplementSet complement_A;  // [0,1] \ A_{h,n}: pullbacks under f_{t+h}
    ComplementSet complement_B;  // [0,1] \ B_{h,n}: pullbacks under f_t
};

// Preimages f^{-k}(I) by inverse-branch enumeration; false if the budget ran out.
bool pullback(const MapSlice& f, Interval I, int k, std::uint64_t budget, std::uint64_t& used,
              std::vector<Interval>& out);

std::vector<Interval> merge_intervals(std::vector<Interval> v);
double union_measure(const std::vector<Interval>& merged);

ShadowReport complement_A(const PeumFamily& family, double t, double h, int n, std::uint64_t budget = 1ULL << 24,
                          GapModel model = GapModel::Printed);

struct ShadowPartner {
    double y = 0.0;
    std::vector<Symbol> itinerary;  // of x under f_{t+h}, length n
    bool itinerary_match = false;   // of y under f_t
    double endpoint_error = 0.0;    // |f_t^n(y) - f_{t+h}^n(x)|
    double dx_dy = 1.0;             // Df_t^n(y) / Df_{t+h}^n(x)
};

// y_n(x) by pulling f_{t+h}^n(x) back through the f_t branches of x's itinerary;
// nullopt when x is not shadowable.
std::optional<ShadowPartner> shadow_partner(const PeumFamily& family, double t, double h, double x, int n);

// R_{t,n}(y); throws CriticalHitError when the orbit passes within 1e-12 of c.
double r_function(const PeumFamily& family, double t, double y, int n);

struct ReturnTimes {
    int n1 = 0, n2 = 0;
    double s_at_n1 = 0.0;  // grid parameter that produced the return
    Interval hat_interval;  // f_{t+h}^{n1-1}(Ī_h)
    int s_grid_size = 0;    // the s-quantifier is checked on this grid only
};

ReturnTimes return_times(const PeumFamily& family, double t, double h, int s_grid_size = 33);

// Forward image of an interval under f (an interval, since f is continuous).
Interval forward_image(const MapSlice& f, Interval I);

struct DistortionTable {
    std::vector<double> s;
    int n_max = 0;
    double ratio_min = 1.0, ratio_max = 1.0;                 // |f_s1^n Ī| / |f_s2^n Ī|
    double orbit_ratio_min = 0.0, orbit_ratio_max = 0.0;     // |f_t^n Ī| / |c_n(t+h) - c_n(t)|
    bool orbit_ratio_available = false;
};

DistortionTable distortion_ratios(const PeumFamily& family, double t, double h, int n_max, int s_count = 9);

struct OverlapResult {
    double sum = 0.0;     // sum_{k1<k2<=n} |L_k1 ∩ L_k2|
    double defect = 0.0;  // |sum_k ∫_{L_k} psi - ∫_{∪ L_k} psi|
    double bound = 0.0;   // sup|psi| * sum
    bool complete = true;
    std::vector<std::size_t> components;  // per generation
};

OverlapResult overlap_sum(const PeumFamily& family, double t, double h, int n, const Observable* psi = nullptr,
                          std::uint64_t budget = 1ULL << 24);

struct LIntegral {
    double value = 0.0;
    double ratio = 0.0;  // value / (|L| |log |L||)
};

// sum_{k=0}^{m} ∫_L phi(f_{t+h}^k x) psi(x) dx (psi == nullptr means psi = 1).
LIntegral integral_over_L(const PeumFamily& family, double t, double h, Interval L, const Observable& phi,
                          const Observable* psi, int m);

struct RIntegralTrace {
    std::vector<double> mean;       // n = 0..n_max
    std::vector<double> std_error;
    double rejected_fraction = 0.0;
    std::uint64_t samples = 0;
};

// Monte Carlo over Lebesgue-uniform y of phi(f_t^n y) R_{t,n}(y), n = 0..n_max.
RIntegralTrace r_integral_monte_carlo(const PeumFamily& family, double t, const Observable& phi, int n_max,
                                      std::uint64_t samples, std::uint64_t seed);

// ∫_0^1 phi(f_t^n y) R_{t,n}(y) dy by Gauss-Legendre on the laps of f_t^n.
double r_integral_quadrature(const PeumFamily& family, double t, const Observable& phi, int n,
                             std::uint64_t lap_budget = 1ULL << 24);

}  // namespace peum
