#pragma once

#include <vector>

#include "peum/family.hpp"

namespace peum {

// Two sign conventions live side by side:
//   critical series  J_k(c)  =  sum_{j<k} v(f^j c) / Df^j(f c)
//   shadow series    J_k(y)  = -sum_{j<k} v(f^j y) / Df^j(f y)
// The critical series is the transversality functional; the shadow series is
// the one that makes x = y + h J_m(y)/Df(y) hold for shadow partners.

struct TransversalitySeries {
    double t = 0.0;
    std::vector<double> terms;         // k = 0..K-1
    std::vector<double> partial_sums;  // J_0..J_K (J_0 = 0)
    std::vector<double> tail_bounds;   // tail_bound(k), k = 0..K
    double sup_v = 0.0;
    double lambda = 0.0;
};

// Side::Auto throws CriticalHitError when an orbit point f^j c (j >= 1) lies within
// 1e-12 of c; Left/Right pick that branch for v and Df there.
TransversalitySeries j_series(const PeumFamily& family, double t, int K, Side side_policy = Side::Auto);

double j_truncated(const PeumFamily& family, double t, int k, Side side_policy = Side::Auto);

// Shadow-convention J_k(y).
double j_shadow(const PeumFamily& family, double t, double y, int k, Side side_policy = Side::Auto);

// sup over [0,1] of |v_t| (both branches, sampled densely).
double sup_velocity(const PeumFamily& family, double t);

// sup|v| lambda^-k / (1 - 1/lambda)
double tail_bound(double sup_v, double lambda, int k);

struct JLimit {
    double value = 0.0;
    int k_used = 0;
    double tail_bound = 0.0;
};
JLimit j_limit(const PeumFamily& family, double t, double tol, Side side_policy = Side::Auto);

struct JScan {
    std::vector<double> t;
    std::vector<JLimit> values;
    double min_abs = 0.0;
    double argmin = 0.0;
    std::vector<double> flagged;  // t with |J| <= tol
};
JScan j_positivity_scan(const PeumFamily& family, const std::vector<double>& t_grid, double tol,
                        Side side_policy = Side::Auto);

}  // namespace peum
