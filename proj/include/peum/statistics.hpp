#pragma once

#include <cstdint>
#include <vector>

#include "peum/family.hpp"
#include "peum/observable.hpp"
#include "peum/transfer_operator.hpp"

namespace peum {

struct DiffusionEstimate {
    double t = 0.0;
    double sigma = 0.0;
    double sigma2 = 0.0;        // truncated a_0 + 2 sum a_k before clamping
    double mean = 0.0;          // ∫ phi dmu_t
    std::vector<double> a;      // a_0..a_K
    int K = 0;
    double theta = 0.0;         // fitted contraction rate used for the tail
    double tail = 0.0;          // estimate of 2 sum_{k>K} |a_k|
    bool clamped = false;       // slightly negative sigma2 set to 0
    std::size_t n = 0;
};

// a_k = ∫ phī · L^k(phī rho) on the Ulam grid.
DiffusionEstimate green_kubo_sigma(const PeumFamily& family, double t, const Observable& phi, int K, std::size_t n,
                                   double tol = 1e-12, DensityCache* cache = nullptr);

struct CltEstimate {
    double variance = 0.0;  // of S_n / sqrt(n)
    double std_error = 0.0;
    double mean = 0.0;      // of S_n / n
    std::uint64_t samples = 0;
};

// Starts are Lebesgue-uniform; the first burn_in iterates are discarded, which
// removes the O(1/n) variance bias of the non-invariant start.
CltEstimate clt_monte_carlo(const PeumFamily& family, double t, const Observable& phi, int n, std::uint64_t samples,
                            std::uint64_t seed, int burn_in = 0);

struct LilTrace {
    double t = 0.0;
    double sigma = 0.0;
    std::vector<double> S;            // S_1..S_{n_max}, S[n-1] = sum_{k=1}^{n} phi(f^k c)
    std::vector<double> scaled;       // |S_n| / sqrt(2 sigma^2 n log log n) for n >= 16, else 0
    std::vector<double> running_max;  // over n >= 16
    static constexpr int kFirst = 16;
};

// phi is used as given (pass a zero-mean observable).
LilTrace lil_trace(const PeumFamily& family, double t, const Observable& phi, int n_max, double sigma);

struct BirkhoffLyapunov {
    double value = 0.0;
    int near_critical = 0;  // orbit points within 1e-12 of c, resolved by side policy
};

BirkhoffLyapunov lyapunov_birkhoff(const PeumFamily& family, double t, int n, Side side_policy = Side::Left);

}  // namespace peum
