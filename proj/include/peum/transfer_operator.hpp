#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <vector>

#include "peum/family.hpp"
#include "peum/simd.hpp"

namespace peum {

enum class WeightMode { Plain, SignedExtraWeight };
enum class Assembly { Auto, MatrixFree, Sparse };

/// Piecewise-constant density on the uniform partition of [0,1] into N cells.
class DensityGrid {
public:
    DensityGrid() = default;
    explicit DensityGrid(std::vector<double> values) : v_(std::move(values)) {}
    static DensityGrid uniform(std::size_t n) { return DensityGrid(std::vector<double>(n, 1.0)); }

    std::size_t size() const { return v_.size(); }
    double operator[](std::size_t i) const { return v_[i]; }
    const std::vector<double>& values() const { return v_; }
    std::vector<double>& values() { return v_; }
    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }

    double mass() const;
    void normalize();
    double sup() const;
    double total_variation() const;  // sum |v_{i+1} - v_i|
    double bv_norm() const { return total_variation() + sup(); }

private:
    std::vector<double> v_;
};

struct SparseEntry {
    std::uint32_t source, target;
    double value;
};

class UlamOperator {
public:
    std::size_t resolution() const { return n_; }
    WeightMode mode() const { return mode_; }
    double t() const { return t_; }
    std::uint64_t family_hash() const { return hash_; }
    bool matrix_free() const { return matrix_free_; }

    void apply(const double* in, double* out, const simd::Kernels& k = simd::active()) const;
    DensityGrid apply(const DensityGrid& d) const;
    DensityGrid apply_n(const DensityGrid& d, int n) const;

    // Explicit entries (i -> j) = |cell_i ∩ f^{-1} cell_j| / |cell_i| (times weight), sorted by (target, source).
    std::vector<SparseEntry> entries() const;

private:
    friend UlamOperator build_ulam(const PeumFamily&, double, std::size_t, WeightMode, Assembly);
    std::size_t n_ = 0;
    WeightMode mode_ = WeightMode::Plain;
    double t_ = 0.0;
    std::uint64_t hash_ = 0;
    bool matrix_free_ = false;
    simd::AffineUlam affine_{};
    std::vector<std::uint32_t> row_ptr_, col_;
    std::vector<double> val_;
    std::optional<MapSlice> slice_;
};

UlamOperator build_ulam(const PeumFamily& family, double t, std::size_t n, WeightMode mode = WeightMode::Plain,
                        Assembly assembly = Assembly::Auto);

struct StationaryResult {
    DensityGrid density;
    double residual = 0.0;  // ||L rho - rho||_1 at the returned iterate
    int iterations = 0;
    bool damped = false;    // switched to x <- (x + Lx)/2 after stagnation
};

StationaryResult stationary_density(const UlamOperator& op, double tol, int max_iter = 20000,
                                    const DensityGrid* warm_start = nullptr);

struct GapEstimate {
    double theta = 0.0;
    double log_c = 0.0;          // fitted intercept (log C)
    double fit_residual = 0.0;   // RMS residual of the log-linear fits
    std::vector<double> per_trial;
};

// Fit of log ||L^n g||_1 over n in [5, n_max] for random zero-mean g.
GapEstimate spectral_gap_estimate(const UlamOperator& op, const DensityGrid& rho, int trials, std::uint64_t seed = 1,
                                  int n_max = 30);

double density_at_c(const DensityGrid& rho, double c);

/// Directory of cached stationary densities, owned by one process via a lock file.
class DensityCache {
public:
    explicit DensityCache(std::filesystem::path dir);
    ~DensityCache();
    DensityCache(const DensityCache&) = delete;
    DensityCache& operator=(const DensityCache&) = delete;

    // Hit only when the entry was computed with a tolerance no looser than tol.
    std::optional<StationaryResult> load(std::uint64_t family_hash, double t, std::size_t n, double tol) const;
    void store(std::uint64_t family_hash, double t, std::size_t n, double tol, const StationaryResult& r);
    std::filesystem::path path_for(std::uint64_t family_hash, double t, std::size_t n) const;
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    int lock_fd_ = -1;
    mutable std::mutex mu_;
};

// Stationary density through an optional cache.
StationaryResult cached_stationary_density(const PeumFamily& family, double t, std::size_t n, double tol,
                                           DensityCache* cache, bool* cache_hit = nullptr,
                                           const DensityGrid* warm_start = nullptr);

}  // namespace peum
