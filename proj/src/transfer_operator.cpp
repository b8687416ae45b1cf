#include "peum/transfer_operator.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "peum/error.hpp"
#include "peum/fsutil.hpp"
#include "peum/reduce.hpp"

namespace peum {

// ------------------------------------------------------------ DensityGrid

double DensityGrid::mass() const { return v_.empty() ? 0.0 : sum(v_) / static_cast<double>(v_.size()); }

void DensityGrid::normalize() {
    double m = mass();
    if (!(m > 0.0)) throw DomainError("cannot normalize a density with non-positive mass");
    simd::active().scale(v_.data(), v_.size(), 1.0 / m);
}

double DensityGrid::sup() const {
    double s = 0.0;
    for (double x : v_) s = std::max(s, std::abs(x));
    return s;
}

double DensityGrid::total_variation() const {
    double s = 0.0;
    for (std::size_t i = 1; i < v_.size(); ++i) s += std::abs(v_[i] - v_[i - 1]);
    return s;
}

// --------------------------------------------------------------- assembly

namespace {

std::vector<SparseEntry> assemble(const MapSlice& f, std::size_t n, WeightMode mode) {
    const double dn = static_cast<double>(n);
    const double c = f.c();
    std::vector<std::vector<SparseEntry>> per(n);

#pragma omp parallel for schedule(static)
    for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const double x0 = static_cast<double>(i) / dn, x1 = static_cast<double>(i + 1) / dn;
        struct Piece {
            double p, q;
            Symbol s;
        };
        Piece pieces[2];
        int np = 0;
        if (x0 < c && c < x1) {
            pieces[np++] = {x0, c, Symbol::L};
            pieces[np++] = {c, x1, Symbol::R};
        } else {
            pieces[np++] = {x0, x1, x1 <= c ? Symbol::L : Symbol::R};
        }
        auto& out = per[i];
        for (int k = 0; k < np; ++k) {
            const auto [p, q, s] = pieces[k];
            double u = f.value(s, p), w = f.value(s, q);
            const bool increasing = w >= u;
            double lo = std::clamp(std::min(u, w), 0.0, 1.0), hi = std::clamp(std::max(u, w), 0.0, 1.0);
            // y breakpoints and their preimages (monotone in y)
            std::vector<double> ys{lo}, xs{increasing ? p : q};
            for (auto b = static_cast<std::int64_t>(std::floor(lo * dn)) + 1; static_cast<double>(b) < hi * dn; ++b) {
                double y = static_cast<double>(b) / dn;
                if (y <= lo) continue;
                ys.push_back(y);
                auto x = f.inverse(s, y);
                if (!x) throw Error("inverse branch solve failed during Ulam assembly");
                xs.push_back(std::clamp(*x, p, q));
            }
            ys.push_back(hi);
            xs.push_back(increasing ? q : p);
            for (std::size_t m = 0; m + 1 < ys.size(); ++m) {
                double len = std::abs(xs[m + 1] - xs[m]);
                if (len <= 0.0) continue;
                double ymid = 0.5 * (ys[m] + ys[m + 1]);
                auto j = static_cast<std::uint32_t>(std::min<double>(std::floor(ymid * dn), dn - 1.0));
                double val = len * dn;
                if (mode == WeightMode::SignedExtraWeight) val /= f.df(s, 0.5 * (xs[m] + xs[m + 1]));
                out.push_back({static_cast<std::uint32_t>(i), j, val});
            }
        }
    }

    std::vector<SparseEntry> all;
    for (auto& v : per) all.insert(all.end(), v.begin(), v.end());
    std::stable_sort(all.begin(), all.end(), [](const SparseEntry& a, const SparseEntry& b) {
        return a.target != b.target ? a.target < b.target : a.source < b.source;
    });
    std::vector<SparseEntry> merged;
    merged.reserve(all.size());
    for (const auto& e : all) {
        if (!merged.empty() && merged.back().target == e.target && merged.back().source == e.source)
            merged.back().value += e.value;
        else
            merged.push_back(e);
    }
    return merged;
}

}  // namespace

UlamOperator build_ulam(const PeumFamily& family, double t, std::size_t n, WeightMode mode, Assembly assembly) {
    if (n < 2) throw DomainError("Ulam resolution must be at least 2");
    if (n < 4) throw DomainError("Ulam resolution below 4 cannot separate the two branches");
    if (n >= (1ULL << 31)) throw DomainError("Ulam resolution too large");
    MapSlice f = family.slice(t);
    UlamOperator op;
    op.n_ = n;
    op.mode_ = mode;
    op.t_ = t;
    op.hash_ = family.hash();
    op.slice_ = f;
    bool mf = assembly == Assembly::MatrixFree || (assembly == Assembly::Auto && f.affine());
    if (mf && !f.affine()) throw DomainError("matrix-free Ulam application needs affine branches");
    op.matrix_free_ = mf;
    if (mf) {
        const auto& L = f.branch(Symbol::L);
        const auto& R = f.branch(Symbol::R);
        op.affine_ = {n, f.c(), L.a0, L.a1, R.a0, R.a1, 1.0, 1.0};
        if (mode == WeightMode::SignedExtraWeight) {
            op.affine_.wL = 1.0 / L.a1;
            op.affine_.wR = 1.0 / R.a1;
        }
        return op;
    }
    auto ent = assemble(f, n, mode);
    op.row_ptr_.assign(n + 1, 0);
    op.col_.resize(ent.size());
    op.val_.resize(ent.size());
    for (std::size_t k = 0; k < ent.size(); ++k) {
        op.row_ptr_[ent[k].target + 1]++;
        op.col_[k] = ent[k].source;
        op.val_[k] = ent[k].value;
    }
    for (std::size_t r = 0; r < n; ++r) op.row_ptr_[r + 1] += op.row_ptr_[r];
    return op;
}

void UlamOperator::apply(const double* in, double* out, const simd::Kernels& k) const {
    if (matrix_free_) {
        k.affine_ulam_apply(affine_, in, out);
    } else {
        simd::CsrView v{n_, row_ptr_.data(), col_.data(), val_.data()};
        k.csr_apply(v, in, out);
    }
}

DensityGrid UlamOperator::apply(const DensityGrid& d) const {
    if (d.size() != n_) throw DomainError("density resolution does not match the operator");
    DensityGrid out{std::vector<double>(n_)};
    apply(d.data(), out.data());
    return out;
}

DensityGrid UlamOperator::apply_n(const DensityGrid& d, int n) const {
    DensityGrid cur = d;
    for (int i = 0; i < n; ++i) cur = apply(cur);
    return cur;
}

std::vector<SparseEntry> UlamOperator::entries() const {
    if (!matrix_free_) {
        std::vector<SparseEntry> out;
        out.reserve(val_.size());
        for (std::size_t r = 0; r < n_; ++r)
            for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
                out.push_back({col_[k], static_cast<std::uint32_t>(r), val_[k]});
        return out;
    }
    return assemble(*slice_, n_, mode_);
}

// ----------------------------------------------------- stationary density

StationaryResult stationary_density(const UlamOperator& op, double tol, int max_iter, const DensityGrid* warm_start) {
    if (op.mode() != WeightMode::Plain) throw DomainError("stationary density needs the plain operator");
    if (!(tol > 0.0)) throw DomainError("stationary density tolerance must be positive");
    const std::size_t n = op.resolution();
    const auto& k = simd::active();
    DensityGrid d = warm_start ? *warm_start : DensityGrid::uniform(n);
    if (d.size() != n) throw DomainError("warm start resolution does not match the operator");
    d.normalize();
    DensityGrid next{std::vector<double>(n)};
    StationaryResult res;
    std::vector<double> history;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (int it = 1; it <= max_iter; ++it) {
        op.apply(d.data(), next.data(), k);
        double m = sum(next.data(), n, k) * inv_n;
        k.scale(next.data(), n, 1.0 / m);
        double r = l1_diff(next.data(), d.data(), n, k) * inv_n;
        history.push_back(r);
        if (r <= tol) {
            res.density = std::move(next);
            res.residual = r;
            res.iterations = it;
            return res;
        }
        // Stagnation (e.g. a period-two swap of the support) switches to the
        // lazy iteration (x + Lx)/2, which has the same fixed points.
        if (!res.damped && it >= 60 && history[it - 1] > 0.5 * history[it - 31]) res.damped = true;
        if (res.damped) k.average(next.data(), d.data(), n);
        std::swap(d, next);
    }
    std::ostringstream os;
    os << "power iteration did not reach tol " << tol << " within " << max_iter << " iterations (residual "
       << history.back() << ")";
    throw ConvergenceError(os.str());
}

// ----------------------------------------------------------- spectral gap

GapEstimate spectral_gap_estimate(const UlamOperator& op, const DensityGrid& rho, int trials, std::uint64_t seed,
                                  int n_max) {
    if (trials <= 0) throw DomainError("spectral gap estimate needs at least one trial");
    const std::size_t n = op.resolution();
    if (rho.size() != n) throw DomainError("density resolution does not match the operator");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    GapEstimate est;
    double slope_sum = 0.0, icpt_sum = 0.0, resid_sum = 0.0;
    int used = 0;
    const double dn = static_cast<double>(n);
    for (int trial = 0; trial < trials; ++trial) {
        // g = 1_E1/|E1| - 1_E2/|E2| on whole cells
        std::vector<double> g(n, 0.0);
        for (int part = 0; part < 2; ++part) {
            double len = 0.05 + 0.25 * U(rng);
            double a = U(rng) * (1.0 - len);
            auto i0 = static_cast<std::size_t>(a * dn);
            auto i1 = std::min(n, std::max(i0 + 1, static_cast<std::size_t>((a + len) * dn)));
            double w = dn / static_cast<double>(i1 - i0);
            for (std::size_t i = i0; i < i1; ++i) g[i] += part == 0 ? w : -w;
        }
        DensityGrid cur(std::move(g));
        const double e0 = l1_diff(cur.data(), std::vector<double>(n, 0.0).data(), n) / dn;
        std::vector<double> xs, ys;
        for (int k = 1; k <= n_max; ++k) {
            cur = op.apply(cur);
            double e = 0.0;
            for (double v : cur.values()) e += std::abs(v);
            e /= dn;
            if (e <= 1e-13 * e0) break;
            if (k >= 5) {
                xs.push_back(k);
                ys.push_back(std::log(e));
            }
        }
        if (xs.size() < 3) continue;
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            mx += xs[i];
            my += ys[i];
        }
        mx /= xs.size();
        my /= xs.size();
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxx += (xs[i] - mx) * (xs[i] - mx);
            sxy += (xs[i] - mx) * (ys[i] - my);
        }
        double slope = sxy / sxx, icpt = my - slope * mx;
        double rss = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) rss += std::pow(ys[i] - icpt - slope * xs[i], 2);
        est.per_trial.push_back(std::exp(slope));
        slope_sum += slope;
        icpt_sum += icpt;
        resid_sum += std::sqrt(rss / xs.size());
        ++used;
    }
    if (used == 0) {
        // Every trial collapsed to the noise floor before n = 7: decay faster than any fit can resolve.
        est.theta = 0.0;
        est.log_c = 0.0;
        return est;
    }
    est.theta = std::exp(slope_sum / used);
    est.log_c = icpt_sum / used;
    est.fit_residual = resid_sum / used;
    if (!(est.theta < 1.0)) throw ConvergenceError("no spectral gap detected at this resolution");
    return est;
}

double density_at_c(const DensityGrid& rho, double c) {
    const std::size_t n = rho.size();
    if (n == 0) throw DomainError("empty density");
    const double dn = static_cast<double>(n);
    auto cell = [&](double x) {
        return static_cast<std::size_t>(std::clamp(std::floor(x * dn), 0.0, dn - 1.0));
    };
    std::size_t a = cell(c - 0.5 / dn), b = cell(c + 0.5 / dn);
    return 0.5 * (rho[a] + rho[b]);
}

// ------------------------------------------------------------------ cache

namespace {

std::string hex64(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string t_key(double t) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12f", t);
    return buf;
}

}  // namespace

DensityCache::DensityCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
    auto lock = dir_ / ".lock";
    lock_fd_ = ::open(lock.c_str(), O_RDWR | O_CREAT, 0644);
    if (lock_fd_ < 0) throw Error("cannot open cache lock " + lock.string());
    if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
        ::close(lock_fd_);
        lock_fd_ = -1;
        throw Error("cache directory " + dir_.string() + " is locked by another process");
    }
}

DensityCache::~DensityCache() {
    if (lock_fd_ >= 0) {
        ::flock(lock_fd_, LOCK_UN);
        ::close(lock_fd_);
    }
}

std::filesystem::path DensityCache::path_for(std::uint64_t family_hash, double t, std::size_t n) const {
    return dir_ / ("rho_" + hex64(family_hash) + "_" + t_key(t) + "_" + std::to_string(n) + ".csv");
}

std::optional<StationaryResult> DensityCache::load(std::uint64_t family_hash, double t, std::size_t n, double tol) const {
    std::lock_guard<std::mutex> g(mu_);
    auto p = path_for(family_hash, t, n);
    if (!std::filesystem::exists(p)) return std::nullopt;
    std::istringstream is(read_file(p));
    std::string line;
    double cached_tol = INFINITY;
    std::string hash_s, t_s;
    std::size_t cached_n = 0;
    StationaryResult r;
    std::vector<double> v;
    v.reserve(n);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(2, eq - 2), val = line.substr(eq + 1);
            if (key == "family_hash") hash_s = val;
            else if (key == "t") t_s = val;
            else if (key == "N") cached_n = std::stoull(val);
            else if (key == "tol") cached_tol = std::stod(val);
            else if (key == "residual") r.residual = std::stod(val);
            else if (key == "iterations") r.iterations = std::stoi(val);
            else if (key == "damped") r.damped = val == "1";
            continue;
        }
        v.push_back(std::stod(line));
    }
    if (hash_s != hex64(family_hash) || t_s != t_key(t) || cached_n != n || v.size() != n) return std::nullopt;
    if (cached_tol > tol) return std::nullopt;
    r.density = DensityGrid(std::move(v));
    return r;
}

void DensityCache::store(std::uint64_t family_hash, double t, std::size_t n, double tol, const StationaryResult& r) {
    std::lock_guard<std::mutex> g(mu_);
    std::string s;
    s.reserve(n * 24 + 128);
    s += "# family_hash=" + hex64(family_hash) + "\n";
    s += "# t=" + t_key(t) + "\n";
    s += "# N=" + std::to_string(n) + "\n";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", tol);
    s += std::string("# tol=") + buf + "\n";
    std::snprintf(buf, sizeof buf, "%.17g", r.residual);
    s += std::string("# residual=") + buf + "\n";
    s += "# iterations=" + std::to_string(r.iterations) + "\n";
    s += std::string("# damped=") + (r.damped ? "1" : "0") + "\n";
    for (double x : r.density.values()) {
        std::snprintf(buf, sizeof buf, "%.17g\n", x);
        s += buf;
    }
    write_file_atomic(path_for(family_hash, t, n), s);
}

StationaryResult cached_stationary_density(const PeumFamily& family, double t, std::size_t n, double tol,
                                           DensityCache* cache, bool* cache_hit, const DensityGrid* warm_start) {
    if (cache_hit) *cache_hit = false;
    if (cache) {
        if (auto hit = cache->load(family.hash(), t, n, tol)) {
            if (cache_hit) *cache_hit = true;
            return std::move(*hit);
        }
    }
    auto op = build_ulam(family, t, n);
    auto r = stationary_density(op, tol, 20000, warm_start);
    if (cache) cache->store(family.hash(), t, n, tol, r);
    return r;
}

}  // namespace peum
