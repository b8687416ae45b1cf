#include "peum/observable.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "peum/error.hpp"
#include "peum/poly.hpp"

namespace peum {

Observable Observable::identity() {
    Observable o;
    o.kind_ = Kind::Identity;
    o.c_ = {0.0, 1.0};
    return o;
}

Observable Observable::centered_half() {
    Observable o;
    o.kind_ = Kind::CenteredHalf;
    o.c_ = {-0.5, 1.0};
    return o;
}

Observable Observable::constant(double k) {
    Observable o;
    o.kind_ = Kind::Constant;
    o.c_ = {k};
    return o;
}

Observable Observable::poly(std::vector<double> coeffs) {
    if (coeffs.empty()) throw ConfigError("polynomial observable needs coefficients");
    Observable o;
    o.kind_ = Kind::Poly;
    o.c_ = std::move(coeffs);
    return o;
}

Observable Observable::table(std::vector<double> breakpoints, std::vector<double> values) {
    if (breakpoints.size() < 2 || breakpoints.size() != values.size())
        throw ConfigError("table observable needs matching breakpoints and values (at least 2)");
    if (breakpoints.front() != 0.0 || breakpoints.back() != 1.0)
        throw ConfigError("table breakpoints must start at 0 and end at 1");
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
        if (!(breakpoints[i] > breakpoints[i - 1])) throw ConfigError("table breakpoints must increase strictly");
    Observable o;
    o.kind_ = Kind::Table;
    o.bx_ = std::move(breakpoints);
    o.bv_ = std::move(values);
    return o;
}

double Observable::operator()(double x) const {
    if (kind_ != Kind::Table) return horner(c_, x) - offset_;
    x = std::clamp(x, 0.0, 1.0);
    auto it = std::upper_bound(bx_.begin(), bx_.end(), x);
    std::size_t k = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - bx_.begin(), 1), bx_.size() - 1);
    double u = (x - bx_[k - 1]) / (bx_[k] - bx_[k - 1]);
    return bv_[k - 1] + u * (bv_[k] - bv_[k - 1]) - offset_;
}

double Observable::primitive(double x) const {
    if (kind_ != Kind::Table) {
        double r = 0.0;
        for (std::size_t k = c_.size(); k-- > 0;) r = (r + c_[k] / static_cast<double>(k + 1)) * x;
        return r - offset_ * x;
    }
    double acc = 0.0;
    for (std::size_t k = 1; k < bx_.size(); ++k) {
        double a = bx_[k - 1], b = bx_[k];
        double slope = (bv_[k] - bv_[k - 1]) / (b - a);
        if (x >= b) {
            acc += 0.5 * (bv_[k - 1] + bv_[k]) * (b - a);
        } else {
            double d = std::max(x - a, 0.0);
            acc += bv_[k - 1] * d + 0.5 * slope * d * d;
            break;
        }
    }
    return acc - offset_ * x;
}

double Observable::lipschitz() const {
    if (kind_ == Kind::Table) {
        double l = 0.0;
        for (std::size_t k = 1; k < bx_.size(); ++k)
            l = std::max(l, std::abs(bv_[k] - bv_[k - 1]) / (bx_[k] - bx_[k - 1]));
        return l;
    }
    // sup |p'| on [0,1] bounded by the sum of |k c_k|
    double l = 0.0;
    for (std::size_t k = 1; k < c_.size(); ++k) l += std::abs(c_[k]) * static_cast<double>(k);
    return l;
}

double Observable::sup_abs() const {
    if (kind_ == Kind::Table) {
        double s = 0.0;
        for (double v : bv_) s = std::max(s, std::abs(v - offset_));
        return s;
    }
    double s = 0.0;
    for (int k = 0; k <= 4096; ++k) s = std::max(s, std::abs((*this)(k / 4096.0)));
    return s;
}

bool Observable::is_constant() const {
    if (kind_ == Kind::Table) {
        for (double v : bv_)
            if (v != bv_.front()) return false;
        return true;
    }
    for (std::size_t k = 1; k < c_.size(); ++k)
        if (c_[k] != 0.0) return false;
    return true;
}

Observable Observable::zero_mean(double mean) const {
    Observable o = *this;
    o.offset_ += mean;
    o.adjusted_ = true;
    return o;
}

std::optional<std::vector<double>> Observable::poly_coefficients() const {
    if (kind_ == Kind::Table) return std::nullopt;
    std::vector<double> c = c_;
    c[0] -= offset_;
    return c;
}

std::vector<double> Observable::cell_averages(std::size_t n) const {
    std::vector<double> out(n);
    const double dn = static_cast<double>(n);
    if (kind_ != Kind::Table && c_.size() <= 8) {
        // 4-point Gauss-Legendre on each cell: exact for degree <= 7 and free of
        // the cancellation in primitive differences on fine grids.
        static const double xg[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
        static const double wg[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
        for (std::size_t i = 0; i < n; ++i) {
            double mid = (static_cast<double>(i) + 0.5) / dn, half = 0.5 / dn;
            double acc = 0.0;
            for (int k = 0; k < 4; ++k) acc += wg[k] * (*this)(mid + half * xg[k]);
            out[i] = 0.5 * acc;
        }
        return out;
    }
    double prev = primitive(0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double cur = primitive(static_cast<double>(i + 1) / dn);
        out[i] = (cur - prev) * dn;
        prev = cur;
    }
    return out;
}

std::string Observable::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::Identity: os << "x"; break;
        case Kind::CenteredHalf: os << "x-1/2"; break;
        case Kind::Constant: os << "constant(" << c_[0] << ")"; break;
        case Kind::Poly: os << "poly(" << c_.size() << " coefficients)"; break;
        case Kind::Table: os << "table(" << bx_.size() << " breakpoints)"; break;
    }
    if (adjusted_) os << " - " << offset_;
    return os.str();
}

}  // namespace peum
