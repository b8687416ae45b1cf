#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "peum/poly.hpp"

namespace peum {

enum class Symbol : unsigned char { L = 0, R = 1 };
enum class Side { Left, Right, Auto };

inline char to_char(Symbol s) { return s == Symbol::L ? 'L' : 'R'; }

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
    bool contains(double x) const { return lo <= x && x <= hi; }
};

/// One branch of f_t at a fixed parameter: coefficient vectors in x.
struct BranchSlice {
    std::vector<double> f, df, d2f, v, dv;
    double lo = 0.0, hi = 1.0;  // domain of the branch
    bool affine = false;
    double a0 = 0.0, a1 = 0.0;  // f = a0 + a1 x when affine
};

/// The map f_t for one fixed t.
class MapSlice {
public:
    MapSlice(double t, double c, BranchSlice left, BranchSlice right);

    double t() const { return t_; }
    double c() const { return c_; }
    bool affine() const { return br_[0].affine && br_[1].affine; }
    const BranchSlice& branch(Symbol s) const { return br_[static_cast<int>(s)]; }

    Symbol symbol(double x) const { return x <= c_ ? Symbol::L : Symbol::R; }

    double value(Symbol s, double x) const {
        const auto& b = branch(s);
        return b.affine ? b.a0 + b.a1 * x : horner_(b.f, x);
    }
    double operator()(double x) const {
        double y = value(symbol(x), x);
        return y < 0.0 ? 0.0 : (y > 1.0 ? 1.0 : y);
    }
    double df(Symbol s, double x) const { return branch(s).affine ? branch(s).a1 : horner_(branch(s).df, x); }
    double d2f(Symbol s, double x) const { return branch(s).affine ? 0.0 : horner_(branch(s).d2f, x); }
    double v(Symbol s, double x) const { return horner_(branch(s).v, x); }
    double dv(Symbol s, double x) const { return horner_(branch(s).dv, x); }

    // Side::Auto picks by x vs c and throws DomainError at x == c.
    Symbol resolve(Side side, double x) const;

    // Image of the branch domain.
    Interval range(Symbol s) const;
    // Preimage of y on branch s, or nullopt when y is outside the branch range.
    std::optional<double> inverse(Symbol s, double y) const;

private:
    static double horner_(const std::vector<double>& c, double x) {
        double r = 0.0;
        for (std::size_t k = c.size(); k-- > 0;) r = r * x + c[k];
        return r;
    }

    double t_, c_;
    std::array<BranchSlice, 2> br_;
};

class PeumFamily {
public:
    enum class Kind { Tent, PiecewisePoly };

    static PeumFamily tent(double t_lo = 1.4142135623730951, double t_hi = 2.0,
                           std::optional<double> lambda = std::nullopt);
    static PeumFamily piecewise_poly(double c, BivariatePoly left, BivariatePoly right, double lambda,
                                     double t_lo, double t_hi);

    Kind kind() const { return kind_; }
    double c() const { return c_; }
    double lambda() const { return lambda_; }
    double t_lo() const { return t_lo_; }
    double t_hi() const { return t_hi_; }
    const BivariatePoly& left() const { return poly_[0][0]; }
    const BivariatePoly& right() const { return poly_[1][0]; }
    bool affine_in_x() const;
    bool depends_on_t() const;

    bool in_parameter_range(double t) const;
    void check_parameter(double t) const;  // throws DomainError
    MapSlice slice(double t) const;        // checks t

    // Checked pointwise evaluators.
    double map(double t, double x) const;
    double derivative(double t, double x, Side side) const;
    double second_derivative(double t, double x, Side side) const;
    double velocity(double t, double x, Side side) const;
    double velocity_derivative(double t, double x, Side side) const;

    std::string canonical_string() const;
    std::uint64_t hash() const;

private:
    PeumFamily() = default;
    void validate() const;

    Kind kind_ = Kind::Tent;
    double c_ = 0.5, lambda_ = 2.0, t_lo_ = 1.0, t_hi_ = 2.0;
    // per side: f, f_x, f_xx, f_t, f_tx
    std::array<std::array<BivariatePoly, 5>, 2> poly_;
};

std::uint64_t fnv1a64(const std::string& s);

}  // namespace peum
