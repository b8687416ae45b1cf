#include "peum/family.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "peum/error.hpp"

namespace peum {

namespace {

constexpr double kParamSlack = 1e-12;
constexpr double kCoordSlack = 1e-12;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string poly_string(const BivariatePoly& p) {
    std::string s = "[";
    for (std::size_t i = 0; i < p.coeffs().size(); ++i) {
        if (i) s += ",";
        s += "[";
        for (std::size_t j = 0; j < p.coeffs()[i].size(); ++j) {
            if (j) s += ",";
            s += fmt17(p.coeffs()[i][j]);
        }
        s += "]";
    }
    return s + "]";
}

}  // namespace

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

// ---------------------------------------------------------------- MapSlice

MapSlice::MapSlice(double t, double c, BranchSlice left, BranchSlice right)
    : t_(t), c_(c), br_{std::move(left), std::move(right)} {}

Symbol MapSlice::resolve(Side side, double x) const {
    switch (side) {
        case Side::Left: return Symbol::L;
        case Side::Right: return Symbol::R;
        case Side::Auto: break;
    }
    if (x == c_) throw DomainError("side=auto is ambiguous at the critical point");
    return x < c_ ? Symbol::L : Symbol::R;
}

Interval MapSlice::range(Symbol s) const {
    const auto& b = branch(s);
    double u = value(s, b.lo), w = value(s, b.hi);
    return {std::min(u, w), std::max(u, w)};
}

std::optional<double> MapSlice::inverse(Symbol s, double y) const {
    const auto& b = branch(s);
    Interval r = range(s);
    const double slack = 1e-14;
    if (y < r.lo - slack || y > r.hi + slack) return std::nullopt;
    y = std::clamp(y, r.lo, r.hi);
    if (b.affine) return std::clamp((y - b.a0) / b.a1, b.lo, b.hi);

    double p = b.lo, q = b.hi;
    double gp = value(s, p) - y;
    if (gp == 0.0) return p;
    double gq = value(s, q) - y;
    if (gq == 0.0) return q;
    double x = p + (q - p) * (-gp) / (gq - gp);
    for (int it = 0; it < 200; ++it) {
        double g = value(s, x) - y;
        if (g == 0.0) return x;
        if ((g < 0.0) == (gp < 0.0)) {
            p = x;
            gp = g;
        } else {
            q = x;
        }
        double d = df(s, x);
        double nx = x - g / d;
        if (!(nx > p && nx < q)) nx = 0.5 * (p + q);
        if (std::abs(nx - x) <= 1e-16 * std::max(1.0, std::abs(x)) || q - p <= 1e-15) return nx;
        x = nx;
    }
    return x;
}

// -------------------------------------------------------------- PeumFamily

PeumFamily PeumFamily::tent(double t_lo, double t_hi, std::optional<double> lambda) {
    PeumFamily f;
    f.kind_ = Kind::Tent;
    f.c_ = 0.5;
    f.t_lo_ = t_lo;
    f.t_hi_ = t_hi;
    f.lambda_ = lambda.value_or(t_lo);
    BivariatePoly left({{0.0}, {0.0, 1.0}});
    BivariatePoly right({{0.0}, {1.0, -1.0}});
    for (int s = 0; s < 2; ++s) {
        const BivariatePoly& p = s == 0 ? left : right;
        f.poly_[s] = {p, p.d_dx(), p.d_dx().d_dx(), p.d_dt(), p.d_dt().d_dx()};
    }
    f.validate();
    return f;
}

PeumFamily PeumFamily::piecewise_poly(double c, BivariatePoly left, BivariatePoly right, double lambda,
                                      double t_lo, double t_hi) {
    PeumFamily f;
    f.kind_ = Kind::PiecewisePoly;
    f.c_ = c;
    f.t_lo_ = t_lo;
    f.t_hi_ = t_hi;
    f.lambda_ = lambda;
    for (int s = 0; s < 2; ++s) {
        const BivariatePoly& p = s == 0 ? left : right;
        f.poly_[s] = {p, p.d_dx(), p.d_dx().d_dx(), p.d_dt(), p.d_dt().d_dx()};
    }
    f.validate();
    return f;
}

void PeumFamily::validate() const {
    if (!(c_ > 0.0 && c_ < 1.0)) throw ConfigError("critical point must lie in (0,1)");
    if (!(t_lo_ < t_hi_) || !std::isfinite(t_lo_) || !std::isfinite(t_hi_))
        throw ConfigError("t_range must be finite with a < b");
    if (!(lambda_ > 1.0)) throw ConfigError("lambda must exceed 1");
    for (const auto& side : poly_)
        for (const auto& row : side[0].coeffs()) {
            if (row.empty()) throw ConfigError("empty coefficient row");
            for (double v : row)
                if (!std::isfinite(v)) throw ConfigError("non-finite coefficient");
        }
    const int nt = 9, nx = 201;
    for (int i = 0; i < nt; ++i) {
        double t = t_lo_ + (t_hi_ - t_lo_) * i / (nt - 1);
        double jump = std::abs(poly_[0][0].value(t, c_) - poly_[1][0].value(t, c_));
        if (jump > 1e-12) throw ConfigError("branches are discontinuous at c for t=" + fmt17(t));
        for (int s = 0; s < 2; ++s) {
            double lo = s == 0 ? 0.0 : c_, hi = s == 0 ? c_ : 1.0;
            for (int k = 0; k < nx; ++k) {
                double x = lo + (hi - lo) * k / (nx - 1);
                double y = poly_[s][0].value(t, x);
                if (y < -1e-12 || y > 1.0 + 1e-12)
                    throw ConfigError("branch leaves [0,1] at t=" + fmt17(t) + ", x=" + fmt17(x));
                double d = std::abs(poly_[s][1].value(t, x));
                if (d < lambda_ * (1.0 - 1e-12))
                    throw ConfigError("|Df| below lambda at t=" + fmt17(t) + ", x=" + fmt17(x));
            }
        }
    }
}

bool PeumFamily::affine_in_x() const { return poly_[0][0].degree_x() <= 1 && poly_[1][0].degree_x() <= 1; }

bool PeumFamily::depends_on_t() const { return poly_[0][0].depends_on_t() || poly_[1][0].depends_on_t(); }

bool PeumFamily::in_parameter_range(double t) const {
    return t >= t_lo_ - kParamSlack && t <= t_hi_ + kParamSlack;
}

void PeumFamily::check_parameter(double t) const {
    if (!std::isfinite(t) || !in_parameter_range(t))
        throw DomainError("parameter t=" + fmt17(t) + " outside [" + fmt17(t_lo_) + "," + fmt17(t_hi_) + "]");
}

MapSlice PeumFamily::slice(double t) const {
    check_parameter(t);
    std::array<BranchSlice, 2> b;
    for (int s = 0; s < 2; ++s) {
        b[s].f = poly_[s][0].at_t(t);
        b[s].df = poly_[s][1].at_t(t);
        b[s].d2f = poly_[s][2].at_t(t);
        b[s].v = poly_[s][3].at_t(t);
        b[s].dv = poly_[s][4].at_t(t);
        b[s].lo = s == 0 ? 0.0 : c_;
        b[s].hi = s == 0 ? c_ : 1.0;
        b[s].affine = poly_[s][0].degree_x() <= 1;
        if (b[s].affine) {
            b[s].a0 = b[s].f[0];
            b[s].a1 = b[s].f.size() > 1 ? b[s].f[1] : 0.0;
        }
    }
    return MapSlice(t, c_, std::move(b[0]), std::move(b[1]));
}

namespace {
void check_coord(double x) {
    if (!std::isfinite(x) || x < -kCoordSlack || x > 1.0 + kCoordSlack)
        throw DomainError("coordinate x=" + fmt17(x) + " outside [0,1]");
}
}  // namespace

double PeumFamily::map(double t, double x) const {
    check_parameter(t);
    check_coord(x);
    int s = x <= c_ ? 0 : 1;
    return std::clamp(poly_[s][0].value(t, x), 0.0, 1.0);
}

namespace {
int side_index(Side side, double x, double c) {
    if (side == Side::Left) return 0;
    if (side == Side::Right) return 1;
    if (x == c) throw DomainError("side=auto is ambiguous at the critical point");
    return x < c ? 0 : 1;
}
}  // namespace

double PeumFamily::derivative(double t, double x, Side side) const {
    check_parameter(t);
    check_coord(x);
    return poly_[side_index(side, x, c_)][1].value(t, x);
}

double PeumFamily::second_derivative(double t, double x, Side side) const {
    check_parameter(t);
    check_coord(x);
    return poly_[side_index(side, x, c_)][2].value(t, x);
}

double PeumFamily::velocity(double t, double x, Side side) const {
    check_parameter(t);
    check_coord(x);
    return poly_[side_index(side, x, c_)][3].value(t, x);
}

double PeumFamily::velocity_derivative(double t, double x, Side side) const {
    check_parameter(t);
    check_coord(x);
    return poly_[side_index(side, x, c_)][4].value(t, x);
}

std::string PeumFamily::canonical_string() const {
    std::ostringstream os;
    os << (kind_ == Kind::Tent ? "tent" : "piecewise_poly") << ";c=" << fmt17(c_) << ";lambda=" << fmt17(lambda_)
       << ";t_range=" << fmt17(t_lo_) << "," << fmt17(t_hi_) << ";left=" << poly_string(poly_[0][0])
       << ";right=" << poly_string(poly_[1][0]);
    return os.str();
}

std::uint64_t PeumFamily::hash() const { return fnv1a64(canonical_string()); }

}  // namespace peum
