#include "peum/poly.hpp"

#include <algorithm>
#include <cstddef>

namespace peum {

BivariatePoly::BivariatePoly(std::vector<std::vector<double>> coeffs) : a_(std::move(coeffs)) {}

double horner(const std::vector<double>& c, double x) {
    double r = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) r = r * x + c[k];
    return r;
}

std::vector<double> derivative(const std::vector<double>& c) {
    if (c.size() <= 1) return {0.0};
    std::vector<double> d(c.size() - 1);
    for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = c[k] * static_cast<double>(k);
    return d;
}

double BivariatePoly::value(double t, double x) const {
    double r = 0.0;
    for (std::size_t i = a_.size(); i-- > 0;) r = r * t + horner(a_[i], x);
    return r;
}

BivariatePoly BivariatePoly::d_dx() const {
    std::vector<std::vector<double>> out;
    out.reserve(a_.size());
    for (const auto& row : a_) out.push_back(derivative(row));
    return BivariatePoly(std::move(out));
}

BivariatePoly BivariatePoly::d_dt() const {
    std::vector<std::vector<double>> out;
    for (std::size_t i = 1; i < a_.size(); ++i) {
        std::vector<double> row = a_[i];
        for (double& v : row) v *= static_cast<double>(i);
        out.push_back(std::move(row));
    }
    if (out.empty()) out.push_back({0.0});
    return BivariatePoly(std::move(out));
}

std::vector<double> BivariatePoly::at_t(double t) const {
    std::size_t width = 1;
    for (const auto& row : a_) width = std::max(width, row.size());
    std::vector<double> out(width, 0.0);
    double tp = 1.0;
    for (const auto& row : a_) {
        for (std::size_t j = 0; j < row.size(); ++j) out[j] += row[j] * tp;
        tp *= t;
    }
    return out;
}

int BivariatePoly::degree_x() const {
    int d = 0;
    for (const auto& row : a_)
        for (std::size_t j = 0; j < row.size(); ++j)
            if (row[j] != 0.0) d = std::max(d, static_cast<int>(j));
    return d;
}

bool BivariatePoly::depends_on_t() const {
    for (std::size_t i = 1; i < a_.size(); ++i)
        for (double v : a_[i])
            if (v != 0.0) return true;
    return false;
}

}  // namespace peum
