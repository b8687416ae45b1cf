#pragma once

#include <vector>

namespace peum {

/// p(t, x) = sum_i sum_j a[i][j] t^i x^j
class BivariatePoly {
public:
    BivariatePoly() = default;
    explicit BivariatePoly(std::vector<std::vector<double>> coeffs);

    double value(double t, double x) const;
    BivariatePoly d_dx() const;
    BivariatePoly d_dt() const;

    // Coefficients in x (ascending) after fixing t.
    std::vector<double> at_t(double t) const;

    int degree_x() const;
    bool depends_on_t() const;
    const std::vector<std::vector<double>>& coeffs() const { return a_; }

private:
    std::vector<std::vector<double>> a_;
};

double horner(const std::vector<double>& c, double x);
std::vector<double> derivative(const std::vector<double>& c);

}  // namespace peum
