#pragma once

#include <optional>
#include <string>
#include <vector>

namespace peum {

/// Lipschitz observable on [0,1].
class Observable {
public:
    enum class Kind { Identity, CenteredHalf, Constant, Poly, Table };

    static Observable identity();
    static Observable centered_half();
    static Observable constant(double k);
    static Observable poly(std::vector<double> coeffs);
    static Observable table(std::vector<double> breakpoints, std::vector<double> values);

    Kind kind() const { return kind_; }
    double operator()(double x) const;
    double primitive(double x) const;  // antiderivative with primitive(0) = 0
    double integral(double a, double b) const { return primitive(b) - primitive(a); }
    double lipschitz() const;
    double sup_abs() const;
    bool is_constant() const;

    // phi - mean, remembering the subtracted mean.
    Observable zero_mean(double mean) const;
    bool zero_mean_adjusted() const { return adjusted_; }
    double stored_mean() const { return offset_; }

    // Ascending coefficients when phi is a polynomial (all kinds but Table).
    std::optional<std::vector<double>> poly_coefficients() const;

    // n * integral of phi over each cell of the uniform n-partition.
    std::vector<double> cell_averages(std::size_t n) const;

    std::string describe() const;

private:
    Kind kind_ = Kind::Identity;
    std::vector<double> c_;            // polynomial coefficients (Poly) or value (Constant)
    std::vector<double> bx_, bv_;      // table
    double offset_ = 0.0;
    bool adjusted_ = false;
};

}  // namespace peum
