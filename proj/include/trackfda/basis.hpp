#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace trackfda {

enum class BasisKind { BSpline, Fourier };

/// A finite basis {phi_1, ..., phi_K} on a closed interval [lo, hi].
///
/// B-spline bases are clamped: the full knot vector repeats each boundary
/// `order` times around the interior knots, so K = interior + order.
/// Fourier bases are orthonormal over one period measured from `lo`:
/// 1/sqrt(T), then sqrt(2/T) sin(j w (t-lo)), sqrt(2/T) cos(j w (t-lo)), j = 1, 2, ...
class BasisSystem {
public:
    /// Empty placeholder (dimension 0); use the factories for a usable basis.
    BasisSystem() = default;

    /// Cubic by default, with uniformly spaced interior knots.
    static BasisSystem bspline(double lo, double hi, int dimension, int order = 4);
    static BasisSystem bspline_with_knots(double lo, double hi, int order, std::vector<double> interior_knots);
    /// `period` <= 0 selects hi - lo.
    static BasisSystem fourier(double lo, double hi, int dimension, double period = 0.0);

    BasisKind kind() const { return kind_; }
    int dimension() const { return dimension_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    int order() const { return order_; }
    double period() const { return period_; }
    const std::vector<double>& interior_knots() const { return interior_; }
    /// Clamped knot vector (B-spline only).
    const std::vector<double>& knots() const { return knots_; }

    /// Points within this distance outside [lo, hi] are clamped onto it.
    static constexpr double kEndpointTolerance = 1e-10;

    friend bool operator==(const BasisSystem&, const BasisSystem&) = default;

private:
    BasisKind kind_ = BasisKind::BSpline;
    int dimension_ = 0;
    double lo_ = 0.0;
    double hi_ = 1.0;
    int order_ = 0;
    double period_ = 0.0;
    std::vector<double> interior_;
    std::vector<double> knots_;
};

/// (phi_1(t), ..., phi_K(t)). Throws a domain error outside the tolerance band.
Eigen::VectorXd eval_basis(const BasisSystem& basis, double t);

/// p x K matrix whose row j is eval_basis(basis, grid[j]).
Eigen::MatrixXd basis_matrix(const BasisSystem& basis, std::span<const double> grid);

/// J = integral of phi(t) phi(t)^T over the domain, by per-span Gauss-Legendre
/// quadrature (exact for B-spline products).
Eigen::MatrixXd gram_matrix(const BasisSystem& basis);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
QuadratureRule gauss_legendre(int points);

}  // namespace trackfda
