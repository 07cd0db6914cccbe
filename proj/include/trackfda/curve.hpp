#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "trackfda/basis.hpp"

namespace trackfda {

struct DatasetMatrix;

/// x(t) = sum_k c_k phi_k(t).
struct FunctionalCurve {
    BasisSystem basis;
    Eigen::VectorXd coefficients;
};

/// Many curves over one basis, one coefficient column per curve.
struct CurveBundle {
    BasisSystem basis;
    Eigen::MatrixXd coefficients;  // K x n
    std::vector<std::string> ids;

    Eigen::Index size() const { return coefficients.cols(); }
    FunctionalCurve curve(Eigen::Index i) const { return {basis, coefficients.col(i)}; }
};

/// Least-squares projection of sampled series onto a basis.
///
/// Factors (Phi^T Phi + ridge I) once for a fixed grid and solves each series
/// against that factorization, so single and batched fits are bit-identical.
class CurveFitter {
public:
    /// Throws a singularity error if ridge == 0 and Phi lacks full column rank.
    CurveFitter(BasisSystem basis, std::vector<double> grid, double ridge = 0.0);

    const BasisSystem& basis() const { return basis_; }
    const std::vector<double>& grid() const { return grid_; }
    const Eigen::MatrixXd& design() const { return phi_; }

    Eigen::VectorXd coefficients(std::span<const double> observations) const;
    FunctionalCurve fit(std::span<const double> observations) const;
    /// Fits each column of a p x n matrix.
    Eigen::MatrixXd fit_columns(const Eigen::MatrixXd& observations) const;

private:
    BasisSystem basis_;
    std::vector<double> grid_;
    Eigen::MatrixXd phi_;
    Eigen::LDLT<Eigen::MatrixXd> normal_;
};

FunctionalCurve fit_coefficients(const BasisSystem& basis, std::span<const double> grid,
                                 std::span<const double> observations, double ridge = 0.0);

/// Columnwise fit of a dataset matrix whose rows are sampled at `grid`.
CurveBundle fit_bundle(const BasisSystem& basis, std::span<const double> grid, const DatasetMatrix& matrix,
                       double ridge = 0.0);

double eval_curve(const FunctionalCurve& curve, double t);

}  // namespace trackfda
