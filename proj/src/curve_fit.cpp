#include "trackfda/curve.hpp"

#include <string>

#include "trackfda/error.hpp"
#include "trackfda/ingest.hpp"

namespace trackfda {

namespace {
// Reciprocal condition estimate below which an unpenalized system is singular.
constexpr double kMinRcond = 1e-12;
}  // namespace

CurveFitter::CurveFitter(BasisSystem basis, std::vector<double> grid, double ridge)
    : basis_(std::move(basis)), grid_(std::move(grid)) {
    if (grid_.empty()) throw Error(ErrorKind::Shape, "curve fit needs at least one grid point");
    if (!(ridge >= 0.0)) throw Error(ErrorKind::Config, "ridge must be non-negative");
    phi_ = basis_matrix(basis_, grid_);
    Eigen::MatrixXd gram = phi_.transpose() * phi_;
    gram.diagonal().array() += ridge;
    normal_.compute(gram);
    const bool singular = normal_.info() != Eigen::Success || (ridge == 0.0 && normal_.rcond() < kMinRcond);
    if (singular)
        throw Error(ErrorKind::Singular,
                    "normal equations for " + std::to_string(basis_.dimension()) + " basis functions on " +
                        std::to_string(grid_.size()) + " points are rank deficient; use ridge > 0 or fewer basis functions");
}

Eigen::VectorXd CurveFitter::coefficients(std::span<const double> observations) const {
    if (observations.size() != grid_.size())
        throw Error(ErrorKind::Shape, "expected " + std::to_string(grid_.size()) + " observations, got " +
                                          std::to_string(observations.size()));
    const Eigen::Map<const Eigen::VectorXd> x(observations.data(), Eigen::Index(observations.size()));
    const Eigen::VectorXd rhs = phi_.transpose() * x;
    return normal_.solve(rhs);
}

FunctionalCurve CurveFitter::fit(std::span<const double> observations) const {
    return {basis_, coefficients(observations)};
}

Eigen::MatrixXd CurveFitter::fit_columns(const Eigen::MatrixXd& observations) const {
    if (observations.rows() != Eigen::Index(grid_.size()))
        throw Error(ErrorKind::Shape, "matrix has " + std::to_string(observations.rows()) + " rows, grid has " +
                                          std::to_string(grid_.size()) + " points");
    Eigen::MatrixXd out(basis_.dimension(), observations.cols());
    for (Eigen::Index j = 0; j < observations.cols(); ++j) {
        const Eigen::VectorXd column = observations.col(j);
        out.col(j) = coefficients({column.data(), std::size_t(column.size())});
    }
    return out;
}

FunctionalCurve fit_coefficients(const BasisSystem& basis, std::span<const double> grid,
                                 std::span<const double> observations, double ridge) {
    return CurveFitter(basis, {grid.begin(), grid.end()}, ridge).fit(observations);
}

CurveBundle fit_bundle(const BasisSystem& basis, std::span<const double> grid, const DatasetMatrix& matrix,
                       double ridge) {
    if (matrix.values.cols() != Eigen::Index(matrix.storm_ids.size()))
        throw Error(ErrorKind::Shape, "matrix columns do not match its storm ids");
    const CurveFitter fitter(basis, {grid.begin(), grid.end()}, ridge);
    return {basis, fitter.fit_columns(matrix.values), matrix.storm_ids};
}

double eval_curve(const FunctionalCurve& curve, double t) {
    if (curve.coefficients.size() != curve.basis.dimension())
        throw Error(ErrorKind::Shape, "coefficient count does not match the basis dimension");
    return eval_basis(curve.basis, t).dot(curve.coefficients);
}

}  // namespace trackfda
