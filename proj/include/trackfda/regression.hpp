#pragma once

// Function-on-function regression
//
//     y(s) = alpha(s) + integral beta(s, t) x(t) dt
//
// with alpha(s) = theta(s)^T a and beta(s, t) = theta(s)^T B phi(t) over a
// response basis theta (dimension K_s) and a predictor basis phi (dimension
// K_t). For a predictor curve with coefficients c the integral is exactly
// theta(s)^T B J c, where J is the predictor Gram matrix.
//
// (a, B) are estimated jointly by penalized least squares against the raw
// response samples y_i(s_j):
//
//     sum_i sum_j (y_i(s_j) - theta(s_j)^T (a + B J c_i))^2 + ridge * ||B||_F^2

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "trackfda/basis.hpp"
#include "trackfda/curve.hpp"
#include "trackfda/geo.hpp"

namespace trackfda {

struct DatasetMatrix;
struct TrajectoryWindow;

/// Window layout a model was trained for; zero when unknown.
struct WindowShape {
    std::size_t total_length = 0;
    std::size_t predictor_length = 0;

    friend bool operator==(const WindowShape&, const WindowShape&) = default;
};

struct FoFModel {
    BasisSystem predictor_basis;
    BasisSystem response_basis;
    Eigen::VectorXd alpha;           // K_s
    Eigen::MatrixXd beta;            // K_s x K_t
    Eigen::MatrixXd predictor_gram;  // K_t x K_t
    double ridge = 0.0;
    WindowShape shape;
};

/// Fits FoF models for a fixed pair of bases and a fixed response grid. The
/// basis evaluations and the Gram matrix are computed once and shared by all
/// fits, which makes many small (per-cluster) fits cheap.
class FoFEstimator {
public:
    FoFEstimator(BasisSystem predictor_basis, BasisSystem response_basis, std::vector<double> response_grid,
                 double ridge, WindowShape shape = {});

    const BasisSystem& predictor_basis() const { return predictor_basis_; }
    const BasisSystem& response_basis() const { return response_basis_; }
    const std::vector<double>& response_grid() const { return response_grid_; }
    const Eigen::MatrixXd& gram() const { return gram_; }
    double ridge() const { return ridge_; }

    /// `predictor_coefficients` is K_t x n, `responses` is q x n (q = response
    /// grid length). Throws a singularity error when the system is rank
    /// deficient and ridge == 0.
    FoFModel fit(const Eigen::MatrixXd& predictor_coefficients, const Eigen::MatrixXd& responses) const;

    /// Same, restricted to the listed columns (in the given order).
    FoFModel fit(const Eigen::MatrixXd& predictor_coefficients, const Eigen::MatrixXd& responses,
                 std::span<const std::size_t> columns) const;

private:
    BasisSystem predictor_basis_;
    BasisSystem response_basis_;
    std::vector<double> response_grid_;
    double ridge_;
    WindowShape shape_;
    Eigen::MatrixXd gram_;
    Eigen::MatrixXd theta_;  // q x K_s
};

/// `responses.time_grid` supplies the response sample points.
FoFModel fit_fof(const CurveBundle& predictors, const DatasetMatrix& responses, const BasisSystem& response_basis,
                 double ridge);

/// y_hat(s_j) = theta(s_j)^T (a + B J c) at each grid point.
Eigen::VectorXd predict_fof(const FoFModel& model, const FunctionalCurve& x, std::span<const double> grid);
Eigen::VectorXd predict_fof(const FoFModel& model, const Eigen::VectorXd& predictor_coefficients,
                            std::span<const double> grid);

/// Penalized least-squares objective of the model on training data.
double training_objective(const FoFModel& model, const Eigen::MatrixXd& predictor_coefficients,
                          const Eigen::MatrixXd& responses, std::span<const double> response_grid);

struct TrajectoryForecast {
    std::string storm_id;
    std::vector<GeoPoint> points;
};

/// Projects the window's predictor segments onto each model's predictor basis
/// (ridge `fit_ridge`) and evaluates both models on the response grid.
TrajectoryForecast predict_trajectory(const FoFModel& lat_model, const FoFModel& lon_model,
                                      const TrajectoryWindow& window, double fit_ridge = 0.0);

}  // namespace trackfda
