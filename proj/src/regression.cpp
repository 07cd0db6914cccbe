#include "trackfda/regression.hpp"

#include <string>

#include "trackfda/error.hpp"
#include "trackfda/ingest.hpp"

namespace trackfda {

namespace {

constexpr double kMinRcond = 1e-12;

// Kronecker product G (x) H.
Eigen::MatrixXd kron(const Eigen::MatrixXd& G, const Eigen::MatrixXd& H) {
    Eigen::MatrixXd out(G.rows() * H.rows(), G.cols() * H.cols());
    for (Eigen::Index i = 0; i < G.rows(); ++i)
        for (Eigen::Index j = 0; j < G.cols(); ++j)
            out.block(i * H.rows(), j * H.cols(), H.rows(), H.cols()) = G(i, j) * H;
    return out;
}

void check_model_basis(const FoFModel& model, const BasisSystem& basis) {
    if (!(basis == model.predictor_basis))
        throw Error(ErrorKind::Shape, "predictor curve basis does not match the model's predictor basis");
}

}  // namespace

FoFEstimator::FoFEstimator(BasisSystem predictor_basis, BasisSystem response_basis,
                           std::vector<double> response_grid, double ridge, WindowShape shape)
    : predictor_basis_(std::move(predictor_basis)),
      response_basis_(std::move(response_basis)),
      response_grid_(std::move(response_grid)),
      ridge_(ridge),
      shape_(shape) {
    if (!(ridge_ >= 0.0)) throw Error(ErrorKind::Config, "regression ridge must be non-negative");
    if (response_grid_.empty()) throw Error(ErrorKind::Shape, "empty response grid");
    gram_ = gram_matrix(predictor_basis_);
    theta_ = basis_matrix(response_basis_, response_grid_);
}

FoFModel FoFEstimator::fit(const Eigen::MatrixXd& predictor_coefficients, const Eigen::MatrixXd& responses) const {
    const Eigen::Index Kt = predictor_basis_.dimension();
    const Eigen::Index Ks = response_basis_.dimension();
    const Eigen::Index q = Eigen::Index(response_grid_.size());
    const Eigen::Index n = predictor_coefficients.cols();
    if (predictor_coefficients.rows() != Kt)
        throw Error(ErrorKind::Shape, "predictor coefficients have " + std::to_string(predictor_coefficients.rows()) +
                                          " rows, basis dimension is " + std::to_string(Kt));
    if (responses.rows() != q || responses.cols() != n)
        throw Error(ErrorKind::Shape, "responses must be " + std::to_string(q) + " x " + std::to_string(n));
    if (n < 1) throw Error(ErrorKind::Shape, "no training curves");

    // Responses ~ Theta M W^T with M = [a | B] and W = [1 | (J C)^T].
    Eigen::MatrixXd W(n, 1 + Kt);
    W.col(0).setOnes();
    W.rightCols(Kt) = (gram_ * predictor_coefficients).transpose();

    const Eigen::MatrixXd normal_w = W.transpose() * W;
    const Eigen::MatrixXd normal_theta = theta_.transpose() * theta_;
    Eigen::MatrixXd system = kron(normal_w, normal_theta);
    system.diagonal().tail(Ks * Kt).array() += ridge_;
    const Eigen::MatrixXd rhs_matrix = theta_.transpose() * responses * W;  // K_s x (1 + K_t)
    const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(rhs_matrix.data(), rhs_matrix.size());

    Eigen::LDLT<Eigen::MatrixXd> ldlt(system);
    const double min_rcond = ridge_ == 0.0 ? kMinRcond : 0.0;
    if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > min_rcond))
        throw Error(ErrorKind::Singular,
                    "function-on-function design with " + std::to_string(n) +
                        " curves is rank deficient; use a positive ridge (lambda_B > 0)");
    const Eigen::VectorXd solution = ldlt.solve(rhs);
    if (!solution.allFinite()) throw Error(ErrorKind::Singular, "non-finite regression coefficients");

    const Eigen::Map<const Eigen::MatrixXd> M(solution.data(), Ks, 1 + Kt);
    FoFModel model{predictor_basis_, response_basis_, M.col(0), M.rightCols(Kt), gram_, ridge_, shape_};
    return model;
}

FoFModel FoFEstimator::fit(const Eigen::MatrixXd& predictor_coefficients, const Eigen::MatrixXd& responses,
                           std::span<const std::size_t> columns) const {
    Eigen::MatrixXd c(predictor_coefficients.rows(), Eigen::Index(columns.size()));
    Eigen::MatrixXd y(responses.rows(), Eigen::Index(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        const auto col = Eigen::Index(columns[j]);
        if (col >= predictor_coefficients.cols() || col >= responses.cols())
            throw Error(ErrorKind::Shape, "column index out of range");
        c.col(Eigen::Index(j)) = predictor_coefficients.col(col);
        y.col(Eigen::Index(j)) = responses.col(col);
    }
    return fit(c, y);
}

FoFModel fit_fof(const CurveBundle& predictors, const DatasetMatrix& responses, const BasisSystem& response_basis,
                 double ridge) {
    if (predictors.size() != responses.values.cols())
        throw Error(ErrorKind::Shape, "predictor and response curve counts differ");
    const FoFEstimator estimator(predictors.basis, response_basis, responses.time_grid, ridge);
    return estimator.fit(predictors.coefficients, responses.values);
}

Eigen::VectorXd predict_fof(const FoFModel& model, const Eigen::VectorXd& predictor_coefficients,
                            std::span<const double> grid) {
    if (predictor_coefficients.size() != model.predictor_basis.dimension())
        throw Error(ErrorKind::Shape, "predictor coefficient count does not match the model");
    const Eigen::VectorXd response_coefs = model.alpha + model.beta * (model.predictor_gram * predictor_coefficients);
    return basis_matrix(model.response_basis, grid) * response_coefs;
}

Eigen::VectorXd predict_fof(const FoFModel& model, const FunctionalCurve& x, std::span<const double> grid) {
    check_model_basis(model, x.basis);
    return predict_fof(model, x.coefficients, grid);
}

double training_objective(const FoFModel& model, const Eigen::MatrixXd& predictor_coefficients,
                          const Eigen::MatrixXd& responses, std::span<const double> response_grid) {
    const Eigen::MatrixXd theta = basis_matrix(model.response_basis, response_grid);
    const Eigen::MatrixXd fitted =
        theta * ((model.beta * model.predictor_gram * predictor_coefficients).colwise() + model.alpha);
    return (responses - fitted).squaredNorm() + model.ridge * model.beta.squaredNorm();
}

TrajectoryForecast predict_trajectory(const FoFModel& lat_model, const FoFModel& lon_model,
                                      const TrajectoryWindow& window, double fit_ridge) {
    const WindowShape shape{window.total_length(), window.predictor_length};
    for (const FoFModel* m : {&lat_model, &lon_model})
        if (m->shape != WindowShape{} && m->shape != shape)
            throw Error(ErrorKind::Shape, "window " + window.storm_id + " is " + std::to_string(shape.total_length) +
                                              "/" + std::to_string(shape.predictor_length) +
                                              " points but the model was trained on " +
                                              std::to_string(m->shape.total_length) + "/" +
                                              std::to_string(m->shape.predictor_length));
    const auto pgrid = predictor_grid(shape.total_length, shape.predictor_length);
    const auto rgrid = response_grid(shape.total_length, shape.predictor_length);
    const std::span<const double> lat_x(window.lat.data(), shape.predictor_length);
    const std::span<const double> lon_x(window.lon.data(), shape.predictor_length);

    const auto lat_curve = CurveFitter(lat_model.predictor_basis, pgrid, fit_ridge).fit(lat_x);
    const CurveFitter lon_fitter(lon_model.predictor_basis, pgrid, fit_ridge);
    const auto lon_curve = lon_fitter.fit(lon_x);
    const Eigen::VectorXd lat = predict_fof(lat_model, lat_curve, rgrid);
    const Eigen::VectorXd lon = predict_fof(lon_model, lon_curve, rgrid);

    TrajectoryForecast out{window.storm_id, {}};
    out.points.reserve(rgrid.size());
    for (Eigen::Index j = 0; j < lat.size(); ++j) out.points.push_back({lat(j), lon(j)});
    return out;
}

}  // namespace trackfda
