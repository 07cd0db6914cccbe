#pragma once

// JSON documents for bases, curve bundles, regression and cluster models,
// experiment configurations and reports. Matrices are stored as
// {"rows": r, "cols": c, "data": [row-major values]}.

#include <iosfwd>

#include <json.hpp>

#include "trackfda/basis.hpp"
#include "trackfda/curve.hpp"
#include "trackfda/experiment.hpp"
#include "trackfda/kmeans.hpp"
#include "trackfda/regression.hpp"

namespace trackfda {

using Json = nlohmann::json;

Json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const Json& j);

Json to_json(const BasisSystem& basis);
BasisSystem basis_from_json(const Json& j);

Json to_json(const CurveBundle& bundle);
CurveBundle curve_bundle_from_json(const Json& j);

Json to_json(const FoFModel& model);
FoFModel fof_model_from_json(const Json& j);

Json to_json(const KMeansModel& model);
KMeansModel kmeans_model_from_json(const Json& j);

Json to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const Json& j);

Json to_json(const ClusteredForecaster& forecaster);
ClusteredForecaster forecaster_from_json(const Json& j);

Json to_json(const ExperimentReport& report);

/// Table layout: rows = k_lon, columns = k_lat, kilometres with 2 decimals.
void write_grid_csv(std::ostream& out, const ExperimentReport& report);

}  // namespace trackfda
