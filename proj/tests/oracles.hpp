#pragma once

// Independent reference implementations used to cross-check the library.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "trackfda/basis.hpp"
#include "trackfda/geo.hpp"

namespace trackfda::oracle {

// Textbook recursive Cox-de Boor on a full knot vector. The last basis
// function is closed on the right so that t == hi evaluates to 1.
inline double cox_de_boor(const std::vector<double>& knots, int i, int order, double t) {
    if (order == 1) {
        const double lo = knots[std::size_t(i)], hi = knots[std::size_t(i) + 1];
        if (lo <= t && t < hi) return 1.0;
        const double end = knots.back();
        if (t == end && hi == end && lo < hi) return 1.0;
        return 0.0;
    }
    double v = 0.0;
    const double d1 = knots[std::size_t(i + order - 1)] - knots[std::size_t(i)];
    const double d2 = knots[std::size_t(i + order)] - knots[std::size_t(i + 1)];
    if (d1 > 0) v += (t - knots[std::size_t(i)]) / d1 * cox_de_boor(knots, i, order - 1, t);
    if (d2 > 0) v += (knots[std::size_t(i + order)] - t) / d2 * cox_de_boor(knots, i + 1, order - 1, t);
    return v;
}

inline Eigen::VectorXd cox_de_boor_all(const BasisSystem& b, double t) {
    Eigen::VectorXd v(b.dimension());
    for (int i = 0; i < b.dimension(); ++i) v(i) = cox_de_boor(b.knots(), i, b.order(), t);
    return v;
}

// Composite trapezoid rule on `panels` equal panels, using the recursion above.
inline Eigen::MatrixXd trapezoid_gram(const BasisSystem& b, int panels) {
    const int K = b.dimension();
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(K, K);
    const double h = (b.hi() - b.lo()) / panels;
    for (int j = 0; j <= panels; ++j) {
        const double t = j == panels ? b.hi() : b.lo() + h * j;
        const Eigen::VectorXd v = b.kind() == BasisKind::BSpline ? cox_de_boor_all(b, t) : eval_basis(b, t);
        const double w = (j == 0 || j == panels) ? 0.5 * h : h;
        g.noalias() += w * v * v.transpose();
    }
    return g;
}

// Spherical law of cosines: r * acos(sin p1 sin p2 + cos p1 cos p2 cos dlambda).
inline double great_circle_km(const GeoPoint& a, const GeoPoint& b) {
    const double d2r = std::numbers::pi / 180.0;
    const double p1 = a.lat * d2r, p2 = b.lat * d2r, dl = (b.lon - a.lon) * d2r;
    const double c = std::sin(p1) * std::sin(p2) + std::cos(p1) * std::cos(p2) * std::cos(dl);
    return kEarthRadiusKm * std::acos(std::clamp(c, -1.0, 1.0));
}

// Minimum-inertia 2-partition by enumerating every labeling with point 0 in
// cluster 0. Returns labels with point 0 labeled 0.
inline std::vector<int> best_two_partition(const Eigen::MatrixXd& pts, double* inertia_out = nullptr) {
    const int n = int(pts.rows());
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_labels;
    for (unsigned mask = 0; mask < (1u << (n - 1)); ++mask) {
        std::vector<int> labels(std::size_t(n), 0);
        for (int i = 1; i < n; ++i) labels[std::size_t(i)] = int((mask >> (i - 1)) & 1u);
        double inertia = 0.0;
        bool empty = false;
        for (int c = 0; c < 2; ++c) {
            Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(pts.cols());
            int count = 0;
            for (int i = 0; i < n; ++i)
                if (labels[std::size_t(i)] == c) {
                    mean += pts.row(i);
                    ++count;
                }
            if (count == 0) {
                empty = true;
                break;
            }
            mean /= count;
            for (int i = 0; i < n; ++i)
                if (labels[std::size_t(i)] == c) inertia += (pts.row(i) - mean).squaredNorm();
        }
        if (!empty && inertia < best) {
            best = inertia;
            best_labels = labels;
        }
    }
    if (inertia_out) *inertia_out = best;
    return best_labels;
}

// Relabels so the cluster containing point 0 is 0, the next new one 1, etc.
inline std::vector<int> canonical_labels(const std::vector<int>& labels) {
    std::vector<int> map(labels.size() + 1, -1), out;
    int next = 0;
    for (int l : labels) {
        if (map[std::size_t(l)] < 0) map[std::size_t(l)] = next++;
        out.push_back(map[std::size_t(l)]);
    }
    return out;
}

}  // namespace trackfda::oracle
