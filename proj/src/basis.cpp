#include "trackfda/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "trackfda/error.hpp"

namespace trackfda {

namespace {

void check_domain(double lo, double hi) {
    if (!(std::isfinite(lo) && std::isfinite(hi) && hi > lo))
        throw Error(ErrorKind::Config, "basis domain requires hi > lo");
}

double clamp_to_domain(const BasisSystem& basis, double t) {
    const double tol = BasisSystem::kEndpointTolerance;
    if (!(t >= basis.lo() - tol && t <= basis.hi() + tol))
        throw Error(ErrorKind::Domain, "t = " + std::to_string(t) + " outside [" + std::to_string(basis.lo()) +
                                           ", " + std::to_string(basis.hi()) + "]");
    return std::clamp(t, basis.lo(), basis.hi());
}

// Index i of the knot span [knots[i], knots[i+1]) containing t, restricted to
// the non-degenerate spans order-1 .. K-1; t == hi belongs to the last span.
int find_span(const std::vector<double>& knots, int order, int dimension, double t) {
    if (t >= knots[std::size_t(dimension)]) return dimension - 1;
    const auto it = std::upper_bound(knots.begin() + order - 1, knots.begin() + dimension + 1, t);
    return int(it - knots.begin()) - 1;
}

// Nonzero B-spline values N_{span-order+1}, ..., N_{span} at t (triangular
// Cox-de Boor scheme).
void nonzero_bspline(const std::vector<double>& knots, int span, int order, double t, double* out) {
    const int degree = order - 1;
    std::vector<double> left(static_cast<std::size_t>(order)), right(static_cast<std::size_t>(order));
    out[0] = 1.0;
    for (int j = 1; j <= degree; ++j) {
        left[std::size_t(j)] = t - knots[std::size_t(span + 1 - j)];
        right[std::size_t(j)] = knots[std::size_t(span + j)] - t;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double denom = right[std::size_t(r + 1)] + left[std::size_t(j - r)];
            const double temp = out[r] / denom;
            out[r] = saved + right[std::size_t(r + 1)] * temp;
            saved = left[std::size_t(j - r)] * temp;
        }
        out[j] = saved;
    }
}

void fourier_values(const BasisSystem& basis, double t, double* out) {
    const double T = basis.period();
    const double omega = 2.0 * std::numbers::pi / T;
    const double x = t - basis.lo();
    const double c0 = 1.0 / std::sqrt(T);
    const double c1 = std::sqrt(2.0 / T);
    out[0] = c0;
    for (int k = 1; k < basis.dimension(); ++k) {
        const int harmonic = (k + 1) / 2;
        out[k] = c1 * ((k % 2 == 1) ? std::sin(harmonic * omega * x) : std::cos(harmonic * omega * x));
    }
}

}  // namespace

BasisSystem BasisSystem::bspline(double lo, double hi, int dimension, int order) {
    if (order < 1) throw Error(ErrorKind::Config, "B-spline order must be at least 1");
    if (dimension < order)
        throw Error(ErrorKind::Config, "B-spline dimension " + std::to_string(dimension) +
                                           " is below the order " + std::to_string(order));
    check_domain(lo, hi);
    const int interior = dimension - order;
    std::vector<double> knots(static_cast<std::size_t>(interior));
    for (int i = 0; i < interior; ++i) knots[std::size_t(i)] = lo + (hi - lo) * double(i + 1) / double(interior + 1);
    return bspline_with_knots(lo, hi, order, std::move(knots));
}

BasisSystem BasisSystem::bspline_with_knots(double lo, double hi, int order, std::vector<double> interior_knots) {
    if (order < 1) throw Error(ErrorKind::Config, "B-spline order must be at least 1");
    check_domain(lo, hi);
    if (!std::is_sorted(interior_knots.begin(), interior_knots.end()))
        throw Error(ErrorKind::Config, "interior knots must be non-decreasing");
    for (double k : interior_knots)
        if (!(k > lo && k < hi)) throw Error(ErrorKind::Config, "interior knots must lie strictly inside the domain");
    BasisSystem b;
    b.kind_ = BasisKind::BSpline;
    b.lo_ = lo;
    b.hi_ = hi;
    b.order_ = order;
    b.dimension_ = int(interior_knots.size()) + order;
    b.interior_ = std::move(interior_knots);
    b.knots_.assign(std::size_t(order), lo);
    b.knots_.insert(b.knots_.end(), b.interior_.begin(), b.interior_.end());
    b.knots_.insert(b.knots_.end(), std::size_t(order), hi);
    return b;
}

BasisSystem BasisSystem::fourier(double lo, double hi, int dimension, double period) {
    if (dimension < 1) throw Error(ErrorKind::Config, "basis dimension must be at least 1");
    check_domain(lo, hi);
    BasisSystem b;
    b.kind_ = BasisKind::Fourier;
    b.lo_ = lo;
    b.hi_ = hi;
    b.dimension_ = dimension;
    b.period_ = period > 0.0 ? period : hi - lo;
    return b;
}

Eigen::VectorXd eval_basis(const BasisSystem& basis, double t) {
    t = clamp_to_domain(basis, t);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(basis.dimension());
    if (basis.kind() == BasisKind::Fourier) {
        fourier_values(basis, t, out.data());
        return out;
    }
    const int order = basis.order();
    const int span = find_span(basis.knots(), order, basis.dimension(), t);
    nonzero_bspline(basis.knots(), span, order, t, out.data() + (span - order + 1));
    return out;
}

Eigen::MatrixXd basis_matrix(const BasisSystem& basis, std::span<const double> grid) {
    Eigen::MatrixXd out(Eigen::Index(grid.size()), basis.dimension());
    for (std::size_t j = 0; j < grid.size(); ++j) out.row(Eigen::Index(j)) = eval_basis(basis, grid[j]).transpose();
    return out;
}

QuadratureRule gauss_legendre(int points) {
    if (points < 1) throw Error(ErrorKind::Config, "quadrature needs at least one point");
    QuadratureRule rule;
    rule.nodes.resize(std::size_t(points));
    rule.weights.resize(std::size_t(points));
    const int n = points;
    if (n == 1) {
        rule.nodes[0] = 0.0;
        rule.weights[0] = 2.0;
        return rule;
    }
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[std::size_t(i)] = -x;
        rule.nodes[std::size_t(n - 1 - i)] = x;
        rule.weights[std::size_t(i)] = w;
        rule.weights[std::size_t(n - 1 - i)] = w;
    }
    return rule;
}

Eigen::MatrixXd gram_matrix(const BasisSystem& basis) {
    const int K = basis.dimension();
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(K, K);

    std::vector<double> breaks;
    int points = 0;
    if (basis.kind() == BasisKind::BSpline) {
        breaks = basis.knots();
        breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
        points = basis.order();
    } else {
        constexpr int panels = 64;
        for (int i = 0; i <= panels; ++i) breaks.push_back(basis.lo() + (basis.hi() - basis.lo()) * i / panels);
        points = 20;
    }
    const auto rule = gauss_legendre(points);
    for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
        const double a = breaks[s], b = breaks[s + 1];
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const Eigen::VectorXd phi = eval_basis(basis, mid + half * rule.nodes[q]);
            J.noalias() += (half * rule.weights[q]) * phi * phi.transpose();
        }
    }
    // Exact symmetry regardless of accumulation order.
    return 0.5 * (J + J.transpose());
}

}  // namespace trackfda
