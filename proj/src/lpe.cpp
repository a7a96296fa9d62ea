#include "mrproj/lpe.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace mrproj {

LpeResult lpe_baseline(const DesignSample& sample, std::span<const double> eval_points,
                       double bandwidth, int degree) {
    if (sample.d != 1) throw std::invalid_argument("lpe_baseline: implemented for d = 1");
    if (!(bandwidth > 0)) throw std::invalid_argument("lpe_baseline: bandwidth must be positive");
    if (degree < 0) throw std::invalid_argument("lpe_baseline: degree must be >= 0");

    const std::size_t n = sample.size();
    const auto p = static_cast<Eigen::Index>(degree + 1);
    LpeResult out;
    out.estimates.assign(eval_points.size(), 0.0);
    out.valid.assign(eval_points.size(), 0);
    out.regression_count = eval_points.size();

#pragma omp parallel for schedule(static)
    for (std::int64_t q = 0; q < static_cast<std::int64_t>(eval_points.size()); ++q) {
        const double x0 = eval_points[static_cast<std::size_t>(q)];
        Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(p, p);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
        Eigen::VectorXd row(p);
        for (std::size_t i = 0; i < n; ++i) {
            const double dx = sample.x[i] - x0;
            if (std::abs(dx) > bandwidth) continue;
            double pw = 1.0;
            for (Eigen::Index k = 0; k < p; ++k) {
                row(k) = pw;
                pw *= dx;
            }
            Q.selfadjointView<Eigen::Lower>().rankUpdate(row, 1.0);
            b += sample.y[i] * row;
        }
        Q = Q.selfadjointView<Eigen::Lower>();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
        if (es.info() != Eigen::Success) continue;
        const double lam_min = es.eigenvalues()(0);
        const double lam_max = es.eigenvalues()(p - 1);
        if (!(lam_min > 1e-12 * std::max(lam_max, 1e-300))) continue; // singular: flagged invalid
        const Eigen::VectorXd coef =
            es.eigenvectors() * (es.eigenvectors().transpose() * b).cwiseQuotient(es.eigenvalues());
        out.estimates[static_cast<std::size_t>(q)] = coef(0);
        out.valid[static_cast<std::size_t>(q)] = 1;
    }
    return out;
}

} // namespace mrproj
