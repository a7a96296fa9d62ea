#include "mrproj/classify.hpp"

#include <cmath>
#include <stdexcept>

namespace mrproj {

ClassificationScenario margin_scenario(double theta, double s, int d) {
    if (theta < 0) throw std::invalid_argument("margin_scenario: theta must be >= 0");
    ClassificationScenario sc;
    sc.theta = theta;
    sc.s = s;
    sc.d = d;
    sc.c_star = 1.0;
    sc.eta = [theta](std::span<const double> x) {
        const double u = 2.0 * x[0] - 1.0;
        if (std::isinf(theta)) return u >= 0.0 ? 1.0 : 0.0;
        if (theta == 0.0) return u >= 0.0 ? 1.0 : 0.0; // degenerate limit, hard margin
        const double mag = std::pow(std::abs(u), 1.0 / theta);
        return 0.5 + 0.5 * (u >= 0.0 ? mag : -mag);
    };
    sc.sample_x = [d](Rng& rng) {
        std::vector<double> x(static_cast<std::size_t>(d));
        for (auto& v : x) v = rng.uniform();
        return x;
    };
    return sc;
}

PluginClassifier::PluginClassifier(std::shared_ptr<MalteseEstimator> estimator, ResolutionGrid grid,
                                   bool adaptive, int fixed_level)
    : estimator_(std::move(estimator)), grid_(grid), adaptive_(adaptive), fixed_level_(fixed_level) {}

double PluginClassifier::eta_hat(std::span<const double> x) const {
    if (adaptive_) return estimator_->adaptive_eval(x, grid_).value;
    return estimator_->eval(x, fixed_level_);
}

int PluginClassifier::operator()(std::span<const double> x) const { return plug_in(eta_hat(x)); }

PluginClassifier train_classifier(const DesignSample& sample, const ClassificationScenario& scenario,
                                  const ResolutionGrid& grid, const ScalingBasis& basis,
                                  const ThresholdPolicy& policy, bool adaptive, std::uint64_t seed) {
    (void)scenario;
    for (double v : sample.y)
        if (v != 0.0 && v != 1.0)
            throw std::invalid_argument("train_classifier: responses must be binary labels");

    EstimatorConfig config;
    config.r = basis.r;
    config.d = sample.d;
    config.policy = policy;
    config.policy.clamp = 1.0; // eta is a conditional probability
    config.fallback = Fallback::demote_level;

    auto estimator = std::make_shared<MalteseEstimator>(split(sample, seed), basis, config);
    return {std::move(estimator), grid, adaptive, grid.j_low};
}

RiskReport excess_risk_mc(const std::function<int(std::span<const double>)>& classifier,
                          const ClassificationScenario& scenario, std::size_t m, std::uint64_t seed) {
    if (m == 0) throw std::invalid_argument("excess_risk_mc: m must be >= 1");
    RiskReport report;
    report.m = m;

    // per-probe counter streams; values collected then reduced serially so
    // the result does not depend on the thread count
    std::vector<double> vals(m);
#pragma omp parallel for schedule(static)
    for (std::int64_t t = 0; t < static_cast<std::int64_t>(m); ++t) {
        Rng rng(seed, 0xE0000000u + static_cast<std::uint64_t>(t));
        const auto x = scenario.sample_x(rng);
        const double eta = scenario.eta(x);
        const int bayes = plug_in(eta);
        const int label = classifier(x);
        vals[static_cast<std::size_t>(t)] = label != bayes ? std::abs(2.0 * eta - 1.0) : 0.0;
    }
    double sum = 0.0, sumsq = 0.0;
    for (double v : vals) {
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / static_cast<double>(m);
    const double var = std::max(0.0, sumsq / static_cast<double>(m) - mean * mean);
    report.estimate = mean;
    report.stderr_ = std::sqrt(var / static_cast<double>(m));
    return report;
}

} // namespace mrproj
