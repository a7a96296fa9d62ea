#pragma once

#include "mrproj/unknown_support.hpp"

#include <functional>
#include <memory>

namespace mrproj {

struct ClassificationScenario {
    std::function<double(std::span<const double>)> eta; // regression function, values in [0,1]
    std::function<std::vector<double>(Rng&)> sample_x;  // design sampler
    double theta = 1.0;  // margin exponent; infinity encodes the hard margin
    double c_star = 1.0; // margin constant (label only)
    double s = 1.0;      // smoothness label
    int d = 1;
};

// label 1 iff eta_hat >= 1/2
inline int plug_in(double eta_hat) { return eta_hat >= 0.5 ? 1 : 0; }

// eta(x) = 1/2 + (1/2) sign(x1 - 1/2) |2 x1 - 1|^{1/theta} with a uniform
// design, so that P(0 < |2 eta - 1| <= t) = t^theta holds with equality.
// theta = infinity gives the hard margin eta in {0,1}.
ClassificationScenario margin_scenario(double theta, double s, int d);

struct RiskReport {
    double estimate = 0.0;
    double stderr_ = 0.0;
    std::size_t m = 0;
    std::size_t n = 0;
};

// Plug-in classifier built on the moving-grid estimator, clamped at M = 1.
class PluginClassifier {
public:
    PluginClassifier(std::shared_ptr<MalteseEstimator> estimator, ResolutionGrid grid,
                     bool adaptive, int fixed_level);

    int operator()(std::span<const double> x) const;
    double eta_hat(std::span<const double> x) const;
    const MalteseEstimator& estimator() const { return *estimator_; }
    int fixed_level() const { return fixed_level_; }

private:
    std::shared_ptr<MalteseEstimator> estimator_;
    ResolutionGrid grid_;
    bool adaptive_ = false;
    int fixed_level_ = 0;
};

// Trains on a sample of size 2n (binary responses required): splits, builds
// eta^maltese with clamp M = 1, classifies via plug_in. `adaptive` switches
// between the fixed level j_s and the Lepski-selected level.
PluginClassifier train_classifier(const DesignSample& sample, const ClassificationScenario& scenario,
                                  const ResolutionGrid& grid, const ScalingBasis& basis,
                                  const ThresholdPolicy& policy, bool adaptive, std::uint64_t seed);

// Monte-Carlo excess risk through the disagreement identity
// l(h, h*) = E |2 eta(X) - 1| 1{h(X) != h*(X)}; exactly 0 for the Bayes rule.
RiskReport excess_risk_mc(const std::function<int(std::span<const double>)>& classifier,
                          const ClassificationScenario& scenario, std::size_t m, std::uint64_t seed);

} // namespace mrproj
