#include "mrproj/regress.hpp"

#include "mrproj/io_util.hpp"

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mrproj {

namespace {

// Relative rank guard: below this, Q is treated as singular regardless of
// the statistical threshold (the non-unique-argmin convention alpha = 0).
bool rank_deficient(double lambda_min, double lambda_max) {
    return !(lambda_min > 1e-12 * std::max(lambda_max, 1e-300));
}

void fill_phi(const ScalingBasis& basis, int j, const std::vector<Index>& active,
              std::span<const double> x, Eigen::VectorXd& out) {
    for (std::size_t a = 0; a < active.size(); ++a)
        out(static_cast<Eigen::Index>(a)) = basis.eval(j, active[a], x);
}

} // namespace

double ThresholdPolicy::pi_inv(std::size_t n) const {
    switch (variant) {
        case ThresholdVariant::theory:
            return 1.0 / std::log(static_cast<double>(std::max<std::size_t>(n, 3)));
        case ThresholdVariant::known_floor:
            return std::min(known_gmin / 2.0, 1.0);
        case ThresholdVariant::empirical_decile:
            throw std::logic_error("empirical-decile threshold must be resolved from fitted tables");
    }
    return 1.0;
}

GramMoment gram_and_moment(const CellIndex& cell, const DesignSample& sample,
                           const ScalingBasis& basis, std::span<const std::uint32_t> rows,
                           std::size_t n_total) {
    const auto active = active_indices(basis.r, cell);
    const auto Rd = static_cast<Eigen::Index>(active.size());
    GramMoment gm;
    gm.Q = Eigen::MatrixXd::Zero(Rd, Rd);
    gm.b = Eigen::VectorXd::Zero(Rd);
    Eigen::VectorXd phi(Rd);
    const double n = static_cast<double>(n_total ? n_total : sample.size());
    for (std::uint32_t i : rows) {
        const auto pt = sample.point(i);
        if (!(locate(pt, cell.j) == cell)) continue;
        fill_phi(basis, cell.j, active, pt, phi);
        gm.Q.selfadjointView<Eigen::Lower>().rankUpdate(phi, 1.0 / n);
        if (!sample.y.empty()) gm.b += (sample.y[i] / n) * phi;
        ++gm.n_points;
    }
    gm.Q = gm.Q.selfadjointView<Eigen::Lower>();
    return gm;
}

LocalFit local_fit(const CellIndex& cell, const DesignSample& sample, const ScalingBasis& basis,
                   double pi_inv, std::span<const std::uint32_t> rows, std::size_t n_total) {
    LocalFit fit;
    fit.cell = cell;
    const auto [Q, b, count] = gram_and_moment(cell, sample, basis, rows, n_total);
    fit.n_points = count;
    if (fit.n_points == 0) {
        fit.alpha = Eigen::VectorXd::Zero(b.size());
        return fit;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
    if (es.info() != Eigen::Success) throw std::runtime_error("local_fit: eigensolver failed");
    const auto& ev = es.eigenvalues();
    fit.lambda_min = ev(0);
    const double lam_max = ev(ev.size() - 1);
    fit.valid = fit.lambda_min >= pi_inv && !rank_deficient(fit.lambda_min, lam_max);
    if (fit.valid) {
        fit.alpha = es.eigenvectors() * (es.eigenvectors().transpose() * b).cwiseQuotient(ev);
    } else {
        fit.alpha = Eigen::VectorXd::Zero(b.size());
    }
    return fit;
}

double evaluate_fit(const LocalFit& fit, const ScalingBasis& basis, std::span<const double> x,
                    const EstimatorConfig& config) {
    if (!(locate(x, fit.cell.j) == fit.cell))
        throw std::invalid_argument("evaluate_fit: point not in the fit's cell");
    double value = 0.0;
    if (fit.valid) {
        const auto active = active_indices(basis.r, fit.cell);
        for (std::size_t a = 0; a < active.size(); ++a)
            value += fit.alpha(static_cast<Eigen::Index>(a)) * basis.eval(fit.cell.j, active[a], x);
    }
    if (config.policy.clamp) {
        const double M = *config.policy.clamp;
        if (value > M) value = M;
        if (value < -M) value = -M;
    }
    return value;
}

std::vector<double> CellFitTable::lambda_mins() const {
    std::vector<double> out;
    out.reserve(fits.size());
    for (const auto& [cell, fit] : fits) out.push_back(fit.lambda_min);
    return out;
}

void revalidate(CellFitTable& table, double pi_inv) {
    for (auto& [cell, fit] : table.fits) {
        if (fit.valid && fit.lambda_min < pi_inv) {
            fit.valid = false;
            fit.alpha.setZero();
        }
    }
}

double empirical_pi_n(std::span<const CellFitTable> tables) {
    std::vector<double> lams;
    for (const auto& t : tables) {
        auto l = t.lambda_mins();
        lams.insert(lams.end(), l.begin(), l.end());
    }
    if (lams.empty()) throw std::runtime_error("empirical_pi_n: no computed lambda_min values");
    return quantile_type7(std::move(lams), 0.1);
}

double LevelEstimator::operator()(std::span<const double> x) const {
    const CellIndex cell = locate(x, table_.j);
    const auto it = table_.fits.find(cell);
    if (it != table_.fits.end() && it->second.valid) return evaluate_fit(it->second, *basis_, x, config_);

    double value = 0.0;
    if (config_.fallback == Fallback::neighbor_average && !x.empty()) {
        // average of the neighboring valid fits, each taken at its own cell center
        double sum = 0.0;
        int count = 0;
        const int d = static_cast<int>(x.size());
        std::vector<int> digit(static_cast<std::size_t>(d), 0);
        CellIndex nb = cell;
        std::vector<double> center(static_cast<std::size_t>(d));
        while (true) {
            bool self = true;
            for (int i = 0; i < d; ++i) {
                nb.m[static_cast<std::size_t>(i)] =
                    cell.m[static_cast<std::size_t>(i)] + digit[static_cast<std::size_t>(i)] - 1;
                if (digit[static_cast<std::size_t>(i)] != 1) self = false;
            }
            if (!self) {
                const auto nit = table_.fits.find(nb);
                if (nit != table_.fits.end() && nit->second.valid) {
                    for (int i = 0; i < d; ++i)
                        center[static_cast<std::size_t>(i)] =
                            std::ldexp(static_cast<double>(nb.m[static_cast<std::size_t>(i)]) + 0.5, -table_.j);
                    sum += evaluate_fit(nit->second, *basis_, center, config_);
                    ++count;
                }
            }
            int pos = d - 1;
            while (pos >= 0 && ++digit[static_cast<std::size_t>(pos)] == 3) {
                digit[static_cast<std::size_t>(pos)] = 0;
                --pos;
            }
            if (pos < 0) break;
        }
        if (count > 0) value = sum / count;
    }
    if (config_.policy.clamp) {
        const double M = *config_.policy.clamp;
        value = std::clamp(value, -M, M);
    }
    return value;
}

bool LevelEstimator::valid_at(std::span<const double> x) const {
    const auto it = table_.fits.find(locate(x, table_.j));
    return it != table_.fits.end() && it->second.valid;
}

LevelEstimator estimate(const DesignSample& sample, int j, const ScalingBasis& basis,
                        const EstimatorConfig& config, std::optional<double> pi_inv_override) {
    const double pi_inv = pi_inv_override ? *pi_inv_override : config.policy.pi_inv(sample.size());
    const OccupancyMap occ = occupancy(sample, j);

    std::vector<std::pair<CellIndex, const std::vector<std::uint32_t>*>> cells;
    cells.reserve(occ.cells.size());
    for (const auto& [cell, rows] : occ.cells) cells.emplace_back(cell, &rows);
    std::sort(cells.begin(), cells.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<LocalFit> fits(cells.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(cells.size()); ++i) {
        const auto& [cell, rows] = cells[static_cast<std::size_t>(i)];
        fits[static_cast<std::size_t>(i)] = local_fit(cell, sample, basis, pi_inv, *rows);
    }

    CellFitTable table;
    table.j = j;
    for (std::size_t i = 0; i < cells.size(); ++i)
        table.fits.emplace(cells[i].first, std::move(fits[i]));
    return {&basis, config, std::move(table)};
}

namespace reference {

LevelEstimator estimate(const DesignSample& sample, int j, const ScalingBasis& basis,
                        const EstimatorConfig& config, std::optional<double> pi_inv_override) {
    const double pi_inv = pi_inv_override ? *pi_inv_override : config.policy.pi_inv(sample.size());
    const std::size_t n = sample.size();

    std::vector<CellIndex> occupied;
    for (std::size_t i = 0; i < n; ++i) {
        const CellIndex c = locate(sample.point(i), j);
        if (std::find(occupied.begin(), occupied.end(), c) == occupied.end()) occupied.push_back(c);
    }
    std::sort(occupied.begin(), occupied.end());

    CellFitTable table;
    table.j = j;
    for (const CellIndex& cell : occupied) {
        std::vector<std::uint32_t> rows;
        for (std::size_t i = 0; i < n; ++i)
            if (locate(sample.point(i), j) == cell) rows.push_back(static_cast<std::uint32_t>(i));
        table.fits.emplace(cell, local_fit(cell, sample, basis, pi_inv, rows));
    }
    return {&basis, config, std::move(table)};
}

} // namespace reference

std::string to_json(const CellFitTable& table) {
    nlohmann::json j;
    j["j"] = table.j;
    auto& arr = j["fits"] = nlohmann::json::array();
    for (const auto& [cell, fit] : table.fits) {
        nlohmann::json f;
        f["j"] = cell.j;
        f["m"] = cell.m;
        f["alpha"] = std::vector<double>(fit.alpha.data(), fit.alpha.data() + fit.alpha.size());
        f["lambda_min"] = fit.lambda_min;
        f["valid"] = fit.valid;
        f["n_points"] = fit.n_points;
        arr.push_back(std::move(f));
    }
    return j.dump(2);
}

CellFitTable cell_fit_table_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    CellFitTable table;
    table.j = j.at("j").get<int>();
    for (const auto& f : j.at("fits")) {
        LocalFit fit;
        fit.cell.j = f.at("j").get<std::int32_t>();
        fit.cell.m = f.at("m").get<Index>();
        const auto alpha = f.at("alpha").get<std::vector<double>>();
        fit.alpha = Eigen::Map<const Eigen::VectorXd>(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
        fit.lambda_min = f.at("lambda_min").get<double>();
        fit.valid = f.at("valid").get<bool>();
        fit.n_points = f.at("n_points").get<int>();
        table.fits.emplace(fit.cell, std::move(fit));
    }
    return table;
}

} // namespace mrproj
