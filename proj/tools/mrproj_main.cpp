// mrproj: nonparametric regression by localized least-squares projection on a
// Daubechies multi-resolution lattice.
//
// Subcommands: estimate | adapt | maltese | classify | bounds | simulate | bench
// Config files (INI or JSON) supply defaults; command-line flags override.
// Every run echoes its fully resolved configuration into the output directory.

#include "mrproj/adapt.hpp"
#include "mrproj/bounds.hpp"
#include "mrproj/classify.hpp"
#include "mrproj/io_util.hpp"
#include "mrproj/lpe.hpp"
#include "mrproj/regress.hpp"
#include "mrproj/rng.hpp"
#include "mrproj/simulate.hpp"
#include "mrproj/unknown_support.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <omp.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace mrproj;

namespace {

// Accepts both flat INI and a flat JSON object as config files.
class JsonIniConfig : public CLI::ConfigBase {
public:
    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        std::string content((std::istreambuf_iterator<char>(input)), std::istreambuf_iterator<char>());
        const auto first = content.find_first_not_of(" \t\r\n");
        if (first != std::string::npos && content[first] == '{') {
            const auto j = nlohmann::json::parse(content);
            std::vector<CLI::ConfigItem> out;
            for (const auto& [key, value] : j.items()) {
                CLI::ConfigItem item;
                item.name = key;
                if (value.is_string()) item.inputs = {value.get<std::string>()};
                else if (value.is_boolean()) item.inputs = {value.get<bool>() ? "true" : "false"};
                else if (value.is_array()) {
                    for (const auto& v : value)
                        item.inputs.push_back(v.is_string() ? v.get<std::string>() : v.dump());
                } else item.inputs = {value.dump()};
                out.push_back(std::move(item));
            }
            return out;
        }
        std::istringstream ss(content);
        return CLI::ConfigBase::from_config(ss);
    }
};

struct CommonOpts {
    std::string out_dir;
    int threads = 0;
};

void add_common(CLI::App* sub, CommonOpts& opts) {
    sub->add_option("--out", opts.out_dir, "output directory")->required();
    sub->add_option("--threads", opts.threads, "worker thread cap (0 = library default)")
        ->capture_default_str();
    auto* cfg = sub->set_config("--config", "", "config file (INI or JSON); flags override");
    cfg->configurable(false);
    sub->config_formatter(std::make_shared<JsonIniConfig>());
    sub->allow_config_extras(CLI::config_extras_mode::error);
}

void apply_threads(int threads) {
    if (threads <= 0) {
        if (const char* env = std::getenv("MRPROJ_THREADS")) threads = std::atoi(env);
    }
    if (threads > 0) omp_set_num_threads(threads);
}

void prepare_out(const CommonOpts& opts, CLI::App* sub) {
    fs::create_directories(opts.out_dir);
    atomic_write_file(fs::path(opts.out_dir) / "resolved_config.ini",
                      sub->config_to_str(/*default_also=*/true, /*write_description=*/false));
}

DesignSample load_dataset(const std::string& path) {
    const CsvTable csv = read_csv(path);
    if (csv.header.empty() || csv.header.back() != "y")
        throw std::runtime_error("dataset must have header x1,...,xd,y");
    const int d = static_cast<int>(csv.header.size()) - 1;
    for (int i = 0; i < d; ++i)
        if (csv.header[static_cast<std::size_t>(i)] != "x" + std::to_string(i + 1))
            throw std::runtime_error("dataset must have header x1,...,xd,y");
    DesignSample s;
    s.d = d;
    for (const auto& row : csv.rows) {
        s.x.insert(s.x.end(), row.begin(), row.begin() + d);
        s.y.push_back(row.back());
    }
    return s;
}

ThresholdPolicy make_policy(const std::string& name, double gmin, double clamp, bool has_clamp) {
    ThresholdPolicy p;
    if (name == "theory") p.variant = ThresholdVariant::theory;
    else if (name == "floor") p.variant = ThresholdVariant::known_floor;
    else if (name == "decile") p.variant = ThresholdVariant::empirical_decile;
    else throw CLI::ValidationError("--policy", "unknown policy '" + name + "'");
    p.known_gmin = gmin;
    if (has_clamp) p.clamp = clamp;
    return p;
}

Fallback make_fallback(const std::string& name) {
    if (name == "zero") return Fallback::zero;
    if (name == "demote") return Fallback::demote_level;
    if (name == "neighbor") return Fallback::neighbor_average;
    throw CLI::ValidationError("--fallback", "unknown fallback '" + name + "'");
}

std::pair<int, int> parse_level_range(const std::string& text) {
    const auto dots = text.find("..");
    if (dots == std::string::npos)
        throw CLI::ValidationError("--j", "expected a range like 4..10");
    const int a = std::stoi(text.substr(0, dots));
    const int b = std::stoi(text.substr(dots + 2));
    if (a < 0 || b < a) throw CLI::ValidationError("--j", "invalid level range");
    return {a, b};
}

// ----------------------------- estimate ------------------------------------

int run_estimate(const CommonOpts& common, CLI::App* sub, const std::string& input, int r, int j,
                 const std::string& policy_name, double gmin, double clamp, bool has_clamp,
                 const std::string& fallback_name) {
    apply_threads(common.threads);
    const DesignSample sample = load_dataset(input);
    const ScalingBasis basis = build_basis(r);
    EstimatorConfig cfg;
    cfg.r = r;
    cfg.d = sample.d;
    cfg.policy = make_policy(policy_name, gmin, clamp, has_clamp);
    cfg.fallback = make_fallback(fallback_name);

    LevelEstimator est;
    if (cfg.policy.variant == ThresholdVariant::empirical_decile) {
        est = estimate(sample, j, basis, cfg, 0.0);
        std::vector<CellFitTable> tables = {est.table()};
        revalidate(est.table(), empirical_pi_n(tables));
    } else {
        est = estimate(sample, j, basis, cfg);
    }

    prepare_out(common, sub);
    atomic_write_file(fs::path(common.out_dir) / "fits.json", to_json(est.table()));

    std::vector<std::string> header;
    for (int i = 0; i < sample.d; ++i) header.push_back("x" + std::to_string(i + 1));
    header.push_back("eta_hat");
    CsvBuilder csv(header);
    std::vector<double> row(static_cast<std::size_t>(sample.d) + 1);
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const auto pt = sample.point(i);
        std::copy(pt.begin(), pt.end(), row.begin());
        row.back() = est(pt);
        csv.add_row(row);
    }
    atomic_write_file(fs::path(common.out_dir) / "predictions.csv", csv.str());
    return 0;
}

// ------------------------------- adapt -------------------------------------

int run_adapt(const CommonOpts& common, CLI::App* sub, const std::string& input, int r,
              const std::string& levels, double kappa, double pi_n, const std::string& policy_name,
              double gmin, double clamp, bool has_clamp, const std::string& fallback_name) {
    apply_threads(common.threads);
    const DesignSample sample = load_dataset(input);
    const ScalingBasis basis = build_basis(r);
    EstimatorConfig cfg;
    cfg.r = r;
    cfg.d = sample.d;
    cfg.kappa = kappa;
    cfg.policy = make_policy(policy_name, gmin, clamp, has_clamp);
    cfg.fallback = make_fallback(fallback_name);

    ResolutionGrid grid;
    if (levels == "auto") {
        grid = resolution_grid(sample.size(), sample.d, r, kappa, pi_n, GridMode::known_r);
    } else {
        const auto [a, b] = parse_level_range(levels);
        grid = study_grid(sample.size(), a, kappa, pi_n);
        grid.j_low = a;
        grid.J = b;
    }

    const LevelStack stack = fit_levels(sample, grid, basis, cfg);
    prepare_out(common, sub);

    std::vector<std::string> lm_header, pr_header;
    for (int i = 0; i < sample.d; ++i) lm_header.push_back("x" + std::to_string(i + 1));
    pr_header = lm_header;
    lm_header.push_back("j_at");
    pr_header.push_back("eta_hat");
    CsvBuilder level_csv(lm_header), pred_csv(pr_header);
    std::vector<double> row(static_cast<std::size_t>(sample.d) + 1);
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const auto pt = sample.point(i);
        const AdaptiveValue v = adaptive_value(stack, pt);
        std::copy(pt.begin(), pt.end(), row.begin());
        row.back() = v.level;
        level_csv.add_row(row);
        row.back() = v.value;
        pred_csv.add_row(row);
    }
    atomic_write_file(fs::path(common.out_dir) / "level_map.csv", level_csv.str());
    atomic_write_file(fs::path(common.out_dir) / "predictions.csv", pred_csv.str());

    nlohmann::json summary;
    summary["n"] = sample.size();
    summary["j_low"] = grid.j_low;
    summary["J"] = grid.J;
    summary["t_n"] = grid.t_n;
    summary["pi_inv"] = stack.pi_inv;
    for (const auto& [j, est] : stack.levels)
        summary["regressions"][std::to_string(j)] = est.table().regression_count();
    atomic_write_file(fs::path(common.out_dir) / "summary.json", summary.dump(2));
    return 0;
}

// ------------------------------ maltese ------------------------------------

int run_maltese(const CommonOpts& common, CLI::App* sub, const std::string& input, int r, int j,
                std::uint64_t seed, const std::string& policy_name, double gmin, double clamp,
                bool has_clamp, const std::string& query_path) {
    apply_threads(common.threads);
    const DesignSample sample = load_dataset(input);
    const ScalingBasis basis = build_basis(r);
    EstimatorConfig cfg;
    cfg.r = r;
    cfg.d = sample.d;
    cfg.policy = make_policy(policy_name, gmin, clamp, has_clamp);

    MalteseEstimator est(split(sample, seed), basis, cfg);

    DesignSample queries;
    if (query_path.empty()) {
        queries.d = sample.d;
        queries.x = sample.x;
    } else {
        const CsvTable csv = read_csv(query_path);
        queries.d = static_cast<int>(csv.header.size());
        for (const auto& row : csv.rows) queries.x.insert(queries.x.end(), row.begin(), row.end());
    }

    prepare_out(common, sub);
    std::vector<std::string> header;
    for (int i = 0; i < queries.d; ++i) header.push_back("x" + std::to_string(i + 1));
    header.push_back("eta_hat");
    CsvBuilder csv(header);
    std::vector<double> row(static_cast<std::size_t>(queries.d) + 1);
    std::size_t anchored = 0;
    const OccupancyMap anchor_occ = occupancy(est.halves().anchor_half, j);
    const AnchorCache probe_cache(j);
    for (std::size_t i = 0; i < queries.size(); ++i) {
        const auto pt = queries.point(i);
        std::copy(pt.begin(), pt.end(), row.begin());
        row.back() = est.eval(pt, j);
        csv.add_row(row);
        if (find_anchor(pt, j, est.halves().anchor_half, anchor_occ, probe_cache)) ++anchored;
    }
    atomic_write_file(fs::path(common.out_dir) / "predictions.csv", csv.str());

    nlohmann::json summary;
    summary["n_fit"] = est.halves().fit_half.size();
    summary["n_anchor"] = est.halves().anchor_half.size();
    summary["j"] = j;
    summary["regressions"] = est.regression_count(j);
    summary["anchored_fraction"] =
        queries.size() ? static_cast<double>(anchored) / static_cast<double>(queries.size()) : 0.0;
    atomic_write_file(fs::path(common.out_dir) / "summary.json", summary.dump(2));
    return 0;
}

// ------------------------------ classify -----------------------------------

int run_classify(const CommonOpts& common, CLI::App* sub, double theta, double s, int r,
                 const std::vector<std::size_t>& n_list, int reps, std::size_t probes,
                 std::uint64_t seed, bool adaptive, const std::string& policy_name, double gmin) {
    apply_threads(common.threads);
    const ScalingBasis basis = build_basis(r);
    const ClassificationScenario scenario = margin_scenario(theta, s, 1);
    ThresholdPolicy policy = make_policy(policy_name, gmin, 1.0, true);

    prepare_out(common, sub);
    const std::vector<std::string> header = {"n", "theta", "s", "median_excess_risk", "stderr",
                                             "seed_base"};
    CsvBuilder csv(header);
    for (std::size_t n : n_list) {
        std::vector<double> risks(static_cast<std::size_t>(reps));
        std::vector<double> errs(static_cast<std::size_t>(reps));
        for (int rep = 0; rep < reps; ++rep) {
            const std::uint64_t rep_seed = mix64(seed + static_cast<std::uint64_t>(rep));
            Rng rng(rep_seed, 0x7A);
            DesignSample train;
            train.d = 1;
            for (std::size_t i = 0; i < 2 * n; ++i) {
                const auto x = scenario.sample_x(rng);
                const double label = rng.uniform() < scenario.eta(x) ? 1.0 : 0.0;
                train.add(x, label);
            }
            const auto v = static_cast<std::uint64_t>(
                std::floor(std::pow(static_cast<double>(n), 1.0 / (2.0 * s + 1.0))));
            int j_s = 0;
            while ((std::uint64_t{2} << j_s) <= v) ++j_s;
            ResolutionGrid grid = study_grid(n, std::max(j_s, 0), 1.0, 1.0);
            const PluginClassifier clf =
                train_classifier(train, scenario, grid, basis, policy, adaptive, rep_seed);
            const RiskReport rr = excess_risk_mc(
                [&](std::span<const double> x) { return clf(x); }, scenario, probes, rep_seed);
            risks[static_cast<std::size_t>(rep)] = rr.estimate;
            errs[static_cast<std::size_t>(rep)] = rr.stderr_;
        }
        std::vector<std::size_t> order(risks.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return risks[a] != risks[b] ? risks[a] < risks[b] : a < b;
        });
        const std::size_t med = order[(order.size() - 1) / 2];
        const double vals[] = {static_cast<double>(n), theta, s, risks[med], errs[med],
                               static_cast<double>(seed)};
        csv.add_row(vals);
    }
    atomic_write_file(fs::path(common.out_dir) / "risk.csv", csv.str());
    return 0;
}

// ------------------------------- bounds ------------------------------------

int run_bounds(const CommonOpts& common, CLI::App* sub, const std::string& which,
               const std::string& vary, const std::string& noise, std::size_t n, int j, int d,
               int r, double pi_n, double mu_max, double K, double sigma, double s, double M,
               double lo, double hi, int steps, int empirical_reps, std::uint64_t seed) {
    apply_threads(common.threads);
    BoundParams p;
    p.n = n;
    p.j = j;
    p.d = d;
    p.r = r;
    p.pi_n = pi_n;
    p.mu_max = mu_max;
    p.noise = noise == "gaussian" ? NoiseModel::gaussian : NoiseModel::bounded;
    p.K = K;
    p.sigma = sigma;
    p.s = s;
    p.M = M;

    auto bound_at = [&](double arg, const BoundParams& q) {
        if (which == "deviation") return deviation_bound(arg, q);
        if (which == "maltese") return maltese_deviation_bound(arg, q);
        if (which == "eig") return eig_tail(arg, q);
        if (which == "lambda") return lambda_tail(arg, q);
        throw CLI::ValidationError("--which", "unknown bound '" + which + "'");
    };

    // empirical deviation / eigenvalue frequencies for the Haar/uniform config
    auto empirical = [&](double arg) -> double {
        if (empirical_reps <= 0 || r != 1 || d != 1) return -1.0;
        const ScalingBasis haar = build_basis(1);
        const double x0[] = {0.3};
        const CellIndex cell = locate(x0, j);
        int hits = 0;
        for (int rep = 0; rep < empirical_reps; ++rep) {
            Rng rng(seed, 0xB0000 + static_cast<std::uint64_t>(rep));
            DesignSample smp;
            smp.d = 1;
            for (std::size_t i = 0; i < n; ++i) {
                const double pt[] = {rng.uniform()};
                const double eta = 0.0;
                const double xi = p.noise == NoiseModel::bounded ? rng.uniform(-K, K)
                                                                 : sigma * rng.normal();
                smp.add(pt, eta + xi);
            }
            const auto occ = occupancy(smp, j);
            const auto it = occ.cells.find(cell);
            std::vector<std::uint32_t> rows;
            if (it != occ.cells.end()) rows = it->second;
            const LocalFit fit = local_fit(cell, smp, haar, 1.0 / p.pi_n, rows);
            if (which == "eig") {
                if (fit.lambda_min <= arg) ++hits;
            } else {
                EstimatorConfig cfg;
                cfg.r = 1;
                const double val = fit.valid ? evaluate_fit(fit, haar, x0, cfg) : 0.0;
                if (std::abs(val - 0.0) >= arg) ++hits;
            }
        }
        return static_cast<double>(hits) / static_cast<double>(empirical_reps);
    };

    prepare_out(common, sub);
    const std::vector<std::string> header = {vary, "bound_raw", "bound_clipped", "empirical_freq"};
    CsvBuilder csv(header);
    for (int t = 0; t < steps; ++t) {
        const double frac = steps == 1 ? 0.0 : static_cast<double>(t) / (steps - 1);
        double raw = 0.0, arg = 0.0;
        if (vary == "n") {
            arg = lo * std::pow(hi / lo, frac);
            BoundParams q = p;
            q.n = static_cast<std::size_t>(arg);
            raw = bound_at(which == "eig" ? 0.25 : std::max(1.01 * deviation_floor(q), 0.1), q);
        } else {
            arg = lo + (hi - lo) * frac;
            raw = bound_at(arg, p);
        }
        const double freq = vary == "delta" ? empirical(arg) : -1.0;
        const double row[] = {arg, raw, clip01(raw), freq};
        csv.add_row(row);
    }
    atomic_write_file(fs::path(common.out_dir) / "curve.csv", csv.str());
    return 0;
}

// ------------------------------ simulate -----------------------------------

int run_simulate(const CommonOpts& common, CLI::App* sub, const std::string& signal, int reps,
                 int r, std::uint64_t seed, std::size_t n_raw, int grid_exp, double sigma,
                 double snr, double kappa, int j_low, const std::string& policy_name,
                 const std::string& fallback_name) {
    apply_threads(common.threads);
    StudyConfig cfg;
    cfg.r = r;
    cfg.reps = reps;
    cfg.seed = seed;
    cfg.n_raw = n_raw;
    cfg.grid_exp = grid_exp;
    cfg.sigma = sigma;
    cfg.snr = snr;
    cfg.kappa = kappa;
    cfg.j_low = j_low;
    cfg.threshold = make_policy(policy_name, 0.0, 0.0, false).variant;
    cfg.fallback = make_fallback(fallback_name);

    const SignalSpec spec = benchmark_signal(signal);
    const StudyResult result = run_study(spec, cfg);

    prepare_out(common, sub);
    const std::vector<std::string> theader = {"trial", "n_effective", "rel_rmse", "seconds",
                                              "regressions_total"};
    CsvBuilder trials(theader);
    for (std::size_t t = 0; t < result.trials.size(); ++t) {
        const auto& rep = result.trials[t];
        std::size_t regs = 0;
        for (const auto& [j, c] : rep.regressions_per_level) regs += c;
        const double row[] = {static_cast<double>(t), static_cast<double>(rep.n_effective),
                              rep.rel_rmse, rep.seconds, static_cast<double>(regs)};
        trials.add_row(row);
    }
    atomic_write_file(fs::path(common.out_dir) / "trials.csv", trials.str());

    const std::vector<std::string> pheader = {"x", "y_true", "y_noisy", "eta_hat", "j_at"};
    CsvBuilder points(pheader);
    const auto& dump = result.median_dump;
    for (std::size_t i = 0; i < dump.x.size(); ++i) {
        const double row[] = {dump.x[i], dump.y_true[i], dump.y_noisy[i], dump.eta_hat[i],
                              static_cast<double>(dump.j_at[i])};
        points.add_row(row);
    }
    atomic_write_file(fs::path(common.out_dir) / "median_points.csv", points.str());

    const auto& med = result.trials[result.median_index];
    nlohmann::json summary;
    summary["signal"] = signal;
    summary["reps"] = reps;
    summary["median_trial"] = result.median_index;
    summary["median_rel_rmse"] = med.rel_rmse;
    summary["median_n_effective"] = med.n_effective;
    summary["density_p"] = result.density.p;
    for (const auto& [j, c] : med.regressions_per_level)
        summary["median_regressions_per_level"][std::to_string(j)] = c;
    for (const auto& [j, c] : med.level_histogram)
        summary["median_level_histogram"][std::to_string(j)] = c;
    for (const auto& [j, v] : med.rel_rmse_by_level)
        summary["median_trial_rel_rmse_by_level"][std::to_string(j)] = v;
    atomic_write_file(fs::path(common.out_dir) / "summary.json", summary.dump(2));
    return 0;
}

// ------------------------------- bench -------------------------------------

int run_bench(const CommonOpts& common, CLI::App* sub, std::size_t n, int r, int j, int reps) {
    apply_threads(common.threads);
    const ScalingBasis basis = build_basis(r);
    Rng rng(1234, 0);
    DesignSample s;
    s.d = 1;
    for (std::size_t i = 0; i < n; ++i) {
        const double pt[] = {rng.uniform()};
        s.add(pt, std::sin(6.0 * pt[0]) + 0.5 * rng.normal());
    }
    EstimatorConfig cfg;
    cfg.r = r;

    auto time_it = [&](auto&& fn) {
        double best = 1e300;
        for (int t = 0; t < reps; ++t) {
            const auto t0 = std::chrono::steady_clock::now();
            fn();
            best = std::min(best,
                            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        }
        return best;
    };

    std::size_t regressions = 0;
    const double t_naive = time_it([&] {
        regressions = reference::estimate(s, j, basis, cfg, 1e-9).table().regression_count();
    });
    const int max_threads = omp_get_max_threads();
    omp_set_num_threads(1);
    const double t_serial = time_it([&] { (void)estimate(s, j, basis, cfg, 1e-9); });
    omp_set_num_threads(max_threads);
    const double t_parallel = time_it([&] { (void)estimate(s, j, basis, cfg, 1e-9); });

    // LPE at every sample point, one regression each; window ~ cell width
    const std::size_t n_lpe = std::min<std::size_t>(n, 2000);
    std::vector<double> eval_pts(s.x.begin(), s.x.begin() + static_cast<std::ptrdiff_t>(n_lpe));
    std::size_t lpe_count = 0;
    const double t_lpe = time_it([&] {
        lpe_count = lpe_baseline(s, eval_pts, std::ldexp(1.0, -j - 1), std::min(r - 1, 2))
                        .regression_count;
    });
    const double lpe_scaled = t_lpe * static_cast<double>(n) / static_cast<double>(n_lpe);

    prepare_out(common, sub);
    const std::vector<std::string> header = {"kernel", "seconds", "regressions", "threads"};
    CsvBuilder csv(header);
    csv.add_raw_row("naive_serial_reference," + format_double(t_naive) + "," +
                    std::to_string(regressions) + ",1");
    csv.add_raw_row("occupancy_serial," + format_double(t_serial) + "," +
                    std::to_string(regressions) + ",1");
    csv.add_raw_row("occupancy_openmp," + format_double(t_parallel) + "," +
                    std::to_string(regressions) + "," + std::to_string(max_threads));
    csv.add_raw_row("lpe_per_point_scaled," + format_double(lpe_scaled) + "," +
                    std::to_string(lpe_count * n / n_lpe) + "," + std::to_string(max_threads));
    atomic_write_file(fs::path(common.out_dir) / "bench.csv", csv.str());

    std::cout << "n=" << n << " r=" << r << " j=" << j << "\n"
              << "  naive serial reference: " << t_naive << " s (" << regressions << " regressions)\n"
              << "  occupancy serial:       " << t_serial << " s\n"
              << "  occupancy OpenMP(" << max_threads << "):   " << t_parallel << " s\n"
              << "  LPE (scaled to n pts):  " << lpe_scaled << " s (" << (lpe_count * n / n_lpe)
              << " regressions)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"local multi-resolution projection regression"};
    app.require_subcommand(1);

    // ---- estimate
    CommonOpts est_common;
    std::string est_input, est_policy = "theory", est_fallback = "zero";
    int est_r = 1, est_j = 4;
    double est_gmin = 0.0, est_clamp = 0.0;
    auto* est = app.add_subcommand("estimate", "fixed-level fit of a CSV dataset");
    est->add_option("--input", est_input, "dataset CSV with header x1,...,xd,y")->required();
    est->add_option("--r", est_r, "basis order")->check(CLI::Range(1, 10))->capture_default_str();
    est->add_option("--j", est_j, "resolution level")->check(CLI::NonNegativeNumber)->capture_default_str();
    est->add_option("--policy", est_policy, "threshold policy: theory|floor|decile")->capture_default_str();
    est->add_option("--gmin", est_gmin, "known density floor g*_min (policy=floor)")->capture_default_str();
    auto* est_clamp_opt = est->add_option("--clamp", est_clamp, "sup-norm clamp M");
    est->add_option("--fallback", est_fallback, "zero|demote|neighbor")->capture_default_str();
    add_common(est, est_common);

    // ---- adapt
    CommonOpts ad_common;
    std::string ad_input, ad_levels = "auto", ad_policy = "decile", ad_fallback = "demote";
    int ad_r = 3;
    double ad_kappa = 1.0, ad_pin = 1.0, ad_gmin = 0.0, ad_clamp = 0.0;
    auto* ad = app.add_subcommand("adapt", "Lepski-adaptive fit of a CSV dataset");
    ad->add_option("--input", ad_input, "dataset CSV with header x1,...,xd,y")->required();
    ad->add_option("--r", ad_r, "basis order")->check(CLI::Range(1, 10))->capture_default_str();
    ad->add_option("--j", ad_levels, "level range a..b or 'auto'")->capture_default_str();
    ad->add_option("--kappa", ad_kappa, "Lepski constant")->check(CLI::PositiveNumber)->capture_default_str();
    ad->add_option("--pi-n", ad_pin, "pi_n factor in t_n")->check(CLI::PositiveNumber)->capture_default_str();
    ad->add_option("--policy", ad_policy, "threshold policy: theory|floor|decile")->capture_default_str();
    ad->add_option("--gmin", ad_gmin, "known density floor (policy=floor)")->capture_default_str();
    auto* ad_clamp_opt = ad->add_option("--clamp", ad_clamp, "sup-norm clamp M");
    ad->add_option("--fallback", ad_fallback, "zero|demote|neighbor")->capture_default_str();
    add_common(ad, ad_common);

    // ---- maltese
    CommonOpts mt_common;
    std::string mt_input, mt_policy = "floor", mt_query;
    int mt_r = 2, mt_j = 4;
    double mt_gmin = 0.01, mt_clamp = 0.0;
    std::uint64_t mt_seed = 1;
    auto* mt = app.add_subcommand("maltese", "moving-grid fit for unknown support");
    mt->add_option("--input", mt_input, "dataset CSV of even size")->required();
    mt->add_option("--r", mt_r, "basis order")->check(CLI::Range(1, 10))->capture_default_str();
    mt->add_option("--j", mt_j, "resolution level")->check(CLI::NonNegativeNumber)->capture_default_str();
    mt->add_option("--seed", mt_seed, "split seed")->capture_default_str();
    mt->add_option("--policy", mt_policy, "threshold policy: theory|floor|decile")->capture_default_str();
    mt->add_option("--gmin", mt_gmin, "known density floor (policy=floor)")->capture_default_str();
    auto* mt_clamp_opt = mt->add_option("--clamp", mt_clamp, "sup-norm clamp M");
    mt->add_option("--query", mt_query, "optional CSV of query points (columns x1..xd)");
    add_common(mt, mt_common);

    // ---- classify
    CommonOpts cl_common;
    double cl_theta = 1.0, cl_s = 1.0, cl_gmin = 2e-4;
    int cl_r = 2, cl_reps = 20;
    std::size_t cl_probes = 100000;
    std::uint64_t cl_seed = 1;
    std::vector<std::size_t> cl_ns = {512, 1024, 2048, 4096, 8192};
    bool cl_adaptive = false;
    std::string cl_policy = "floor";
    auto* cl = app.add_subcommand("classify", "margin-scenario plug-in classification harness");
    cl->add_option("--theta", cl_theta, "margin exponent")->check(CLI::NonNegativeNumber)->capture_default_str();
    cl->add_option("--s", cl_s, "smoothness label")->check(CLI::PositiveNumber)->capture_default_str();
    cl->add_option("--r", cl_r, "basis order")->check(CLI::Range(1, 10))->capture_default_str();
    cl->add_option("--n", cl_ns, "training sizes n (sample is 2n)")->capture_default_str();
    cl->add_option("--reps", cl_reps, "repetitions per n")->check(CLI::PositiveNumber)->capture_default_str();
    cl->add_option("--probes", cl_probes, "Monte-Carlo probes")->check(CLI::PositiveNumber)->capture_default_str();
    cl->add_option("--seed", cl_seed, "seed base")->capture_default_str();
    cl->add_flag("--adaptive", cl_adaptive, "use the Lepski-selected level");
    cl->add_option("--policy", cl_policy, "threshold policy: theory|floor|decile")->capture_default_str();
    cl->add_option("--gmin", cl_gmin, "known density floor (policy=floor)")->capture_default_str();
    add_common(cl, cl_common);

    // ---- bounds
    CommonOpts bd_common;
    std::string bd_which = "deviation", bd_vary = "delta", bd_noise = "bounded";
    std::size_t bd_n = 4096;
    int bd_j = 3, bd_d = 1, bd_r = 1, bd_steps = 20, bd_emp = 0;
    double bd_pin = 2.0, bd_mu = 1.0, bd_K = 0.5, bd_sigma = 1.0, bd_s = 0.5, bd_M = 0.1;
    double bd_lo = 0.1, bd_hi = 1.0;
    std::uint64_t bd_seed = 1;
    auto* bd = app.add_subcommand("bounds", "finite-sample tail bound curves");
    bd->add_option("--which", bd_which, "deviation|maltese|eig|lambda")->capture_default_str();
    bd->add_option("--vary", bd_vary, "delta|n")->capture_default_str();
    bd->add_option("--noise", bd_noise, "bounded|gaussian")->capture_default_str();
    bd->add_option("--n", bd_n, "sample size")->capture_default_str();
    bd->add_option("--j", bd_j, "level")->capture_default_str();
    bd->add_option("--d", bd_d, "dimension")->capture_default_str();
    bd->add_option("--r", bd_r, "basis order")->capture_default_str();
    bd->add_option("--pi-n", bd_pin, "pi_n")->capture_default_str();
    bd->add_option("--mu-max", bd_mu, "density upper bound")->capture_default_str();
    bd->add_option("--K", bd_K, "noise bound (bounded model)")->capture_default_str();
    bd->add_option("--sigma", bd_sigma, "noise scale (gaussian model)")->capture_default_str();
    bd->add_option("--s", bd_s, "smoothness")->capture_default_str();
    bd->add_option("--M", bd_M, "Lipschitz radius")->capture_default_str();
    bd->add_option("--lo", bd_lo, "range start")->capture_default_str();
    bd->add_option("--hi", bd_hi, "range end")->capture_default_str();
    bd->add_option("--steps", bd_steps, "curve points")->check(CLI::PositiveNumber)->capture_default_str();
    bd->add_option("--empirical-reps", bd_emp, "Monte-Carlo reps for empirical frequencies (0=off)")
        ->capture_default_str();
    bd->add_option("--seed", bd_seed, "seed")->capture_default_str();
    add_common(bd, bd_common);

    // ---- simulate
    CommonOpts sm_common;
    std::string sm_signal = "heavisine", sm_policy = "decile", sm_fallback = "demote";
    int sm_reps = 100, sm_r = 3, sm_gridexp = 15, sm_jlow = 3;
    std::size_t sm_nraw = 3000;
    double sm_sigma = 1.0, sm_snr = 7.0, sm_kappa = 2.0;
    std::uint64_t sm_seed = 1;
    auto* sm = app.add_subcommand("simulate", "benchmark-signal study");
    sm->add_option("--signal", sm_signal, "doppler|heavisine|bumps|blocks")->capture_default_str();
    sm->add_option("--reps", sm_reps, "number of trials")->check(CLI::PositiveNumber)->capture_default_str();
    sm->add_option("--r", sm_r, "basis order")->check(CLI::Range(1, 10))->capture_default_str();
    sm->add_option("--seed", sm_seed, "study seed")->capture_default_str();
    sm->add_option("--n-raw", sm_nraw, "raw draws per trial")->capture_default_str();
    sm->add_option("--grid-exp", sm_gridexp, "dyadic grid exponent")->capture_default_str();
    sm->add_option("--sigma", sm_sigma, "noise scale (0 = noiseless)")->capture_default_str();
    sm->add_option("--snr", sm_snr, "signal-to-noise ratio")->capture_default_str();
    sm->add_option("--kappa", sm_kappa, "Lepski constant")->check(CLI::PositiveNumber)->capture_default_str();
    sm->add_option("--j-low", sm_jlow, "lowest level")->capture_default_str();
    sm->add_option("--policy", sm_policy, "threshold policy: theory|floor|decile")->capture_default_str();
    sm->add_option("--fallback", sm_fallback, "zero|demote|neighbor")->capture_default_str();
    add_common(sm, sm_common);

    // ---- bench
    CommonOpts bn_common;
    std::size_t bn_n = 200000;
    int bn_r = 3, bn_j = 8, bn_reps = 3;
    auto* bn = app.add_subcommand("bench", "serial vs OpenMP kernel benchmark, LPE comparison");
    bn->add_option("--n", bn_n, "sample size")->capture_default_str();
    bn->add_option("--r", bn_r, "basis order")->check(CLI::Range(1, 10))->capture_default_str();
    bn->add_option("--j", bn_j, "level")->capture_default_str();
    bn->add_option("--reps", bn_reps, "timing repetitions")->check(CLI::PositiveNumber)->capture_default_str();
    add_common(bn, bn_common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (est->parsed())
            return run_estimate(est_common, est, est_input, est_r, est_j, est_policy, est_gmin,
                                est_clamp, est_clamp_opt->count() > 0, est_fallback);
        if (ad->parsed())
            return run_adapt(ad_common, ad, ad_input, ad_r, ad_levels, ad_kappa, ad_pin, ad_policy,
                             ad_gmin, ad_clamp, ad_clamp_opt->count() > 0, ad_fallback);
        if (mt->parsed())
            return run_maltese(mt_common, mt, mt_input, mt_r, mt_j, mt_seed, mt_policy, mt_gmin,
                               mt_clamp, mt_clamp_opt->count() > 0, mt_query);
        if (cl->parsed())
            return run_classify(cl_common, cl, cl_theta, cl_s, cl_r, cl_ns, cl_reps, cl_probes,
                                cl_seed, cl_adaptive, cl_policy, cl_gmin);
        if (bd->parsed())
            return run_bounds(bd_common, bd, bd_which, bd_vary, bd_noise, bd_n, bd_j, bd_d, bd_r,
                              bd_pin, bd_mu, bd_K, bd_sigma, bd_s, bd_M, bd_lo, bd_hi, bd_steps,
                              bd_emp, bd_seed);
        if (sm->parsed())
            return run_simulate(sm_common, sm, sm_signal, sm_reps, sm_r, sm_seed, sm_nraw,
                                sm_gridexp, sm_sigma, sm_snr, sm_kappa, sm_jlow, sm_policy,
                                sm_fallback);
        if (bn->parsed()) return run_bench(bn_common, bn, bn_n, bn_r, bn_j, bn_reps);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
