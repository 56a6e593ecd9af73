#ifndef SENSKIT_CLI_HPP
#define SENSKIT_CLI_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "senskit/clogsim.hpp"
#include "senskit/hsic.hpp"
#include "senskit/pce.hpp"
#include "senskit/sobol.hpp"
#include "senskit/svg.hpp"

namespace senskit::cli {

namespace fs = std::filesystem;

// exit codes: 0 success, 1 usage error, 2 data or numeric failure
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

inline constexpr double kSignificance = 0.05;
inline constexpr double kTrainFraction = 0.75;
inline constexpr int kValidationSplits = 5;

namespace detail {

inline InputModel load_model(const std::string& spec) {
    if (spec.empty() || spec == kClogModelPresetName) return clog_model_preset();
    std::ifstream f(spec);
    require(f.good(), "cannot open input model '" + spec + "'");
    nlohmann::json doc;
    try {
        f >> doc;
    } catch (const nlohmann::json::exception& e) {
        fail("malformed input model " + spec + ": " + e.what());
    }
    return model_from_json(doc, spec);
}

inline ClogConfig load_config(const std::string& path) {
    if (path.empty()) return default_clog_config();
    return load_clog_config(path);
}

inline std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    require(f.good(), "cannot open " + path.string() + " for writing");
    return f;
}

/// linearly interpolated quantile of an already sorted vector
inline double quantile_sorted(const std::vector<double>& v, double p) {
    if (v.empty()) return kUndefined;
    double pos = p * static_cast<double>(v.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] * (1.0 - frac) + v[lo + 1] * frac;
}

inline void write_sobol_csv(const fs::path& path, const SobolTimeSeries& ts) {
    std::ofstream f = open_out(path);
    f << "time,input,S1,ST,var_contrib\n";
    for (std::size_t k = 0; k < ts.times.size(); ++k) {
        const Eigen::Index kk = static_cast<Eigen::Index>(k);
        for (std::size_t i = 0; i < ts.input_names.size(); ++i) {
            const Eigen::Index ii = static_cast<Eigen::Index>(i);
            f << format_double(ts.times[k]) << ',' << ts.input_names[i] << ','
              << format_double(ts.first(kk, ii)) << ',' << format_double(ts.total(kk, ii))
              << ',' << format_double(ts.var_contrib(kk, ii)) << '\n';
        }
        f << format_double(ts.times[k]) << ",_interaction,"
          << format_double(ts.interaction(kk)) << ",,\n";
    }
    require(f.good(), "write failed for " + path.string());
}

inline void write_hsic_csv(const fs::path& path, const HsicTimeSeries& ts) {
    std::ofstream f = open_out(path);
    f << "time,input,index,p_value,target_set_size\n";
    for (std::size_t k = 0; k < ts.times.size(); ++k) {
        const Eigen::Index kk = static_cast<Eigen::Index>(k);
        for (std::size_t i = 0; i < ts.input_names.size(); ++i) {
            const Eigen::Index ii = static_cast<Eigen::Index>(i);
            f << format_double(ts.times[k]) << ',' << ts.input_names[i] << ','
              << format_double(ts.index(kk, ii)) << ',' << format_double(ts.pvalue(kk, ii))
              << ',' << ts.target_size[k] << '\n';
        }
    }
    require(f.good(), "write failed for " + path.string());
}

inline void write_fit_report_csv(const fs::path& path, const std::vector<double>& times,
                                 const FitReport& train, const FitReport& test) {
    std::ofstream f = open_out(path);
    f << "time,selected_terms,loo_error,q2\n";
    for (std::size_t k = 0; k < times.size(); ++k) {
        f << format_double(times[k]) << ',' << train.selected_terms[k] << ','
          << format_double(train.loo_errors[k]) << ',' << format_double(test.q2[k]) << '\n';
    }
    require(f.good(), "write failed for " + path.string());
}

struct ValidationRun {
    std::vector<FitReport> per_split;  // q2 vectors against each test split
    std::vector<double> times;
};

/// Refit the surrogate's own term set on fresh shuffle splits and score the
/// held-out parts; the split permutations derive from one base seed.
inline ValidationRun validation_splits(const SparsePceSurrogate& s, const TrajectoryDataset& ds,
                                       std::uint64_t seed, int jobs) {
    ValidationRun out;
    out.times = s.times;
    require(ds.times == s.times, "dataset and surrogate use different time grids");
    for (int i = 0; i < kValidationSplits; ++i) {
        auto [train, test] =
            split(ds, kTrainFraction, derive_seed(seed, "validate-" + std::to_string(i)));
        FitResult refit =
            fit_with_basis(train, s.basis, s.model_fingerprint, SelectionMode::lars, jobs);
        out.per_split.push_back(q2(refit.surrogate, test, jobs));
    }
    return out;
}

inline void write_validation_csv(const fs::path& path, const ValidationRun& v) {
    std::ofstream f = open_out(path);
    f << "split,time,q2\n";
    for (std::size_t s = 0; s < v.per_split.size(); ++s)
        for (std::size_t k = 0; k < v.times.size(); ++k)
            f << s << ',' << format_double(v.times[k]) << ','
              << format_double(v.per_split[s].q2[k]) << '\n';
    require(f.good(), "write failed for " + path.string());
}

inline void write_trajectory_csv(const fs::path& path, const TrajectoryDataset& ds) {
    std::ofstream f = open_out(path);
    f << "time,mean,p05,p25,p50,p75,p95\n";
    const Eigen::Index n = ds.outputs.rows();
    std::vector<double> col(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < ds.times.size(); ++k) {
        for (Eigen::Index i = 0; i < n; ++i)
            col[static_cast<std::size_t>(i)] = ds.outputs(i, static_cast<Eigen::Index>(k));
        std::sort(col.begin(), col.end());
        double mean = ds.outputs.col(static_cast<Eigen::Index>(k)).mean();
        f << format_double(ds.times[k]) << ',' << format_double(mean);
        for (double p : {0.05, 0.25, 0.5, 0.75, 0.95})
            f << ',' << format_double(quantile_sorted(col, p));
        f << '\n';
    }
    require(f.good(), "write failed for " + path.string());
}

inline void trajectory_svg(const fs::path& path, const TrajectoryDataset& ds) {
    const Eigen::Index n = ds.outputs.rows();
    std::vector<double> col(static_cast<std::size_t>(n));
    std::vector<svg::Series> bands(4);
    const double probs[4] = {0.05, 0.5, 0.95, 0.0};
    bands[0].label = "p05";
    bands[1].label = "median";
    bands[2].label = "p95";
    bands[3].label = "mean";
    for (std::size_t k = 0; k < ds.times.size(); ++k) {
        for (Eigen::Index i = 0; i < n; ++i)
            col[static_cast<std::size_t>(i)] = ds.outputs(i, static_cast<Eigen::Index>(k));
        std::sort(col.begin(), col.end());
        for (int b = 0; b < 3; ++b) {
            bands[static_cast<std::size_t>(b)].x.push_back(ds.times[k]);
            bands[static_cast<std::size_t>(b)].y.push_back(quantile_sorted(col, probs[b]));
        }
        bands[3].x.push_back(ds.times[k]);
        bands[3].y.push_back(ds.outputs.col(static_cast<Eigen::Index>(k)).mean());
    }
    svg::write_line_chart(path.string(), "Clogging trajectories", "time [yr]", "clogging [%]",
                          bands);
}

inline void sobol_svg(const fs::path& path, const SobolTimeSeries& ts) {
    std::vector<svg::Series> series(ts.input_names.size());
    for (std::size_t i = 0; i < ts.input_names.size(); ++i) {
        series[i].label = ts.input_names[i];
        for (std::size_t k = 0; k < ts.times.size(); ++k) {
            series[i].x.push_back(ts.times[k]);
            series[i].y.push_back(
                ts.first(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)));
        }
    }
    svg::write_line_chart(path.string(), "First-order variance shares", "time [yr]", "S1",
                          series);
}

inline void hsic_svg(const fs::path& path, const HsicTimeSeries& ts, const char* title) {
    std::vector<svg::Series> series(ts.input_names.size());
    for (std::size_t i = 0; i < ts.input_names.size(); ++i) {
        series[i].label = ts.input_names[i];
        for (std::size_t k = 0; k < ts.times.size(); ++k) {
            series[i].x.push_back(ts.times[k]);
            series[i].y.push_back(
                ts.index(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)));
        }
    }
    svg::write_line_chart(path.string(), title, "time [yr]", "normalized index", series);
}

inline void q2_svg(const fs::path& path, const ValidationRun& v) {
    std::vector<svg::Box> boxes;
    for (std::size_t s = 0; s < v.per_split.size(); ++s) {
        std::vector<double> vals;
        for (double q : v.per_split[s].q2)
            if (!is_undefined(q)) vals.push_back(q);
        std::sort(vals.begin(), vals.end());
        svg::Box b;
        b.label = "split " + std::to_string(s);
        b.lo = vals.empty() ? 0.0 : vals.front();
        b.hi = vals.empty() ? 0.0 : vals.back();
        b.q1 = quantile_sorted(vals, 0.25);
        b.med = quantile_sorted(vals, 0.5);
        b.q3 = quantile_sorted(vals, 0.75);
        boxes.push_back(b);
    }
    svg::write_box_chart(path.string(), "Predictivity across random splits", "Q2 per timestep",
                         boxes);
}

inline int significant_cells(const HsicTimeSeries& ts) {
    int count = 0;
    for (Eigen::Index k = 0; k < ts.pvalue.rows(); ++k)
        for (Eigen::Index i = 0; i < ts.pvalue.cols(); ++i)
            if (!is_undefined(ts.pvalue(k, i)) && ts.pvalue(k, i) < kSignificance) ++count;
    return count;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommand handlers. Each throws senskit::Error on data or numeric failure;
// flag validation happens in run() below.

struct CommonArgs {
    std::string out;
    std::uint64_t seed = 0;
    int jobs = 1;
};

inline void cmd_simulate(const CommonArgs& c, const std::string& model_spec,
                         const std::string& config_path, int n) {
    InputModel model = detail::load_model(model_spec);
    ClogConfig cfg = detail::load_config(config_path);
    MonteCarloResult mc = monte_carlo(model, cfg, static_cast<std::size_t>(n), c.seed, c.jobs);
    fs::create_directories(c.out);
    fs::path ds_path = fs::path(c.out) / "dataset.csv";
    save_dataset(mc.dataset, ds_path);
    if (!mc.failures.empty()) {
        std::ofstream f = detail::open_out(fs::path(c.out) / "failures.csv");
        f << "row,message\n";
        for (const auto& fail_rec : mc.failures)
            f << fail_rec.row << ",\"" << fail_rec.message << "\"\n";
    }
    std::cout << "dataset: " << mc.dataset.outputs.rows() << " rows x "
              << mc.dataset.times.size() << " timesteps, " << mc.failures.size()
              << " failed draws\n";
    std::cout << "fingerprint: " << dataset_fingerprint(mc.dataset) << "\n";
    std::cout << "wrote " << ds_path.string() << "\n";
}

inline void cmd_fit(const CommonArgs& c, const std::string& dataset_path,
                    const std::string& model_spec, int p, double q) {
    TrajectoryDataset ds = load_dataset(dataset_path);
    InputModel model = detail::load_model(model_spec);
    auto [train, test] = split(ds, kTrainFraction, c.seed);
    FitResult res = fit(train, model, p, q, SelectionMode::lars, c.jobs);
    for (const auto& w : res.report.warnings) std::cerr << "warning: " << w << "\n";
    FitReport held_out = q2(res.surrogate, test, c.jobs);
    fs::create_directories(c.out);
    fs::path s_path = fs::path(c.out) / "surrogate.json";
    save_surrogate(res.surrogate, s_path);
    detail::write_fit_report_csv(fs::path(c.out) / "fit_report.csv", res.surrogate.times,
                                 res.report, held_out);
    std::cout << "basis terms: " << res.surrogate.basis.size() << "\n";
    std::cout << "Q2 mean (held-out): " << format_double(held_out.q2_mean) << "\n";
    std::cout << "wrote " << s_path.string() << "\n";
}

inline void cmd_validate(const CommonArgs& c, const std::string& surrogate_path,
                         const std::string& dataset_path) {
    SparsePceSurrogate s = load_surrogate(surrogate_path);
    TrajectoryDataset ds = load_dataset(dataset_path);
    detail::ValidationRun v = detail::validation_splits(s, ds, c.seed, c.jobs);
    double acc = 0.0;
    int defined = 0;
    for (std::size_t i = 0; i < v.per_split.size(); ++i) {
        double m = v.per_split[i].q2_mean;
        std::cout << "split " << i << ": Q2 mean " << format_double(m) << "\n";
        if (!is_undefined(m)) {
            acc += m;
            ++defined;
        }
    }
    std::cout << "Q2 across splits: "
              << format_double(defined > 0 ? acc / defined : kUndefined) << "\n";
    if (!c.out.empty()) {
        fs::create_directories(c.out);
        fs::path p = fs::path(c.out) / "validation.csv";
        detail::write_validation_csv(p, v);
        std::cout << "wrote " << p.string() << "\n";
    }
}

inline void cmd_sobol(const std::string& surrogate_path, const std::string& out) {
    SparsePceSurrogate s = load_surrogate(surrogate_path);
    SobolTimeSeries ts = sobol_timeseries(s);
    fs::create_directories(out);
    fs::path p = fs::path(out) / "sobol.csv";
    detail::write_sobol_csv(p, ts);
    double worst = 0.0;
    for (Eigen::Index k = 0; k < ts.interaction.size(); ++k)
        if (!is_undefined(ts.interaction(k))) worst = std::max(worst, ts.interaction(k));
    std::cout << "largest interaction share: " << format_double(worst) << "\n";
    std::cout << "wrote " << p.string() << "\n";
}

inline void cmd_hsic(const CommonArgs& c, const std::string& dataset_path, HsicVariant variant,
                     double bound, PValueMethod method, int permutations) {
    TrajectoryDataset ds = load_dataset(dataset_path);
    HsicOptions opts;
    opts.variant = variant;
    opts.bound = bound;
    opts.method = method;
    opts.permutations = permutations;
    opts.seed = c.seed;
    opts.jobs = c.jobs;
    HsicTimeSeries ts = hsic_timeseries(ds, opts);
    fs::create_directories(c.out);
    fs::path p = fs::path(c.out) / "hsic.csv";
    detail::write_hsic_csv(p, ts);
    std::cout << "significant cells at " << format_double(kSignificance) << ": "
              << detail::significant_cells(ts) << " of "
              << ts.pvalue.rows() * ts.pvalue.cols() << "\n";
    std::cout << "wrote " << p.string() << "\n";
}

inline void cmd_report(const CommonArgs& c, const std::string& model_spec,
                       const std::string& config_path, int n, int p, double q, double bound) {
    InputModel model = detail::load_model(model_spec);
    ClogConfig cfg = detail::load_config(config_path);
    fs::path out(c.out);
    fs::create_directories(out);

    MonteCarloResult mc = monte_carlo(model, cfg, static_cast<std::size_t>(n), c.seed, c.jobs);
    save_dataset(mc.dataset, out / "dataset.csv");
    detail::write_trajectory_csv(out / "trajectories.csv", mc.dataset);
    detail::trajectory_svg(out / "trajectories.svg", mc.dataset);
    std::cout << "dataset: " << mc.dataset.outputs.rows() << " rows, " << mc.failures.size()
              << " failed draws\n";

    auto [train, test] = split(mc.dataset, kTrainFraction, derive_seed(c.seed, "fit"));
    FitResult res = fit(train, model, p, q, SelectionMode::lars, c.jobs);
    for (const auto& w : res.report.warnings) std::cerr << "warning: " << w << "\n";
    FitReport held_out = q2(res.surrogate, test, c.jobs);
    save_surrogate(res.surrogate, out / "surrogate.json");
    detail::write_fit_report_csv(out / "fit_report.csv", res.surrogate.times, res.report,
                                 held_out);
    std::cout << "Q2 mean (held-out): " << format_double(held_out.q2_mean) << "\n";

    detail::ValidationRun v = detail::validation_splits(res.surrogate, mc.dataset, c.seed,
                                                        c.jobs);
    detail::write_validation_csv(out / "q2_splits.csv", v);
    detail::q2_svg(out / "q2_splits.svg", v);

    SobolTimeSeries sob = sobol_timeseries(res.surrogate);
    detail::write_sobol_csv(out / "sobol.csv", sob);
    detail::sobol_svg(out / "sobol.svg", sob);

    HsicOptions go;
    go.variant = HsicVariant::global;
    go.method = PValueMethod::asymptotic;
    go.jobs = c.jobs;
    HsicTimeSeries global = hsic_timeseries(mc.dataset, go);
    detail::write_hsic_csv(out / "hsic_global.csv", global);
    detail::hsic_svg(out / "hsic_global.svg", global, "Global dependence indices");

    HsicOptions to;
    to.variant = HsicVariant::target;
    to.bound = bound;
    to.method = PValueMethod::asymptotic;
    to.jobs = c.jobs;
    HsicTimeSeries target = hsic_timeseries(mc.dataset, to);
    detail::write_hsic_csv(out / "hsic_target.csv", target);
    detail::hsic_svg(out / "hsic_target.svg", target, "Critical-region dependence indices");

    std::cout << "wrote report artifacts under " << out.string() << "\n";
}

// ---------------------------------------------------------------------------
// Flag wiring. Exit code 1 covers anything the parser or the flag contracts
// reject; handlers report data and numeric problems as exit code 2.

inline int run(int argc, const char* const* argv) {
    CLI::App app{"Given-data sensitivity analysis for slow clogging processes"};
    app.require_subcommand(1);

    std::string model_spec, config_path, dataset_path, surrogate_path;
    CommonArgs common;
    int n = 1000;
    int p = 4;
    double q = 0.5;
    std::string variant_name = "global", pvalue_name;
    double bound = 70.0;
    int permutations = 500;
    bool seed_given = false;

    auto add_seed = [&](CLI::App* cmd, bool required) {
        CLI::Option* o = cmd->add_option("--seed", common.seed, "random seed");
        if (required) o->required();
        o->each([&](const std::string&) { seed_given = true; });
        return o;
    };
    auto add_jobs = [&](CLI::App* cmd) {
        cmd->add_option("--jobs", common.jobs, "worker threads")
            ->check(CLI::PositiveNumber);
    };
    auto add_out = [&](CLI::App* cmd, bool required) {
        CLI::Option* o = cmd->add_option("--out", common.out, "output directory");
        if (required) o->required();
    };
    auto add_model = [&](CLI::App* cmd) {
        cmd->add_option("--model", model_spec,
                        std::string("input model JSON file, or the builtin preset '") +
                            kClogModelPresetName + "'");
    };
    auto check_q = CLI::Validator(
        [](std::string& s) -> std::string {
            double v = std::atof(s.c_str());
            if (!(v > 0.0) || v > 1.0) return "quasi-norm exponent must lie in (0, 1]";
            return {};
        },
        "IN (0,1]");

    CLI::App* c_sim = app.add_subcommand("simulate", "sample the input model and run the simulator");
    add_model(c_sim);
    c_sim->add_option("--config", config_path, "schedule and constants JSON file");
    c_sim->add_option("-n", n, "Monte Carlo sample size")->check(CLI::PositiveNumber);
    add_seed(c_sim, true);
    add_jobs(c_sim);
    add_out(c_sim, true);

    CLI::App* c_fit = app.add_subcommand("fit", "fit a sparse surrogate to a dataset");
    c_fit->add_option("--dataset", dataset_path, "trajectory dataset CSV")->required();
    add_model(c_fit);
    c_fit->add_option("--p", p, "maximum polynomial degree")->check(CLI::NonNegativeNumber);
    c_fit->add_option("--q", q, "hyperbolic quasi-norm exponent")->check(check_q);
    add_seed(c_fit, true);
    add_jobs(c_fit);
    add_out(c_fit, true);

    CLI::App* c_val = app.add_subcommand("validate", "score a surrogate on random splits");
    c_val->add_option("--surrogate", surrogate_path, "surrogate JSON file")->required();
    c_val->add_option("--dataset", dataset_path, "trajectory dataset CSV")->required();
    add_seed(c_val, true);
    add_jobs(c_val);
    add_out(c_val, false);

    CLI::App* c_sob = app.add_subcommand("sobol", "variance-based indices from a surrogate");
    c_sob->add_option("--surrogate", surrogate_path, "surrogate JSON file")->required();
    add_out(c_sob, true);

    CLI::App* c_hsic = app.add_subcommand("hsic", "kernel dependence measures on a dataset");
    c_hsic->add_option("--dataset", dataset_path, "trajectory dataset CSV")->required();
    c_hsic->add_option("--variant", variant_name, "global, target, or conditional")
        ->check(CLI::IsMember({"global", "target", "conditional"}));
    c_hsic->add_option("--bound", bound, "critical clogging bound [%]");
    c_hsic->add_option("--pvalue", pvalue_name, "perm or asymp")
        ->check(CLI::IsMember({"perm", "asymp"}));
    c_hsic->add_option("--permutations", permutations, "permutation count")
        ->check(CLI::PositiveNumber);
    add_seed(c_hsic, false);
    add_jobs(c_hsic);
    add_out(c_hsic, true);

    CLI::App* c_rep = app.add_subcommand("report", "full pipeline with figure tables and plots");
    add_model(c_rep);
    c_rep->add_option("--config", config_path, "schedule and constants JSON file");
    c_rep->add_option("-n", n, "Monte Carlo sample size")->check(CLI::PositiveNumber);
    c_rep->add_option("--p", p, "maximum polynomial degree")->check(CLI::NonNegativeNumber);
    c_rep->add_option("--q", q, "hyperbolic quasi-norm exponent")->check(check_q);
    c_rep->add_option("--bound", bound, "critical clogging bound [%]");
    add_seed(c_rep, true);
    add_jobs(c_rep);
    add_out(c_rep, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (c_sim->parsed()) {
            cmd_simulate(common, model_spec, config_path, n);
        } else if (c_fit->parsed()) {
            cmd_fit(common, dataset_path, model_spec, p, q);
        } else if (c_val->parsed()) {
            cmd_validate(common, surrogate_path, dataset_path);
        } else if (c_sob->parsed()) {
            cmd_sobol(surrogate_path, common.out);
        } else if (c_hsic->parsed()) {
            HsicVariant variant = variant_name == "global"    ? HsicVariant::global
                                  : variant_name == "target" ? HsicVariant::target
                                                             : HsicVariant::conditional;
            if (variant == HsicVariant::conditional && pvalue_name == "asymp") {
                std::cerr << "error: the conditional variant supports only permutation "
                             "p-values\n";
                return kExitUsage;
            }
            PValueMethod method;
            if (pvalue_name.empty())
                method = variant == HsicVariant::conditional ? PValueMethod::permutation
                                                             : PValueMethod::asymptotic;
            else
                method = pvalue_name == "perm" ? PValueMethod::permutation
                                               : PValueMethod::asymptotic;
            if (method == PValueMethod::permutation && !seed_given) {
                std::cerr << "error: --seed is required for permutation p-values\n";
                return kExitUsage;
            }
            cmd_hsic(common, dataset_path, variant, bound, method, permutations);
        } else if (c_rep->parsed()) {
            cmd_report(common, model_spec, config_path, n, p, q, bound);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitOk;
}

}  // namespace senskit::cli

#endif  // SENSKIT_CLI_HPP
