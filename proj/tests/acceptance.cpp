// Acceptance gate for the toolkit: nine go/no-go checks, one verdict line
// each. Every numeric target is computed here from first principles, not
// read back from the library under test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "senskit/clogsim.hpp"
#include "senskit/hsic.hpp"
#include "senskit/sobol.hpp"

using namespace senskit;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

int jobs() {
    unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::clamp(hw, 1u, 8u));
}

Eigen::VectorXd randn(int n, std::uint64_t seed, std::uint64_t stream) {
    Eigen::VectorXd v(n);
    CounterRng rng(seed, stream);
    for (int i = 0; i < n; ++i)
        v(i) = Marginal::gaussian(0, 1).quantile(rng.uniform01(static_cast<std::uint64_t>(i)));
    return v;
}

// -------------------------------------------------------------------------
// 1. Every shipped marginal yields an orthonormal polynomial family.

Outcome orthonormal_bases() {
    const double limit = 1e-8;
    double worst = 0.0;
    InputModel model = clog_model_preset();
    for (const Marginal& m : model.marginals()) {
        Recurrence rec = standardized_family(m, 10);
        worst = std::max(worst, orthonormality_defect(rec, m.standardized().first, 10));
    }
    return {worst <= limit, "max |<phi_j,phi_k> - delta_jk| = " + num(worst) + " for j,k <= 10 "
                            "over all 7 marginals (limit " + num(limit) + ")"};
}

// -------------------------------------------------------------------------
// 2. Surrogate-based variance decomposition reproduces a closed-form
//    benchmark: f = sin(x1) + 7 sin^2(x2) + 0.1 x3^4 sin(x1) on U(-pi,pi)^3.

Outcome variance_benchmark() {
    const double pi = std::numbers::pi;
    const double a = 7.0, b = 0.1, tol = 0.02;

    // uniform-on-[-1,1] recurrence from the classical closed form
    Recurrence legendre;
    legendre.alpha.assign(9, 0.0);
    legendre.beta.resize(10);
    legendre.beta[0] = 1.0;
    for (int k = 1; k <= 9; ++k)
        legendre.beta[static_cast<std::size_t>(k)] =
            (static_cast<double>(k) * k) / (4.0 * k * k - 1.0);
    legendre.finalize_norms();

    std::vector<std::string> names{"x1", "x2", "x3"};
    std::vector<Affine> maps(3, Affine{0.0, pi});
    std::vector<Recurrence> fams(3, legendre);
    TensorBasis basis(names, maps, fams, hyperbolic_enumerate(3, 9, 1.0), 9, 1.0);

    const int n = 500;
    TrajectoryDataset ds;
    ds.input_names = names;
    ds.times = {0.0};
    ds.inputs.resize(n, 3);
    for (int j = 0; j < 3; ++j) {
        CounterRng rng(606, static_cast<std::uint64_t>(j));
        for (int i = 0; i < n; ++i)
            ds.inputs(i, j) = pi * (2.0 * rng.uniform01(static_cast<std::uint64_t>(i)) - 1.0);
    }
    ds.outputs.resize(n, 1);
    for (int i = 0; i < n; ++i) {
        double x1 = ds.inputs(i, 0), x2 = ds.inputs(i, 1), x3 = ds.inputs(i, 2);
        ds.outputs(i, 0) = std::sin(x1) + a * std::sin(x2) * std::sin(x2) +
                           b * std::pow(x3, 4) * std::sin(x1);
    }

    FitResult fr = fit_with_basis(ds, basis, "benchmark", SelectionMode::lars, jobs());

    // analytic variance decomposition of the benchmark function
    double v1 = 0.5 * std::pow(1.0 + b * std::pow(pi, 4) / 5.0, 2);
    double v2 = a * a / 8.0;
    double v13 = 8.0 * b * b * std::pow(pi, 8) / 225.0;
    double v = v1 + v2 + v13;

    struct Row {
        double got, want;
    };
    Row rows[] = {{first_order(fr.surrogate, 0, 0), v1 / v},
                  {first_order(fr.surrogate, 1, 0), v2 / v},
                  {first_order(fr.surrogate, 2, 0), 0.0},
                  {total_order(fr.surrogate, 0, 0), (v1 + v13) / v},
                  {total_order(fr.surrogate, 2, 0), v13 / v}};
    double worst = 0.0;
    for (const Row& r : rows) worst = std::max(worst, std::abs(r.got - r.want));
    return {worst <= tol, "S1=" + num(rows[0].got) + "/" + num(rows[0].want) +
                          " S2=" + num(rows[1].got) + "/" + num(rows[1].want) +
                          " S3=" + num(rows[2].got) + "/0 ST1=" + num(rows[3].got) + "/" +
                          num(rows[3].want) + " ST3=" + num(rows[4].got) + "/" +
                          num(rows[4].want) + ", worst gap " + num(worst) + " (limit " +
                          num(tol) + ")"};
}

// -------------------------------------------------------------------------
// 3. A noise-free sparse truth in the 7-input preset basis is recovered to
//    machine-level coefficient accuracy from 300 samples.

Outcome exact_recovery() {
    const double tol = 1e-8;
    InputModel model = clog_model_preset();
    TensorBasis basis = build_basis(model, 4, 0.5);

    std::vector<std::pair<MultiIndex, double>> active = {
        {{0, 0, 0, 0, 0, 0, 0}, 1.2},  {{0, 1, 0, 0, 0, 0, 0}, 0.8},
        {{0, 0, 0, 2, 0, 0, 0}, -0.6}, {{0, 0, 0, 0, 0, 3, 0}, 0.35},
        {{1, 0, 0, 0, 1, 0, 0}, 0.5}};

    const int n = 300;
    TrajectoryDataset ds;
    ds.input_names = model.names();
    ds.times = {0.0};
    ds.inputs = sample(model, n, 777);
    Eigen::MatrixXd psi = basis.design_matrix(ds.inputs);
    ds.outputs = Eigen::MatrixXd::Zero(n, 1);
    for (const auto& [mi, c] : active) {
        auto it = std::find(basis.indices().begin(), basis.indices().end(), mi);
        if (it == basis.indices().end()) return {false, "active term missing from basis"};
        ds.outputs.col(0) += c * psi.col(it - basis.indices().begin());
    }

    FitResult fr = fit(ds, model, 4, 0.5, SelectionMode::lars, jobs());

    double worst = 0.0;
    const auto& fitted = fr.surrogate.basis.indices();
    for (std::size_t j = 0; j < fitted.size(); ++j) {
        double want = 0.0;
        for (const auto& [mi, c] : active)
            if (fitted[j] == mi) want = c;
        worst = std::max(worst, std::abs(fr.surrogate.coeffs(0, static_cast<Eigen::Index>(j)) -
                                         want));
    }
    for (const auto& [mi, c] : active)
        if (std::find(fitted.begin(), fitted.end(), mi) == fitted.end())
            worst = std::max(worst, std::abs(c));
    return {worst <= tol, "5 planted terms, n=300: max coefficient error " + num(worst) +
                          " (limit " + num(tol) + ")"};
}

// -------------------------------------------------------------------------
// 4. The trace-form dependence statistic equals the written-out double sum.

Outcome estimator_equivalence() {
    const double tol = 1e-12;
    double worst = 0.0;
    for (int c = 0; c < 50; ++c) {
        CounterRng rng(4040, static_cast<std::uint64_t>(c));
        int n = 5 + static_cast<int>(rng.uniform01(0) * 45.0);
        double bx = 0.3 + 1.7 * rng.uniform01(1);
        double by = 0.3 + 1.7 * rng.uniform01(2);
        Eigen::VectorXd x = randn(n, 5000 + static_cast<std::uint64_t>(c), 0);
        Eigen::VectorXd y = randn(n, 5000 + static_cast<std::uint64_t>(c), 1);

        auto kmat = [n](const Eigen::VectorXd& v, double h) {
            Eigen::MatrixXd k(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double d = v(i) - v(j);
                    k(i, j) = std::exp(-0.5 * d * d / (h * h));
                }
            return k;
        };
        Eigen::MatrixXd kx = kmat(x, bx), ky = kmat(y, by);
        double t1 = 0.0, sx = 0.0, sy = 0.0, t3 = 0.0;
        for (int i = 0; i < n; ++i) {
            double rx = 0.0, ry = 0.0;
            for (int j = 0; j < n; ++j) {
                t1 += kx(i, j) * ky(i, j);
                rx += kx(i, j);
                ry += ky(i, j);
            }
            sx += rx;
            sy += ry;
            t3 += rx * ry;
        }
        double nn = n;
        double brute = t1 / (nn * nn) + sx * sy / (nn * nn * nn * nn) - 2.0 * t3 / (nn * nn * nn);
        double lib = hsic_v(x, y, fixed_kernel(bx), fixed_kernel(by));
        worst = std::max(worst, std::abs(lib - brute));
    }
    return {worst <= tol, "50 random cases, n <= 50: max |trace - double sum| = " + num(worst) +
                          " (limit " + num(tol) + ")"};
}

// -------------------------------------------------------------------------
// 5. Permutation p-values are uniform under independence and tiny under a
//    deterministic relation, for both p-value methods.

Outcome pvalue_calibration() {
    const int n = 500, seeds = 200, perms = 199;
    std::vector<double> pv(seeds);
    KernelSpec med = median_heuristic_kernel();
    parallel_for(static_cast<std::size_t>(seeds), jobs(), [&](std::size_t s) {
        Eigen::VectorXd x = randn(n, 9000 + s, 0);
        Eigen::VectorXd y = randn(n, 9000 + s, 1);
        pv[s] = hsic_pvalue(x, y, med, med, PValueMethod::permutation, perms,
                            static_cast<std::uint64_t>(s));
    });
    std::sort(pv.begin(), pv.end());
    double ks = 0.0;
    for (int i = 0; i < seeds; ++i) {
        double hi = static_cast<double>(i + 1) / seeds, lo = static_cast<double>(i) / seeds;
        ks = std::max({ks, std::abs(pv[static_cast<std::size_t>(i)] - hi),
                       std::abs(pv[static_cast<std::size_t>(i)] - lo)});
    }

    Eigen::VectorXd x = randn(100, 321, 0);
    double p_asym = hsic_pvalue(x, x, med, med, PValueMethod::asymptotic);
    double p_perm = hsic_pvalue(x, x, med, med, PValueMethod::permutation, 999, 7);

    bool pass = ks <= 0.1 && p_asym <= 0.01 && p_perm <= 0.01;
    return {pass, "independence (n=500, 200 seeds): KS = " + num(ks) +
                  " (limit 0.1); y=x (n=100): p_asymp = " + num(p_asym) + ", p_perm = " +
                  num(p_perm) + " (limit 0.01)"};
}

// -------------------------------------------------------------------------
// 6. Target and conditional variants behave at their edges and disagree with
//    the global ranking exactly when the critical region has its own driver.

Outcome variant_sanity() {
    Eigen::VectorXd x = randn(200, 111, 0);
    Eigen::VectorXd y = 0.4 * x + randn(200, 111, 1);
    double sigma = std::sqrt((y.array() - y.mean()).square().sum() / (y.size() - 1));
    KernelSpec med = median_heuristic_kernel();

    HsicResult unreachable = t_hsic(x, y, y.maxCoeff() + 10.0 * sigma, med, med);
    bool a = std::abs(unreachable.raw) <= 1e-10;

    // a bound below every sample makes every conditional weight exactly one
    KernelSpec fx = fixed_kernel(1.1), fy = fixed_kernel(0.8);
    HsicResult cond = c_hsic(x, y, y.minCoeff() - 1.0, fx, fy, 0.2,
                             PValueMethod::permutation, 199, 5);
    double global = hsic_v(x, y, fx, fy);
    double gap = std::abs(cond.raw - global) / std::max(1.0, std::abs(global));
    bool b = gap <= 1e-12;

    // below the threshold the response follows x1; inside the region, x2
    const int n = 300;
    Eigen::VectorXd x1 = randn(n, 808, 0), x2 = randn(n, 808, 1);
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i)
        z(i) = x1(i) <= 0.5 ? x1(i) : 0.5 + 0.8 * std::abs(x2(i));
    double g1 = r2_hsic(x1, z, med, med), g2 = r2_hsic(x2, z, med, med);
    HsicResult c1 = c_hsic(x1, z, 1.0, med, med, 0.2, PValueMethod::permutation, 199, 3);
    HsicResult c2 = c_hsic(x2, z, 1.0, med, med, 0.2, PValueMethod::permutation, 199, 3);
    bool c = g1 > g2 && c2.r2 > c1.r2;

    return {a && b && c, "unreachable bound: " + num(unreachable.raw) +
                         "; uniform-weight gap vs global: " + num(gap) +
                         "; ranking flip global (" + num(g1) + " > " + num(g2) +
                         ") vs conditional (" + num(c2.r2) + " > " + num(c1.r2) + ")"};
}

// -------------------------------------------------------------------------
// 7. Full pipeline on the shipped preset: surrogate quality, agreement of
//    both sensitivity views, near-additivity, and the designed physics.

Outcome end_to_end() {
    auto t0 = Clock::now();
    const std::uint64_t seed = 20260822;
    InputModel model = clog_model_preset();
    ClogConfig cfg = default_clog_config();

    MonteCarloResult mc = monte_carlo(model, cfg, 1000, seed, jobs());
    if (!mc.failures.empty())
        return {false, std::to_string(mc.failures.size()) + " of 1000 draws failed"};

    auto [train, test] = split(mc.dataset, 0.75, derive_seed(seed, "fit"));
    FitResult fr = fit(train, model, 4, 0.5, SelectionMode::lars, jobs());
    double q2_mean = q2(fr.surrogate, test, jobs()).q2_mean;

    SobolTimeSeries st = sobol_timeseries(fr.surrogate);
    HsicOptions ho;
    ho.method = PValueMethod::asymptotic;
    ho.jobs = jobs();
    HsicTimeSeries hs = hsic_timeseries(mc.dataset, ho);

    // grid index nearest to the midpoint of each schedule segment
    const auto& segs = cfg.schedule.segments;
    std::vector<double> grid = time_grid(cfg.schedule);
    std::vector<std::size_t> mids;
    for (std::size_t s = 0; s < segs.size(); ++s) {
        double end = s + 1 < segs.size() ? segs[s + 1].t_start : cfg.schedule.t_f;
        double tm = 0.5 * (segs[s].t_start + end);
        std::size_t best = 0;
        for (std::size_t k = 1; k < grid.size(); ++k)
            if (std::abs(grid[k] - tm) < std::abs(grid[best] - tm)) best = k;
        mids.push_back(best);
    }

    auto top3 = [&](const Eigen::MatrixXd& mat, std::size_t k) {
        std::vector<std::size_t> order(model.names().size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return mat(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(a)) >
                   mat(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(b));
        });
        return std::set<std::size_t>(order.begin(), order.begin() + 3);
    };
    bool sets_agree = true;
    std::string set_note;
    for (std::size_t k : mids) {
        std::set<std::size_t> sb = top3(st.first, k), hb = top3(hs.index, k);
        if (sb != hb) sets_agree = false;
        set_note += set_note.empty() ? "" : " ";
        set_note += "t=" + num(grid[k]) + (sb == hb ? ":agree" : ":differ");
    }

    std::size_t defined = 0, additive = 0;
    for (std::size_t k = 0; k < st.defined.size(); ++k)
        if (st.defined[k]) {
            ++defined;
            if (st.interaction(static_cast<Eigen::Index>(k)) <= 0.1) ++additive;
        }
    double additive_frac = defined ? static_cast<double>(additive) / defined : 0.0;

    // porosity must reach the top two drivers in the late high-pH segment
    std::size_t late = mids.back();
    std::size_t eps_c = static_cast<std::size_t>(
        std::find(model.names().begin(), model.names().end(), "eps_c") - model.names().begin());
    std::size_t rank = 0;
    for (std::size_t i = 0; i < model.names().size(); ++i)
        if (st.first(static_cast<Eigen::Index>(late), static_cast<Eigen::Index>(i)) >
            st.first(static_cast<Eigen::Index>(late), static_cast<Eigen::Index>(eps_c)))
            ++rank;
    bool eps_c_top2 = rank < 2;

    // mean clogging speed, first segment vs the post-cleaning tail of the last
    double dt = cfg.schedule.t_f / (cfg.schedule.n_steps - 1);
    auto slope = [&](Eigen::Index k0, Eigen::Index k1) {
        return (mc.dataset.outputs.col(k1) - mc.dataset.outputs.col(k0)).mean() /
               (grid[static_cast<std::size_t>(k1)] - grid[static_cast<std::size_t>(k0)]);
    };
    Eigen::Index first_end = static_cast<Eigen::Index>(segs[1].t_start / dt);  // last k before
    Eigen::Index last_clean = static_cast<Eigen::Index>(
        std::lround(cfg.schedule.cleanings.back().t / dt));
    double early = slope(0, first_end);
    double late_slope = slope(last_clean + 1, cfg.schedule.n_steps - 1);
    bool slower_late = early > late_slope;

    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    bool pass = q2_mean >= 0.9 && sets_agree && additive_frac >= 0.9 && eps_c_top2 &&
                slower_late && secs <= 600.0;
    return {pass, "Q2=" + num(q2_mean) + " (>=0.9); top-3 " + set_note +
                  "; additive steps " + num(100.0 * additive_frac) +
                  "% (>=90%); eps_c rank " + std::to_string(rank + 1) +
                  " late; speed early " + num(early) + " vs late " + num(late_slope) +
                  " %/yr; " + num(secs) + " s (<=600)"};
}

// -------------------------------------------------------------------------
// 8. Simulator invariants: bounds, monotonicity, exact cleaning arithmetic,
//    and insensitivity to halving the internal step.

Outcome simulator_invariants() {
    InputModel model = clog_model_preset();
    ClogConfig cfg = default_clog_config();
    ClogConfig bare = cfg;
    bare.schedule.cleanings.clear();

    double dt = cfg.schedule.t_f / (cfg.schedule.n_steps - 1);
    std::vector<std::size_t> clean_idx;
    for (const auto& ev : cfg.schedule.cleanings)
        clean_idx.push_back(static_cast<std::size_t>(std::lround(ev.t / dt)));
    std::size_t k1 = clean_idx[0], k2 = clean_idx[1];
    double r1 = cfg.constants.r_curative, r2 = cfg.constants.r_preventive;

    Eigen::MatrixXd x = sample(model, 200, 1234);
    bool bounded = true, monotone = true, factor_exact = true;
    double compose_gap = 0.0, halving = 0.0;
    for (int i = 0; i < x.rows(); ++i) {
        Eigen::VectorXd xi = x.row(i).transpose();
        Trajectory with = simulate(xi, cfg.schedule, cfg.constants);
        Trajectory without = simulate(xi, bare.schedule, bare.constants);
        Trajectory refined = simulate(xi, cfg.schedule, cfg.constants, 8);
        for (std::size_t k = 0; k < with.tau.size(); ++k) {
            if (!(with.tau[k] >= 0.0 && with.tau[k] <= 100.0)) bounded = false;
            bool cleaned = std::find(clean_idx.begin(), clean_idx.end(), k) != clean_idx.end();
            if (k > 0 && !cleaned && with.tau[k] < with.tau[k - 1] - 1e-9) monotone = false;
            halving = std::max(halving, std::abs(with.tau[k] - refined.tau[k]));
        }
        if (with.m[k1] != r1 * without.m[k1]) factor_exact = false;
        double expect = r2 * (without.m[k2] - (1.0 - r1) * without.m[k1]);
        compose_gap = std::max(compose_gap,
                               std::abs(with.m[k2] - expect) / std::max(1e-30, expect));
    }
    bool pass = bounded && monotone && factor_exact && compose_gap <= 1e-10 && halving < 0.1;
    return {pass, "200 draws: tau in [0,100] " + std::string(bounded ? "yes" : "NO") +
                  ", monotone between cleanings " + std::string(monotone ? "yes" : "NO") +
                  ", first cleaning factor bitwise " + std::string(factor_exact ? "yes" : "NO") +
                  ", second-cleaning identity gap " + num(compose_gap) +
                  ", step-halving drift " + num(halving) + " clogging-% (limit 0.1)"};
}

// -------------------------------------------------------------------------
// 9. Seeded commands are byte-reproducible and serialized state round-trips
//    without loss.

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

bool dirs_identical(const fs::path& a, const fs::path& b, std::string& why) {
    std::set<fs::path> ra, rb;
    for (const auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file()) ra.insert(fs::relative(e.path(), a));
    for (const auto& e : fs::recursive_directory_iterator(b))
        if (e.is_regular_file()) rb.insert(fs::relative(e.path(), b));
    if (ra != rb) {
        why = "file sets differ";
        return false;
    }
    for (const auto& rel : ra)
        if (slurp(a / rel) != slurp(b / rel)) {
            why = rel.string() + " differs";
            return false;
        }
    return true;
}

Outcome determinism() {
    fs::path root = fs::temp_directory_path() / "senskit-acceptance";
    fs::remove_all(root);
    fs::create_directories(root);
    const std::string cli = SENSKIT_CLI_PATH;

    auto shell = [&](const std::string& args) {
        std::string cmd = cli + " " + args + " > /dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };

    struct Step {
        std::string name;
        std::string args;  // with {out} placeholder
    };
    fs::path data = root / "a0" / "dataset.csv";
    std::vector<Step> steps = {
        {"simulate", "simulate -n 60 --seed 5 --out {out}"},
        {"fit", "fit --dataset " + data.string() + " --p 3 --seed 5 --out {out}"},
        {"sobol", "sobol --surrogate " + (root / "a1" / "surrogate.json").string() +
                      " --out {out}"},
        {"hsic", "hsic --dataset " + data.string() +
                     " --pvalue perm --permutations 100 --seed 9 --out {out}"},
        {"report", "report -n 80 --p 3 --seed 2 --jobs 2 --out {out}"}};

    std::string note;
    for (std::size_t s = 0; s < steps.size(); ++s) {
        fs::path run_a = root / ("a" + std::to_string(s));
        fs::path run_b = root / ("b" + std::to_string(s));
        for (const fs::path& out : {run_a, run_b}) {
            std::string args = steps[s].args;
            args.replace(args.find("{out}"), 5, out.string());
            if (!shell(args)) return {false, steps[s].name + " exited nonzero"};
        }
        std::string why;
        if (!dirs_identical(run_a, run_b, why))
            return {false, steps[s].name + " not reproducible: " + why};
        note += (note.empty() ? "" : ", ") + steps[s].name;
    }

    // serialized state survives a save/load cycle bit for bit
    auto same = [](const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
        return p.rows() == q.rows() && p.cols() == q.cols() &&
               (p.array() == q.array()).all();
    };
    InputModel model = clog_model_preset();
    MonteCarloResult mc = monte_carlo(model, default_clog_config(), 40, 31, 2);
    fs::path ds_path = root / "roundtrip.csv";
    save_dataset(mc.dataset, ds_path);
    TrajectoryDataset back = load_dataset(ds_path);
    bool ds_ok = same(back.inputs, mc.dataset.inputs) &&
                 same(back.outputs, mc.dataset.outputs) && back.times == mc.dataset.times &&
                 dataset_fingerprint(back) == dataset_fingerprint(mc.dataset);

    FitResult fr = fit(mc.dataset, model, 2, 1.0, SelectionMode::lars, 2);
    fs::path s_path = root / "roundtrip.json";
    save_surrogate(fr.surrogate, s_path);
    SparsePceSurrogate sback = load_surrogate(s_path);
    Eigen::VectorXd probe = sample(model, 1, 99).row(0).transpose();
    bool s_ok = same(sback.coeffs, fr.surrogate.coeffs) &&
                sback.basis.indices() == fr.surrogate.basis.indices() &&
                same(predict(sback, probe), predict(fr.surrogate, probe));

    bool pass = ds_ok && s_ok;
    return {pass, "byte-identical reruns: " + note + "; dataset round trip " +
                  std::string(ds_ok ? "lossless" : "LOSSY") + "; surrogate round trip " +
                  std::string(s_ok ? "lossless" : "LOSSY")};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        Outcome (*fn)();
    };
    Criterion list[] = {{"orthonormal polynomial bases", orthonormal_bases},
                        {"closed-form variance benchmark", variance_benchmark},
                        {"sparse exact recovery", exact_recovery},
                        {"dependence estimator equivalence", estimator_equivalence},
                        {"p-value calibration", pvalue_calibration},
                        {"target/conditional variants", variant_sanity},
                        {"end-to-end preset pipeline", end_to_end},
                        {"simulator invariants", simulator_invariants},
                        {"determinism and round trips", determinism}};

    int passed = 0, idx = 0;
    for (const Criterion& c : list) {
        ++idx;
        auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        std::printf("[%s] %d/9 %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", idx, c.name,
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        if (o.pass) ++passed;
    }
    std::printf("acceptance: %d/9 criteria passed\n", passed);
    return passed == 9 ? 0 : 1;
}
