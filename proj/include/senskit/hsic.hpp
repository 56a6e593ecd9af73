#ifndef SENSKIT_HSIC_HPP
#define SENSKIT_HSIC_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "senskit/dataset.hpp"
#include "senskit/kernels.hpp"

namespace senskit {

enum class PValueMethod { asymptotic, permutation };
enum class HsicVariant { global, target, conditional };

/// One dependence measurement. `raw` is the V-statistic value (global,
/// filtered or reweighted, by variant), `r2` its normalized form in [0, 1],
/// and `target_size` the number of samples inside the critical region (the
/// full sample size for the global variant).
struct HsicResult {
    double raw = kUndefined;
    double r2 = kUndefined;
    double p_value = kUndefined;
    PValueMethod method = PValueMethod::asymptotic;
    int target_size = 0;
};

// ---------------------------------------------------------------------------
// Core V-statistic machinery on centered Gram matrices.

/// (1/n^2) <Kx_c, Ky_c>_F, which equals the trace estimator
/// (1/n^2) Tr(Kx H Ky H) because H is idempotent.
inline double hsic_from_centered(const Eigen::MatrixXd& kx_c, const Eigen::MatrixXd& ky_c) {
    const double n = static_cast<double>(kx_c.rows());
    require(kx_c.rows() == ky_c.rows(), "centered gram sizes differ");
    return kx_c.cwiseProduct(ky_c).sum() / (n * n);
}

inline double hsic_v(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const KernelSpec& kx,
                     const KernelSpec& ky) {
    require(x.size() == y.size(), "hsic: sample lengths differ (" + std::to_string(x.size()) +
                                      " vs " + std::to_string(y.size()) + ")");
    // a constant argument carries no dependence information at all
    if ((x.array() == x(0)).all() || (y.array() == y(0)).all()) return 0.0;
    Eigen::MatrixXd kx_c = center_gram(gram(x, kx, "first argument"));
    Eigen::MatrixXd ky_c = center_gram(gram(y, ky, "second argument"));
    return hsic_from_centered(kx_c, ky_c);
}

inline double r2_from_centered(const Eigen::MatrixXd& kx_c, const Eigen::MatrixXd& ky_c) {
    double xx = hsic_from_centered(kx_c, kx_c);
    double yy = hsic_from_centered(ky_c, ky_c);
    if (!(xx > 0.0) || !(yy > 0.0)) return kUndefined;
    return hsic_from_centered(kx_c, ky_c) / std::sqrt(xx * yy);
}

inline double r2_hsic(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const KernelSpec& kx,
                      const KernelSpec& ky) {
    require(x.size() == y.size(), "hsic: sample lengths differ");
    if ((x.array() == x(0)).all() || (y.array() == y(0)).all()) return kUndefined;
    Eigen::MatrixXd kx_c = center_gram(gram(x, kx, "first argument"));
    Eigen::MatrixXd ky_c = center_gram(gram(y, ky, "second argument"));
    return r2_from_centered(kx_c, ky_c);
}

// ---------------------------------------------------------------------------
// Regularized incomplete gamma, for the moment-matched tail probability.
// Series expansion on the left of the mean, Lentz continued fraction on the
// right; both iterate to machine accuracy.

namespace detail {

inline double gamma_series_p(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int k = 1; k < 2000; ++k) {
        term *= x / (a + k);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(a * std::log(x) - x - std::lgamma(a));
}

inline double gamma_cf_q(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1e300;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 2000; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(a * std::log(x) - x - std::lgamma(a)) * h;
}

}  // namespace detail

/// Regularized upper incomplete gamma Q(a, x) = P(G >= x), G ~ Gamma(a, 1).
inline double gamma_q(double a, double x) {
    require(a > 0.0 && std::isfinite(a), "gamma shape must be positive");
    require(x >= 0.0, "gamma argument must be non-negative");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - detail::gamma_series_p(a, x);
    return detail::gamma_cf_q(a, x);
}

inline double gamma_p(double a, double x) {
    require(a > 0.0 && std::isfinite(a), "gamma shape must be positive");
    require(x >= 0.0, "gamma argument must be non-negative");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return detail::gamma_series_p(a, x);
    return 1.0 - detail::gamma_cf_q(a, x);
}

// ---------------------------------------------------------------------------
// P-values.

/// Tail probability of the observed statistic under a Gamma distribution
/// moment-matched to the permutation null. The null mean is exact:
/// E[HSIC] = tr(Kx_c) tr(Ky_c) / (n^2 (n-1)); the variance is the standard
/// O(n^-2) approximation from the squared off-diagonal of Kx_c o Ky_c.
inline double asymptotic_pvalue(const Eigen::MatrixXd& kx_c, const Eigen::MatrixXd& ky_c) {
    const double m = static_cast<double>(kx_c.rows());
    if (m < 6.0) return 1.0;  // variance formula degenerates
    double obs = hsic_from_centered(kx_c, ky_c);
    double mean = kx_c.trace() * ky_c.trace() / (m * m * (m - 1.0));
    Eigen::MatrixXd prod = kx_c.cwiseProduct(ky_c);
    double off_sq = prod.array().square().sum() - prod.diagonal().array().square().sum();
    double var = 2.0 * (m - 4.0) * (m - 5.0) / (m * (m - 1.0) * (m - 2.0) * (m - 3.0)) * off_sq /
                 (m * (m - 1.0));
    if (!(mean > 0.0) || !(var > 0.0)) return 1.0;
    if (!(obs > 0.0)) return 1.0;
    double shape = mean * mean / var;
    double scale = var / mean;
    return gamma_q(shape, obs / scale);
}

/// Permutation p-value (1 + #{S_b >= S_obs}) / (1 + B), permuting the first
/// variable against the second. Deterministic per seed.
inline double permutation_pvalue(const Eigen::MatrixXd& kx_c, const Eigen::MatrixXd& ky_c,
                                 int permutations, std::uint64_t seed) {
    require(permutations >= 100, "need at least 100 permutations, got " +
                                     std::to_string(permutations));
    const Eigen::Index n = kx_c.rows();
    const double obs = hsic_from_centered(kx_c, ky_c);
    int exceed = 0;
    for (int b = 0; b < permutations; ++b) {
        auto perm = random_permutation(static_cast<std::size_t>(n), seed,
                                       static_cast<std::uint64_t>(b));
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index pi = static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]);
            for (Eigen::Index j = 0; j < n; ++j)
                acc += ky_c(i, j) *
                       kx_c(pi, static_cast<Eigen::Index>(perm[static_cast<std::size_t>(j)]));
        }
        double stat = acc / (static_cast<double>(n) * static_cast<double>(n));
        if (stat >= obs) ++exceed;
    }
    return (1.0 + exceed) / (1.0 + permutations);
}

inline double hsic_pvalue(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                          const KernelSpec& kx, const KernelSpec& ky, PValueMethod method,
                          int permutations = 500, std::uint64_t seed = 0) {
    require(x.size() == y.size(), "hsic: sample lengths differ");
    Eigen::MatrixXd kx_c = center_gram(gram(x, kx, "first argument"));
    Eigen::MatrixXd ky_c = center_gram(gram(y, ky, "second argument"));
    if (method == PValueMethod::asymptotic) return asymptotic_pvalue(kx_c, ky_c);
    return permutation_pvalue(kx_c, ky_c, permutations, seed);
}

// ---------------------------------------------------------------------------
// Critical-region filtering.

/// Smooth indicator of the critical upper region [bound, inf): weight 1
/// inside, exp(-(bound - y)/(s sigma)) below, with sigma the sample
/// standard deviation of y.
struct TargetFilter {
    Eigen::VectorXd weights;
    int target_size = 0;  // samples at or above the bound
    double sigma = 0.0;
};

inline TargetFilter target_filter(const Eigen::VectorXd& y, double bound, double s) {
    require(s > 0.0, "filter sharpness must be positive");
    const Eigen::Index n = y.size();
    require(n >= 2, "filter needs at least two samples");
    const double mean = y.mean();
    const double var = (y.array() - mean).square().sum() / static_cast<double>(n - 1);
    TargetFilter tf;
    tf.sigma = std::sqrt(var);
    require(tf.sigma > 0.0, "output column is constant; the critical-region filter has no scale");
    tf.weights.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double shortfall = std::max(0.0, bound - y(i));
        tf.weights(i) = std::exp(-shortfall / (s * tf.sigma));
        if (y(i) >= bound) ++tf.target_size;
    }
    return tf;
}

// ---------------------------------------------------------------------------
// Target variant: plain HSIC against the filtered output.

inline HsicResult t_hsic(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double bound,
                         const KernelSpec& kx, const KernelSpec& ky, double s = 0.2,
                         PValueMethod method = PValueMethod::permutation, int permutations = 500,
                         std::uint64_t seed = 0) {
    require(x.size() == y.size(), "hsic: sample lengths differ");
    TargetFilter tf = target_filter(y, bound, s);
    HsicResult r;
    r.method = method;
    r.target_size = tf.target_size;
    if (tf.weights.maxCoeff() - tf.weights.minCoeff() < 1e-12) {
        // filter output is flat (everything inside the region, or everything
        // hopelessly far below): no dependence signal by construction
        r.raw = 0.0;
        r.r2 = 0.0;
        r.p_value = 1.0;
        return r;
    }
    Eigen::MatrixXd kx_c = center_gram(gram(x, kx, "input"));
    Eigen::MatrixXd ky_c = center_gram(gram(tf.weights, ky, "filtered output"));
    r.raw = hsic_from_centered(kx_c, ky_c);
    r.r2 = r2_from_centered(kx_c, ky_c);
    r.p_value = method == PValueMethod::asymptotic
                    ? asymptotic_pvalue(kx_c, ky_c)
                    : permutation_pvalue(kx_c, ky_c, permutations, seed);
    return r;
}

// ---------------------------------------------------------------------------
// Conditional variant: V-statistic under the output-reweighted measure.

/// HSIC V-statistic under sample weights (normalized to sum 1):
/// T1 + T2 - 2 T3 with T1 = sum w_p w_q Kx_pq Ky_pq,
/// T2 = (w'Kx w)(w'Ky w), T3 = sum_p w_p (Kx w)_p (Ky w)_p.
/// Uniform weights reproduce the plain V-statistic exactly.
inline double weighted_hsic(const Eigen::MatrixXd& kx, const Eigen::MatrixXd& ky,
                            const Eigen::VectorXd& w) {
    require(kx.rows() == ky.rows() && kx.rows() == w.size(), "weighted hsic: size mismatch");
    Eigen::VectorXd kxw = kx * w;
    Eigen::VectorXd kyw = ky * w;
    double t1 = w.dot(kx.cwiseProduct(ky) * w);
    double t2 = w.dot(kxw) * w.dot(kyw);
    double t3 = (w.array() * kxw.array() * kyw.array()).sum();
    return t1 + t2 - 2.0 * t3;
}

namespace detail {

inline double weighted_hsic_permuted(const Eigen::MatrixXd& kx, const Eigen::MatrixXd& ky,
                                     const Eigen::VectorXd& w,
                                     const std::vector<std::size_t>& perm) {
    const Eigen::Index n = w.size();
    double t1 = 0.0, sx = 0.0, t3 = 0.0;
    Eigen::VectorXd kyw = ky * w;
    Eigen::VectorXd kxw_perm(n);  // (Kx w)_p under permuted x rows
    for (Eigen::Index p = 0; p < n; ++p) {
        const Eigen::Index pp = static_cast<Eigen::Index>(perm[static_cast<std::size_t>(p)]);
        double row_t1 = 0.0, row_sx = 0.0;
        for (Eigen::Index qq = 0; qq < n; ++qq) {
            const Eigen::Index pq = static_cast<Eigen::Index>(perm[static_cast<std::size_t>(qq)]);
            double kxv = kx(pp, pq);
            row_t1 += w(qq) * kxv * ky(p, qq);
            row_sx += w(qq) * kxv;
        }
        t1 += w(p) * row_t1;
        sx += w(p) * row_sx;
        kxw_perm(p) = row_sx;
    }
    for (Eigen::Index p = 0; p < n; ++p) t3 += w(p) * kxw_perm(p) * kyw(p);
    double t2 = sx * w.dot(kyw);
    return t1 + t2 - 2.0 * t3;
}

}  // namespace detail

inline HsicResult c_hsic(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double bound,
                         const KernelSpec& kx, const KernelSpec& ky, double s = 0.2,
                         PValueMethod method = PValueMethod::permutation, int permutations = 500,
                         std::uint64_t seed = 0) {
    require(x.size() == y.size(), "hsic: sample lengths differ");
    require(method == PValueMethod::permutation,
            "the conditional variant supports only permutation p-values");
    TargetFilter tf = target_filter(y, bound, s);
    double total = tf.weights.sum();
    require(total > 0.0, "all conditional weights are zero");
    Eigen::VectorXd w = tf.weights / total;

    double bw_x = resolve_bandwidth(x, kx, "input");
    double bw_y = ky.bandwidth > 0.0 ? ky.bandwidth
                                     : weighted_median_bandwidth(y, w, "conditioned output");
    Eigen::MatrixXd gx = gram(x, fixed_kernel(bw_x), "input");
    Eigen::MatrixXd gy = gram(y, fixed_kernel(bw_y), "conditioned output");

    HsicResult r;
    r.method = method;
    r.target_size = tf.target_size;
    r.raw = weighted_hsic(gx, gy, w);
    double xx = weighted_hsic(gx, gx, w);
    double yy = weighted_hsic(gy, gy, w);
    r.r2 = (xx > 0.0 && yy > 0.0) ? r.raw / std::sqrt(xx * yy) : kUndefined;

    require(permutations >= 100,
            "need at least 100 permutations, got " + std::to_string(permutations));
    int exceed = 0;
    for (int b = 0; b < permutations; ++b) {
        auto perm = random_permutation(static_cast<std::size_t>(x.size()), seed,
                                       static_cast<std::uint64_t>(b));
        if (detail::weighted_hsic_permuted(gx, gy, w, perm) >= r.raw) ++exceed;
    }
    r.p_value = (1.0 + exceed) / (1.0 + permutations);
    return r;
}

// ---------------------------------------------------------------------------
// Dependence measures over a whole trajectory dataset.

struct HsicOptions {
    HsicVariant variant = HsicVariant::global;
    double bound = 70.0;
    double s = 0.2;  // filter sharpness, fraction of the output deviation
    KernelSpec kernel_x{};
    KernelSpec kernel_y{};
    PValueMethod method = PValueMethod::asymptotic;
    int permutations = 500;
    std::uint64_t seed = 0;
    int jobs = 1;
};

/// Per-(input, timestep) dependence grid. Cells that cannot be estimated
/// (constant output, no scale) hold the undefined marker; a flat filtered
/// output in the target variant reports exact zeros instead, since that is
/// the estimator's true value there.
struct HsicTimeSeries {
    std::vector<std::string> input_names;
    std::vector<double> times;
    Eigen::MatrixXd index;    // n_steps x d, normalized value
    Eigen::MatrixXd raw;      // n_steps x d, raw statistic
    Eigen::MatrixXd pvalue;   // n_steps x d
    std::vector<int> target_size;  // per timestep; n for the global variant
    HsicVariant variant = HsicVariant::global;
    PValueMethod method = PValueMethod::asymptotic;
};

inline HsicTimeSeries hsic_timeseries(const TrajectoryDataset& ds, const HsicOptions& opts) {
    validate(ds);
    const Eigen::Index n = ds.rows();
    const std::size_t d = ds.dim();
    const std::size_t n_steps = ds.n_steps();
    require(n >= 6, "dependence grid needs at least six rows");
    if (opts.variant == HsicVariant::conditional)
        require(opts.method == PValueMethod::permutation,
                "the conditional variant supports only permutation p-values");
    if (opts.method == PValueMethod::permutation)
        require(opts.permutations >= 100, "need at least 100 permutations, got " +
                                              std::to_string(opts.permutations));

    HsicTimeSeries ts;
    ts.input_names = ds.input_names;
    ts.times = ds.times;
    ts.variant = opts.variant;
    ts.method = opts.method;
    ts.index = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n_steps),
                                         static_cast<Eigen::Index>(d), kUndefined);
    ts.raw = ts.index;
    ts.pvalue = ts.index;
    ts.target_size.assign(n_steps, 0);

    // input grams do not depend on the timestep: compute them once
    std::vector<Eigen::MatrixXd> gx(d);
    for (std::size_t i = 0; i < d; ++i) {
        gx[i] = gram(ds.inputs.col(static_cast<Eigen::Index>(i)), opts.kernel_x,
                     "input " + ds.input_names[i]);
        if (opts.variant != HsicVariant::conditional) gx[i] = center_gram(gx[i]);
    }

    parallel_for(n_steps, opts.jobs, [&](std::size_t k) {
        const Eigen::Index kk = static_cast<Eigen::Index>(k);
        const Eigen::VectorXd yk = ds.outputs.col(kk);
        auto cell_seed = [&](std::size_t i) {
            return derive_seed(opts.seed,
                               "hsic-" + std::to_string(k) + "-" + std::to_string(i));
        };
        try {
            if (opts.variant == HsicVariant::global) {
                ts.target_size[k] = static_cast<int>(n);
                Eigen::MatrixXd ky_c = center_gram(gram(yk, opts.kernel_y, "output"));
                for (std::size_t i = 0; i < d; ++i) {
                    ts.raw(kk, static_cast<Eigen::Index>(i)) = hsic_from_centered(gx[i], ky_c);
                    ts.index(kk, static_cast<Eigen::Index>(i)) = r2_from_centered(gx[i], ky_c);
                    ts.pvalue(kk, static_cast<Eigen::Index>(i)) =
                        opts.method == PValueMethod::asymptotic
                            ? asymptotic_pvalue(gx[i], ky_c)
                            : permutation_pvalue(gx[i], ky_c, opts.permutations, cell_seed(i));
                }
            } else if (opts.variant == HsicVariant::target) {
                TargetFilter tf = target_filter(yk, opts.bound, opts.s);
                ts.target_size[k] = tf.target_size;
                if (tf.weights.maxCoeff() - tf.weights.minCoeff() < 1e-12) {
                    for (std::size_t i = 0; i < d; ++i) {
                        ts.raw(kk, static_cast<Eigen::Index>(i)) = 0.0;
                        ts.index(kk, static_cast<Eigen::Index>(i)) = 0.0;
                        ts.pvalue(kk, static_cast<Eigen::Index>(i)) = 1.0;
                    }
                    return;
                }
                Eigen::MatrixXd ky_c =
                    center_gram(gram(tf.weights, opts.kernel_y, "filtered output"));
                for (std::size_t i = 0; i < d; ++i) {
                    ts.raw(kk, static_cast<Eigen::Index>(i)) = hsic_from_centered(gx[i], ky_c);
                    ts.index(kk, static_cast<Eigen::Index>(i)) = r2_from_centered(gx[i], ky_c);
                    ts.pvalue(kk, static_cast<Eigen::Index>(i)) =
                        opts.method == PValueMethod::asymptotic
                            ? asymptotic_pvalue(gx[i], ky_c)
                            : permutation_pvalue(gx[i], ky_c, opts.permutations, cell_seed(i));
                }
            } else {
                TargetFilter tf = target_filter(yk, opts.bound, opts.s);
                ts.target_size[k] = tf.target_size;
                double total = tf.weights.sum();
                require(total > 0.0, "all conditional weights are zero");
                Eigen::VectorXd w = tf.weights / total;
                double bw_y = opts.kernel_y.bandwidth > 0.0
                                  ? opts.kernel_y.bandwidth
                                  : weighted_median_bandwidth(yk, w, "conditioned output");
                Eigen::MatrixXd gy = gram(yk, fixed_kernel(bw_y), "conditioned output");
                double yy = weighted_hsic(gy, gy, w);
                for (std::size_t i = 0; i < d; ++i) {
                    double raw = weighted_hsic(gx[i], gy, w);
                    double xx = weighted_hsic(gx[i], gx[i], w);
                    ts.raw(kk, static_cast<Eigen::Index>(i)) = raw;
                    ts.index(kk, static_cast<Eigen::Index>(i)) =
                        (xx > 0.0 && yy > 0.0) ? raw / std::sqrt(xx * yy) : kUndefined;
                    int exceed = 0;
                    for (int b = 0; b < opts.permutations; ++b) {
                        auto perm = random_permutation(static_cast<std::size_t>(n), cell_seed(i),
                                                       static_cast<std::uint64_t>(b));
                        if (detail::weighted_hsic_permuted(gx[i], gy, w, perm) >= raw) ++exceed;
                    }
                    ts.pvalue(kk, static_cast<Eigen::Index>(i)) =
                        (1.0 + exceed) / (1.0 + opts.permutations);
                }
            }
        } catch (const Error&) {
            // cell failure (typically a constant output column): leave the
            // undefined markers in place
        }
    });
    return ts;
}

}  // namespace senskit

#endif  // SENSKIT_HSIC_HPP
