#ifndef SENSKIT_KERNELS_HPP
#define SENSKIT_KERNELS_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "senskit/common.hpp"

namespace senskit {

enum class KernelKind { gaussian_rbf };

/// Gaussian RBF kernel k(u, v) = exp(-(u - v)^2 / (2 s^2)). A bandwidth of
/// zero is the marker for "derive s from the data by the median heuristic".
struct KernelSpec {
    KernelKind kind = KernelKind::gaussian_rbf;
    double bandwidth = 0.0;
};

inline KernelSpec median_heuristic_kernel() { return KernelSpec{}; }

inline KernelSpec fixed_kernel(double bandwidth) {
    require(std::isfinite(bandwidth) && bandwidth > 0.0,
            "kernel bandwidth must be positive, got " + format_double(bandwidth));
    return KernelSpec{KernelKind::gaussian_rbf, bandwidth};
}

/// Median of the positive pairwise distances. Zero-distance pairs are
/// excluded so repeated values cannot drive the bandwidth to zero; a fully
/// constant sample has no scale at all and is an error.
inline double median_bandwidth(const Eigen::VectorXd& x, const std::string& label) {
    const Eigen::Index n = x.size();
    require(n >= 2, "median heuristic needs at least two samples (" + label + ")");
    std::vector<double> dist;
    dist.reserve(static_cast<std::size_t>(n) * (static_cast<std::size_t>(n) - 1) / 2);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double d = std::abs(x(i) - x(j));
            if (d > 0.0) dist.push_back(d);
        }
    require(!dist.empty(), "all samples of " + label + " are identical; no bandwidth scale");
    std::size_t mid = dist.size() / 2;
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
    double hi = dist[mid];
    if (dist.size() % 2 == 1) return hi;
    double lo = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

/// Median of positive pairwise distances under pair weights w_i w_j: the
/// smallest distance at which the cumulative pair weight reaches half.
inline double weighted_median_bandwidth(const Eigen::VectorXd& x, const Eigen::VectorXd& w,
                                        const std::string& label) {
    const Eigen::Index n = x.size();
    require(n >= 2, "median heuristic needs at least two samples (" + label + ")");
    require(w.size() == n, "weight vector length mismatch (" + label + ")");
    std::vector<std::pair<double, double>> dist;  // (distance, pair weight)
    dist.reserve(static_cast<std::size_t>(n) * (static_cast<std::size_t>(n) - 1) / 2);
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double d = std::abs(x(i) - x(j));
            double pw = w(i) * w(j);
            if (d > 0.0 && pw > 0.0) {
                dist.emplace_back(d, pw);
                total += pw;
            }
        }
    require(!dist.empty(),
            "no positive-weight distance pairs for " + label + "; no bandwidth scale");
    std::sort(dist.begin(), dist.end());
    double acc = 0.0;
    for (const auto& [d, pw] : dist) {
        acc += pw;
        if (acc >= 0.5 * total) return d;
    }
    return dist.back().first;
}

inline double resolve_bandwidth(const Eigen::VectorXd& x, const KernelSpec& spec,
                                const std::string& label) {
    if (spec.bandwidth > 0.0) return spec.bandwidth;
    return median_bandwidth(x, label);
}

/// Gram matrix of the sample under the (resolved) kernel. Symmetric, unit
/// diagonal, positive semi-definite.
inline Eigen::MatrixXd gram(const Eigen::VectorXd& x, const KernelSpec& spec,
                            const std::string& label = "sample") {
    const Eigen::Index n = x.size();
    require(n >= 2, "gram matrix needs at least two samples (" + label + ")");
    const double s = resolve_bandwidth(x, spec, label);
    const double inv = -0.5 / (s * s);
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double d = x(i) - x(j);
            double v = std::exp(inv * d * d);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

/// Doubly centered Gram: HKH with H = I - (1/n) 11^T. Rows and columns sum
/// to zero, which is what makes constants invisible to the estimators.
inline Eigen::MatrixXd center_gram(const Eigen::MatrixXd& k) {
    const double total = k.sum() / (static_cast<double>(k.rows()) * static_cast<double>(k.cols()));
    Eigen::VectorXd row_mean = k.rowwise().mean();
    Eigen::MatrixXd out = k;
    out.colwise() -= row_mean;
    out.rowwise() -= row_mean.transpose();
    out.array() += total;
    return out;
}

}  // namespace senskit

#endif  // SENSKIT_KERNELS_HPP
