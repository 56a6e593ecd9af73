#ifndef SENSKIT_SOBOL_HPP
#define SENSKIT_SOBOL_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "senskit/pce.hpp"

namespace senskit {

/// Total variance below this is treated as "no variance to attribute" and all
/// indices at that timestep are reported undefined instead of 0/0.
inline constexpr double kVarianceFloor = 1e-14;

/// Variance decomposition of a surrogate trajectory, one row per timestep.
/// Undefined timesteps (variance collapse, e.g. right after a cleaning) carry
/// the undefined marker in every entry and false in `defined`.
struct SobolTimeSeries {
    std::vector<std::string> input_names;
    std::vector<double> times;
    Eigen::MatrixXd first;           // n_steps x d
    Eigen::MatrixXd total;           // n_steps x d
    Eigen::MatrixXd var_contrib;     // n_steps x d, output units squared
    Eigen::VectorXd interaction;     // n_steps, S_* = 1 - sum of first-order
    Eigen::VectorXd total_variance;  // n_steps, sum of squared non-constant coefficients
    std::vector<bool> defined;
};

namespace detail {

inline void check_timestep(const SparsePceSurrogate& s, std::size_t k) {
    require(k < s.times.size(), "timestep " + std::to_string(k) + " out of range (surrogate has " +
                                    std::to_string(s.times.size()) + ")");
}

}  // namespace detail

/// Sum of squared coefficients over every non-constant term: the surrogate's
/// variance at timestep k, by orthonormality of the basis.
inline double total_variance(const SparsePceSurrogate& s, std::size_t k) {
    detail::check_timestep(s, k);
    const auto& idx = s.basis.indices();
    double acc = 0.0;
    for (std::size_t j = 0; j < idx.size(); ++j) {
        if (total_degree(idx[j]) == 0) continue;
        double g = s.coeffs(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
        acc += g * g;
    }
    return acc;
}

/// Closed Sobol' index of one input group: energy of the terms whose support
/// is exactly that group, normalized by the total variance. Undefined when
/// the variance is below the floor.
inline double group_index(const SparsePceSurrogate& s, const std::vector<std::size_t>& group,
                          std::size_t k) {
    detail::check_timestep(s, k);
    require(!group.empty(), "empty input group");
    const std::size_t d = s.basis.dim();
    std::vector<bool> in_group(d, false);
    for (std::size_t i : group) {
        require(i < d, "group input " + std::to_string(i) + " out of range");
        in_group[i] = true;
    }
    double tv = total_variance(s, k);
    if (tv < kVarianceFloor) return kUndefined;
    const auto& idx = s.basis.indices();
    double acc = 0.0;
    for (std::size_t j = 0; j < idx.size(); ++j) {
        bool match = true;
        for (std::size_t i = 0; i < d; ++i) {
            if ((idx[j][i] > 0) != in_group[i]) {
                match = false;
                break;
            }
        }
        if (!match) continue;
        double g = s.coeffs(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
        acc += g * g;
    }
    return acc / tv;
}

inline double first_order(const SparsePceSurrogate& s, std::size_t i, std::size_t k) {
    return group_index(s, {i}, k);
}

/// Total-order index: energy of every term that involves input i at all.
inline double total_order(const SparsePceSurrogate& s, std::size_t i, std::size_t k) {
    detail::check_timestep(s, k);
    require(i < s.basis.dim(), "input " + std::to_string(i) + " out of range");
    double tv = total_variance(s, k);
    if (tv < kVarianceFloor) return kUndefined;
    const auto& idx = s.basis.indices();
    double acc = 0.0;
    for (std::size_t j = 0; j < idx.size(); ++j) {
        if (idx[j][i] <= 0) continue;
        double g = s.coeffs(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
        acc += g * g;
    }
    return acc / tv;
}

/// What first-order effects leave unexplained: S_* = 1 - sum of S_i.
inline double interaction_residual(const SparsePceSurrogate& s, std::size_t k) {
    detail::check_timestep(s, k);
    double tv = total_variance(s, k);
    if (tv < kVarianceFloor) return kUndefined;
    double acc = 0.0;
    for (std::size_t i = 0; i < s.basis.dim(); ++i) acc += first_order(s, i, k);
    return 1.0 - acc;
}

/// Unnormalized first-order contribution, in output units squared.
inline double variance_contribution(const SparsePceSurrogate& s, std::size_t i, std::size_t k) {
    detail::check_timestep(s, k);
    require(i < s.basis.dim(), "input " + std::to_string(i) + " out of range");
    const auto& idx = s.basis.indices();
    double acc = 0.0;
    for (std::size_t j = 0; j < idx.size(); ++j) {
        bool only_i = idx[j][i] > 0;
        if (!only_i) continue;
        for (std::size_t l = 0; l < idx[j].size(); ++l) {
            if (l != i && idx[j][l] > 0) {
                only_i = false;
                break;
            }
        }
        if (!only_i) continue;
        double g = s.coeffs(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
        acc += g * g;
    }
    return acc;
}

inline SobolTimeSeries sobol_timeseries(const SparsePceSurrogate& s) {
    const std::size_t n_steps = s.times.size();
    const std::size_t d = s.basis.dim();
    SobolTimeSeries ts;
    ts.input_names = s.basis.input_names();
    ts.times = s.times;
    ts.first.resize(static_cast<Eigen::Index>(n_steps), static_cast<Eigen::Index>(d));
    ts.total.resize(static_cast<Eigen::Index>(n_steps), static_cast<Eigen::Index>(d));
    ts.var_contrib.resize(static_cast<Eigen::Index>(n_steps), static_cast<Eigen::Index>(d));
    ts.interaction.resize(static_cast<Eigen::Index>(n_steps));
    ts.total_variance.resize(static_cast<Eigen::Index>(n_steps));
    ts.defined.assign(n_steps, false);
    for (std::size_t k = 0; k < n_steps; ++k) {
        const Eigen::Index kk = static_cast<Eigen::Index>(k);
        double tv = total_variance(s, k);
        ts.total_variance(kk) = tv;
        bool ok = tv >= kVarianceFloor;
        ts.defined[k] = ok;
        for (std::size_t i = 0; i < d; ++i) {
            const Eigen::Index ii = static_cast<Eigen::Index>(i);
            ts.var_contrib(kk, ii) = variance_contribution(s, i, k);
            ts.first(kk, ii) = ok ? ts.var_contrib(kk, ii) / tv : kUndefined;
            ts.total(kk, ii) = ok ? total_order(s, i, k) : kUndefined;
        }
        ts.interaction(kk) = ok ? 1.0 - ts.first.row(kk).sum() : kUndefined;
    }
    return ts;
}

}  // namespace senskit

#endif  // SENSKIT_SOBOL_HPP
