#ifndef SENSKIT_LARS_HPP
#define SENSKIT_LARS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "senskit/common.hpp"

namespace senskit {

/// Outcome of sparse selection for one response vector: which candidate
/// columns survive (always including column 0, the constant term), their
/// least-squares coefficients, and the model-selection score.
struct Selection {
    std::vector<std::size_t> columns;  // ascending candidate column ids
    Eigen::VectorXd coeffs;            // aligned with columns
    double loo_error = kUndefined;     // corrected leave-one-out error, relative
};

enum class SelectionMode { lars, ols };

struct SelectionOptions {
    std::size_t max_terms = 0;  // 0: limited only by the sample size
    int stall_window = 10;      // prefixes explored past the best before stopping
};

namespace detail {

/// Least-squares state over a growing column set, kept as a thin QR factor
/// (modified Gram-Schmidt with one re-orthogonalization pass). Supports the
/// leave-one-out diagnostics needed for model selection in O(n k) per column.
class GrowingOls {
  public:
    GrowingOls(const Eigen::VectorXd& y, std::size_t max_cols)
        : qmat_(y.size(), static_cast<Eigen::Index>(max_cols)),
          rmat_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(max_cols),
                                      static_cast<Eigen::Index>(max_cols))),
          rinv_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(max_cols),
                                      static_cast<Eigen::Index>(max_cols))),
          qty_(max_cols),
          resid_(y),
          hat_(Eigen::VectorXd::Zero(y.size())) {}

    /// Append one column. Returns false (state unchanged) when the column is
    /// numerically in the span of the previous ones.
    bool append(const Eigen::VectorXd& col) {
        const Eigen::Index k = static_cast<Eigen::Index>(k_);
        Eigen::VectorXd v = col;
        Eigen::VectorXd rcol = Eigen::VectorXd::Zero(k);
        for (int pass = 0; pass < 2; ++pass) {
            if (k == 0) break;
            Eigen::VectorXd c = qmat_.leftCols(k).transpose() * v;
            rcol += c;
            v -= qmat_.leftCols(k) * c;
        }
        double rkk = v.norm();
        if (!(rkk > 1e-12 * (col.norm() + 1e-300))) return false;

        qmat_.col(k) = v / rkk;
        rmat_.col(k).head(k) = rcol;
        rmat_(k, k) = rkk;
        // grow R^{-1}: the leading block is unchanged for a triangular matrix
        rinv_(k, k) = 1.0 / rkk;
        if (k > 0)
            rinv_.col(k).head(k) =
                -(rinv_.topLeftCorner(k, k) * rcol) / rkk;
        trinv_ += rinv_.col(k).head(k + 1).squaredNorm();

        double proj = qmat_.col(k).dot(resid_);
        qty_(k) = proj;
        resid_ -= qmat_.col(k) * proj;
        hat_ += qmat_.col(k).cwiseAbs2();
        ++k_;
        return true;
    }

    std::size_t cols() const { return k_; }
    double sse() const { return resid_.squaredNorm(); }
    double trace_inverse() const { return trinv_; }

    /// Mean squared leave-one-out residual from the hat diagonal; infinity
    /// when some leverage reaches 1 (interpolating fit).
    double loo_mean_square() const {
        const Eigen::Index n = resid_.size();
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double denom = 1.0 - hat_(i);
            if (denom < 1e-8) return std::numeric_limits<double>::infinity();
            double e = resid_(i) / denom;
            acc += e * e;
        }
        return acc / static_cast<double>(n);
    }

    Eigen::VectorXd solve() const {
        const Eigen::Index k = static_cast<Eigen::Index>(k_);
        return rinv_.topLeftCorner(k, k) * qty_.head(k);
    }

    /// Lower-triangular solve R^T t = s for the equiangular direction.
    Eigen::VectorXd solve_transposed(const Eigen::VectorXd& s) const {
        const Eigen::Index k = static_cast<Eigen::Index>(k_);
        return rmat_.topLeftCorner(k, k)
            .transpose()
            .triangularView<Eigen::Lower>()
            .solve(s);
    }

    const Eigen::MatrixXd& q() const { return qmat_; }

  private:
    Eigen::MatrixXd qmat_, rmat_, rinv_;
    Eigen::VectorXd qty_, resid_, hat_;
    double trinv_ = 0.0;
    std::size_t k_ = 0;
};

}  // namespace detail

/// Candidate columns prepared for least-angle selection: column 0 of the raw
/// design is the constant and is excluded (it becomes the intercept); the
/// rest are centered and scaled to unit norm. Response-independent, so one
/// preparation serves every timestep of a trajectory fit.
struct CandidateSet {
    Eigen::MatrixXd normalized;       // n x m_usable, centered unit columns
    std::vector<std::size_t> ids;     // normalized col -> raw design col
};

inline CandidateSet prepare_candidates(const Eigen::MatrixXd& design) {
    const Eigen::Index n = design.rows();
    CandidateSet cs;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 1; j < design.cols(); ++j) {
        double mean = design.col(j).mean();
        double norm = (design.col(j).array() - mean).matrix().norm();
        if (norm > 1e-12 * std::sqrt(static_cast<double>(n)) *
                       (design.col(j).cwiseAbs().maxCoeff() + 1e-300))
            keep.push_back(j);
    }
    cs.normalized.resize(n, static_cast<Eigen::Index>(keep.size()));
    cs.ids.reserve(keep.size());
    for (std::size_t t = 0; t < keep.size(); ++t) {
        Eigen::Index j = keep[t];
        double mean = design.col(j).mean();
        Eigen::VectorXd c = design.col(j).array() - mean;
        cs.normalized.col(static_cast<Eigen::Index>(t)) = c / c.norm();
        cs.ids.push_back(static_cast<std::size_t>(j));
    }
    return cs;
}

namespace detail {

/// Least-angle regression on centered unit candidates against a centered
/// response. Returns the order in which candidates enter the active set.
inline std::vector<std::size_t> lars_entry_order(const Eigen::MatrixXd& xt,
                                                 const Eigen::VectorXd& yc,
                                                 std::size_t max_active) {
    const Eigen::Index m = xt.cols();
    const double y_norm = yc.norm();
    std::vector<std::size_t> order;
    if (m == 0 || max_active == 0 || !(y_norm > 0.0)) return order;

    std::vector<bool> blocked(static_cast<std::size_t>(m), false);  // active or dependent
    Eigen::VectorXd r = yc;
    GrowingOls factor(yc, std::min<std::size_t>(static_cast<std::size_t>(m), max_active) + 1);

    while (order.size() < max_active) {
        Eigen::VectorXd c = xt.transpose() * r;
        double cmax = 0.0;
        Eigen::Index jbest = -1;
        for (Eigen::Index j = 0; j < m; ++j) {
            if (blocked[static_cast<std::size_t>(j)]) continue;
            double a = std::abs(c(j));
            if (a > cmax) {
                cmax = a;
                jbest = j;
            }
        }
        if (jbest < 0 || cmax <= 1e-12 * y_norm) break;

        if (!factor.append(xt.col(jbest))) {
            blocked[static_cast<std::size_t>(jbest)] = true;  // in the active span already
            continue;
        }
        blocked[static_cast<std::size_t>(jbest)] = true;
        order.push_back(static_cast<std::size_t>(jbest));

        const Eigen::Index k = static_cast<Eigen::Index>(order.size());
        Eigen::VectorXd s(k);
        for (Eigen::Index a = 0; a < k; ++a)
            s(a) = c(static_cast<Eigen::Index>(order[static_cast<std::size_t>(a)])) >= 0.0 ? 1.0
                                                                                          : -1.0;
        Eigen::VectorXd t = factor.solve_transposed(s);
        double bb = t.squaredNorm();
        if (!(bb > 0.0) || !std::isfinite(bb)) break;
        double aa = 1.0 / std::sqrt(bb);
        Eigen::VectorXd u = factor.q().leftCols(k) * (t * aa);

        Eigen::VectorXd adot = xt.transpose() * u;
        double full_step = cmax / aa;
        double gamma = full_step;
        for (Eigen::Index j = 0; j < m; ++j) {
            if (blocked[static_cast<std::size_t>(j)]) continue;
            for (double cand : {(cmax - c(j)) / (aa - adot(j)), (cmax + c(j)) / (aa + adot(j))}) {
                if (std::isfinite(cand) && cand > 1e-14 && cand < gamma) gamma = cand;
            }
        }
        r -= gamma * u;
        if (r.squaredNorm() <= 1e-24 * y_norm * y_norm) break;
    }
    return order;
}

}  // namespace detail

/// Sparse fit of one response column against the candidate design.
///
/// lars mode walks the least-angle entry order and keeps the prefix whose
/// corrected leave-one-out error is smallest; the correction multiplies the
/// raw leave-one-out mean square by (n/(n-P)) (1 + tr((Z^T Z)^{-1})) of the
/// selected design, which penalizes near-singular selections. ols mode keeps
/// every candidate and merely solves the dense problem.
inline Selection select_sparse(const Eigen::MatrixXd& design, const CandidateSet& candidates,
                               const Eigen::VectorXd& y, SelectionMode mode,
                               const std::string& label, const SelectionOptions& opts = {}) {
    const Eigen::Index n = design.rows();
    require(n >= 2, "need at least two rows to fit (" + label + ")");
    require(design.cols() >= 1, "empty candidate design (" + label + ")");

    const double ybar = y.mean();
    const Eigen::VectorXd yc = y.array() - ybar;
    const double sst = yc.squaredNorm();
    const double variance_floor = 1e-14 * std::max(1.0, ybar * ybar);

    Selection out;
    if (sst / static_cast<double>(n) <= variance_floor) {
        // degenerate column: constant surrogate
        out.columns = {0};
        out.coeffs = Eigen::VectorXd::Constant(1, ybar);
        out.loo_error = 0.0;
        return out;
    }
    const double sample_var = sst / static_cast<double>(n - 1);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

    if (mode == SelectionMode::ols) {
        const Eigen::Index p = design.cols();
        require(n > p, "ols needs more rows than basis terms: " + std::to_string(n) + " rows, " +
                           std::to_string(p) + " terms (" + label + ")");
        detail::GrowingOls ols(y, static_cast<std::size_t>(p));
        for (Eigen::Index j = 0; j < p; ++j) {
            if (!ols.append(design.col(j))) {
                Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
                double cond = std::abs(qr.maxPivot()) /
                              std::max(std::abs(qr.matrixR()(p - 1, p - 1)), 1e-300);
                fail("rank-deficient design at " + label + ": column " + std::to_string(j) +
                     " is dependent, condition estimate " + format_double(cond));
            }
        }
        out.columns.resize(static_cast<std::size_t>(p));
        for (Eigen::Index j = 0; j < p; ++j) out.columns[static_cast<std::size_t>(j)] =
            static_cast<std::size_t>(j);
        out.coeffs = ols.solve();
        double t_factor = (static_cast<double>(n) / static_cast<double>(n - p)) *
                          (1.0 + ols.trace_inverse());
        out.loo_error = ols.loo_mean_square() * t_factor / sample_var;
        return out;
    }

    // ---- least-angle path ----
    std::size_t cap = static_cast<std::size_t>(std::max<Eigen::Index>(n - 2, 0));
    cap = std::min<std::size_t>(cap, static_cast<std::size_t>(candidates.normalized.cols()));
    if (opts.max_terms > 0) cap = std::min(cap, opts.max_terms);
    std::vector<std::size_t> order = detail::lars_entry_order(candidates.normalized, yc, cap);

    detail::GrowingOls ols(y, order.size() + 1);
    bool ok = ols.append(ones);
    require(ok, "constant column rejected (" + label + ")");

    auto corrected_error = [&](const detail::GrowingOls& state) {
        const double p_terms = static_cast<double>(state.cols());
        if (static_cast<double>(n) - p_terms < 1.0)
            return std::numeric_limits<double>::infinity();
        double t_factor = (static_cast<double>(n) / (static_cast<double>(n) - p_terms)) *
                          (1.0 + state.trace_inverse());
        return state.loo_mean_square() * t_factor / sample_var;
    };

    double best_eps = corrected_error(ols);
    std::size_t best_len = 0;
    std::vector<std::size_t> kept;  // columns that actually entered, in order
    for (std::size_t step = 0; step < order.size(); ++step) {
        if (!ols.append(design.col(static_cast<Eigen::Index>(candidates.ids[order[step]]))))
            continue;  // dependent once the intercept is present
        kept.push_back(candidates.ids[order[step]]);
        double eps = corrected_error(ols);
        if (eps < best_eps) {
            best_eps = eps;
            best_len = kept.size();
        } else if (kept.size() > best_len + static_cast<std::size_t>(opts.stall_window)) {
            break;
        }
        if (std::isinf(eps) || ols.sse() <= 1e-28 * sst) break;
    }

    std::vector<std::size_t> chosen{0};
    chosen.insert(chosen.end(), kept.begin(), kept.begin() + static_cast<std::ptrdiff_t>(best_len));
    std::sort(chosen.begin(), chosen.end());

    // final least squares on the chosen set
    Eigen::MatrixXd zsel(n, static_cast<Eigen::Index>(chosen.size()));
    for (std::size_t j = 0; j < chosen.size(); ++j)
        zsel.col(static_cast<Eigen::Index>(j)) = design.col(static_cast<Eigen::Index>(chosen[j]));
    detail::GrowingOls refit(y, chosen.size());
    for (Eigen::Index j = 0; j < zsel.cols(); ++j) {
        if (!refit.append(zsel.col(j)))
            fail("selected design became rank-deficient at " + label);
    }
    out.columns = std::move(chosen);
    out.coeffs = refit.solve();
    out.loo_error = best_eps;
    return out;
}

}  // namespace senskit

#endif  // SENSKIT_LARS_HPP
