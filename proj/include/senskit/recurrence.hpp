#ifndef SENSKIT_RECURRENCE_HPP
#define SENSKIT_RECURRENCE_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "senskit/common.hpp"
#include "senskit/marginal.hpp"
#include "senskit/quadrature.hpp"

namespace senskit {

/// Three-term recurrence of the monic orthogonal polynomials of a measure:
///
///   pi_{k+1}(x) = (x - alpha_k) pi_k(x) - beta_k pi_{k-1}(x)
///
/// with beta_0 = total mass. For a probability measure beta_1 equals the
/// variance. norm[k] = sqrt(beta_0 * ... * beta_k) is the L2 norm of pi_k, so
/// the orthonormal family is phi_k = pi_k / norm[k].
struct Recurrence {
    std::vector<double> alpha;  // size K   (max degree K)
    std::vector<double> beta;   // size K+1, beta[0] = mass, beta[k>0] > 0
    std::vector<double> norm;   // size K+1

    int max_degree() const { return static_cast<int>(alpha.size()); }

    /// Orthonormal values phi_0(z) .. phi_K(z). Stable forward evaluation of
    /// the normalized recurrence; no factorials or explicit coefficients.
    void eval_orthonormal(double z, std::vector<double>& phi) const {
        const int K = max_degree();
        phi.resize(K + 1);
        phi[0] = 1.0 / std::sqrt(beta[0]);
        if (K == 0) return;
        phi[1] = (z - alpha[0]) * phi[0] / std::sqrt(beta[1]);
        for (int k = 1; k < K; ++k)
            phi[k + 1] =
                ((z - alpha[k]) * phi[k] - std::sqrt(beta[k]) * phi[k - 1]) / std::sqrt(beta[k + 1]);
    }

    double orthonormal(int degree, double z) const {
        require(degree >= 0 && degree <= max_degree(),
                "polynomial degree " + std::to_string(degree) + " above recurrence limit " +
                    std::to_string(max_degree()));
        std::vector<double> phi;
        eval_orthonormal(z, phi);
        return phi[degree];
    }

    /// Monic values pi_0(z) .. pi_K(z).
    void eval_monic(double z, std::vector<double>& pi) const {
        const int K = max_degree();
        pi.resize(K + 1);
        pi[0] = 1.0;
        if (K == 0) return;
        pi[1] = z - alpha[0];
        for (int k = 1; k < K; ++k)
            pi[k + 1] = (z - alpha[k]) * pi[k] - beta[k] * pi[k - 1];
    }

    void finalize_norms() {
        norm.resize(beta.size());
        double prod = 1.0;
        for (std::size_t k = 0; k < beta.size(); ++k) {
            prod *= beta[k];
            norm[k] = std::sqrt(prod);
        }
    }
};

/// Probabilists' Hermite recurrence for the standard normal: alpha_k = 0,
/// beta_k = k. Inputs are standardized with (x - mu) / sigma before use.
inline Recurrence hermite_family(int max_degree) {
    require(max_degree >= 0, "max_degree must be nonnegative");
    Recurrence r;
    r.alpha.assign(max_degree, 0.0);
    r.beta.resize(max_degree + 1);
    r.beta[0] = 1.0;
    for (int k = 1; k <= max_degree; ++k) r.beta[k] = static_cast<double>(k);
    r.finalize_norms();
    return r;
}

/// Stieltjes procedure on an explicit density over a finite support given by
/// breakpoints (interior kinks included). Every inner product is evaluated by
/// adaptive Gauss-Kronrod quadrature at 1e-12 relative tolerance; a failure to
/// converge names the degree it happened at.
inline Recurrence stieltjes_from_density(const std::function<double(double)>& density,
                                         const std::vector<double>& breakpoints, int max_degree,
                                         const std::string& label = "density") {
    require(max_degree >= 0, "max_degree must be nonnegative");
    require(breakpoints.size() >= 2, "stieltjes: need at least two support breakpoints");

    Recurrence r;
    r.alpha.reserve(max_degree);
    r.beta.reserve(max_degree + 1);

    // Half-width bounds |x| on the support, used to scale the absolute floor
    // for integrals that vanish by symmetry.
    double xmax = 0.0;
    for (double b : breakpoints) xmax = std::max(xmax, std::abs(b));

    auto inner = [&](int degree, bool with_x, double rel, double abs,
                     const std::string& what) -> double {
        QuadratureOptions opts;
        opts.rel_tol = rel;
        opts.abs_tol = abs;
        opts.label = label + ": " + what + " at degree " + std::to_string(degree);
        return integrate_segments(
                   [&](double x) {
                       std::vector<double> pi;
                       r.eval_monic(x, pi);
                       double p = pi[degree];
                       double v = p * p * density(x);
                       return with_x ? x * v : v;
                   },
                   breakpoints, opts)
            .value;
    };

    std::vector<double> norm2(max_degree + 1, 0.0);
    for (int k = 0; k <= max_degree; ++k) {
        // The recurrence holds coefficients up to degree k-1 here, which is
        // exactly what eval_monic needs to produce pi_k.
        norm2[k] = inner(k, false, 1e-12, 0.0, "squared norm");
        require(norm2[k] > 0.0 && std::isfinite(norm2[k]),
                label + ": degenerate measure, vanishing norm at degree " + std::to_string(k));
        if (k == 0)
            r.beta.push_back(norm2[0]);
        else
            r.beta.push_back(norm2[k] / norm2[k - 1]);
        if (k < max_degree) {
            double num = inner(k, true, 1e-12, norm2[k] * xmax * 1e-14, "first moment");
            r.alpha.push_back(num / norm2[k]);
        }
    }
    r.finalize_norms();
    return r;
}

/// Stieltjes recurrence of a finite-support marginal (the triangular kinds).
/// Works on the measure as given; standardize first if a standardized family
/// is wanted.
inline Recurrence stieltjes_family(const Marginal& m, int max_degree) {
    require(m.kind() == MarginalKind::triangular,
            "stieltjes_family needs a finite-support marginal; use hermite_family for gaussians");
    std::vector<double> breaks{m.tri_a(), m.tri_b(), m.tri_c()};
    return stieltjes_from_density([m](double x) { return m.pdf(x); }, breaks, max_degree,
                                  "triangular(" + format_double(m.tri_a()) + ", " +
                                      format_double(m.tri_b()) + ", " + format_double(m.tri_c()) +
                                      ")");
}

/// Recurrence for the standardized form of a marginal: Hermite for Gaussian,
/// Stieltjes on [-1, 1] for triangular.
inline Recurrence standardized_family(const Marginal& m, int max_degree) {
    if (m.kind() == MarginalKind::gaussian) return hermite_family(max_degree);
    return stieltjes_family(m.standardized().first, max_degree);
}

/// Largest |<phi_j, phi_k> - delta_jk| for j, k <= degree, by quadrature over
/// the standardized measure. Gaussian support is cut at |z| = 16 where the
/// integrand mass is far below the tolerances of interest.
inline double orthonormality_defect(const Recurrence& rec, const Marginal& standardized_marginal,
                                    int degree) {
    require(degree <= rec.max_degree(), "orthonormality check beyond recurrence degree");
    std::vector<double> breaks;
    if (standardized_marginal.kind() == MarginalKind::gaussian)
        breaks = {-16.0, 0.0, 16.0};
    else
        breaks = {standardized_marginal.tri_a(), standardized_marginal.tri_b(),
                  standardized_marginal.tri_c()};

    double worst = 0.0;
    for (int j = 0; j <= degree; ++j) {
        for (int k = j; k <= degree; ++k) {
            QuadratureOptions opts;
            opts.rel_tol = 1e-12;
            opts.abs_tol = 1e-12;
            opts.label = "orthonormality (" + std::to_string(j) + ", " + std::to_string(k) + ")";
            double ip = integrate_segments(
                            [&](double z) {
                                std::vector<double> phi;
                                rec.eval_orthonormal(z, phi);
                                return phi[j] * phi[k] * standardized_marginal.pdf(z);
                            },
                            breaks, opts)
                            .value;
            double defect = std::abs(ip - (j == k ? 1.0 : 0.0));
            worst = std::max(worst, defect);
        }
    }
    return worst;
}

}  // namespace senskit

#endif
