#ifndef SENSKIT_QUADRATURE_HPP
#define SENSKIT_QUADRATURE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "senskit/common.hpp"

namespace senskit {

// Adaptive Gauss-Kronrod integration on finite intervals. The 7/15 pair is
// constructed at first use instead of being copied from a table:
//
//   * Gauss-Legendre nodes/weights come from the Golub-Welsch eigenproblem of
//     the Jacobi matrix.
//   * The 8 added Kronrod nodes are the roots of the monic degree-8 polynomial
//     E with  integral( E(x) * q(x) * P7(x) dx ) = 0  for all deg(q) <= 7,
//     where P7 is the degree-7 Legendre polynomial. The roots are bracketed by
//     the Gauss nodes and the interval endpoints.
//   * Kronrod weights solve the exactness conditions in the Legendre basis.
//
// The construction is validated by tests on the exactness degrees (13 for the
// embedded rule, 22 for the extended one), which pins the rule completely.

namespace quad {

/// Legendre values P_0(x) .. P_n(x).
inline void legendre_values(int n, double x, std::vector<double>& p) {
    p.resize(n + 1);
    p[0] = 1.0;
    if (n >= 1) p[1] = x;
    for (int k = 1; k < n; ++k)
        p[k + 1] = ((2.0 * k + 1.0) * x * p[k] - k * p[k - 1]) / (k + 1.0);
}

/// Gauss-Legendre rule of order n on [-1, 1].
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        double b = k * k / (4.0 * k * k - 1.0);
        jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(b);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        x[i] = es.eigenvalues()(i);
        double v0 = es.eigenvectors()(0, i);
        w[i] = 2.0 * v0 * v0;
    }
}

struct GaussKronrod15 {
    std::array<double, 15> node{};
    std::array<double, 15> weight{};        // Kronrod weights
    std::array<double, 15> gauss_weight{};  // embedded G7 weights, 0 off the Gauss nodes
};

inline GaussKronrod15 build_gk15() {
    constexpr int n = 7;
    std::vector<double> gx, gw;
    gauss_legendre(n, gx, gw);

    // Exact integrals of polynomials up to degree 22 for the linear systems.
    std::vector<double> qx, qw;
    gauss_legendre(16, qx, qw);
    auto moment = [&](const std::function<double(double)>& f) {
        double s = 0.0;
        for (std::size_t i = 0; i < qx.size(); ++i) s += qw[i] * f(qx[i]);
        return s;
    };

    // Coefficients of E = P_{n+1} + sum_j c_j P_j in the Legendre basis.
    Eigen::MatrixXd mat(n + 1, n + 1);
    Eigen::VectorXd rhs(n + 1);
    std::vector<double> p;
    for (int k = 0; k <= n; ++k) {
        for (int j = 0; j <= n; ++j)
            mat(k, j) = moment([&](double x) {
                legendre_values(n + 1, x, p);
                return p[j] * std::pow(x, k) * p[n];
            });
        rhs(k) = -moment([&](double x) {
            legendre_values(n + 1, x, p);
            return p[n + 1] * std::pow(x, k) * p[n];
        });
    }
    Eigen::VectorXd coef = mat.fullPivLu().solve(rhs);

    auto eval_e = [&](double x) {
        legendre_values(n + 1, x, p);
        double s = p[n + 1];
        for (int j = 0; j <= n; ++j) s += coef(j) * p[j];
        return s;
    };

    // One root of E in each gap between consecutive Gauss nodes / endpoints.
    std::vector<double> brackets;
    brackets.push_back(-1.0);
    brackets.insert(brackets.end(), gx.begin(), gx.end());
    brackets.push_back(1.0);
    std::vector<double> kx;
    for (int i = 0; i <= n; ++i) {
        double lo = brackets[i], hi = brackets[i + 1];
        double flo = eval_e(lo);
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            double fm = eval_e(mid);
            if ((flo < 0.0) == (fm < 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        kx.push_back(0.5 * (lo + hi));
    }

    std::vector<double> nodes = gx;
    nodes.insert(nodes.end(), kx.begin(), kx.end());
    std::sort(nodes.begin(), nodes.end());

    // Weights from exactness on P_0 .. P_14.
    Eigen::MatrixXd vand(15, 15);
    for (int i = 0; i < 15; ++i) {
        legendre_values(14, nodes[i], p);
        for (int j = 0; j < 15; ++j) vand(j, i) = p[j];
    }
    Eigen::VectorXd target = Eigen::VectorXd::Zero(15);
    target(0) = 2.0;
    Eigen::VectorXd kw = vand.fullPivLu().solve(target);

    GaussKronrod15 rule;
    for (int i = 0; i < 15; ++i) {
        rule.node[i] = nodes[i];
        rule.weight[i] = kw(i);
        rule.gauss_weight[i] = 0.0;
    }
    for (int g = 0; g < n; ++g) {
        auto it = std::min_element(nodes.begin(), nodes.end(), [&](double a, double b) {
            return std::abs(a - gx[g]) < std::abs(b - gx[g]);
        });
        rule.gauss_weight[it - nodes.begin()] = gw[g];
    }
    return rule;
}

inline const GaussKronrod15& gk15() {
    static const GaussKronrod15 rule = build_gk15();
    return rule;
}

}  // namespace quad

struct QuadratureOptions {
    double rel_tol = 1e-12;
    double abs_tol = 1e-300;
    int max_intervals = 4000;
    std::string label = "integrand";  // used in failure messages
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
};

namespace quad {

struct Interval {
    double a, b, value, error;
};

inline Interval evaluate(const std::function<double(double)>& f, double a, double b) {
    const GaussKronrod15& r = gk15();
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double kron = 0.0, gauss = 0.0;
    for (int i = 0; i < 15; ++i) {
        double v = f(mid + half * r.node[i]);
        kron += r.weight[i] * v;
        gauss += r.gauss_weight[i] * v;
    }
    kron *= half;
    gauss *= half;
    return {a, b, kron, std::abs(kron - gauss)};
}

}  // namespace quad

/// Integrate f over [a, b], subdividing the worst interval until the summed
/// error estimate satisfies max(abs_tol, rel_tol * |value|). Throws when the
/// interval budget runs out before the tolerance is met.
inline QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                                  const QuadratureOptions& opts = {}) {
    require(std::isfinite(a) && std::isfinite(b), "integration bounds must be finite (" + opts.label + ")");
    std::vector<quad::Interval> segs{quad::evaluate(f, a, b)};
    for (;;) {
        double value = 0.0, error = 0.0;
        for (const auto& s : segs) {
            value += s.value;
            error += s.error;
        }
        if (error <= std::max(opts.abs_tol, opts.rel_tol * std::abs(value)))
            return {value, error, static_cast<int>(segs.size())};
        if (static_cast<int>(segs.size()) >= opts.max_intervals)
            fail("quadrature did not converge within " + std::to_string(opts.max_intervals) +
                 " intervals (" + opts.label + "): error estimate " + format_double(error));
        std::size_t worst = 0;
        for (std::size_t i = 1; i < segs.size(); ++i)
            if (segs[i].error > segs[worst].error) worst = i;
        quad::Interval w = segs[worst];
        double mid = 0.5 * (w.a + w.b);
        if (mid <= w.a || mid >= w.b)
            fail("quadrature interval collapsed at x=" + format_double(w.a) + " (" + opts.label + ")");
        segs[worst] = quad::evaluate(f, w.a, mid);
        segs.push_back(quad::evaluate(f, mid, w.b));
    }
}

/// Integrate over a piecewise-smooth function given interior breakpoints.
inline QuadratureResult integrate_segments(const std::function<double(double)>& f,
                                           const std::vector<double>& breaks,
                                           const QuadratureOptions& opts = {}) {
    require(breaks.size() >= 2, "need at least two breakpoints (" + opts.label + ")");
    QuadratureResult total;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        QuadratureOptions sub = opts;
        sub.rel_tol = opts.rel_tol * 0.5;
        QuadratureResult r = integrate(f, breaks[i], breaks[i + 1], sub);
        total.value += r.value;
        total.error += r.error;
        total.intervals += r.intervals;
    }
    return total;
}

}  // namespace senskit

#endif  // SENSKIT_QUADRATURE_HPP
