#ifndef SENSKIT_MARGINAL_HPP
#define SENSKIT_MARGINAL_HPP

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "senskit/common.hpp"
#include "senskit/quadrature.hpp"

namespace senskit {

enum class MarginalKind { gaussian, triangular };

/// Largest raw moment order served; twice the largest supported polynomial
/// degree plus two, which is what recurrence construction can ask for.
inline constexpr int kMaxMomentOrder = 42;

/// Affine change of variable x = offset + scale * z used to standardize
/// inputs before polynomial evaluation.
struct Affine {
    double offset = 0.0;
    double scale = 1.0;

    double to_x(double z) const { return offset + scale * z; }
    double to_z(double x) const { return (x - offset) / scale; }
};

namespace detail {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

/// Standard normal quantile for p in (0, 1): rational tail estimate polished
/// by bracketed Newton on erfc, solved on the small-probability side so the
/// result is as accurate as the given p allows.
inline double normal_quantile(double p) {
    const bool upper = p > 0.5;
    const double ps = upper ? 1.0 - p : p;  // ps <= 0.5, target left-tail mass
    if (ps == 0.5) return 0.0;

    // Tail estimate (Abramowitz-Stegun style rational in sqrt(-2 log ps)).
    double t = std::sqrt(-2.0 * std::log(ps));
    double z = -(t - (2.515517 + t * (0.802853 + t * 0.010328)) /
                         (1.0 + t * (1.432788 + t * (0.189269 + t * 0.001308))));

    double lo = -40.0, hi = 0.0;
    for (int it = 0; it < 100; ++it) {
        double f = normal_cdf(z) - ps;
        if (f > 0.0)
            hi = z;
        else
            lo = z;
        double step = f / normal_pdf(z);
        double next = z - step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - z) <= 1e-16 * std::max(1.0, std::abs(z))) {
            z = next;
            break;
        }
        z = next;
    }
    return upper ? -z : z;
}

}  // namespace detail

/// One scalar input distribution. Gaussian is parameterized by mean and
/// standard deviation internally; model files carry the variance and are
/// converted on load. Triangular is lower/mode/upper with a <= b <= c, a < c
/// (a == b or b == c gives the one-sided ramp).
class Marginal {
  public:
    static Marginal gaussian(double mean, double stddev) {
        require(std::isfinite(mean) && std::isfinite(stddev), "gaussian parameters must be finite");
        require(stddev > 0.0, "gaussian stddev must be positive");
        Marginal m;
        m.kind_ = MarginalKind::gaussian;
        m.mean_ = mean;
        m.std_ = stddev;
        return m;
    }

    static Marginal triangular(double a, double b, double c) {
        require(std::isfinite(a) && std::isfinite(b) && std::isfinite(c),
                "triangular parameters must be finite");
        require(a <= b && b <= c && a < c,
                "triangular parameters must satisfy a <= b <= c with a < c");
        Marginal m;
        m.kind_ = MarginalKind::triangular;
        m.a_ = a;
        m.b_ = b;
        m.c_ = c;
        return m;
    }

    MarginalKind kind() const { return kind_; }
    double gauss_mean() const { return mean_; }
    double gauss_std() const { return std_; }
    double tri_a() const { return a_; }
    double tri_b() const { return b_; }
    double tri_c() const { return c_; }

    std::pair<double, double> support() const {
        if (kind_ == MarginalKind::gaussian)
            return {-std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity()};
        return {a_, c_};
    }

    double pdf(double x) const {
        if (kind_ == MarginalKind::gaussian)
            return detail::normal_pdf((x - mean_) / std_) / std_;
        if (x < a_ || x > c_) return 0.0;
        const double span = c_ - a_;
        if (x < b_) return 2.0 * (x - a_) / (span * (b_ - a_));
        if (x > b_) return 2.0 * (c_ - x) / (span * (c_ - b_));
        // x == b: both one-sided limits agree unless the mode sits on an edge.
        if (b_ > a_) return 2.0 * (b_ - a_) / (span * (b_ - a_));
        return 2.0 / span;
    }

    double cdf(double x) const {
        if (kind_ == MarginalKind::gaussian)
            return detail::normal_cdf((x - mean_) / std_);
        if (x <= a_) return 0.0;
        if (x >= c_) return 1.0;
        const double span = c_ - a_;
        if (x <= b_ && b_ > a_) return (x - a_) * (x - a_) / (span * (b_ - a_));
        return 1.0 - (c_ - x) * (c_ - x) / (span * (c_ - b_));
    }

    /// Inverse cdf. p must lie in [0, 1]; the endpoints map to the support
    /// bounds, which for the Gaussian are -inf / +inf by convention.
    double quantile(double p) const {
        require(p >= 0.0 && p <= 1.0, "quantile probability outside [0, 1]: " + format_double(p));
        if (p == 0.0) return support().first;
        if (p == 1.0) return support().second;
        if (kind_ == MarginalKind::gaussian)
            return mean_ + std_ * detail::normal_quantile(p);
        const double span = c_ - a_;
        const double split = (b_ == a_) ? 0.0 : (b_ - a_) / span;
        if (p <= split) return a_ + std::sqrt(p * span * (b_ - a_));
        return c_ - std::sqrt((1.0 - p) * span * (c_ - b_));
    }

    double mean() const {
        if (kind_ == MarginalKind::gaussian) return mean_;
        return (a_ + b_ + c_) / 3.0;
    }

    double variance() const {
        if (kind_ == MarginalKind::gaussian) return std_ * std_;
        return (a_ * a_ + b_ * b_ + c_ * c_ - a_ * b_ - a_ * c_ - b_ * c_) / 18.0;
    }

    /// Raw moment E[X^k]: closed form for the Gaussian, adaptive quadrature
    /// (relative tolerance 1e-10) for the triangular.
    double raw_moment(int k) const {
        require(k >= 0 && k <= kMaxMomentOrder,
                "raw moment order " + std::to_string(k) + " outside [0, " +
                    std::to_string(kMaxMomentOrder) + "]");
        if (k == 0) return 1.0;
        if (kind_ == MarginalKind::gaussian) {
            // E[(mu + sigma Z)^k] with E[Z^j] = (j-1)!! for even j.
            double sum = 0.0;
            double binom = 1.0;
            for (int j = 0; j <= k; j += 1) {
                if (j % 2 == 0) {
                    double zmom = 1.0;
                    for (int i = j - 1; i >= 3; i -= 2) zmom *= i;
                    sum += binom * std::pow(std_, j) * std::pow(mean_, k - j) * zmom;
                }
                binom = binom * (k - j) / (j + 1.0);
            }
            return sum;
        }
        QuadratureOptions opts;
        opts.rel_tol = 1e-10;
        opts.abs_tol = 1e-100;
        opts.label = "triangular raw moment k=" + std::to_string(k);
        return integrate_segments([this, k](double x) { return std::pow(x, k) * pdf(x); },
                                  {a_, b_, c_}, opts)
            .value;
    }

    /// Standardized form used for polynomial bases: the Gaussian maps to the
    /// standard normal, the triangular affinely to [-1, 1].
    std::pair<Marginal, Affine> standardized() const {
        if (kind_ == MarginalKind::gaussian)
            return {gaussian(0.0, 1.0), Affine{mean_, std_}};
        Affine map{0.5 * (a_ + c_), 0.5 * (c_ - a_)};
        return {triangular(-1.0, map.to_z(b_), 1.0), map};
    }

    bool operator==(const Marginal& other) const = default;

  private:
    Marginal() = default;

    MarginalKind kind_ = MarginalKind::gaussian;
    double mean_ = 0.0, std_ = 1.0;      // gaussian
    double a_ = 0.0, b_ = 0.0, c_ = 0.0; // triangular
};

}  // namespace senskit

#endif
