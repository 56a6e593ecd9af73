#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "senskit/sobol.hpp"

using namespace senskit;
using Catch::Approx;

namespace {

InputModel gaussian_pair() {
    return InputModel({"u", "v"}, {Marginal::gaussian(0.0, 1.0), Marginal::gaussian(0.0, 1.0)});
}

Eigen::Index pos(const TensorBasis& b, const MultiIndex& mi) {
    auto it = std::find(b.indices().begin(), b.indices().end(), mi);
    REQUIRE(it != b.indices().end());
    return static_cast<Eigen::Index>(it - b.indices().begin());
}

/// Surrogate over the two-gaussian model with hand-placed coefficients.
SparsePceSurrogate hand_surrogate(const std::vector<std::pair<MultiIndex, double>>& terms) {
    SparsePceSurrogate s;
    s.basis = build_basis(gaussian_pair(), 2, 1.0);
    s.times = {1.0};
    s.coeffs = Eigen::MatrixXd::Zero(1, static_cast<Eigen::Index>(s.basis.size()));
    for (const auto& [mi, g] : terms) s.coeffs(0, pos(s.basis, mi)) = g;
    return s;
}

/// Monic Legendre recurrence for the uniform density 1/2 on [-1, 1],
/// written from the classical closed form as an independent oracle.
Recurrence legendre_oracle(int max_degree) {
    Recurrence r;
    r.alpha.assign(static_cast<std::size_t>(max_degree), 0.0);
    r.beta.resize(static_cast<std::size_t>(max_degree) + 1);
    r.beta[0] = 1.0;
    for (int k = 1; k <= max_degree; ++k)
        r.beta[static_cast<std::size_t>(k)] = (static_cast<double>(k) * k) / (4.0 * k * k - 1.0);
    r.finalize_norms();
    return r;
}

}  // namespace

TEST_CASE("single active term attributes everything to its input") {
    auto s = hand_surrogate({{{1, 0}, 1.0}});
    CHECK(group_index(s, {0}, 0) == 1.0);
    CHECK(group_index(s, {1}, 0) == 0.0);
    CHECK(group_index(s, {0, 1}, 0) == 0.0);
    CHECK(first_order(s, 0, 0) == 1.0);
    CHECK(total_order(s, 0, 0) == 1.0);
    CHECK(total_order(s, 1, 0) == 0.0);
}

TEST_CASE("two additive terms split variance by squared coefficients") {
    auto s = hand_surrogate({{{1, 0}, 2.0}, {{0, 1}, 1.0}});
    CHECK(first_order(s, 0, 0) == Approx(0.8));
    CHECK(first_order(s, 1, 0) == Approx(0.2));
    CHECK(group_index(s, {0, 1}, 0) == 0.0);
    // additive: totals equal firsts, no interaction residual
    CHECK(total_order(s, 0, 0) == Approx(first_order(s, 0, 0)));
    CHECK(total_order(s, 1, 0) == Approx(first_order(s, 1, 0)));
    CHECK(interaction_residual(s, 0) == Approx(0.0).margin(1e-15));
    CHECK(variance_contribution(s, 0, 0) == Approx(4.0));
    CHECK(variance_contribution(s, 1, 0) == Approx(1.0));
}

TEST_CASE("pure interaction term") {
    auto s = hand_surrogate({{{1, 1}, 1.0}});
    CHECK(first_order(s, 0, 0) == 0.0);
    CHECK(first_order(s, 1, 0) == 0.0);
    CHECK(total_order(s, 0, 0) == 1.0);
    CHECK(total_order(s, 1, 0) == 1.0);
    CHECK(interaction_residual(s, 0) == Approx(1.0));
}

TEST_CASE("group indices sum to one over all non-empty groups") {
    auto s = hand_surrogate({{{1, 0}, 0.5}, {{2, 0}, -0.25}, {{0, 1}, 1.5}, {{1, 1}, 0.7}});
    double sum = group_index(s, {0}, 0) + group_index(s, {1}, 0) + group_index(s, {0, 1}, 0);
    CHECK(sum == Approx(1.0).margin(1e-12));

    double partition = variance_contribution(s, 0, 0) + variance_contribution(s, 1, 0) +
                       group_index(s, {0, 1}, 0) * total_variance(s, 0);
    CHECK(partition == Approx(total_variance(s, 0)).margin(1e-12));

    CHECK(first_order(s, 0, 0) <= total_order(s, 0, 0) + 1e-12);
    CHECK(first_order(s, 1, 0) <= total_order(s, 1, 0) + 1e-12);
}

TEST_CASE("normalized indices are scale invariant") {
    auto s = hand_surrogate({{{1, 0}, 0.5}, {{0, 2}, 1.25}, {{1, 1}, -0.3}});
    auto scaled = s;
    scaled.coeffs *= 3.0;
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(first_order(scaled, i, 0) == Approx(first_order(s, i, 0)).margin(1e-12));
        CHECK(total_order(scaled, i, 0) == Approx(total_order(s, i, 0)).margin(1e-12));
        CHECK(variance_contribution(scaled, i, 0) ==
              Approx(9.0 * variance_contribution(s, i, 0)).margin(1e-12));
    }
    CHECK(interaction_residual(scaled, 0) == Approx(interaction_residual(s, 0)).margin(1e-12));
}

TEST_CASE("variance collapse yields undefined markers") {
    auto s = hand_surrogate({});
    s.coeffs(0, 0) = 42.0;  // constant only
    CHECK(is_undefined(first_order(s, 0, 0)));
    CHECK(is_undefined(total_order(s, 1, 0)));
    CHECK(is_undefined(interaction_residual(s, 0)));
    CHECK(variance_contribution(s, 0, 0) == 0.0);

    SobolTimeSeries ts = sobol_timeseries(s);
    CHECK_FALSE(ts.defined[0]);
    CHECK(is_undefined(ts.first(0, 0)));
    CHECK(is_undefined(ts.interaction(0)));
    CHECK(ts.total_variance(0) == 0.0);
}

TEST_CASE("timeseries assembly matches the scalar accessors") {
    auto s = hand_surrogate({{{1, 0}, 0.5}, {{0, 1}, 1.5}, {{1, 1}, 0.7}});
    SobolTimeSeries ts = sobol_timeseries(s);
    CHECK(ts.defined[0]);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(ts.first(0, static_cast<Eigen::Index>(i)) == Approx(first_order(s, i, 0)));
        CHECK(ts.total(0, static_cast<Eigen::Index>(i)) == Approx(total_order(s, i, 0)));
        CHECK(ts.var_contrib(0, static_cast<Eigen::Index>(i)) ==
              Approx(variance_contribution(s, i, 0)));
    }
    CHECK(ts.interaction(0) == Approx(interaction_residual(s, 0)));
    CHECK(ts.total_variance(0) == Approx(total_variance(s, 0)));
}

TEST_CASE("pce first-order index agrees with a pick-freeze estimate") {
    InputModel model = gaussian_pair();
    Eigen::MatrixXd x = sample(model, 400, 91);
    Eigen::MatrixXd y = 2.0 * x.col(0) + x.col(1);
    TrajectoryDataset ds;
    ds.input_names = model.names();
    ds.times = {1.0};
    ds.inputs = x;
    ds.outputs = y;
    FitResult fr = fit(ds, model, 2, 1.0);
    double s1_pce = first_order(fr.surrogate, 0, 0);

    // pick-freeze over K independent batches; the batch spread gives the
    // standard error of the averaged estimate
    auto f = [](double u, double v) { return 2.0 * u + v; };
    const int batches = 20, n = 10000;
    std::vector<double> est;
    for (int b = 0; b < batches; ++b) {
        CounterRng ru(1234, 3 * b), rv(1234, 3 * b + 1), rw(1234, 3 * b + 2);
        double sum_yy1 = 0, sum_half = 0, sum_sq = 0;
        for (int i = 0; i < n; ++i) {
            double u = Marginal::gaussian(0, 1).quantile(ru.uniform01(i));
            double v = Marginal::gaussian(0, 1).quantile(rv.uniform01(i));
            double v2 = Marginal::gaussian(0, 1).quantile(rw.uniform01(i));
            double ya = f(u, v), yb = f(u, v2);  // shared u isolates input 1
            sum_yy1 += ya * yb;
            sum_half += 0.5 * (ya + yb);
            sum_sq += 0.5 * (ya * ya + yb * yb);
        }
        double m = sum_half / n;
        est.push_back((sum_yy1 / n - m * m) / (sum_sq / n - m * m));
    }
    double mean = 0;
    for (double e : est) mean += e;
    mean /= batches;
    double sd = 0;
    for (double e : est) sd += (e - mean) * (e - mean);
    sd = std::sqrt(sd / (batches - 1));
    CHECK(std::abs(s1_pce - mean) <= 3.0 * sd / std::sqrt(static_cast<double>(batches)));
    CHECK(s1_pce == Approx(0.8).margin(1e-8));
}

TEST_CASE("ishigami benchmark: fit quality and closed-form indices") {
    const double pi = std::numbers::pi;
    const double a = 7.0, b = 0.1;

    std::vector<std::string> names{"x1", "x2", "x3"};
    std::vector<Affine> maps(3, Affine{0.0, pi});
    std::vector<Recurrence> fams(3, legendre_oracle(9));
    TensorBasis basis(names, maps, fams, hyperbolic_enumerate(3, 9, 1.0), 9, 1.0);

    auto draw = [&](int n, std::uint64_t seed) {
        Eigen::MatrixXd x(n, 3);
        for (int j = 0; j < 3; ++j) {
            CounterRng rng(seed, static_cast<std::uint64_t>(j));
            for (int i = 0; i < n; ++i)
                x(i, j) = pi * (2.0 * rng.uniform01(static_cast<std::uint64_t>(i)) - 1.0);
        }
        return x;
    };
    auto f = [&](const Eigen::VectorXd& r) {
        return std::sin(r(0)) + a * std::sin(r(1)) * std::sin(r(1)) +
               b * std::pow(r(2), 4) * std::sin(r(0));
    };
    auto evaluate = [&](const Eigen::MatrixXd& x) {
        Eigen::MatrixXd y(x.rows(), 1);
        for (Eigen::Index i = 0; i < x.rows(); ++i) y(i, 0) = f(x.row(i).transpose());
        return y;
    };

    const int n = 500;
    TrajectoryDataset train;
    train.input_names = names;
    train.times = {1.0};
    train.inputs = draw(n, 2001);
    train.outputs = evaluate(train.inputs);

    FitResult fr = fit_with_basis(train, basis, "ishigami", SelectionMode::lars);

    TrajectoryDataset test = train;
    test.inputs = draw(n, 2002);
    test.outputs = evaluate(test.inputs);
    FitReport score = q2(fr.surrogate, test);
    CHECK(score.q2_mean >= 0.99);

    // classical variance decomposition of the ishigami function
    double v1 = 0.5 * std::pow(1.0 + b * std::pow(pi, 4) / 5.0, 2);
    double v2 = a * a / 8.0;
    double v13 = 8.0 * b * b * std::pow(pi, 8) / 225.0;
    double v = v1 + v2 + v13;

    CHECK(first_order(fr.surrogate, 0, 0) == Approx(v1 / v).margin(0.02));
    CHECK(first_order(fr.surrogate, 1, 0) == Approx(v2 / v).margin(0.02));
    CHECK(first_order(fr.surrogate, 2, 0) == Approx(0.0).margin(0.02));
    CHECK(total_order(fr.surrogate, 2, 0) == Approx(v13 / v).margin(0.02));
    CHECK(group_index(fr.surrogate, {0, 2}, 0) == Approx(v13 / v).margin(0.02));
    CHECK(total_order(fr.surrogate, 0, 0) == Approx((v1 + v13) / v).margin(0.02));

    // surrogate variance against the closed-form total variance
    CHECK(total_variance(fr.surrogate, 0) == Approx(v).epsilon(0.05));
}
