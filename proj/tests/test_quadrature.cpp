#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "senskit/quadrature.hpp"

using namespace senskit;

TEST_CASE("legendre recurrence values") {
    std::vector<double> p;
    quad::legendre_values(3, 0.3, p);
    CHECK(p[0] == 1.0);
    CHECK(p[1] == 0.3);
    CHECK(std::abs(p[2] - 0.5 * (3.0 * 0.09 - 1.0)) < 1e-15);
    CHECK(std::abs(p[3] - 0.5 * (5.0 * 0.027 - 3.0 * 0.3)) < 1e-15);
}

TEST_CASE("constructed rule has the classic structure") {
    const auto& r = quad::gk15();

    double wsum = 0.0;
    for (double w : r.weight) wsum += w;
    CHECK(std::abs(wsum - 2.0) < 1e-14);

    for (int i = 0; i < 15; ++i) {
        CHECK(r.weight[i] > 0.0);
        CHECK(std::abs(r.node[i] + r.node[14 - i]) < 1e-14);          // symmetric nodes
        CHECK(std::abs(r.weight[i] - r.weight[14 - i]) < 1e-14);      // symmetric weights
        if (i > 0) CHECK(r.node[i] > r.node[i - 1]);                  // sorted, distinct
    }

    // Embedded Gauss weights sit on alternating nodes and also sum to 2.
    double gsum = 0.0;
    int gauss_nodes = 0;
    for (int i = 0; i < 15; ++i) {
        gsum += r.gauss_weight[i];
        if (r.gauss_weight[i] != 0.0) {
            ++gauss_nodes;
            CHECK(i % 2 == 1);  // Kronrod insertion interlaces the Gauss points
        }
    }
    CHECK(gauss_nodes == 7);
    CHECK(std::abs(gsum - 2.0) < 1e-14);
}

TEST_CASE("monomial exactness degrees pin the pair") {
    const auto& r = quad::gk15();
    auto kron = [&](int k) {
        double s = 0.0;
        for (int i = 0; i < 15; ++i) s += r.weight[i] * std::pow(r.node[i], k);
        return s;
    };
    auto gauss = [&](int k) {
        double s = 0.0;
        for (int i = 0; i < 15; ++i) s += r.gauss_weight[i] * std::pow(r.node[i], k);
        return s;
    };
    auto exact = [](int k) { return (k % 2 == 0) ? 2.0 / (k + 1) : 0.0; };

    // The 15-point rule integrates exactly through degree 22, the embedded
    // 7-point rule through degree 13, and both visibly fail just above.
    for (int k = 0; k <= 22; ++k) CHECK(std::abs(kron(k) - exact(k)) < 2e-14);
    for (int k = 0; k <= 13; ++k) CHECK(std::abs(gauss(k) - exact(k)) < 2e-14);
    CHECK(std::abs(gauss(14) - exact(14)) > 1e-6);
    CHECK(std::abs(kron(24) - exact(24)) > 1e-10);
}

TEST_CASE("adaptive integration of smooth and kinked integrands") {
    auto sinres = integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
    CHECK(std::abs(sinres.value - 2.0) < 1e-13);

    auto absres = integrate([](double x) { return std::abs(x); }, -1.0, 1.0);
    CHECK(std::abs(absres.value - 1.0) < 1e-12);

    QuadratureOptions opts;
    opts.abs_tol = 1e-13;
    auto oddres = integrate([](double x) { return x * x * x; }, -2.0, 2.0, opts);
    CHECK(std::abs(oddres.value) < 1e-12);
}

TEST_CASE("segment list splits at interior kinks") {
    auto res = integrate_segments([](double x) { return std::abs(x - 0.25); }, {0.0, 0.25, 1.0});
    double expect = 0.25 * 0.25 / 2.0 + 0.75 * 0.75 / 2.0;
    CHECK(std::abs(res.value - expect) < 1e-13);
}

TEST_CASE("exhausted interval budget raises a labelled failure") {
    QuadratureOptions opts;
    opts.max_intervals = 8;
    opts.label = "needle";
    auto needle = [](double x) { return 1.0 / std::sqrt(std::abs(x) + 1e-14); };
    try {
        integrate(needle, 0.0, 1.0, opts);
        FAIL("expected a quadrature failure");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("needle") != std::string::npos);
    }
}
