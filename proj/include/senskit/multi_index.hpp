#ifndef SENSKIT_MULTI_INDEX_HPP
#define SENSKIT_MULTI_INDEX_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "senskit/common.hpp"

namespace senskit {

/// Exponent tuple of one tensor-product basis term; entry i is the polynomial
/// degree in input i.
using MultiIndex = std::vector<int>;

inline int total_degree(const MultiIndex& mi) {
    int s = 0;
    for (int e : mi) s += e;
    return s;
}

/// (sum_i a_i^q)^(1/q); for q <= 1 this dominates the total degree, so
/// shrinking q thins out interaction terms first.
inline double quasi_norm(const MultiIndex& mi, double q) {
    double s = 0.0;
    for (int e : mi)
        if (e > 0) s += std::pow(static_cast<double>(e), q);
    return std::pow(s, 1.0 / q);
}

/// Canonical term order: by total degree, then lexicographically with the
/// leading input weighted highest. This is the order all files use, so index
/// sets serialize identically across runs.
inline bool canonical_less(const MultiIndex& a, const MultiIndex& b) {
    int da = total_degree(a), db = total_degree(b);
    if (da != db) return da < db;
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

/// All multi-indices with quasi-norm at most p, in canonical order. q = 1
/// gives the full total-degree set of size C(d + p, p); q < 1 keeps all
/// univariate terms up to degree p and drops high-order interactions.
inline std::vector<MultiIndex> hyperbolic_enumerate(std::size_t d, int p, double q) {
    require(d >= 1, "hyperbolic_enumerate: dimension must be at least 1");
    require(p >= 0, "hyperbolic_enumerate: degree must be nonnegative");
    require(q > 0.0 && q <= 1.0, "hyperbolic_enumerate: q must lie in (0, 1]");

    // The quasi-norm bound implies total degree <= p, so enumerate that set
    // and filter. Comparison carries a relative slack for the fractional
    // powers; integer cases (q = 1) are exact.
    const double budget = std::pow(static_cast<double>(p), q) * (1.0 + 1e-12) + 1e-12;
    std::vector<MultiIndex> out;
    MultiIndex current(d, 0);
    std::function<void(std::size_t, int)> visit = [&](std::size_t pos, int remaining) {
        if (pos == d) {
            double s = 0.0;
            for (int e : current)
                if (e > 0) s += std::pow(static_cast<double>(e), q);
            if (s <= budget) out.push_back(current);
            return;
        }
        for (int e = 0; e <= remaining; ++e) {
            current[pos] = e;
            visit(pos + 1, remaining - e);
        }
        current[pos] = 0;
    };
    visit(0, p);
    std::sort(out.begin(), out.end(), canonical_less);
    return out;
}

}  // namespace senskit

#endif
