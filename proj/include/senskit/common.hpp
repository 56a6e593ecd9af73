#ifndef SENSKIT_COMMON_HPP
#define SENSKIT_COMMON_HPP

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace senskit {

inline constexpr const char* kToolVersion = "0.1.0";

/// Error raised for invalid arguments, malformed files and numerical failures.
/// Messages are meant to be shown to the user as-is, so they carry context
/// (row/column, timestep, variable name) where the failure site knows it.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw Error(msg);
}

// ---------------------------------------------------------------------------
// Decimal text for doubles.
//
// All files written by this library use the shortest decimal form that parses
// back to the identical bit pattern, so saving and loading is lossless and
// output bytes are stable across runs.

inline std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, const std::string& where) {
    double v{};
    const char* first = text.data();
    const char* last = first + text.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        fail("not a number: '" + std::string(text) + "' (" + where + ")");
    return v;
}

// ---------------------------------------------------------------------------
// Content fingerprints (FNV-1a, 64 bit) used to tie surrogates and datasets
// back to the model/schedule files they came from.

inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string fingerprint(std::string_view bytes) {
    static const char* hex = "0123456789abcdef";
    std::uint64_t h = fnv1a(bytes);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = hex[h & 0xf];
        h >>= 4;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Counter-based random numbers.
//
// Every draw is a pure function of (seed, stream, counter), so a sample matrix
// can be filled in any order, split across threads, or partially regenerated
// and the values never change. The generator hashes the 192-bit key with two
// rounds of the SplitMix64 finalizer.

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace detail

class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(detail::mix64(seed + 0x9e3779b97f4a7c15ull * (stream + 1))) {}

    std::uint64_t bits(std::uint64_t counter) const {
        return detail::mix64(key_ + 0x9e3779b97f4a7c15ull * (counter + 1));
    }

    /// Uniform draw strictly inside (0, 1); never returns an endpoint, so
    /// quantile transforms stay finite.
    double uniform01(std::uint64_t counter) const {
        return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1p-53;
    }

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t uniform_index(std::uint64_t counter, std::uint64_t bound) const {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(bits(counter)) * bound) >> 64);
    }

  private:
    std::uint64_t key_;
};

/// Stable sub-seed for a named piece of work (a split, a permutation batch, a
/// per-cell computation). Purely a function of its arguments.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return detail::mix64(detail::mix64(seed) + 0x9e3779b97f4a7c15ull * (tag + 1));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
    return derive_seed(seed, fnv1a(tag));
}

/// Deterministic permutation of {0, .., n-1} by Fisher-Yates driven from one
/// counter stream.
inline std::vector<std::size_t> random_permutation(std::size_t n, std::uint64_t seed,
                                                   std::uint64_t stream = 0) {
    CounterRng rng(seed, stream);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.uniform_index(i, i));
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

inline constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

inline bool is_undefined(double v) { return std::isnan(v); }

/// Run fn(0) .. fn(count-1) on up to `jobs` threads. Tasks must write only
/// their own slots, which makes the combined result independent of the
/// schedule. The first exception wins and is rethrown on the caller.
inline void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    std::size_t workers = static_cast<std::size_t>(std::max(jobs, 1));
    workers = std::min(workers, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto drain = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> hold(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(drain);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace senskit

#endif
