#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace geomflux {

using Complex = std::complex<double>;

// Fixed-order pairwise summation. The reduction tree depends only on the
// element order, never on thread count, so parallel producers that fill
// slots by index keep results bit-identical.
template <typename T>
T pairwise_sum(std::span<const T> xs) {
    const std::size_t n = xs.size();
    if (n == 0) return T{};
    if (n <= 8) {
        T acc = xs[0];
        for (std::size_t i = 1; i < n; ++i) acc += xs[i];
        return acc;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

template <typename T>
T pairwise_sum(const std::vector<T>& xs) {
    return pairwise_sum(std::span<const T>(xs));
}

// Runs fn(i) for i in [0, n) on up to `threads` workers with a static block
// partition. fn must only write state owned by index i.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

// SplitMix64 step; used to derive independent per-sample RNG streams from
// (seed, index) so sampling order never depends on scheduling.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index * 0x9e3779b97f4a7c15ULL + 1));
}

// Wraps an angle to (-pi, pi].
inline double wrap_angle(double x) {
    const double tau = 2.0 * std::numbers::pi;
    double y = std::remainder(x, tau);
    if (y <= -std::numbers::pi) y += tau;
    return y;
}

// Distance between two wrapped phases.
inline double angle_distance(double a, double b) {
    return std::abs(wrap_angle(a - b));
}

// Edit distance for config key suggestions.
std::size_t levenshtein(const std::string& a, const std::string& b);

// FNV-1a 64-bit over bytes; used for config hashes.
std::uint64_t fnv1a64(std::string_view bytes);

// Shortest round-trip decimal form of a binary64 value.
std::string format_double(double x);

inline int default_thread_count() {
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// Process-wide worker count for the ensemble loops. Every numeric path is
// scheduling independent, so this only affects wall time, never output.
void set_thread_count(int k); // <= 0 restores the hardware default
int thread_count();

} // namespace geomflux
