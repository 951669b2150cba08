#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <thread>
#include <vector>

namespace conclab {

/// Pairwise (cascade) summation. All Monte Carlo reductions in this library
/// go through here so that results do not depend on thread count or
/// accumulation order.
inline double pairwise_sum(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n <= 16) {
        double s = 0.0;
        for (double v : x) s += v;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

inline double mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    return pairwise_sum(x) / static_cast<double>(x.size());
}

/// Unbiased sample variance (n-1 denominator), pairwise-summed.
inline double sample_variance(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    const double m = mean(x);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (x[i] - m) * (x[i] - m);
    return pairwise_sum(sq) / static_cast<double>(n - 1);
}

/// Standard error of the mean of x.
inline double standard_error(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    return std::sqrt(sample_variance(x) / static_cast<double>(x.size()));
}

/// Runs body(i) for i in [0, count). Each index writes only its own output
/// slot, so the decomposition into threads never changes results.
inline void parallel_for(int threads, std::size_t count, const std::function<void(std::size_t)>& body) {
    if (threads == 0) {
        unsigned hc = std::thread::hardware_concurrency();
        threads = hc == 0 ? 1 : static_cast<int>(hc);
    }
    if (threads <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < count; i += nt) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

/// Least-squares slope of y against x.
inline double fit_slope(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

} // namespace conclab
