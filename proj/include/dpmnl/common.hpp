#ifndef DPMNL_COMMON_HPP
#define DPMNL_COMMON_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpmnl {

using Rng = std::mt19937_64;

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// log(sum_i exp(x[i])) with max-subtraction
inline double log_sum_exp(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("log_sum_exp: empty input");
    double m = *std::max_element(xs.begin(), xs.end());
    if (!std::isfinite(m)) return m;  // all -inf, or a +inf/nan dominates
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

inline double log_sum_exp(const std::vector<double>& xs) {
    return log_sum_exp(std::span<const double>(xs));
}

// digamma via recurrence + asymptotic series
inline double digamma(double x) {
    if (x <= 0.0 && x == std::floor(x))
        throw std::domain_error("digamma: nonpositive integer");
    double r = 0.0;
    while (x < 6.0) {
        r -= 1.0 / x;
        x += 1.0;
    }
    double f = 1.0 / (x * x);
    r += std::log(x) - 0.5 / x
         - f * (1.0 / 12.0 - f * (1.0 / 120.0 - f * (1.0 / 252.0 - f / 240.0)));
    return r;
}

inline double sq(double x) { return x * x; }

inline double normal_log_pdf(double x, double mu, double sigma) {
    return -0.5 * std::log(2.0 * M_PI * sigma * sigma) - sq(x - mu) / (2.0 * sigma * sigma);
}

// density of |X| with X ~ N(0, sigma^2), evaluated at |x|
inline double half_normal_log_pdf(double x, double sigma) {
    return 0.5 * std::log(2.0 / (M_PI * sigma * sigma)) - sq(x) / (2.0 * sigma * sigma);
}

inline double gumbel_draw(Rng& rng) {
    std::uniform_real_distribution<double> u01(std::numeric_limits<double>::min(), 1.0);
    return -std::log(-std::log(u01(rng)));
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace dpmnl

#include <thread>

namespace dpmnl {

// Static block partition; each index writes only its own slot, so results do
// not depend on the worker count.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t n_threads, Fn fn) {
    if (n_threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    n_threads = std::min(n_threads, n);
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) {
        workers.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < n; i += n_threads) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace dpmnl

#endif
