#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace ipose {

inline double mean(std::span<const double> v) {
    if (v.empty()) {
        return 0.0;
    }
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
inline double stddev(std::span<const double> v) {
    if (v.size() < 2) {
        return 0.0;
    }
    const double m = mean(v);
    double acc = 0.0;
    for (double x : v) {
        acc += (x - m) * (x - m);
    }
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

inline double variance(std::span<const double> v) {
    const double s = stddev(v);
    return s * s;
}

inline double median(std::vector<double> v) {
    if (v.empty()) {
        return 0.0;
    }
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 == 0 ? 0.5 * (v[mid - 1] + v[mid]) : v[mid];
}

/// Empirical CDF evaluated at t: count(x <= t) / n.
class EmpiricalCdf {
public:
    explicit EmpiricalCdf(std::vector<double> values) : sorted_(std::move(values)) {
        std::sort(sorted_.begin(), sorted_.end());
    }

    double operator()(double t) const {
        if (sorted_.empty()) {
            return 0.0;
        }
        const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), t);
        return static_cast<double>(std::distance(sorted_.begin(), it)) /
               static_cast<double>(sorted_.size());
    }

    const std::vector<double>& sorted_values() const { return sorted_; }

private:
    std::vector<double> sorted_;
};

inline double fraction_within(std::span<const double> values, double threshold) {
    if (values.empty()) {
        return 0.0;
    }
    std::size_t count = 0;
    for (double v : values) {
        if (v <= threshold) {
            ++count;
        }
    }
    return static_cast<double>(count) / static_cast<double>(values.size());
}

namespace detail {

inline std::vector<double> ranks(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return v[a] < v[b];
    });
    std::vector<double> r(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) {
            ++j;
        }
        const double shared = 0.5 * static_cast<double>(i + j) + 1.0;  // average rank for ties
        for (std::size_t k = i; k <= j; ++k) {
            r[order[k]] = shared;
        }
        i = j + 1;
    }
    return r;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) {
        return 0.0;
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace detail

/// Spearman rank correlation (tie-aware).
inline double spearman_rho(std::span<const double> x, std::span<const double> y) {
    const auto rx = detail::ranks(x);
    const auto ry = detail::ranks(y);
    return detail::pearson(rx, ry);
}

/// Exact one-sided p-value for positive Spearman correlation, computed by
/// enumerating all n! rank permutations. Practical for n <= 9.
inline double spearman_pvalue_exact(std::span<const double> x, std::span<const double> y) {
    const double observed = spearman_rho(x, y);
    const auto ry = detail::ranks(y);
    std::vector<double> perm = detail::ranks(x);
    std::sort(perm.begin(), perm.end());
    std::size_t total = 0;
    std::size_t at_least = 0;
    do {
        ++total;
        if (detail::pearson(perm, ry) >= observed - 1e-12) {
            ++at_least;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(at_least) / static_cast<double>(total);
}

}  // namespace ipose
