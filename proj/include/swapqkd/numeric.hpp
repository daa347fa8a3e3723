#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace swapqkd {

/// Neumaier's variant of Kahan summation. Keeps the running compensation so
/// that alternating-sign series of similar magnitude do not lose digits.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x)) {
            compensation_ += (sum_ - t) + x;
        } else {
            compensation_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    CompensatedSum& operator+=(double x) noexcept {
        add(x);
        return *this;
    }

    double value() const noexcept { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

class CompensatedComplexSum {
public:
    void add(std::complex<double> z) noexcept {
        re_.add(z.real());
        im_.add(z.imag());
    }

    std::complex<double> value() const noexcept { return {re_.value(), im_.value()}; }

private:
    CompensatedSum re_;
    CompensatedSum im_;
};

namespace detail {

inline constexpr int kMaxFactorial = 170;

inline const std::array<double, kMaxFactorial + 1>& factorial_table() {
    static const auto table = [] {
        std::array<double, kMaxFactorial + 1> t{};
        t[0] = 1.0;
        for (int n = 1; n <= kMaxFactorial; ++n) {
            t[n] = t[n - 1] * n;
        }
        return t;
    }();
    return table;
}

}  // namespace detail

inline double factorial(int n) {
    return detail::factorial_table().at(static_cast<std::size_t>(n));
}

/// Exact binomial coefficient; zero when k is outside [0, n].
inline std::int64_t binomial(int n, int k) {
    if (n < 0 || k < 0 || k > n) {
        return 0;
    }
    if (k > n - k) {
        k = n - k;
    }
    std::int64_t result = 1;
    for (int m = 1; m <= k; ++m) {
        result = result * (n - k + m) / m;
    }
    return result;
}

inline int sign_power(int exponent) { return (exponent % 2 == 0) ? 1 : -1; }

}  // namespace swapqkd
