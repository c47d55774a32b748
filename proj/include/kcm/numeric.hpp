#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace kcm {

/// Compensated (Kahan-Babuska-Neumaier) accumulator for long reductions.
class kahan_sum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    kahan_sum& operator+=(double x) {
        add(x);
        return *this;
    }

    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// base^e by squaring. Integer exponents only; exact operation count log2(e).
inline double ipow(double base, std::uint64_t e) {
    double result = 1.0;
    double b = base;
    while (e != 0) {
        if (e & 1u) result *= b;
        b *= b;
        e >>= 1;
    }
    return result;
}

inline double mean_of(const std::vector<double>& xs) {
    kahan_sum s;
    for (double x : xs) s.add(x);
    return xs.empty() ? 0.0 : s.value() / static_cast<double>(xs.size());
}

/// Unbiased sample variance (n-1 denominator), two-pass with compensation.
inline double sample_variance(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    kahan_sum s;
    for (double x : xs) {
        const double d = x - m;
        s.add(d * d);
    }
    return s.value() / static_cast<double>(xs.size() - 1);
}

} // namespace kcm
