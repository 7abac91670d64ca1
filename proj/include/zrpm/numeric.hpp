#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace zrpm {

// Neumaier compensated summation.
class Accumulator {
public:
    void add(double x);
    double value() const { return sum_ + comp_; }
    Accumulator& operator+=(double x) {
        add(x);
        return *this;
    }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

double compensated_sum(std::span<const double> xs);

// Constants of the limit chain that depend only on alpha.
struct SeriesConstants {
    double alpha = 0.0;
    double gamma_alpha = 0.0;  // 1 + zeta(alpha)
    double i_alpha = 0.0;      // Beta(alpha+1, alpha+1)
};

SeriesConstants series_constants(double alpha);

// sum_{j>=0} m^j / a(j), a(0)=1, a(j)=j^alpha, for 0 < m <= 1.
double site_series(double m, double alpha);

inline double interaction(long n, double alpha) {
    return n == 0 ? 1.0 : std::pow(static_cast<double>(n), alpha);
}

// Counter-based stream: output k is a bijective mix of (key, k).
class CounterRng {
public:
    CounterRng(std::uint64_t base, std::uint64_t index);
    std::uint64_t next_u64();
    // uniform in (0,1)
    double uniform();
    double exponential(double rate);
    std::uint64_t counter() const { return ctr_; }

private:
    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
};

std::uint64_t mix64(std::uint64_t z);

}  // namespace zrpm
