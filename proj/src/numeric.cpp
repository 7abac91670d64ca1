#include "zrpm/numeric.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/zeta.hpp>
#include <cmath>

#include "zrpm/error.hpp"

namespace zrpm {

const char* kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::NotIrreducible: return "NotIrreducible";
        case ErrorKind::DegenerateModel: return "DegenerateModel";
        case ErrorKind::SetsOverlapOrEmpty: return "SetsOverlapOrEmpty";
        case ErrorKind::AlphaOutOfRange: return "AlphaOutOfRange";
        case ErrorKind::Overflow: return "Overflow";
        case ErrorKind::UndefinedOnNeighborhood: return "UndefinedOnNeighborhood";
        case ErrorKind::EdgeOutsideGraph: return "EdgeOutsideGraph";
        case ErrorKind::SolverFailure: return "SolverFailure";
        case ErrorKind::ZeroCapacity: return "ZeroCapacity";
        case ErrorKind::BoundaryConditionViolated: return "BoundaryConditionViolated";
        case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
        case ErrorKind::EmptyOrFullValley: return "EmptyOrFullValley";
        case ErrorKind::NotConstantOnValley: return "NotConstantOnValley";
        case ErrorKind::ScaleOrderViolated: return "ScaleOrderViolated";
        case ErrorKind::EpsOutOfRange: return "EpsOutOfRange";
        case ErrorKind::PropertyCheckFailed: return "PropertyCheckFailed";
        case ErrorKind::OutsideTube: return "OutsideTube";
        case ErrorKind::ConstituentMissing: return "ConstituentMissing";
        case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    }
    return "Unknown";
}

void Accumulator::add(double x) {
    double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
        comp_ += (sum_ - t) + x;
    else
        comp_ += (x - t) + sum_;
    sum_ = t;
}

double compensated_sum(std::span<const double> xs) {
    Accumulator acc;
    for (double x : xs) acc.add(x);
    return acc.value();
}

SeriesConstants series_constants(double alpha) {
    if (!(alpha > 2.0)) throw Error(ErrorKind::AlphaOutOfRange, "alpha must satisfy alpha > 2");
    SeriesConstants c;
    c.alpha = alpha;
    c.gamma_alpha = 1.0 + boost::math::zeta(alpha);
    c.i_alpha = boost::math::beta(alpha + 1.0, alpha + 1.0);
    return c;
}

double site_series(double m, double alpha) {
    if (m >= 1.0) return 1.0 + boost::math::zeta(alpha);
    // geometric tail bound: term * m / (1 - m)
    Accumulator acc;
    acc.add(1.0);
    double p = 1.0;
    for (long j = 1;; ++j) {
        p *= m;
        double term = p / std::pow(static_cast<double>(j), alpha);
        acc.add(term);
        if (term * m / (1.0 - m) < 1e-17 * acc.value()) break;
    }
    return acc.value();
}

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t base, std::uint64_t index)
    : key_(mix64(mix64(base) ^ (index * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL))) {}

std::uint64_t CounterRng::next_u64() {
    std::uint64_t z = key_ + (ctr_++) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double CounterRng::uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::exponential(double rate) { return -std::log(uniform()) / rate; }

}  // namespace zrpm
