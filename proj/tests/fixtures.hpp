#pragma once

#include <cstdint>
#include <vector>

#include "zrpm/capacity.hpp"
#include "zrpm/walk.hpp"
#include "zrpm/zrp.hpp"

namespace fx {

// symmetric two-site walk, rates 1
inline zrpm::Walk walk_a() { return zrpm::make_walk({{0, 1}, {1, 0}}); }

// directed 3-cycle 0 -> 1 -> 2 -> 0, rates 1
inline zrpm::Walk walk_b() { return zrpm::make_walk({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}); }

inline zrpm::ZrpModel model_a(double alpha = 3.0) { return zrpm::make_model(walk_a(), alpha); }
inline zrpm::ZrpModel model_b(double alpha = 3.0) { return zrpm::make_model(walk_b(), alpha); }

// two condensation sites plus one lighter site
inline zrpm::ZrpModel model_k3(double alpha = 3.0) {
    return zrpm::make_model(zrpm::make_walk({{0, 1, 1}, {1, 0, 1}, {2, 2, 0}}), alpha);
}

// three symmetric condensation sites
inline zrpm::ZrpModel model_sym3(double alpha = 3.0) {
    return zrpm::make_model(zrpm::make_walk({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}}), alpha);
}

inline std::uint32_t rank_of(const zrpm::ZrpSystem& sys, std::vector<int> eta) {
    return static_cast<std::uint32_t>(sys.space.rank(eta));
}

inline zrpm::Mask single(const zrpm::ZrpSystem& sys, std::vector<int> eta) {
    return zrpm::make_mask(sys.space.size(), {rank_of(sys, eta)});
}

inline std::vector<double> random_vector(zrpm::CounterRng& rng, std::size_t n, double lo = -1.0,
                                         double hi = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = lo + (hi - lo) * rng.uniform();
    return v;
}

// symmetric part plus a circulation around 0 -> 1 -> ... -> 0: uniform
// invariant law, not reversible
inline std::vector<std::vector<double>> doubly_stochastic(zrpm::CounterRng& rng, int k) {
    std::vector<std::vector<double>> r(k, std::vector<double>(k, 0.0));
    for (int x = 0; x < k; ++x)
        for (int y = x + 1; y < k; ++y) r[x][y] = r[y][x] = 0.1 + rng.uniform();
    double c = 0.2 + rng.uniform();
    for (int x = 0; x < k; ++x) r[x][(x + 1) % k] += c;
    return r;
}

}  // namespace fx
