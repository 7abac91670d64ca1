#include "catch_amalgamated.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/zeta.hpp>
#include <cmath>
#include <set>
#include <vector>

#include "zrpm/config_space.hpp"
#include "zrpm/numeric.hpp"

using namespace zrpm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("compensated sum keeps small terms") {
    std::vector<double> xs{1e16, 1.0, -1e16, 1.0};
    CHECK(compensated_sum(xs) == 2.0);
    Accumulator acc;
    for (int i = 0; i < 1000000; ++i) acc += 0.1;
    CHECK_THAT(acc.value(), WithinAbs(100000.0, 1e-8));
}

TEST_CASE("series constants") {
    auto c = series_constants(3.0);
    CHECK_THAT(c.gamma_alpha, WithinRel(1.0 + boost::math::zeta(3.0), 1e-14));
    CHECK_THAT(c.i_alpha, WithinRel(1.0 / 140.0, 1e-13));
    CHECK_THAT(site_series(1.0, 3.0), WithinRel(c.gamma_alpha, 1e-12));
    // 1 + sum_{j>=1} (1/2)^j / j^3 = 1 + Li_3(1/2)
    CHECK_THAT(site_series(0.5, 3.0), WithinRel(1.5372131936080402, 1e-12));
    CHECK(interaction(0, 3.0) == 1.0);
    CHECK(interaction(2, 3.0) == 8.0);
}

TEST_CASE("counter rng is reproducible and splits by index") {
    CounterRng a(42, 0), b(42, 0), c(42, 1);
    std::vector<std::uint64_t> xa, xc;
    for (int i = 0; i < 64; ++i) {
        auto v = a.next_u64();
        CHECK(v == b.next_u64());
        xa.push_back(v);
        xc.push_back(c.next_u64());
    }
    CHECK(xa != xc);
    CounterRng u(7, 3);
    double mean = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double x = u.uniform();
        REQUIRE(x > 0.0);
        REQUIRE(x < 1.0);
        mean += x;
    }
    CHECK_THAT(mean / n, WithinAbs(0.5, 5.0 * std::sqrt(1.0 / 12.0 / n)));
    CounterRng e(9, 0);
    double em = 0.0;
    for (int i = 0; i < n; ++i) em += e.exponential(4.0);
    CHECK_THAT(em / n, WithinAbs(0.25, 5.0 * 0.25 / std::sqrt(n)));
}

TEST_CASE("config space rank and unrank are inverse") {
    for (auto [n, k] : std::vector<std::pair<long, int>>{{0, 3}, {1, 1}, {2, 3}, {7, 4}, {30, 2}}) {
        ConfigSpace sp(n, k);
        auto expected = static_cast<std::uint64_t>(std::llround(boost::math::binomial_coefficient<double>(
            static_cast<unsigned>(n + k - 1), static_cast<unsigned>(k - 1))));
        REQUIRE(sp.size() == expected);
        std::set<Config> seen;
        for (std::uint64_t r = 0; r < sp.size(); ++r) {
            auto eta = sp.unrank(r);
            long s = 0;
            for (int x : eta) {
                REQUIRE(x >= 0);
                s += x;
            }
            REQUIRE(s == n);
            REQUIRE(sp.rank(eta) == r);
            seen.insert(eta);
        }
        CHECK(seen.size() == sp.size());
        Config first = sp.unrank(0);
        CHECK(first[0] == n);
    }
}

TEST_CASE("config space sizes") {
    CHECK(ConfigSpace(2, 2).size() == 3);
    CHECK(ConfigSpace(0, 2).size() == 1);
    CHECK(ConfigSpace(3, 3).size() == 10);
}

TEST_CASE("materialized table matches unrank") {
    ConfigSpace sp(6, 3);
    sp.materialize();
    for (std::uint64_t r = 0; r < sp.size(); ++r) {
        auto eta = sp.unrank(r);
        for (int i = 0; i < 3; ++i) REQUIRE(sp.at(r)[i] == eta[i]);
    }
}
