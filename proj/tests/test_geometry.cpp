#include "catch_amalgamated.hpp"

#include <cmath>

#include "fixtures.hpp"
#include "zrpm/error.hpp"
#include "zrpm/geometry.hpp"
#include "zrpm/zrp.hpp"

using namespace zrpm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("default scales") {
    auto m = fx::model_a();
    auto s = default_scales(m, 10000, 0.05);
    CHECK(s.pi == 2154);
    CHECK(s.ell == 100);
    CHECK(s.eps_n == 500);
    CHECK(s.well == 9000);
    CHECK(s.b.size() == 2);
    for (long b : s.b) CHECK(b == -1);
    CHECK(s.order_ok);
    CHECK(std::isfinite(s.amp3));

    auto k3 = fx::model_k3();
    auto s3 = default_scales(k3, 400, 0.05);
    // ell = floor(N^{1/(2(kappa-1))}) over all three sites, b from the lighter site
    CHECK(s3.ell == 4);
    CHECK(s3.b[2] == static_cast<long>(std::floor(std::log(400.0) / (-2.0 * 3.0 * std::log(0.5)))));
    CHECK(s3.b[0] == -1);
}

TEST_CASE("scale order violations") {
    auto m = fx::model_a();
    CHECK_THROWS_AS(default_scales(m, 100, 0.0), Error);
    CHECK_THROWS_AS(default_scales(m, 100, 0.07), Error);
    auto small = default_scales(m, 16, 0.05);
    CHECK_FALSE(small.order_ok);
    try {
        build_sets(m, small, true);
        FAIL("expected ScaleOrderViolated");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ScaleOrderViolated);
        CHECK(std::string(e.what()).find(std::to_string(minimal_admissible_n(m, 0.05))) != std::string::npos);
    }
    long nmin = minimal_admissible_n(m, 0.05);
    CHECK(default_scales(m, nmin, 0.05).order_ok);
    CHECK_FALSE(default_scales(m, nmin - 1, 0.05).order_ok);
    CHECK_NOTHROW(build_sets(m, small, false));
}

TEST_CASE("saddle tube for two sites") {
    auto m = fx::model_a();
    auto sc = default_scales(m, 100, 0.05);
    auto sets = build_sets(m, sc, false);
    // eps N = 5, ceil(N(1 - 2 eps)) = 90: the wells are eta_x >= 90
    for (int k = 0; k <= 100; ++k) {
        int eta[2] = {k, 100 - k};
        CHECK(sets.in_saddle(eta, 0, 1) == (k > 10 && k < 90));
        CHECK(sets.in_tube(eta, 0, 1));
        CHECK(sets.in_well(eta, 0) == (k >= 90));
        CHECK(sets.in_valley(eta, 0) == (k >= 100 - sc.ell));
    }
}

TEST_CASE("set decompositions hold exactly") {
    auto m = fx::model_a();
    for (long n : {420L, 1000L, 3000L}) {
        auto sc = default_scales(m, n, 0.05);
        REQUIRE(sc.order_ok);
        auto sets = build_sets(m, sc, true);
        auto sys = build_system(m, n);
        auto rep = check_sets(sets, sys);
        CHECK(rep.all());
        CHECK(rep.states == sys.space.size());
    }
}

TEST_CASE("set decompositions with three sites under ordered scales") {
    // default scales are never ordered at enumerable N for three sites
    for (auto m : {fx::model_k3(), fx::model_b()}) {
        for (long n : {120L, 200L}) {
            auto sc = default_scales(m, n, 0.05);
            CHECK_FALSE(sc.order_ok);
            sc.pi = sc.eps_n - 2;
            sc.ell = 3;
            for (int z : m.profile.rest) sc.b[z] = 2;
            sc.order_ok = true;
            auto sets = build_sets(m, sc, true);
            auto sys = build_system(m, n);
            auto rep = check_sets(sets, sys);
            CHECK(rep.decomp_g);
            CHECK(rep.decomp_gc);
            CHECK(rep.saddles_disjoint);
            CHECK(rep.tube_overlap_in_well);
            CHECK(rep.valley_in_well);
            CHECK(rep.obe1);
            CHECK(rep.xi_in_valley);
        }
    }
}

TEST_CASE("partitions hold at every scale") {
    for (auto m : {fx::model_a(), fx::model_k3(), fx::model_b()}) {
        for (long n : {40L, 120L}) {
            auto sets = build_sets(m, default_scales(m, n, 0.05), false);
            auto sys = build_system(m, n);
            auto rep = check_sets(sets, sys);
            CHECK(rep.decomp_gc);
            CHECK(rep.xi_in_valley);
        }
    }
}

TEST_CASE("condensate configurations lie in their valleys") {
    auto m = fx::model_k3();
    auto sets = build_sets(m, default_scales(m, 300, 0.05), false);
    for (int x : m.profile.s_star) {
        Config xi(3, 0);
        xi[x] = 300;
        CHECK(sets.valley_of(xi.data()) == x);
    }
    Config mid{150, 150, 0};
    CHECK(sets.valley_of(mid.data()) == -1);
}

TEST_CASE("set measures") {
    auto m = fx::model_a();
    auto sys = build_system(m, 1024);
    auto sets = build_sets(m, default_scales(m, 1024, 0.05), true);
    auto meas = set_measures(sets, sys);
    double total = meas.delta;
    for (double v : meas.valley) total += v;
    CHECK_THAT(total, WithinAbs(1.0, 1e-12));
    CHECK(std::fabs(2.0 * meas.valley[0] - 1.0) <= 0.02);

    // two sites: every configuration lies in the one tube, the inner boundary of G is empty
    for (long n : {256L, 1024L, 4096L}) {
        auto s = build_system(m, n);
        auto st = build_sets(m, default_scales(m, n, 0.05), false);
        CHECK(set_measures(st, s).inner_boundary_g == 0.0);
    }
}

TEST_CASE("boundary and saddle masses for three sites") {
    auto m = fx::model_k3();
    double prev = 1e300;
    for (long n : {64L, 128L, 256L, 512L}) {
        auto s = build_system(m, n);
        auto st = build_sets(m, default_scales(m, n, 0.05), false);
        auto meas = set_measures(st, s);
        double nd = static_cast<double>(n);
        double v = meas.inner_boundary_g * std::pow(nd, 4.0);
        CHECK(v < prev);
        prev = v;
        double j = meas.saddle[0] * std::pow(nd, 2.0);
        CHECK(j > 30.0);
        CHECK(j < 50.0);
    }
}

TEST_CASE("valley masks") {
    auto m = fx::model_a();
    auto sys = build_system(m, 500);
    auto sets = build_sets(m, default_scales(m, 500, 0.05), true);
    auto v0 = valley_mask(sets, sys, 0);
    auto v1 = valley_mask(sets, sys, 1);
    auto both = valleys_mask(sets, sys, {0, 1});
    auto d = delta_mask(sets, sys);
    for (std::size_t r = 0; r < sys.space.size(); ++r) {
        CHECK((v0[r] + v1[r] + d[r]) == 1);
        CHECK(both[r] == (v0[r] || v1[r]));
    }
}
