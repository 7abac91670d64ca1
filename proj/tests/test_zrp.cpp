#include "catch_amalgamated.hpp"

#include <boost/math/special_functions/zeta.hpp>
#include <cmath>

#include "fixtures.hpp"
#include "zrpm/chain.hpp"
#include "zrpm/error.hpp"
#include "zrpm/zrp.hpp"

using namespace zrpm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("interaction rates") {
    auto m = fx::model_a();
    CHECK(m.a(0) == 1.0);
    CHECK(m.g(0) == 0.0);
    CHECK(m.g(1) == 1.0);
    CHECK(m.g(2) == 8.0);
    CHECK_THAT(m.g(5), WithinRel(125.0 / 64.0, 1e-15));
}

TEST_CASE("alpha must exceed 2") {
    try {
        make_model(fx::walk_a(), 2.0);
        FAIL("expected AlphaOutOfRange");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::AlphaOutOfRange);
    }
}

TEST_CASE("two-particle hand example") {
    auto m = fx::model_a();
    auto sys = build_system(m, 2);
    REQUIRE(sys.space.size() == 3);
    auto r20 = fx::rank_of(sys, {2, 0});
    auto r11 = fx::rank_of(sys, {1, 1});
    auto r02 = fx::rank_of(sys, {0, 2});
    CHECK_THAT(sys.z_n, WithinRel(10.0, 1e-14));
    CHECK_THAT(sys.mu[r20], WithinRel(0.1, 1e-14));
    CHECK_THAT(sys.mu[r11], WithinRel(0.8, 1e-14));
    CHECK_THAT(sys.mu[r02], WithinRel(0.1, 1e-14));
    CHECK_THAT(partition_function(m, 2, {0, 1}), WithinRel(10.0, 1e-14));
    CHECK_THAT(partition_function_enumerated(m, 2, {0, 1}), WithinRel(10.0, 1e-14));

    std::vector<double> ind(3, 0.0);
    ind[r20] = 1.0;
    auto lf = apply_generator(sys.chain, ind, Variant::Primal);
    CHECK_THAT(lf[r20], WithinAbs(-8.0, 1e-13));
    auto lfs = apply_generator(sys.chain, ind, Variant::Adjoint);
    for (int i = 0; i < 3; ++i) CHECK_THAT(lfs[i], WithinAbs(lf[i], 1e-13));

    std::vector<double> h(3);
    h[r20] = 1.0;
    h[r11] = 0.5;
    h[r02] = 0.0;
    CHECK_THAT(dirichlet_form(sys.chain, h), WithinRel(0.4, 1e-14));
    CHECK(dirichlet_form(sys.chain, {2.0, 2.0, 2.0}) == 0.0);
    CHECK_THAT(removal_dirichlet_form(sys, h), WithinRel(0.4, 1e-13));

    CHECK_THAT(removal_constant(m, 2), WithinRel(3.2, 1e-14));
    CHECK(particle_removal_residual(sys) <= 1e-14);
}

TEST_CASE("moves") {
    auto m = fx::model_a();
    auto sys = build_system(m, 2);
    auto r20 = fx::rank_of(sys, {2, 0});
    auto r11 = fx::rank_of(sys, {1, 1});
    auto r02 = fx::rank_of(sys, {0, 2});
    CHECK(sys.move(r20, 0, 1) == r11);
    CHECK(sys.move(r02, 0, 1) == -1);
    CHECK(sys.move(r11, 0, 0) == r11);
}

TEST_CASE("series constants and the limit of the partition function") {
    auto m = fx::model_a();
    auto c = limit_constants(m);
    double z = 2.0 * (1.0 + boost::math::zeta(3.0));
    CHECK_THAT(c.z, WithinRel(z, 1e-13));
    CHECK_THAT(c.z, WithinAbs(4.40411, 1e-5));
    CHECK_THAT(c.i_alpha, WithinRel(1.0 / 140.0, 1e-13));
    CHECK_THAT(partition_limit(m, {0, 1}), WithinRel(z, 1e-12));

    double prev = 1e300;
    for (long n = 2; n <= 1024; n *= 2) {
        double err = std::fabs(partition_function(m, n, {0, 1}) - z) / z;
        if (n >= 16) CHECK(err < prev);
        prev = err;
    }
    CHECK(prev <= 0.02);

    auto k3 = fx::model_k3();
    auto c3 = limit_constants(k3);
    CHECK_THAT(c3.gamma_site[2], WithinRel(site_series(0.5, 3.0), 1e-13));
    CHECK_THAT(c3.gamma_site[0], WithinRel(c3.gamma_alpha, 1e-15));
}

TEST_CASE("partition recursion matches enumeration") {
    auto m = fx::model_k3(3.5);
    for (long k : {0L, 1L, 3L, 9L, 20L}) {
        CHECK_THAT(partition_function(m, k, {0, 1, 2}), WithinRel(partition_function_enumerated(m, k, {0, 1, 2}), 1e-12));
        CHECK_THAT(partition_function(m, k, {0, 2}), WithinRel(partition_function_enumerated(m, k, {0, 2}), 1e-12));
    }
    auto s = partition_sums(m, 30, {0, 1, 2});
    double prev = 0.0;
    double partial = 0.0;
    for (long k = 0; k <= 30; ++k) {
        partial += s[k];
        CHECK(partial >= prev);
        prev = partial;
    }
    auto c = limit_constants(m);
    CHECK(partial <= c.gamma_alpha * c.gamma_alpha * c.gamma_site[2] * (1 + 1e-12));
}

TEST_CASE("stationary measure of the zero-range process") {
    for (auto m : {fx::model_a(), fx::model_b(), fx::model_k3()}) {
        for (long n : {1L, 5L, 12L}) {
            auto sys = build_system(m, n);
            double s = 0.0;
            for (double x : sys.mu) s += x;
            CHECK_THAT(s, WithinAbs(1.0, 1e-12));
            CHECK(stationarity_defect(sys.chain) <= 1e-12);
            for (int x : m.profile.s_star) {
                Config xi(m.kappa(), 0);
                xi[x] = static_cast<int>(n);
                CHECK_THAT(sys.mu[fx::rank_of(sys, xi)], WithinRel(1.0 / sys.z_n, 1e-12));
            }
            CHECK(particle_removal_residual(sys) <= 1e-12);
        }
    }
}

TEST_CASE("generator adjointness and stationarity") {
    CounterRng rng(3, 0);
    auto m = fx::model_b();
    auto sys = build_system(m, 6);
    const auto& ch = sys.chain;
    for (int t = 0; t < 20; ++t) {
        auto f = fx::random_vector(rng, ch.n);
        auto g = fx::random_vector(rng, ch.n);
        auto lf = apply_generator(ch, f, Variant::Primal);
        auto lsg = apply_generator(ch, g, Variant::Adjoint);
        std::vector<double> one(ch.n, 1.0);
        CHECK_THAT(mu_inner(ch, one, lf), WithinAbs(0.0, 1e-12));
        CHECK_THAT(mu_inner(ch, g, lf), WithinAbs(mu_inner(ch, lsg, f), 1e-12));
        auto lsym = apply_generator(ch, f, Variant::Symmetric);
        auto lstar = apply_generator(ch, f, Variant::Adjoint);
        for (std::size_t u = 0; u < ch.n; ++u) CHECK_THAT(lsym[u], WithinAbs(0.5 * (lf[u] + lstar[u]), 1e-12));
        CHECK_THAT(removal_dirichlet_form(sys, f), WithinRel(dirichlet_form(ch, f), 1e-11));
        double d = 0.0;
        for (std::size_t u = 0; u < ch.n; ++u) d -= ch.mu[u] * f[u] * lf[u];
        CHECK_THAT(dirichlet_form(ch, f), WithinRel(d, 1e-11));
    }
}

TEST_CASE("removal constant tends to 1/M_star") {
    auto m = fx::model_a();
    double prev = 1e300;
    for (long n : {64L, 256L, 1024L}) {
        double d = std::fabs(removal_constant(m, n) - 2.0);
        CHECK(d < prev);
        prev = d;
    }
    CHECK(prev < 0.01);
}
