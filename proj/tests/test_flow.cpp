#include "catch_amalgamated.hpp"

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "zrpm/capacity.hpp"
#include "zrpm/flow.hpp"
#include "zrpm/zrp.hpp"

using namespace zrpm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("conductances of the two-particle example") {
    auto m = fx::model_a();
    auto sys = build_system(m, 2);
    const auto& ch = sys.chain;
    auto e = ch.find_edge(fx::rank_of(sys, {2, 0}), fx::rank_of(sys, {1, 1}));
    REQUIRE(e >= 0);
    CHECK_THAT(ch.c_out(e, fx::rank_of(sys, {2, 0})), WithinRel(0.8, 1e-14));
    CHECK_THAT(ch.cs[e], WithinRel(0.8, 1e-14));
    // same conductance written through H_1
    CHECK_THAT(removal_constant(m, 2) * 0.5 * 0.5 * 1.0, WithinRel(0.8, 1e-14));
}

TEST_CASE("flow norm and divergence on the two-particle example") {
    auto sys = build_system(fx::model_a(), 2);
    const auto& ch = sys.chain;
    auto r20 = fx::rank_of(sys, {2, 0});
    auto r11 = fx::rank_of(sys, {1, 1});
    auto r02 = fx::rank_of(sys, {0, 2});
    std::vector<double> h(3);
    h[r20] = 1.0;
    h[r11] = 0.5;
    h[r02] = 0.0;
    auto psi = flow_psi(ch, h);
    CHECK_THAT(flow_norm2(ch, psi), WithinRel(0.4, 1e-14));
    auto d = divergence(ch, psi);
    CHECK_THAT(d[r11], WithinAbs(0.0, 1e-15));
    CHECK_THAT(d[r20], WithinAbs(0.4, 1e-14));
    auto phi = flow_phi(ch, h);
    for (std::size_t e = 0; e < ch.edges(); ++e) CHECK_THAT(phi[e], WithinAbs(psi[e], 1e-15));
    auto zero = zero_flow(ch);
    CHECK(flow_norm2(ch, zero) == 0.0);
    for (double x : divergence(ch, zero)) CHECK(x == 0.0);
}

TEST_CASE("induced flows of a non-reversible model") {
    auto sys = build_system(fx::model_b(), 2);
    const auto& ch = sys.chain;
    std::vector<double> f(ch.n, 0.0);
    f[fx::rank_of(sys, {2, 0, 0})] = 1.0;
    auto phi = flow_phi(ch, f);
    auto phis = flow_phi_star(ch, f);
    auto psi = flow_psi(ch, f);
    double diff = 0.0;
    for (std::size_t e = 0; e < ch.edges(); ++e) {
        diff = std::max(diff, std::fabs(phi[e] - psi[e]));
        CHECK_THAT(psi[e], WithinAbs(0.5 * (phi[e] + phis[e]), 1e-15));
    }
    CHECK(diff > 0.1);

    std::vector<double> k(ch.n, 2.5);
    auto pk = flow_phi(ch, k);
    auto sk = flow_psi(ch, k);
    for (std::size_t e = 0; e < ch.edges(); ++e) {
        CHECK_THAT(pk[e], WithinAbs(2.5 * (ch.c_fw[e] - ch.c_bw[e]), 1e-14));
        CHECK(sk[e] == 0.0);
    }
}

TEST_CASE("flow algebra") {
    CounterRng rng(21, 0);
    auto sys = build_system(fx::model_b(), 5);
    const auto& ch = sys.chain;
    for (int t = 0; t < 10; ++t) {
        auto a = fx::random_vector(rng, ch.edges());
        auto b = fx::random_vector(rng, ch.edges());
        CHECK_THAT(flow_inner(ch, a, b), WithinRel(flow_inner(ch, b, a), 1e-14));
        CHECK(flow_norm2(ch, a) > 0.0);
        auto d = divergence(ch, a);
        double total = 0.0, l1 = 0.0;
        for (double x : d) total += x;
        for (double x : a) l1 += std::fabs(x);
        CHECK(std::fabs(total) <= 1e-12 * l1);
        std::vector<char> all(ch.n, 1);
        CHECK(std::fabs(divergence_on(ch, a, all)) <= 1e-12 * l1);
        auto c = flow_combine(2.0, a, -1.0, b);
        CHECK_THAT(flow_inner(ch, c, c),
                   WithinRel(4 * flow_norm2(ch, a) - 4 * flow_inner(ch, a, b) + flow_norm2(ch, b), 1e-12));
    }
    Flow phi = zero_flow(ch);
    flow_add(ch, phi, 0, 1, 0.7);
    CHECK(flow_value(ch, phi, 0, 1) == 0.7);
    CHECK(flow_value(ch, phi, 1, 0) == -0.7);
}

TEST_CASE("flow identities on every fixture") {
    for (auto m : {fx::model_a(), fx::model_b(), fx::model_k3()}) {
        for (long n : {2L, 6L}) {
            auto sys = build_system(m, n);
            auto rep = flow_identities(sys.chain, 17, 20);
            CHECK(rep.worst() <= 1e-10);
        }
    }
    auto c = build_system(fx::model_a(), 2);
    CHECK(flow_identities(c.chain, 5, 50).worst() <= 1e-12);
}

TEST_CASE("induced flows of the potential are divergence free off the sets") {
    auto sys = build_system(fx::model_b(), 6);
    const auto& ch = sys.chain;
    auto a = fx::single(sys, {6, 0, 0});
    auto b = fx::single(sys, {0, 6, 0});
    auto res = solve_capacity(ch, a, b);
    auto phi_hs = flow_phi(ch, res.h_star.h);
    auto phis_h = flow_phi_star(ch, res.h.h);
    CHECK(interior_divergence(ch, phi_hs, a, b) <= 1e-12);
    CHECK(interior_divergence(ch, phis_h, a, b) <= 1e-12);
}

TEST_CASE("flow csv") {
    auto sys = build_system(fx::model_a(), 2);
    std::ostringstream os;
    write_flow_csv(os, sys.chain, flow_psi(sys.chain, {1.0, 0.5, 0.0}));
    auto s = os.str();
    CHECK(!s.empty());
    CHECK(std::count(s.begin(), s.end(), '\n') >= 3);
}
