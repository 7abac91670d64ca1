#include "catch_amalgamated.hpp"

#include <cmath>

#include "fixtures.hpp"
#include "zrpm/capacity.hpp"
#include "zrpm/collapse.hpp"
#include "zrpm/error.hpp"
#include "zrpm/flow.hpp"
#include "zrpm/zrp.hpp"

using namespace zrpm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Mask mask_of(const ZrpSystem& sys, std::initializer_list<std::vector<int>> etas) {
    Mask m(sys.space.size(), 0);
    for (const auto& e : etas) m[fx::rank_of(sys, e)] = 1;
    return m;
}

Mask random_set(CounterRng& rng, std::size_t n, const Mask& avoid, double p) {
    Mask m(n, 0);
    for (std::size_t v = 0; v < n; ++v)
        if (!avoid[v] && rng.uniform() < p) m[v] = 1;
    return m;
}

}  // namespace

TEST_CASE("collapsed measure and conductances") {
    auto m = fx::model_a();
    auto sys = build_system(m, 3);
    auto valley = mask_of(sys, {{3, 0}, {2, 1}});
    auto cc = collapse_chain(sys.chain, valley);
    REQUIRE(cc.chain.n == 3);
    CHECK(cc.o == 2);
    CHECK_THAT(cc.chain.mu[cc.o],
               WithinRel(sys.mu[fx::rank_of(sys, {3, 0})] + sys.mu[fx::rank_of(sys, {2, 1})], 1e-15));
    auto r12 = fx::rank_of(sys, {1, 2});
    auto n12 = static_cast<std::uint32_t>(cc.old_to_new[r12]);
    CHECK_THAT(cc.chain.mu[n12], WithinRel(sys.mu[r12], 1e-15));
    CHECK(stationarity_defect(cc.chain) <= 1e-13);

    // conductance from (1,2) into o is the sum over merged neighbours
    auto e = cc.chain.find_edge(n12, cc.o);
    REQUIRE(e >= 0);
    auto e0 = sys.chain.find_edge(r12, fx::rank_of(sys, {2, 1}));
    CHECK_THAT(cc.chain.c_out(e, n12), WithinRel(sys.chain.c_out(e0, r12), 1e-15));
}

TEST_CASE("collapsed chains of non-reversible models are stationary") {
    CounterRng rng(8, 0);
    auto m = fx::model_b();
    auto sys = build_system(m, 6);
    for (int t = 0; t < 10; ++t) {
        Mask v = random_set(rng, sys.chain.n, Mask(sys.chain.n, 0), 0.3);
        v[0] = 1;
        v[sys.chain.n - 1] = 0;
        auto cc = collapse_chain(sys.chain, v);
        CHECK(stationarity_defect(cc.chain) <= 1e-12);
        double total = 0.0;
        for (double x : cc.chain.mu) total += x;
        CHECK_THAT(total, WithinAbs(1.0, 1e-13));
    }
}

TEST_CASE("empty or full valleys are rejected") {
    auto sys = build_system(fx::model_a(), 2);
    CHECK_THROWS_AS(collapse_chain(sys.chain, Mask(3, 0)), Error);
    CHECK_THROWS_AS(collapse_chain(sys.chain, Mask(3, 1)), Error);
}

TEST_CASE("singleton valley only relabels") {
    auto sys = build_system(fx::model_b(), 4);
    auto valley = fx::single(sys, {4, 0, 0});
    auto cc = collapse_chain(sys.chain, valley);
    CHECK(cc.chain.edges() == sys.chain.edges());
    auto a = fx::single(sys, {0, 4, 0});
    auto b = fx::single(sys, {0, 0, 4});
    CHECK_THAT(collapsed_capacity(cc, collapse_set(cc, a), collapse_set(cc, b)).cap,
               WithinRel(capacity(sys.chain, a, b), 1e-11));
    Mask o(cc.chain.n, 0);
    o[cc.o] = 1;
    CHECK_THAT(collapsed_capacity(cc, collapse_set(cc, a), o).cap, WithinRel(capacity(sys.chain, a, valley), 1e-11));
}

TEST_CASE("collapsing preserves the capacity to the valley") {
    auto sys = build_system(fx::model_a(), 4);
    auto valley = fx::single(sys, {4, 0});
    auto a = fx::single(sys, {0, 4});
    auto cc = collapse_chain(sys.chain, valley);
    Mask o(cc.chain.n, 0);
    o[cc.o] = 1;
    CHECK_THAT(collapsed_capacity(cc, collapse_set(cc, a), o).cap, WithinRel(capacity(sys.chain, a, valley), 1e-10));

    CounterRng rng(31, 0);
    for (auto m : {fx::model_b(), fx::model_k3()}) {
        auto s = build_system(m, 5);
        const auto n = s.chain.n;
        for (int t = 0; t < 20; ++t) {
            Mask v = random_set(rng, n, Mask(n, 0), 0.2);
            v[0] = 1;
            Mask target = random_set(rng, n, v, 0.15);
            target[n - 1] = v[n - 1] ? 0 : 1;
            bool any = false;
            for (char c : target) any = any || c;
            if (!any || v[n - 1]) continue;
            auto c2 = collapse_chain(s.chain, v);
            Mask o2(c2.chain.n, 0);
            o2[c2.o] = 1;
            auto bar = collapsed_capacity(c2, collapse_set(c2, target), o2);
            double cap = capacity(s.chain, target, v);
            CHECK_THAT(bar.cap, WithinRel(cap, 1e-10));
            CHECK(bar.cap_sym <= bar.cap * (1 + 1e-12));
            CHECK(bar.cap / bar.cap_sym <= sector_check(s.chain, 5, 20).c0 * (1 + 1e-9));
        }
    }
}

TEST_CASE("collapsed flows contract and match the divergence lemma") {
    CounterRng rng(41, 0);
    auto sys = build_system(fx::model_b(), 6);
    const auto& ch = sys.chain;
    Mask v = mask_of(sys, {{6, 0, 0}, {5, 1, 0}, {5, 0, 1}, {4, 1, 1}});
    auto cc = collapse_chain(ch, v);
    int strict = 0;
    for (int t = 0; t < 100; ++t) {
        auto phi = fx::random_vector(rng, ch.edges());
        auto bar = collapse_flow(ch, cc, phi);
        double n0 = flow_norm2(ch, phi), n1 = flow_norm2(cc.chain, bar);
        CHECK(n1 <= n0 * (1 + 1e-12));
        if (n1 < n0 * (1 - 1e-6)) ++strict;
        auto d = divergence(ch, phi);
        auto db = divergence(cc.chain, bar);
        double on_valley = 0.0;
        for (std::size_t s = 0; s < ch.n; ++s) {
            if (v[s])
                on_valley += d[s];
            else
                CHECK_THAT(db[cc.old_to_new[s]], WithinAbs(d[s], 1e-12));
        }
        CHECK_THAT(db[cc.o], WithinAbs(on_valley, 1e-12));
    }
    CHECK(strict == 100);
}

TEST_CASE("equality case of the contraction") {
    auto sys = build_system(fx::model_b(), 6);
    const auto& ch = sys.chain;
    Mask v = mask_of(sys, {{6, 0, 0}, {5, 1, 0}, {5, 0, 1}});
    auto cc = collapse_chain(ch, v);
    // flow supported away from the valley and its boundary
    Flow far = zero_flow(ch);
    flow_add(ch, far, fx::rank_of(sys, {0, 6, 0}), fx::rank_of(sys, {0, 5, 1}), 0.3);
    flow_add(ch, far, fx::rank_of(sys, {1, 5, 0}), fx::rank_of(sys, {0, 5, 1}), -0.2);
    CHECK_THAT(flow_norm2(cc.chain, collapse_flow(ch, cc, far)), WithinRel(flow_norm2(ch, far), 1e-14));
    CHECK(collapse_equality_defect(ch, cc, far) <= 1e-14);

    // induced flow of a function constant on the valley
    CounterRng rng(2, 0);
    auto f = fx::random_vector(rng, ch.n);
    for (std::size_t s = 0; s < ch.n; ++s)
        if (v[s]) f[s] = 0.25;
    auto psi = flow_psi(ch, f);
    CHECK(collapse_equality_defect(ch, cc, psi) <= 1e-12);
    CHECK_THAT(flow_norm2(cc.chain, collapse_flow(ch, cc, psi)), WithinRel(flow_norm2(ch, psi), 1e-12));
}

TEST_CASE("collapse commutes with induced flows") {
    CounterRng rng(9, 0);
    for (auto m : {fx::model_a(), fx::model_b(), fx::model_k3()}) {
        auto sys = build_system(m, 5);
        const auto& ch = sys.chain;
        Mask v(ch.n, 0);
        v[0] = 1;
        v[1] = 1;
        auto cc = collapse_chain(ch, v);
        auto f = fx::random_vector(rng, ch.n);
        f[0] = f[1] = -0.4;
        auto fb = collapse_function(cc, f);
        CHECK(fb[cc.o] == -0.4);
        auto cmp = [&](const Flow& a, const Flow& b) {
            double worst = 0.0;
            for (std::size_t e = 0; e < a.size(); ++e) worst = std::max(worst, std::fabs(a[e] - b[e]));
            return worst;
        };
        CHECK(cmp(collapse_flow(ch, cc, flow_phi(ch, f)), flow_phi(cc.chain, fb)) <= 1e-14);
        CHECK(cmp(collapse_flow(ch, cc, flow_phi_star(ch, f)), flow_phi_star(cc.chain, fb)) <= 1e-14);
        CHECK(cmp(collapse_flow(ch, cc, flow_psi(ch, f)), flow_psi(cc.chain, fb)) <= 1e-14);
        f[1] = 0.0;
        try {
            collapse_function(cc, f);
            FAIL("expected NotConstantOnValley");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::NotConstantOnValley);
        }
    }
}

TEST_CASE("collapsed hitting probabilities") {
    // line of four states: o is the valley, then A, then B behind it
    auto sys = build_system(fx::model_a(), 3);
    auto valley = fx::single(sys, {3, 0});
    auto cc = collapse_chain(sys.chain, valley);
    auto a = collapse_set(cc, fx::single(sys, {2, 1}));
    auto b = collapse_set(cc, fx::single(sys, {0, 3}));
    CHECK_THAT(collapsed_hitting(cc, a, b), WithinAbs(1.0, 1e-15));
    CHECK(collapsed_hitting(cc, a, Mask(cc.chain.n, 0)) == 1.0);

    auto s5 = build_system(fx::model_b(), 5);
    auto c5 = collapse_chain(s5.chain, fx::single(s5, {5, 0, 0}));
    auto y5 = collapse_set(c5, fx::single(s5, {0, 5, 0}));
    auto z5 = collapse_set(c5, fx::single(s5, {0, 0, 5}));
    double p = collapsed_hitting(c5, y5, z5);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    double q = collapsed_hitting(c5, z5, y5);
    CHECK_THAT(p + q, WithinAbs(1.0, 1e-12));
}
