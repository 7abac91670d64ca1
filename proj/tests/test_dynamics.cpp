#include "catch_amalgamated.hpp"

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "zrpm/dynamics.hpp"
#include "zrpm/error.hpp"
#include "zrpm/geometry.hpp"

using namespace zrpm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("holding time of a single admissible move is exponential") {
    auto m = fx::model_a();
    const int samples = 10000;
    std::vector<double> t(samples);
    ConfigSpace sp(2, 2);
    for (int i = 0; i < samples; ++i) {
        auto tr = simulate(m, {2, 0}, 1e9, 123, static_cast<std::uint64_t>(i), Variant::Primal, true, 1);
        REQUIRE(tr.times.size() == 2);
        CHECK(tr.ranks[1] == sp.rank(Config{1, 1}));
        t[i] = tr.times[1];
    }
    std::sort(t.begin(), t.end());
    // rate g(2) r(0,1) = 8
    double d = 0.0;
    for (int i = 0; i < samples; ++i) {
        double f = 1.0 - std::exp(-8.0 * t[i]);
        d = std::max({d, std::fabs(f - double(i) / samples), std::fabs(f - double(i + 1) / samples)});
    }
    // Kolmogorov critical value at level 1e-3
    CHECK(d < 1.949 / std::sqrt(double(samples)));
}

TEST_CASE("trajectories are reproducible and consistent") {
    auto m = fx::model_b();
    auto a = simulate(m, {5, 3, 2}, 50.0, 9, 4);
    auto b = simulate(m, {5, 3, 2}, 50.0, 9, 4);
    auto c = simulate(m, {5, 3, 2}, 50.0, 9, 5);
    CHECK(a.times == b.times);
    CHECK(a.ranks == b.ranks);
    CHECK(a.ranks != c.ranks);
    CHECK(a.jumps > 10);
    CHECK(trajectory_consistent(m, a));
    auto adj = simulate(m, {5, 3, 2}, 50.0, 9, 4, Variant::Adjoint);
    CHECK(trajectory_consistent(adjoint_model(m), adj));
    long total = 0;
    for (int x : a.final_state) total += x;
    CHECK(total == 10);

    auto bad = a;
    std::swap(bad.ranks[1], bad.ranks[3]);
    bad.ranks[2] = bad.ranks[0];
    CHECK_FALSE(trajectory_consistent(m, bad));
}

TEST_CASE("time averages match the stationary mass of a valley") {
    auto m = fx::model_a();
    const long n = 10;
    auto sys = build_system(m, n);
    auto sets = build_sets(m, default_scales(m, n, 0.05), false);
    double target = mu_mass(sys.chain, valley_mask(sets, sys, 0));
    const int batches = 40;
    const double len = 2000.0;
    auto tr = simulate(m, {10, 0}, batches * len, 3);
    std::vector<double> frac(batches, 0.0);
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        double s = tr.times[i];
        double e = i + 1 < tr.times.size() ? tr.times[i + 1] : tr.horizon;
        if (sets.valley_of(sys.config(tr.ranks[i])) != 0) continue;
        while (s < e) {
            int b = std::min(batches - 1, static_cast<int>(s / len));
            double end = std::min(e, (b + 1) * len);
            frac[b] += (end - s) / len;
            s = end;
        }
    }
    double mean = 0.0, var = 0.0;
    for (double f : frac) mean += f / batches;
    for (double f : frac) var += (f - mean) * (f - mean) / (batches - 1);
    double se = std::sqrt(var / batches);
    CHECK(std::fabs(mean - target) <= 3.0 * se);
}

TEST_CASE("trace chain of the two-particle example") {
    auto m = fx::model_a();
    auto sys = build_system(m, 2);
    std::vector<Mask> valleys{fx::single(sys, {2, 0}), fx::single(sys, {0, 2})};
    auto t = trace_chain_exact(sys, {0, 1}, valleys, true);
    CHECK_THAT(t.lambda[0], WithinRel(4.0, 1e-13));
    CHECK_THAT(t.lambda[1], WithinRel(4.0, 1e-13));
    CHECK_THAT(t.r(0, 1), WithinRel(4.0, 1e-13));
    CHECK_THAT(t.cap_valley[0], WithinRel(0.4, 1e-13));
    CHECK_THAT(t.mu_valley[0], WithinRel(0.1, 1e-13));
    CHECK_THAT(t.escape[1], WithinAbs(1.0, 1e-14));
    bool found = false;
    for (const auto& j : t.jumps)
        if (j.from == fx::rank_of(sys, {2, 0}) && j.to == fx::rank_of(sys, {0, 2})) {
            CHECK_THAT(j.rate, WithinRel(4.0, 1e-13));
            found = true;
        }
    CHECK(found);
    CHECK(t.cap_identity <= 1e-9);
    CHECK(t.hitting_identity <= 1e-9);
}

TEST_CASE("trace chain identities on three valleys") {
    auto m = fx::model_b();
    for (long n : {12L, 30L}) {
        auto sys = build_system(m, n);
        auto sets = build_sets(m, default_scales(m, n, 0.05), false);
        auto t = trace_chain_exact(m, sys, sets);
        CHECK(t.cap_identity <= 1e-9);
        CHECK(t.hitting_identity <= 1e-9);
        for (int i = 0; i < 3; ++i) {
            double s = 0.0;
            for (int j = 0; j < 3; ++j)
                if (i != j) s += t.r(i, j);
            CHECK_THAT(t.lambda[i], WithinRel(s, 1e-12));
        }
    }
}

TEST_CASE("mean jump rate of the two-site model") {
    auto m = fx::model_a();
    auto y = build_limit_chain(m.walk, m.profile, m.constants);
    auto sys = build_system(m, 60);
    auto sets = build_sets(m, default_scales(m, 60, 0.05), false);
    auto t = trace_chain_exact(m, sys, sets);
    CHECK_THAT(t.r(0, 1) * std::pow(60.0, 4), WithinRel(y.rate(0, 1), 0.25));
    // frozen at N = 60
    CHECK_THAT(t.r(0, 1) * std::pow(60.0, 4), WithinRel(69.809, 1e-4));
    double prev = 1e300;
    for (long n : {60L, 200L, 1024L}) {
        auto s = build_system(m, n);
        auto st = build_sets(m, default_scales(m, n, 0.05), false);
        double gap = std::fabs(trace_chain_exact(m, s, st).r(0, 1) * std::pow(double(n), 4) - y.rate(0, 1));
        CHECK(gap < prev);
        prev = gap;
    }
}

TEST_CASE("Monte Carlo jump rates agree with the exact trace chain") {
    auto m = fx::model_a();
    for (long n : {16L, 60L}) {
        auto sys = build_system(m, n);
        auto sets = build_sets(m, default_scales(m, n, 0.05), false);
        auto exact = trace_chain_exact(m, sys, sets);
        auto est = mean_jump_rate_mc(m, sets, 0, 400, 17);
        CHECK(est.transitions == 400);
        CHECK(std::fabs(est.rate(0, 1) - exact.r(0, 1)) <= 3.0 * est.se(0, 1));
        double occ = est.occupation[0] + est.occupation[1];
        CHECK_THAT(est.rate(0, 1) * est.occupation[0], WithinRel(est.count(0, 1), 1e-12));
        CHECK(occ > 0.0);
    }
    auto sys = build_system(m, 16);
    auto sets = build_sets(m, default_scales(m, 16, 0.05), false);
    auto exact = trace_chain_exact(m, sys, sets);
    auto plain = mean_jump_rate_plain(m, sets, 0, 400, 5);
    CHECK(std::fabs(plain.rate(0, 1) - exact.r(0, 1)) <= 3.0 * plain.se(0, 1));
    auto again = mean_jump_rate_mc(m, sets, 0, 400, 17);
    auto first = mean_jump_rate_mc(m, sets, 0, 400, 17);
    CHECK(again.rate == first.rate);
}

TEST_CASE("symmetric three-valley model") {
    auto m = fx::model_sym3();
    const long n = 24;
    auto sets = build_sets(m, default_scales(m, n, 0.05), false);
    auto est = mean_jump_rate_mc(m, sets, 0, 600, 23);
    double diff = est.rate(0, 1) - est.rate(0, 2);
    double se = std::hypot(est.se(0, 1), est.se(0, 2));
    CHECK(std::fabs(diff) <= 3.0 * se);
    auto sys = build_system(m, n);
    auto t = trace_chain_exact(m, sys, sets);
    CHECK_THAT(t.r(0, 1), WithinRel(t.r(0, 2), 1e-10));
    CHECK(t.hitting_identity <= 1e-9);
}

TEST_CASE("projection of a path that stays in one valley") {
    auto m = fx::model_a();
    const long n = 200;
    auto sets = build_sets(m, default_scales(m, n, 0.05), false);
    ConfigSpace sp(n, 2);
    Trajectory t;
    t.n = n;
    t.horizon = 30.0;
    t.times = {0.0, 10.0, 20.0};
    t.ranks = {sp.rank(Config{200, 0}), sp.rank(Config{199, 1}), sp.rank(Config{200, 0})};
    double scale = std::pow(200.0, 4.0);
    auto p = projection_path(m, sets, t, {0.0, 5.0 / scale, 15.0 / scale, 25.0 / scale});
    CHECK(p == std::vector<int>{0, 0, 0, 0});
    t.ranks[1] = sp.rank(Config{100, 100});
    auto q = projection_path(m, sets, t, {0.0, 15.0 / scale});
    CHECK(q == std::vector<int>{0, kNullState});
}

TEST_CASE("projected distributions") {
    auto m = fx::model_a();
    const long n = 60;
    auto sets = build_sets(m, default_scales(m, n, 0.05), false);
    std::vector<double> grid{0.0, 0.005, 0.02};
    auto paths = sample_projection_paths(m, sets, 0, grid, 400, 3);
    REQUIRE(paths.size() == 400);
    auto again = sample_projection_paths(m, sets, 0, grid, 400, 3);
    CHECK(paths == again);
    auto fdd = empirical_fdd(paths, grid, {0, 1});
    CHECK(fdd.prob(0, 0) == 1.0);
    for (int i = 0; i < 3; ++i) CHECK_THAT(fdd.prob.row(i).sum(), WithinAbs(1.0, 1e-12));
    auto y = build_limit_chain(m.walk, m.profile, m.constants);
    auto lim = limit_fdd(y, 0, grid);
    double a = y.rate(0, 1);
    CHECK_THAT(lim(2, 1), WithinAbs(0.5 * (1 - std::exp(-2 * a * 0.02)), 1e-12));
    CHECK(std::fabs(fdd.prob(2, 1) - lim(2, 1)) <= 3 * fdd.se(2, 1) + 0.1);
    auto two = empirical_two_time(paths, 1, 2, {0, 1});
    CHECK_THAT(two.sum(), WithinAbs(1.0, 1e-12));
}

TEST_CASE("metastability hypotheses") {
    auto m = fx::model_a();
    double prev = 1e300;
    for (long n : {64L, 128L, 256L}) {
        auto sys = build_system(m, n);
        auto sets = build_sets(m, default_scales(m, n, 0.05), false);
        auto h = hypothesis_diagnostics(m, sys, sets);
        CHECK(h.h1[0] < prev);
        prev = h.h1[0];
    }
    prev = 1e300;
    for (long n : {256L, 512L, 1024L}) {
        auto sys = build_system(m, n);
        auto sets = build_sets(m, default_scales(m, n, 0.05), false);
        auto h = hypothesis_diagnostics(m, sys, sets);
        CHECK(h.h2[0] < prev);
        prev = h.h2[0];
    }
    CHECK(prev <= 0.1);

    // valleys reduced to the condensate: H1 is a sup over an empty set
    auto sys = build_system(m, 2);
    auto sc = default_scales(m, 2, 0.05);
    sc.ell = 0;
    auto sets = build_sets(m, sc, false);
    auto h = hypothesis_diagnostics(m, sys, sets);
    CHECK(h.h1[0] == 0.0);
}

TEST_CASE("phase-type law") {
    // killed two-state chain: rates 0 -> 1 at 1, both killed at 2
    Eigen::MatrixXd t(2, 2);
    t << -3.0, 1.0, 1.0, -3.0;
    PhaseType ph(t, Eigen::VectorXd::Ones(2));
    CHECK(ph.reconstruction() <= 1e-12);
    CHECK_THAT(ph.survival(0, 0.7), WithinRel(std::exp(-2.0 * 0.7), 1e-12));
    auto occ = ph.occupation(0, 0.7);
    CHECK_THAT(occ(0), WithinRel(std::exp(-2.0 * 0.7) * 0.5 * (1 + std::exp(-2.0 * 0.7)), 1e-12));
    double s = ph.sample(0, 0.3);
    CHECK_THAT(ph.survival(0, s), WithinRel(0.3, 1e-10));

    Eigen::MatrixXd nr(3, 3);
    nr << -2.0, 1.5, 0.0, 0.0, -2.0, 1.5, 1.5, 0.0, -2.5;
    PhaseType pn(nr, Eigen::VectorXd());
    CHECK(pn.reconstruction() <= 1e-10);
    double u = pn.sample(1, 0.6);
    CHECK_THAT(pn.survival(1, u), WithinRel(0.6, 1e-9));
}
