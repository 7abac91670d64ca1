#include "zrpm/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

#include "zrpm/approx.hpp"
#include "zrpm/capacity.hpp"
#include "zrpm/collapse.hpp"
#include "zrpm/dynamics.hpp"
#include "zrpm/error.hpp"
#include "zrpm/flow.hpp"
#include "zrpm/geometry.hpp"
#include "zrpm/numeric.hpp"
#include "zrpm/zrp.hpp"

namespace zrpm {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& msg) {
    throw Error(ErrorKind::ConfigInvalid, path + ": " + msg);
}

std::vector<int> site_list(const json& j, const std::string& path, int kappa) {
    if (!j.is_array() || j.empty()) invalid(path, "must be a non-empty array of site indices");
    std::vector<int> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        if (!j[i].is_number_integer()) invalid(p, "must be an integer");
        int v = j[i].get<int>();
        if (v < 0 || v >= kappa) invalid(p, "site index out of range");
        if (std::find(out.begin(), out.end(), v) != out.end()) invalid(p, "duplicate site");
        out.push_back(v);
    }
    return out;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string csv(const std::vector<std::string>& cols, const std::vector<std::vector<double>>& rows) {
    std::ostringstream os;
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << "\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << fmt(r[i]);
        os << "\n";
    }
    return os.str();
}

// Runs fn(i) for i < count on a small pool; results keep index order.
template <class T>
std::vector<T> parallel_map(std::size_t count, int threads, const std::function<T(std::size_t)>& fn) {
    std::vector<T> out(count);
    std::vector<std::exception_ptr> err(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < count;) {
            try {
                out[i] = fn(i);
            } catch (...) {
                err[i] = std::current_exception();
            }
        }
    };
    const int t = std::max(1, std::min<int>(threads, static_cast<int>(count)));
    std::vector<std::thread> pool;
    for (int i = 1; i < t; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (auto& e : err)
        if (e) std::rethrow_exception(e);
    return out;
}

struct Row {
    std::vector<double> values;
    bool ok = true;
};

struct Context {
    const ExperimentConfig& cfg;
    ZrpModel model;
    double scale(long n) const { return std::pow(static_cast<double>(n), 1.0 + model.alpha); }
};

ZrpModel model_of(const ExperimentConfig& c) {
    std::optional<std::vector<int>> s;
    if (!c.s_star.empty()) s = c.s_star;
    return make_model(make_walk(c.rates, c.labels), c.alpha, s);
}

MetastableSets sets_of(const Context& cx, long n) {
    return build_sets(cx.model, default_scales(cx.model, n, cx.cfg.eps), cx.cfg.option<bool>("strict", false));
}

void require_s_star(const Context& cx) {
    for (int v : cx.cfg.a)
        if (!cx.model.profile.in_s_star(v)) invalid("a", "valley sets need sites of maximal mass");
    for (int v : cx.cfg.b)
        if (!cx.model.profile.in_s_star(v)) invalid("b", "valley sets need sites of maximal mass");
}

std::pair<Mask, Mask> set_pair(const Context& cx, const ZrpSystem& sys) {
    if (cx.cfg.sets == "condensate") {
        auto pick = [&](const std::vector<int>& xs) {
            std::vector<std::uint32_t> r;
            for (int x : xs) {
                Config c(cx.model.kappa(), 0);
                c[x] = static_cast<int>(sys.n);
                r.push_back(static_cast<std::uint32_t>(sys.space.rank(c)));
            }
            return make_mask(sys.space.size(), r);
        };
        return {pick(cx.cfg.a), pick(cx.cfg.b)};
    }
    require_s_star(cx);
    auto sets = sets_of(cx, sys.n);
    return {valleys_mask(sets, sys, cx.cfg.a), valleys_mask(sets, sys, cx.cfg.b)};
}

Flow random_flow(const Chain& ch, CounterRng& rng, double scale) {
    Flow f(ch.edges());
    for (auto& v : f) v = scale * (2.0 * rng.uniform() - 1.0);
    return f;
}

double rel_max(const std::vector<double>& x, const std::vector<double>& y) {
    double d = 0.0, s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        d = std::max(d, std::abs(x[i] - y[i]));
        s = std::max({s, std::abs(x[i]), std::abs(y[i])});
    }
    return s > 0.0 ? d / s : d;
}

// ---------------------------------------------------------------- commands

RunOutput cmd_exact(const Context& cx, int threads) {
    auto rows = parallel_map<Row>(cx.cfg.n.size(), threads, [&](std::size_t i) {
        const long n = cx.cfg.n[i];
        ZrpSystem sys = build_system(cx.model, n);
        auto [a, b] = set_pair(cx, sys);
        CapacityResult r = solve_capacity(sys.chain, a, b);
        Row row;
        const double dis = r.max_disagreement();
        row.values = {double(n), double(sys.space.size()), r.cap, r.flux_a, r.flux_b, r.cap_star, r.cap_sym, dis,
                      r.cap * cx.scale(n)};
        row.ok = dis <= 1e-9 && r.cap_sym <= r.cap * (1.0 + 1e-12);
        return row;
    });
    RunOutput out;
    std::vector<std::vector<double>> t;
    for (auto& r : rows) {
        t.push_back(r.values);
        out.passed = out.passed && r.ok;
    }
    out.files.push_back({"exact.csv", csv({"n", "states", "cap", "flux_a", "flux_b", "cap_star", "cap_sym",
                                           "disagreement", "scaled_cap"},
                                          t)});
    return out;
}

RunOutput cmd_principles(const Context& cx, int threads) {
    const int trials = cx.cfg.option<int>("trials", 50);
    auto rows = parallel_map<Row>(cx.cfg.n.size(), threads, [&](std::size_t i) {
        const long n = cx.cfg.n[i];
        ZrpSystem sys = build_system(cx.model, n);
        const Chain& ch = sys.chain;
        auto [a, b] = set_pair(cx, sys);
        FlowIdentityReport fi = flow_identities(ch, cx.cfg.seed, 20);
        CapacityResult res = solve_capacity(ch, a, b);
        Optimizers o = dt_optimizers(ch, res, a, b);
        OptimizerReport orep = verify_optimizers(ch, o, a, b);
        SectorReport sec = sector_check(ch, cx.cfg.seed, 200);
        CounterRng rng(cx.cfg.seed, 1000 + i);
        int violations = 0, degenerate = 0;
        double worst_up = 0.0, worst_lo = 0.0;
        double fscale = 0.0;
        for (double v : o.phi0) fscale = std::max(fscale, std::abs(v));
        double gscale = 0.0;
        for (double v : o.psi0) gscale = std::max(gscale, std::abs(v));
        for (int t = 0; t < trials; ++t) {
            std::vector<double> f = o.f0, g = o.g0;
            const double amp = 0.2 * rng.uniform();
            for (std::size_t v = 0; v < ch.n; ++v)
                if (!a[v] && !b[v]) {
                    f[v] += amp * (2.0 * rng.uniform() - 1.0);
                    g[v] += amp * (2.0 * rng.uniform() - 1.0) / std::max(res.cap, 1e-300);
                }
            Flow phi = flow_combine(1.0, o.phi0, 1.0, random_flow(ch, rng, amp * fscale));
            Flow psi = flow_combine(1.0, o.psi0, 1.0, random_flow(ch, rng, amp * gscale));
            try {
                Bound up = generalized_upper_bound(ch, a, b, res.h, f, phi);
                worst_up = std::max(worst_up, up.value / res.cap);
                Bound lo = generalized_lower_bound(ch, a, b, res.h, g, psi);
                if (lo.degenerate)
                    ++degenerate;
                else
                    worst_lo = std::max(worst_lo, lo.value / res.cap);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::PropertyCheckFailed) throw;
                ++violations;
            }
        }
        Row row;
        row.values = {double(n),      double(sys.space.size()), fi.worst(),      orep.dp_error, orep.tp_error,
                      orep.phi0_interior, orep.psi0_interior,   sec.c0,          double(violations),
                      double(degenerate), worst_up,             worst_lo};
        row.ok = fi.worst() <= 1e-10 && orep.dp_error <= 1e-9 && orep.tp_error <= 1e-9 && violations == 0;
        return row;
    });
    RunOutput out;
    std::vector<std::vector<double>> t;
    for (auto& r : rows) {
        t.push_back(r.values);
        out.passed = out.passed && r.ok;
    }
    out.files.push_back({"principles.csv",
                         csv({"n", "states", "flow_identities", "dp_error", "tp_error", "phi0_interior",
                              "psi0_interior", "sector_c0", "bound_violations", "degenerate_lower",
                              "max_upper_over_cap", "max_lower_over_cap"},
                             t)});
    return out;
}

RunOutput cmd_collapse(const Context& cx, int threads) {
    require_s_star(cx);
    const int trials = cx.cfg.option<int>("trials", 20);
    auto rows = parallel_map<Row>(cx.cfg.n.size(), threads, [&](std::size_t i) {
        const long n = cx.cfg.n[i];
        ZrpSystem sys = build_system(cx.model, n);
        const Chain& ch = sys.chain;
        auto sets = sets_of(cx, n);
        const int x = cx.cfg.a.front();
        Mask ex = valley_mask(sets, sys, x);
        Mask target = valleys_mask(sets, sys, cx.cfg.b);
        CollapsedChain cc = collapse_chain(ch, ex);
        Mask o(cc.chain.n, 0);
        o[cc.o] = 1;
        const double cap = capacity(ch, target, ex);
        const double capbar = collapsed_capacity(cc, collapse_set(cc, target), o).cap;
        const double collapsed_cap_error = std::abs(capbar - cap) / cap;

        CounterRng rng(cx.cfg.seed, 2000 + i);
        double ratio = 0.0, collapsed_div_error = 0.0, edgewise_error = 0.0, equality = 0.0;
        for (int t = 0; t < trials; ++t) {
            Flow phi = random_flow(ch, rng, 1.0);
            Flow bar = collapse_flow(ch, cc, phi);
            ratio = std::max(ratio, std::sqrt(flow_norm2(cc.chain, bar) / flow_norm2(ch, phi)));
            auto d = divergence(ch, phi), db = divergence(cc.chain, bar);
            std::vector<double> lifted(cc.chain.n, 0.0);
            Accumulator dv;
            for (std::size_t s = 0; s < ch.n; ++s) {
                if (ex[s])
                    dv += d[s];
                else
                    lifted[cc.old_to_new[s]] = d[s];
            }
            lifted[cc.o] = dv.value();
            collapsed_div_error = std::max(collapsed_div_error, rel_max(lifted, db));

            std::vector<double> f(ch.n);
            const double onv = 2.0 * rng.uniform() - 1.0;
            for (std::size_t s = 0; s < ch.n; ++s) f[s] = ex[s] ? onv : 2.0 * rng.uniform() - 1.0;
            std::vector<double> fb = collapse_function(cc, f);
            edgewise_error = std::max({edgewise_error, rel_max(collapse_flow(ch, cc, flow_phi(ch, f)), flow_phi(cc.chain, fb)),
                              rel_max(collapse_flow(ch, cc, flow_phi_star(ch, f)), flow_phi_star(cc.chain, fb)),
                              rel_max(collapse_flow(ch, cc, flow_psi(ch, f)), flow_psi(cc.chain, fb))});
            Flow psi = flow_psi(ch, f);
            const double n0 = flow_norm2(ch, psi), n1 = flow_norm2(cc.chain, collapse_flow(ch, cc, psi));
            equality = std::max(equality, std::abs(n1 - n0) / n0);
        }
        Row row;
        row.values = {double(n), double(sys.space.size()), cap, capbar, collapsed_cap_error, ratio, equality, collapsed_div_error, edgewise_error};
        row.ok = collapsed_cap_error <= 1e-9 && ratio <= 1.0 + 1e-12 && equality <= 1e-10 && collapsed_div_error <= 1e-10 && edgewise_error <= 1e-10;
        return row;
    });
    RunOutput out;
    std::vector<std::vector<double>> t;
    for (auto& r : rows) {
        t.push_back(r.values);
        out.passed = out.passed && r.ok;
    }
    out.files.push_back({"collapse.csv", csv({"n", "states", "cap", "cap_collapsed", "collapsed_cap_error", "max_norm_ratio",
                                              "equality_defect", "collapsed_div_error", "edgewise_error"},
                                             t)});
    return out;
}

RunOutput cmd_asymptotics(const Context& cx, int threads) {
    require_s_star(cx);
    LimitChain y = build_limit_chain(cx.model.walk, cx.model.profile, cx.model.constants);
    const double cap_y = limit_potential(y, cx.cfg.a, cx.cfg.b).cap;
    std::vector<int> all(cx.model.kappa());
    for (int s = 0; s < cx.model.kappa(); ++s) all[s] = s;
    const double z = partition_limit(cx.model, all);
    const int ia = y.local(cx.cfg.a.front()), ib = y.local(cx.cfg.b.front());
    const double a_rate = y.rate(ia, ib);
    auto rows = parallel_map<Row>(cx.cfg.n.size(), threads, [&](std::size_t i) {
        const long n = cx.cfg.n[i];
        ZrpSystem sys = build_system(cx.model, n);
        auto sets = sets_of(cx, n);
        Mask a = valleys_mask(sets, sys, cx.cfg.a), b = valleys_mask(sets, sys, cx.cfg.b);
        const double cap = capacity(sys.chain, a, b);
        const double kmu = cx.model.profile.kappa_star() * mu_mass(sys.chain, valley_mask(sets, sys, cx.cfg.a.front()));
        TraceChainExact tr = trace_chain_exact(cx.model, sys, sets);
        const double r = tr.r(ia, ib);
        Row row;
        row.values = {double(n), double(sys.space.size()), sys.z_n, std::abs(sys.z_n - z) / z, kmu,
                      std::abs(kmu - 1.0), cap * cx.scale(n), cap_y, r * cx.scale(n), a_rate,
                      double(sets.scales().order_ok)};
        return row;
    });
    RunOutput out;
    std::vector<std::vector<double>> t;
    for (auto& r : rows) t.push_back(r.values);
    out.files.push_back({"asymptotics.csv", csv({"n", "states", "z_n", "z_rel_error", "kappa_mu_valley",
                                                 "kappa_mu_error", "scaled_cap", "cap_y", "scaled_rate",
                                                 "limit_rate", "order_ok"},
                                                t)});
    return out;
}

RunOutput cmd_approx(const Context& cx, int threads) {
    require_s_star(cx);
    const bool route = cx.cfg.option<bool>("route", true);
    LimitChain y = build_limit_chain(cx.model.walk, cx.model.profile, cx.model.constants);
    auto rows = parallel_map<Row>(cx.cfg.n.size(), threads, [&](std::size_t i) {
        const long n = cx.cfg.n[i];
        ZrpSystem sys = build_system(cx.model, n);
        auto sets = sets_of(cx, n);
        RampProfile ramp = ramp_functions(cx.cfg.eps, cx.model.alpha);
        GlobalConstruction g = global_construction(cx.model, sys, sets, ramp, y, cx.cfg.a, cx.cfg.b, route);
        ApproxReport r = approx_verification(cx.model, sys, sets, g);
        Row row;
        row.values = {double(n),     double(sys.space.size()), double(r.order_ok), r.tube_div_chi,        r.tube_div_phi,
                      r.tube_div_phi_full,   r.valley_div_chi,                   r.mass_balance,              r.valley_sum,  r.complement,
                      r.v_on_valleys, r.valley_off_v,          double(r.valley_positive), double(r.boundary_signs),
                      r.valley_flux,  r.valley_flux_kappa,             r.dirichlet_v,      r.chi_norm,    r.div_a,
                      r.div_b,       r.div_delta,              r.cap_y,            r.tube_excess,      r.tube_excess_min};
        // valley identities need the scale order; the tube identities hold at every N
        const double tol = 1e-11;
        const bool tube = r.tube_div_chi <= tol && r.tube_div_phi <= tol && r.valley_div_chi <= tol && r.mass_balance <= tol && r.complement <= tol;
        row.ok = tube && (!r.order_ok || r.exact_ok(tol));
        return row;
    });
    RunOutput out;
    std::vector<std::vector<double>> t;
    for (auto& r : rows) {
        t.push_back(r.values);
        out.passed = out.passed && r.ok;
    }
    out.files.push_back({"approx.csv", csv({"n", "states", "order_ok", "tube_div_chi", "tube_div_phi", "tube_div_phi_full", "valley_div_chi", "mass_balance",
                                            "valley_sum", "complement", "v_on_valleys", "valley_off_v",
                                            "valley_positive", "boundary_signs", "valley_flux", "valley_flux_kappa",
                                            "scaled_dirichlet_v", "scaled_chi_norm", "scaled_div_a",
                                            "scaled_div_b", "scaled_div_delta", "cap_y", "tube_excess", "tube_excess_min"},
                                           t)});
    RampProfile ramp = ramp_functions(cx.cfg.eps, cx.model.alpha);
    RampCheck rc = ramp.check();
    json rj = {{"flat", rc.flat},
               {"symmetric", rc.symmetric},
               {"slope", rc.slope},
               {"upper_ratio", rc.upper_ratio},
               {"lower_ratio", rc.lower_ratio},
               {"max_slope", rc.max_slope},
               {"max_upper_ratio", rc.max_upper_ratio},
               {"min_lower_ratio", rc.min_lower_ratio}};
    out.files.push_back({"ramp.json", rj.dump(2) + "\n"});
    return out;
}

RunOutput cmd_rates(const Context& cx, int threads) {
    const auto& s = cx.model.profile.s_star;
    const int ks = static_cast<int>(s.size());
    if (ks < 2) invalid("walk", "needs at least two sites of maximal mass");
    auto rows = parallel_map<Row>(cx.cfg.n.size(), threads, [&](std::size_t i) {
        const long n = cx.cfg.n[i];
        ZrpSystem sys = build_system(cx.model, n);
        auto sets = sets_of(cx, n);
        TraceChainExact tr = trace_chain_exact(cx.model, sys, sets);
        HypothesisReport h = hypothesis_diagnostics(cx.model, sys, sets);
        Row row;
        row.values = {double(n), double(sys.space.size()), tr.cap_identity, tr.hitting_identity};
        for (int a = 0; a < ks; ++a)
            for (int b = 0; b < ks; ++b)
                if (a != b) row.values.push_back(tr.r(a, b) * cx.scale(n));
        for (int a = 0; a < ks; ++a) row.values.push_back(h.h1[a]);
        for (int a = 0; a < ks; ++a) row.values.push_back(h.h2[a]);
        row.ok = tr.cap_identity <= 1e-9 && tr.hitting_identity <= 1e-9;
        return row;
    });
    std::vector<std::string> cols{"n", "states", "cap_identity", "hitting_identity"};
    for (int a = 0; a < ks; ++a)
        for (int b = 0; b < ks; ++b)
            if (a != b) cols.push_back("scaled_r_" + std::to_string(s[a]) + "_" + std::to_string(s[b]));
    for (int a = 0; a < ks; ++a) cols.push_back("h1_" + std::to_string(s[a]));
    for (int a = 0; a < ks; ++a) cols.push_back("h2_" + std::to_string(s[a]));
    RunOutput out;
    std::vector<std::vector<double>> t;
    for (auto& r : rows) {
        t.push_back(r.values);
        out.passed = out.passed && r.ok;
    }
    out.files.push_back({"rates.csv", csv(cols, t)});
    return out;
}

RunOutput cmd_simulate(const Context& cx, int threads) {
    require_s_star(cx);
    const auto transitions = cx.cfg.option<std::uint64_t>("transitions", 2000);
    const auto paths = cx.cfg.option<std::size_t>("paths", 1000);
    const auto grid = cx.cfg.option<std::vector<double>>("grid", {0.0, 0.01, 0.02});
    const auto& s = cx.model.profile.s_star;
    const int x0 = cx.cfg.a.front(), y0 = cx.cfg.b.front();
    LimitChain y = build_limit_chain(cx.model.walk, cx.model.profile, cx.model.constants);
    const int ia = y.local(x0), ib = y.local(y0);
    Eigen::MatrixXd lim = limit_fdd(y, x0, grid);
    struct Sim {
        std::vector<double> rate;
        std::vector<std::vector<double>> fdd;
    };
    auto sims = parallel_map<Sim>(cx.cfg.n.size(), threads, [&](std::size_t i) {
        const long n = cx.cfg.n[i];
        auto sets = sets_of(cx, n);
        const double sc = cx.scale(n);
        JumpRateEstimate e = mean_jump_rate_mc(cx.model, sets, x0, transitions, cx.cfg.seed + i);
        double exact = std::nan("");
        if (ConfigSpace(n, cx.model.kappa()).size() <= 2'000'000) {
            ZrpSystem sys = build_system(cx.model, n);
            exact = trace_chain_exact(cx.model, sys, sets).r(ia, ib);
        }
        Sim out;
        const double se = e.se(ia, ib);
        out.rate = {double(n), double(e.transitions), e.rate(ia, ib) * sc, se * sc, exact * sc,
                    (e.rate(ia, ib) - exact) / se, double(e.steps), double(e.sojourns)};
        auto p = sample_projection_paths(cx.model, sets, x0, grid, paths, cx.cfg.seed + 7919 * (i + 1));
        FddTable f = empirical_fdd(p, grid, s);
        for (std::size_t g = 0; g < grid.size(); ++g) {
            std::vector<double> r{double(n), grid[g]};
            for (int k = 0; k < static_cast<int>(s.size()); ++k) r.push_back(f.prob(g, k));
            r.push_back(f.prob(g, s.size()));
            for (int k = 0; k < static_cast<int>(s.size()); ++k) r.push_back(lim(g, k));
            double dev = 0.0;
            for (int k = 0; k < static_cast<int>(s.size()); ++k)
                dev = std::max(dev, std::abs(f.prob(g, k) - lim(g, k)) - 3.0 * f.se(g, k));
            r.push_back(dev);
            out.fdd.push_back(r);
        }
        return out;
    });
    RunOutput out;
    std::vector<std::vector<double>> rt, ft;
    for (auto& sm : sims) {
        rt.push_back(sm.rate);
        for (auto& r : sm.fdd) ft.push_back(r);
    }
    out.files.push_back({"mc_rates.csv", csv({"n", "transitions", "scaled_rate_mc", "scaled_se", "scaled_rate_exact",
                                              "z_score", "steps", "sojourns"},
                                             rt)});
    std::vector<std::string> cols{"n", "t"};
    for (int k : s) cols.push_back("p_" + std::to_string(k));
    cols.push_back("p_null");
    for (int k : s) cols.push_back("limit_" + std::to_string(k));
    cols.push_back("excess_over_3se");
    out.files.push_back({"fdd.csv", csv(cols, ft)});
    return out;
}

}  // namespace

// ---------------------------------------------------------------- config

ExperimentConfig parse_config(const json& j) {
    static const std::set<std::string> keys{"walk", "alpha", "eps", "n", "a", "b", "seed", "sets", "options"};
    if (!j.is_object()) invalid("$", "config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!keys.count(it.key())) invalid(it.key(), "unknown field");
    ExperimentConfig c;
    if (!j.contains("walk") || !j["walk"].is_object()) invalid("walk", "required object");
    const json& w = j["walk"];
    for (auto it = w.begin(); it != w.end(); ++it)
        if (it.key() != "rates" && it.key() != "labels" && it.key() != "s_star")
            invalid("walk." + it.key(), "unknown field");
    if (!w.contains("rates") || !w["rates"].is_array() || w["rates"].size() < 2)
        invalid("walk.rates", "must be a square matrix with at least two rows");
    const std::size_t k = w["rates"].size();
    for (std::size_t i = 0; i < k; ++i) {
        const json& row = w["rates"][i];
        const std::string p = "walk.rates[" + std::to_string(i) + "]";
        if (!row.is_array() || row.size() != k) invalid(p, "row length differs from the number of sites");
        std::vector<double> r;
        for (std::size_t jj = 0; jj < k; ++jj) {
            if (!row[jj].is_number()) invalid(p + "[" + std::to_string(jj) + "]", "must be a number");
            double v = row[jj].get<double>();
            if (!std::isfinite(v) || v < 0.0) invalid(p + "[" + std::to_string(jj) + "]", "must be finite and >= 0");
            r.push_back(v);
        }
        c.rates.push_back(std::move(r));
    }
    const int kappa = static_cast<int>(k);
    if (w.contains("labels")) {
        if (!w["labels"].is_array() || w["labels"].size() != k) invalid("walk.labels", "one label per site");
        for (const auto& l : w["labels"]) {
            if (!l.is_string()) invalid("walk.labels", "labels must be strings");
            c.labels.push_back(l.get<std::string>());
        }
    }
    if (w.contains("s_star")) c.s_star = site_list(w["s_star"], "walk.s_star", kappa);

    if (!j.contains("alpha") || !j["alpha"].is_number()) invalid("alpha", "required number");
    c.alpha = j["alpha"].get<double>();
    if (!(c.alpha > 2.0) || !std::isfinite(c.alpha)) invalid("alpha", "must satisfy alpha > 2");
    if (j.contains("eps")) {
        if (!j["eps"].is_number()) invalid("eps", "must be a number");
        c.eps = j["eps"].get<double>();
    }
    if (!(c.eps > 0.0 && c.eps <= 1.0 / 16.0)) invalid("eps", "must lie in (0, 1/16]");
    if (!j.contains("n")) invalid("n", "required");
    json nl = j["n"].is_array() ? j["n"] : json::array({j["n"]});
    if (nl.empty()) invalid("n", "must not be empty");
    for (std::size_t i = 0; i < nl.size(); ++i) {
        const std::string p = "n[" + std::to_string(i) + "]";
        if (!nl[i].is_number_integer() || nl[i].get<long>() < 1) invalid(p, "must be a positive integer");
        c.n.push_back(nl[i].get<long>());
    }
    if (!j.contains("a")) invalid("a", "required");
    if (!j.contains("b")) invalid("b", "required");
    c.a = site_list(j["a"], "a", kappa);
    c.b = site_list(j["b"], "b", kappa);
    for (int v : c.a)
        if (std::find(c.b.begin(), c.b.end(), v) != c.b.end()) invalid("b", "must be disjoint from a");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0) invalid("seed", "must be a non-negative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("sets")) {
        if (!j["sets"].is_string()) invalid("sets", "must be a string");
        c.sets = j["sets"].get<std::string>();
        if (c.sets != "valley" && c.sets != "condensate") invalid("sets", "must be \"valley\" or \"condensate\"");
    }
    if (j.contains("options")) {
        if (!j["options"].is_object()) invalid("options", "must be an object");
        c.options = j["options"];
        static const std::set<std::string> opts{"trials", "transitions", "paths", "grid", "route", "strict"};
        for (auto it = c.options.begin(); it != c.options.end(); ++it) {
            const std::string p = "options." + it.key();
            if (!opts.count(it.key())) invalid(p, "unknown option");
            const json& v = it.value();
            if (it.key() == "route" || it.key() == "strict") {
                if (!v.is_boolean()) invalid(p, "must be a boolean");
            } else if (it.key() == "grid") {
                if (!v.is_array() || v.empty()) invalid(p, "must be a non-empty array");
                double last = 0.0;
                for (const auto& t : v) {
                    if (!t.is_number() || t.get<double>() < last) invalid(p, "times must be sorted and >= 0");
                    last = t.get<double>();
                }
            } else if (!v.is_number_integer() || v.get<long long>() < 1) {
                invalid(p, "must be a positive integer");
            }
        }
        if (c.options.contains("transitions") && c.options["transitions"].get<std::uint64_t>() < 100)
            invalid("options.transitions", "must be at least 100");
    }
    c.raw = j;
    c.raw["seed"] = c.seed;
    c.hash = config_hash(c.raw);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) invalid("--config", "cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        invalid("$", std::string("malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

ExperimentConfig with_seed(const ExperimentConfig& c, std::uint64_t seed) {
    json j = c.raw;
    j["seed"] = seed;
    return parse_config(j);
}

std::string config_hash(const json& j) {
    const std::string s = j.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

const std::vector<std::string>& experiment_commands() {
    static const std::vector<std::string> c{"exact", "principles", "collapse", "asymptotics",
                                            "approx", "rates",     "simulate"};
    return c;
}

RunOutput run_experiment(const std::string& command, const ExperimentConfig& cfg, int threads) {
    Context cx{cfg, model_of(cfg)};
    RunOutput out;
    if (command == "exact")
        out = cmd_exact(cx, threads);
    else if (command == "principles")
        out = cmd_principles(cx, threads);
    else if (command == "collapse")
        out = cmd_collapse(cx, threads);
    else if (command == "asymptotics")
        out = cmd_asymptotics(cx, threads);
    else if (command == "approx")
        out = cmd_approx(cx, threads);
    else if (command == "rates")
        out = cmd_rates(cx, threads);
    else if (command == "simulate")
        out = cmd_simulate(cx, threads);
    else
        invalid("command", "unknown command " + command);
    json summary = {{"command", command}, {"config_hash", cfg.hash}, {"seed", cfg.seed},
                    {"config", cfg.raw},  {"passed", out.passed}};
    json files = json::array();
    for (const auto& f : out.files) files.push_back(f.name);
    summary["files"] = files;
    out.files.push_back({"summary.json", summary.dump(2) + "\n"});
    return out;
}

std::string write_artifacts(const std::string& root, const std::string& command, const ExperimentConfig& cfg,
                            const RunOutput& out) {
    namespace fs = std::filesystem;
    fs::path dir = fs::path(root) / (command + "-" + cfg.hash);
    fs::create_directories(dir);
    for (const auto& f : out.files) {
        std::ofstream os(dir / f.name, std::ios::binary);
        if (f.name.ends_with(".csv")) os << "# config_hash " << cfg.hash << " seed " << cfg.seed << "\n";
        os << f.content;
    }
    return dir.string();
}

}  // namespace zrpm
