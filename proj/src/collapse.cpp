#include "zrpm/collapse.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "zrpm/error.hpp"
#include "zrpm/numeric.hpp"

namespace zrpm {

CollapsedChain collapse_chain(const Chain& ch, const Mask& valley) {
    std::size_t count = 0;
    for (char v : valley) count += v ? 1 : 0;
    if (count == 0 || count == ch.n) throw Error(ErrorKind::EmptyOrFullValley, "valley must be a non-empty proper subset");
    CollapsedChain cc;
    cc.valley = valley;
    cc.old_to_new.assign(ch.n, -1);
    const std::size_t n_new = ch.n - count + 1;
    cc.o = static_cast<std::uint32_t>(n_new - 1);
    std::vector<double> mu(n_new, 0.0);
    Accumulator mo;
    std::uint32_t next = 0;
    for (std::uint32_t v = 0; v < ch.n; ++v) {
        if (valley[v]) {
            cc.old_to_new[v] = cc.o;
            mo.add(ch.mu[v]);
        } else {
            cc.old_to_new[v] = next;
            cc.new_to_old.push_back(v);
            mu[next++] = ch.mu[v];
        }
    }
    cc.new_to_old.push_back(-1);
    mu[cc.o] = mo.value();

    std::vector<std::uint32_t> lo, hi;
    std::vector<Accumulator> cf, cb;
    std::unordered_map<std::uint32_t, std::size_t> to_o;  // outside state -> edge to o
    cc.edge_map.assign(ch.edges(), -1);
    cc.edge_sign.assign(ch.edges(), 0);
    for (std::size_t e = 0; e < ch.edges(); ++e) {
        bool vl = valley[ch.lo[e]], vh = valley[ch.hi[e]];
        if (vl && vh) continue;
        auto nl = static_cast<std::uint32_t>(cc.old_to_new[ch.lo[e]]);
        auto nh = static_cast<std::uint32_t>(cc.old_to_new[ch.hi[e]]);
        // collapsed edges keep lo < hi; o is the largest index
        bool flip = nl > nh;
        std::uint32_t a = flip ? nh : nl, b = flip ? nl : nh;
        double fw = flip ? ch.c_bw[e] : ch.c_fw[e];
        double bw = flip ? ch.c_fw[e] : ch.c_bw[e];
        std::size_t id;
        if (b == cc.o) {
            auto it = to_o.find(a);
            if (it == to_o.end()) {
                id = lo.size();
                to_o.emplace(a, id);
                lo.push_back(a);
                hi.push_back(b);
                cf.emplace_back();
                cb.emplace_back();
            } else {
                id = it->second;
            }
        } else {
            id = lo.size();
            lo.push_back(a);
            hi.push_back(b);
            cf.emplace_back();
            cb.emplace_back();
        }
        cf[id].add(fw);
        cb[id].add(bw);
        cc.edge_map[e] = static_cast<std::int64_t>(id);
        cc.edge_sign[e] = flip ? -1 : 1;
    }
    std::vector<double> c_fw(lo.size()), c_bw(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i) {
        c_fw[i] = cf[i].value();
        c_bw[i] = cb[i].value();
    }
    cc.chain = make_chain_from_conductances(n_new, std::move(mu), std::move(lo), std::move(hi), std::move(c_fw),
                                            std::move(c_bw));
    return cc;
}

Flow collapse_flow(const Chain& ch, const CollapsedChain& cc, const Flow& phi) {
    std::vector<Accumulator> acc(cc.chain.edges());
    for (std::size_t e = 0; e < ch.edges(); ++e) {
        if (cc.edge_map[e] < 0) continue;
        acc[cc.edge_map[e]].add(cc.edge_sign[e] * phi[e]);
    }
    Flow out(cc.chain.edges());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = acc[i].value();
    return out;
}

std::vector<double> collapse_function(const CollapsedChain& cc, const std::vector<double>& f, double tol) {
    std::vector<double> out(cc.chain.n);
    bool first = true;
    double value = 0.0;
    for (std::size_t v = 0; v < f.size(); ++v) {
        if (!cc.valley[v]) {
            out[cc.old_to_new[v]] = f[v];
            continue;
        }
        if (first) {
            value = f[v];
            first = false;
        } else if (std::fabs(f[v] - value) > tol * std::max(1.0, std::fabs(value))) {
            throw Error(ErrorKind::NotConstantOnValley, "function is not constant on the valley");
        }
    }
    out[cc.o] = value;
    return out;
}

Mask collapse_set(const CollapsedChain& cc, const Mask& set, bool with_o) {
    Mask out(cc.chain.n, 0);
    for (std::size_t v = 0; v < set.size(); ++v) {
        if (!set[v]) continue;
        if (cc.valley[v]) throw Error(ErrorKind::SetsOverlapOrEmpty, "set meets the collapsed valley");
        out[cc.old_to_new[v]] = 1;
    }
    if (with_o) out[cc.o] = 1;
    return out;
}

double collapse_equality_defect(const Chain& ch, const CollapsedChain& cc, const Flow& phi) {
    double worst = 0.0, scale = 0.0;
    for (std::size_t e = 0; e < ch.edges(); ++e) scale = std::max(scale, std::fabs(phi[e] / ch.cs[e]));
    if (scale == 0.0) return 0.0;
    for (std::size_t e = 0; e < ch.edges(); ++e)
        if (cc.edge_map[e] < 0) worst = std::max(worst, std::fabs(phi[e] / ch.cs[e]));
    for (std::uint32_t u = 0; u < ch.n; ++u) {
        if (cc.valley[u]) continue;
        bool seen = false;
        double ref = 0.0;
        for (std::size_t k = ch.adj_ptr[u]; k < ch.adj_ptr[u + 1]; ++k) {
            std::size_t e = ch.adj_edge[k];
            if (!cc.valley[ch.other(e, u)]) continue;
            double q = oriented(ch, phi, e, u) / ch.cs[e];
            if (!seen) {
                ref = q;
                seen = true;
            } else {
                worst = std::max(worst, std::fabs(q - ref));
            }
        }
    }
    return worst / scale;
}

CollapsedCapacity collapsed_capacity(const CollapsedChain& cc, const Mask& a, const Mask& b) {
    CollapsedCapacity out;
    auto res = solve_capacity(cc.chain, a, b);
    out.cap = res.cap;
    out.cap_sym = res.cap_sym;
    return out;
}

double collapsed_hitting(const CollapsedChain& cc, const Mask& a, const Mask& b) {
    if (a[cc.o] || b[cc.o]) throw Error(ErrorKind::SetsOverlapOrEmpty, "o must lie outside A and B");
    bool any_b = std::any_of(b.begin(), b.end(), [](char c) { return c != 0; });
    if (!any_b) {
        bool any_a = std::any_of(a.begin(), a.end(), [](char c) { return c != 0; });
        if (!any_a) throw Error(ErrorKind::SetsOverlapOrEmpty, "A must be non-empty");
        return 1.0;
    }
    return equilibrium_potential(cc.chain, a, b).h[cc.o];
}

}  // namespace zrpm
