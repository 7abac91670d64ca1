#include "zrpm/flow.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "zrpm/error.hpp"
#include "zrpm/numeric.hpp"

namespace zrpm {

Flow zero_flow(const Chain& ch) { return Flow(ch.edges(), 0.0); }

double flow_value(const Chain& ch, const Flow& phi, std::uint32_t u, std::uint32_t v) {
    std::int64_t e = ch.find_edge(u, v);
    if (e < 0) return 0.0;
    return oriented(ch, phi, static_cast<std::size_t>(e), u);
}

void flow_add(const Chain& ch, Flow& phi, std::uint32_t u, std::uint32_t v, double value) {
    std::int64_t e = ch.find_edge(u, v);
    if (e < 0) throw Error(ErrorKind::EdgeOutsideGraph, "pair is not an edge of the chain");
    phi[e] += ch.lo[e] == u ? value : -value;
}

double flow_inner(const Chain& ch, const Flow& phi, const Flow& psi) {
    Accumulator acc;
    for (std::size_t e = 0; e < ch.edges(); ++e) acc.add(phi[e] * psi[e] / ch.cs[e]);
    return acc.value();
}

double flow_norm2(const Chain& ch, const Flow& phi) { return flow_inner(ch, phi, phi); }

std::vector<double> divergence(const Chain& ch, const Flow& phi) {
    std::vector<double> d(ch.n, 0.0);
    for (std::uint32_t v = 0; v < ch.n; ++v) {
        Accumulator acc;
        for (std::size_t k = ch.adj_ptr[v]; k < ch.adj_ptr[v + 1]; ++k)
            acc.add(oriented(ch, phi, ch.adj_edge[k], v));
        d[v] = acc.value();
    }
    return d;
}

double divergence_on(const Chain& ch, const Flow& phi, const std::vector<char>& mask) {
    Accumulator acc;
    for (std::size_t e = 0; e < ch.edges(); ++e) {
        bool a = mask[ch.lo[e]], b = mask[ch.hi[e]];
        if (a && !b) acc.add(phi[e]);
        if (b && !a) acc.add(-phi[e]);
    }
    return acc.value();
}

Flow flow_phi(const Chain& ch, const std::vector<double>& f) {
    Flow out(ch.edges());
    for (std::size_t e = 0; e < ch.edges(); ++e) out[e] = f[ch.lo[e]] * ch.c_fw[e] - f[ch.hi[e]] * ch.c_bw[e];
    return out;
}

Flow flow_phi_star(const Chain& ch, const std::vector<double>& f) {
    Flow out(ch.edges());
    for (std::size_t e = 0; e < ch.edges(); ++e) out[e] = f[ch.lo[e]] * ch.c_bw[e] - f[ch.hi[e]] * ch.c_fw[e];
    return out;
}

Flow flow_psi(const Chain& ch, const std::vector<double>& f) {
    Flow out(ch.edges());
    for (std::size_t e = 0; e < ch.edges(); ++e) out[e] = ch.cs[e] * (f[ch.lo[e]] - f[ch.hi[e]]);
    return out;
}

Flow flow_combine(double a, const Flow& x, double b, const Flow& y) {
    Flow out(x.size());
    for (std::size_t e = 0; e < x.size(); ++e) out[e] = a * x[e] + b * y[e];
    return out;
}

double FlowIdentityReport::worst() const {
    return std::max({div_phi, div_phi_star, inner_phi, inner_phi_star, inner_div, norm_psi});
}

namespace {

double rel(double a, double b, double scale) { return std::fabs(a - b) / std::max(scale, 1e-300); }

}  // namespace

FlowIdentityReport flow_identities(const Chain& ch, std::uint64_t seed, int trials) {
    FlowIdentityReport rep;
    for (int t = 0; t < trials; ++t) {
        CounterRng rng(seed, static_cast<std::uint64_t>(t));
        std::vector<double> f(ch.n), g(ch.n);
        for (auto& x : f) x = 2.0 * rng.uniform() - 1.0;
        for (auto& x : g) x = 2.0 * rng.uniform() - 1.0;
        Flow phi(ch.edges());
        for (std::size_t e = 0; e < ch.edges(); ++e) phi[e] = (2.0 * rng.uniform() - 1.0) * ch.cs[e];

        // pointwise scale: sum of |terms| at each state
        double scale = 0.0;
        for (std::uint32_t v = 0; v < ch.n; ++v) {
            double s = 0.0;
            for (std::size_t k = ch.adj_ptr[v]; k < ch.adj_ptr[v + 1]; ++k) {
                std::size_t e = ch.adj_edge[k];
                s += ch.c_out(e, v) + ch.c_in(e, v);
            }
            scale = std::max(scale, s);
        }
        auto lf = apply_generator(ch, f, Variant::Primal);
        auto lsf = apply_generator(ch, f, Variant::Adjoint);
        auto d1 = divergence(ch, flow_phi(ch, f));
        auto d2 = divergence(ch, flow_phi_star(ch, f));
        for (std::uint32_t v = 0; v < ch.n; ++v) {
            rep.div_phi = std::max(rep.div_phi, rel(d1[v], -ch.mu[v] * lsf[v], scale));
            rep.div_phi_star = std::max(rep.div_phi_star, rel(d2[v], -ch.mu[v] * lf[v], scale));
        }
        Flow psi = flow_psi(ch, f);
        double dform = dirichlet_form(ch, f);
        double gscale = 0.0;
        for (std::size_t e = 0; e < ch.edges(); ++e) gscale += ch.c_fw[e] + ch.c_bw[e];
        std::vector<double> mlf(ch.n), mlsf(ch.n);
        for (std::size_t v = 0; v < ch.n; ++v) {
            mlf[v] = -lf[v];
            mlsf[v] = -lsf[v];
        }
        rep.inner_phi = std::max(rep.inner_phi, rel(flow_inner(ch, psi, flow_phi(ch, g)), mu_inner(ch, mlf, g), gscale));
        rep.inner_phi_star =
            std::max(rep.inner_phi_star, rel(flow_inner(ch, psi, flow_phi_star(ch, g)), mu_inner(ch, mlsf, g), gscale));
        auto dphi = divergence(ch, phi);
        Accumulator fd;
        for (std::size_t v = 0; v < ch.n; ++v) fd.add(f[v] * dphi[v]);
        rep.inner_div = std::max(rep.inner_div, rel(flow_inner(ch, psi, phi), fd.value(), gscale));
        rep.norm_psi = std::max(rep.norm_psi, rel(flow_norm2(ch, psi), dform, std::max(dform, 1e-300)));
    }
    return rep;
}

void write_flow_csv(std::ostream& os, const Chain& ch, const Flow& phi) {
    os << "eta_rank,zeta_rank,value\n";
    os << std::setprecision(17);
    for (std::size_t e = 0; e < ch.edges(); ++e) os << ch.lo[e] << ',' << ch.hi[e] << ',' << phi[e] << '\n';
}

}  // namespace zrpm
