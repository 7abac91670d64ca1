#include "zrpm/chain.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "zrpm/error.hpp"
#include "zrpm/numeric.hpp"

namespace zrpm {

double Chain::rate_out(std::size_t e, std::uint32_t v, Variant var) const {
    double fw = lo[e] == v ? r_fw[e] : r_bw[e];
    if (var == Variant::Primal) return fw;
    double adj = c_in(e, v) / mu[v];
    if (var == Variant::Adjoint) return adj;
    return 0.5 * (fw + adj);
}

double Chain::total_rate(std::uint32_t v, Variant var) const {
    double s = 0.0;
    for (std::size_t k = adj_ptr[v]; k < adj_ptr[v + 1]; ++k) s += rate_out(adj_edge[k], v, var);
    return s;
}

std::int64_t Chain::find_edge(std::uint32_t u, std::uint32_t v) const {
    for (std::size_t k = adj_ptr[u]; k < adj_ptr[u + 1]; ++k) {
        std::size_t e = adj_edge[k];
        if (other(e, u) == v) return static_cast<std::int64_t>(e);
    }
    return -1;
}

namespace {

void finish(Chain& ch) {
    const std::size_t m = ch.lo.size();
    ch.cs.resize(m);
    for (std::size_t e = 0; e < m; ++e) ch.cs[e] = 0.5 * (ch.c_fw[e] + ch.c_bw[e]);
    std::vector<std::size_t> deg(ch.n + 1, 0);
    for (std::size_t e = 0; e < m; ++e) {
        ++deg[ch.lo[e]];
        ++deg[ch.hi[e]];
    }
    ch.adj_ptr.assign(ch.n + 1, 0);
    for (std::size_t v = 0; v < ch.n; ++v) ch.adj_ptr[v + 1] = ch.adj_ptr[v] + deg[v];
    ch.adj_edge.resize(2 * m);
    std::vector<std::size_t> pos(ch.adj_ptr.begin(), ch.adj_ptr.end() - 1);
    for (std::size_t e = 0; e < m; ++e) {
        ch.adj_edge[pos[ch.lo[e]]++] = static_cast<std::uint32_t>(e);
        ch.adj_edge[pos[ch.hi[e]]++] = static_cast<std::uint32_t>(e);
    }
}

}  // namespace

Chain make_chain(std::size_t n, std::vector<double> mu, std::vector<Transition> tr) {
    if (mu.size() != n) throw Error(ErrorKind::DegenerateModel, "measure size mismatch");
    for (auto& t : tr) {
        if (t.from >= n || t.to >= n || t.from == t.to)
            throw Error(ErrorKind::DegenerateModel, "invalid transition");
    }
    auto key = [](const Transition& t) {
        return std::pair{std::min(t.from, t.to), std::max(t.from, t.to)};
    };
    std::sort(tr.begin(), tr.end(), [&](const Transition& a, const Transition& b) {
        return key(a) < key(b);
    });
    Chain ch;
    ch.n = n;
    ch.mu = std::move(mu);
    for (std::size_t i = 0; i < tr.size();) {
        auto k = key(tr[i]);
        double fw = 0.0, bw = 0.0;
        std::size_t j = i;
        for (; j < tr.size() && key(tr[j]) == k; ++j) {
            if (tr[j].from == k.first)
                fw += tr[j].rate;
            else
                bw += tr[j].rate;
        }
        i = j;
        if (fw <= 0.0 && bw <= 0.0) continue;
        ch.lo.push_back(k.first);
        ch.hi.push_back(k.second);
        ch.r_fw.push_back(fw);
        ch.r_bw.push_back(bw);
        ch.c_fw.push_back(ch.mu[k.first] * fw);
        ch.c_bw.push_back(ch.mu[k.second] * bw);
    }
    finish(ch);
    return ch;
}

Chain make_chain_from_conductances(std::size_t n, std::vector<double> mu, std::vector<std::uint32_t> lo,
                                   std::vector<std::uint32_t> hi, std::vector<double> c_fw,
                                   std::vector<double> c_bw) {
    Chain ch;
    ch.n = n;
    ch.mu = std::move(mu);
    ch.lo = std::move(lo);
    ch.hi = std::move(hi);
    ch.c_fw = std::move(c_fw);
    ch.c_bw = std::move(c_bw);
    const std::size_t m = ch.lo.size();
    ch.r_fw.resize(m);
    ch.r_bw.resize(m);
    for (std::size_t e = 0; e < m; ++e) {
        ch.r_fw[e] = ch.c_fw[e] / ch.mu[ch.lo[e]];
        ch.r_bw[e] = ch.c_bw[e] / ch.mu[ch.hi[e]];
    }
    finish(ch);
    return ch;
}

std::vector<double> apply_generator(const Chain& ch, const std::vector<double>& f, Variant var,
                                    const std::vector<char>& mask) {
    if (f.size() != ch.n) throw Error(ErrorKind::UndefinedOnNeighborhood, "function size mismatch");
    std::vector<double> out(ch.n, std::nan(""));
    for (std::uint32_t v = 0; v < ch.n; ++v) {
        if (!mask.empty() && !mask[v]) continue;
        if (std::isnan(f[v]))
            throw Error(ErrorKind::UndefinedOnNeighborhood, "f undefined at state " + std::to_string(v));
        Accumulator acc;
        for (std::size_t k = ch.adj_ptr[v]; k < ch.adj_ptr[v + 1]; ++k) {
            std::size_t e = ch.adj_edge[k];
            double r = ch.rate_out(e, v, var);
            if (r == 0.0) continue;
            double fv = f[ch.other(e, v)];
            if (std::isnan(fv))
                throw Error(ErrorKind::UndefinedOnNeighborhood,
                            "f undefined next to state " + std::to_string(v));
            acc.add(r * (fv - f[v]));
        }
        out[v] = acc.value();
    }
    return out;
}

double dirichlet_form(const Chain& ch, const std::vector<double>& f) {
    Accumulator acc;
    for (std::size_t e = 0; e < ch.edges(); ++e) {
        double d = f[ch.lo[e]] - f[ch.hi[e]];
        acc.add(ch.cs[e] * d * d);
    }
    return acc.value();
}

double dirichlet_form_on(const Chain& ch, const std::vector<double>& f, const std::vector<char>& mask) {
    Accumulator acc;
    for (std::uint32_t v = 0; v < ch.n; ++v) {
        if (!mask[v]) continue;
        for (std::size_t k = ch.adj_ptr[v]; k < ch.adj_ptr[v + 1]; ++k) {
            std::size_t e = ch.adj_edge[k];
            double c = ch.c_out(e, v);
            if (c == 0.0) continue;
            double d = f[ch.other(e, v)] - f[v];
            if (std::isnan(d))
                throw Error(ErrorKind::UndefinedOnNeighborhood, "f undefined on the closure of the set");
            acc.add(0.5 * c * d * d);
        }
    }
    return acc.value();
}

double mu_inner(const Chain& ch, const std::vector<double>& f, const std::vector<double>& g) {
    Accumulator acc;
    for (std::size_t v = 0; v < ch.n; ++v) acc.add(ch.mu[v] * f[v] * g[v]);
    return acc.value();
}

double mu_mass(const Chain& ch, const std::vector<char>& mask) {
    Accumulator acc;
    for (std::size_t v = 0; v < ch.n; ++v)
        if (mask[v]) acc.add(ch.mu[v]);
    return acc.value();
}

double stationarity_defect(const Chain& ch) {
    double worst = 0.0, scale = 0.0;
    for (std::uint32_t v = 0; v < ch.n; ++v) {
        Accumulator net;
        double out = 0.0;
        for (std::size_t k = ch.adj_ptr[v]; k < ch.adj_ptr[v + 1]; ++k) {
            std::size_t e = ch.adj_edge[k];
            net.add(ch.c_out(e, v));
            net.add(-ch.c_in(e, v));
            out += ch.c_out(e, v);
        }
        worst = std::max(worst, std::fabs(net.value()));
        scale = std::max(scale, out);
    }
    return scale > 0.0 ? worst / scale : 0.0;
}

Chain adjoint_chain(const Chain& ch) {
    return make_chain_from_conductances(ch.n, ch.mu, ch.lo, ch.hi, ch.c_bw, ch.c_fw);
}

}  // namespace zrpm
