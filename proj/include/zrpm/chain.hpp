#pragma once

#include <cstdint>
#include <vector>

namespace zrpm {

enum class Variant { Primal, Adjoint, Symmetric };

struct Transition {
    std::uint32_t from;
    std::uint32_t to;
    double rate;
};

// Finite irreducible chain with invariant law mu, stored on undirected edges
// {lo < hi}. Conductances c(u,v) = mu(u) R(u,v); the adjoint chain has
// R*(u,v) = c(v,u) / mu(u).
struct Chain {
    std::size_t n = 0;
    std::vector<double> mu;
    std::vector<std::uint32_t> lo, hi;
    std::vector<double> r_fw, r_bw;  // R(lo,hi), R(hi,lo)
    std::vector<double> c_fw, c_bw;  // mu R
    std::vector<double> cs;          // (c_fw + c_bw) / 2
    std::vector<std::size_t> adj_ptr;
    std::vector<std::uint32_t> adj_edge;

    std::size_t edges() const { return lo.size(); }
    std::uint32_t other(std::size_t e, std::uint32_t v) const { return lo[e] == v ? hi[e] : lo[e]; }
    // conductance from v across e, and back
    double c_out(std::size_t e, std::uint32_t v) const { return lo[e] == v ? c_fw[e] : c_bw[e]; }
    double c_in(std::size_t e, std::uint32_t v) const { return lo[e] == v ? c_bw[e] : c_fw[e]; }
    double rate_out(std::size_t e, std::uint32_t v, Variant var) const;
    double total_rate(std::uint32_t v, Variant var) const;
    // edge id or -1
    std::int64_t find_edge(std::uint32_t u, std::uint32_t v) const;
};

// Merges duplicate transitions; mu must be invariant for the rates.
Chain make_chain(std::size_t n, std::vector<double> mu, std::vector<Transition> transitions);

// Same chain with conductances given directly; rates are c / mu.
Chain make_chain_from_conductances(std::size_t n, std::vector<double> mu,
                                   std::vector<std::uint32_t> lo, std::vector<std::uint32_t> hi,
                                   std::vector<double> c_fw, std::vector<double> c_bw);

// (L f)(u) = sum_v R(u,v) (f(v) - f(u)); entries of f may be NaN where
// undefined. Values are computed where mask is set (all if mask empty).
std::vector<double> apply_generator(const Chain& ch, const std::vector<double>& f, Variant var,
                                    const std::vector<char>& mask = {});

double dirichlet_form(const Chain& ch, const std::vector<double>& f);

// (1/2) sum_{u in A} sum_v mu(u) R(u,v) (f(v)-f(u))^2
double dirichlet_form_on(const Chain& ch, const std::vector<double>& f,
                         const std::vector<char>& mask);

double mu_inner(const Chain& ch, const std::vector<double>& f, const std::vector<double>& g);
double mu_mass(const Chain& ch, const std::vector<char>& mask);

// max_u |sum_v c(u,v) - c(v,u)| / max_u sum_v c(u,v)
double stationarity_defect(const Chain& ch);

Chain adjoint_chain(const Chain& ch);

}  // namespace zrpm
