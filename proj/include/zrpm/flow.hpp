#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "zrpm/chain.hpp"

namespace zrpm {

// Antisymmetric flow stored per undirected edge as the value on lo -> hi.
using Flow = std::vector<double>;

Flow zero_flow(const Chain& ch);
double flow_value(const Chain& ch, const Flow& phi, std::uint32_t u, std::uint32_t v);
void flow_add(const Chain& ch, Flow& phi, std::uint32_t u, std::uint32_t v, double value);
inline double oriented(const Chain& ch, const Flow& phi, std::size_t e, std::uint32_t from) {
    return ch.lo[e] == from ? phi[e] : -phi[e];
}

// <<phi, psi>> = (1/2) sum over directed edges phi psi / c^s
double flow_inner(const Chain& ch, const Flow& phi, const Flow& psi);
double flow_norm2(const Chain& ch, const Flow& phi);

std::vector<double> divergence(const Chain& ch, const Flow& phi);
double divergence_on(const Chain& ch, const Flow& phi, const std::vector<char>& mask);

Flow flow_phi(const Chain& ch, const std::vector<double>& f);       // f(u)c(u,v) - f(v)c(v,u)
Flow flow_phi_star(const Chain& ch, const std::vector<double>& f);  // f(u)c(v,u) - f(v)c(u,v)
Flow flow_psi(const Chain& ch, const std::vector<double>& f);       // c^s (f(u) - f(v))

Flow flow_combine(double a, const Flow& x, double b, const Flow& y);

struct FlowIdentityReport {
    double div_phi = 0.0;      // div Phi_f = -mu L* f
    double div_phi_star = 0.0; // div Phi*_f = -mu L f
    double inner_phi = 0.0;    // <<Psi_f, Phi_g>> = <-L f, g>
    double inner_phi_star = 0.0;
    double inner_div = 0.0;    // <<Psi_f, phi>> = sum f div phi
    double norm_psi = 0.0;     // ||Psi_f||^2 = D(f)
    double worst() const;
};

// Relative residuals over random f, g, phi drawn from the given stream.
FlowIdentityReport flow_identities(const Chain& ch, std::uint64_t seed, int trials);

void write_flow_csv(std::ostream& os, const Chain& ch, const Flow& phi);

}  // namespace zrpm
