#pragma once

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <memory>
#include <vector>

#include "zrpm/chain.hpp"
#include "zrpm/flow.hpp"

namespace zrpm {

using Mask = std::vector<char>;

Mask make_mask(std::size_t n, const std::vector<std::uint32_t>& members);
void check_disjoint(const Mask& a, const Mask& b);

// Factorized interior system sum_v R(u,v)(h(v) - h(u)) = 0 for u off the boundary.
class HarmonicSolver {
public:
    HarmonicSolver(const Chain& ch, Variant var, const Mask& boundary);
    // boundary values given as a full-length vector (interior entries ignored)
    std::vector<double> solve(const std::vector<double>& boundary_values) const;
    std::vector<std::vector<double>> solve_many(const std::vector<std::vector<double>>& bvals) const;
    double last_residual() const { return residual_; }
    std::size_t interior_size() const { return interior_.size(); }

private:
    const Chain& ch_;
    Variant var_;
    Mask boundary_;
    std::vector<std::uint32_t> interior_;
    std::vector<std::int64_t> index_;
    Eigen::SparseMatrix<double> mat_;
    std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
    mutable double residual_ = 0.0;
};

// h_{A,B} together with h_{B,A}; both solved so that each side is read
// from the potential that is small there.
struct Potential {
    std::vector<double> h;
    std::vector<double> hc;
    double at(std::size_t v) const { return h[v]; }
    double diff(std::size_t u, std::size_t v) const;  // h(u) - h(v)
};

Potential equilibrium_potential(const Chain& ch, const Mask& a, const Mask& b, Variant var = Variant::Primal);

// cap from the potential: Dirichlet form of h under the symmetric conductances.
double potential_energy(const Chain& ch, const Potential& p);

struct CapacityResult {
    Potential h, h_star, h_sym;
    double cap = 0.0;       // D(h)
    double flux_a = 0.0;    // sum_A mu (-L h)
    double flux_b = 0.0;    // sum_B mu (L h)
    double cap_star = 0.0;  // D(h*)
    double cap_sym = 0.0;   // D(h^s)
    double max_disagreement() const;
};

CapacityResult solve_capacity(const Chain& ch, const Mask& a, const Mask& b);
double capacity(const Chain& ch, const Mask& a, const Mask& b);

struct SectorReport {
    double c0 = 0.0;
    int pairs_used = 0;
};
SectorReport sector_check(const Chain& ch, std::uint64_t seed, int trials);

struct Optimizers {
    std::vector<double> f0, g0;
    Flow phi0, psi0;
    double cap = 0.0;
};
Optimizers dt_optimizers(const Chain& ch, const CapacityResult& res, const Mask& a, const Mask& b);

struct OptimizerReport {
    double dp_value = 0.0;       // ||Phi_{f0} - phi0||^2
    double tp_value = 0.0;       // ||Phi_{g0} - psi0||^2
    double dp_error = 0.0;       // relative to cap
    double tp_error = 0.0;       // relative to 1/cap
    double phi0_interior = 0.0;  // max |div phi0| off A u B, over cap
    double phi0_strength = 0.0;  // |div phi0 (A)| over cap
    double psi0_interior = 0.0;  // unit strength, so absolute
    double psi0_strength = 0.0;  // |div psi0 (A) - 1|
};
OptimizerReport verify_optimizers(const Chain& ch, const Optimizers& o, const Mask& a, const Mask& b);

// max |div phi| off A u B
double interior_divergence(const Chain& ch, const Flow& phi, const Mask& a, const Mask& b);

struct Bound {
    double value = 0.0;
    double eps = 0.0;        // derived from the flow
    double remainder = 0.0;  // sum off A u B of h div
    bool degenerate = false; // lower bound bracket was not positive
    double printed = 0.0;    // lower bound with the bracket 1 - 2 eps - 2 remainder
};

Bound generalized_upper_bound(const Chain& ch, const Mask& a, const Mask& b, const Potential& h,
                              const std::vector<double>& f, const Flow& phi);
Bound generalized_lower_bound(const Chain& ch, const Mask& a, const Mask& b, const Potential& h,
                              const std::vector<double>& g, const Flow& psi);

}  // namespace zrpm
