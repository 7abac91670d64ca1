#include "zrpm/capacity.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <string>

#include "zrpm/error.hpp"
#include "zrpm/numeric.hpp"

namespace zrpm {

Mask make_mask(std::size_t n, const std::vector<std::uint32_t>& members) {
    Mask m(n, 0);
    for (auto v : members) {
        if (v >= n) throw Error(ErrorKind::SetsOverlapOrEmpty, "state index out of range");
        m[v] = 1;
    }
    return m;
}

void check_disjoint(const Mask& a, const Mask& b) {
    bool any_a = false, any_b = false;
    for (std::size_t v = 0; v < a.size(); ++v) {
        if (a[v] && b[v]) throw Error(ErrorKind::SetsOverlapOrEmpty, "sets overlap");
        any_a |= a[v] != 0;
        any_b |= b[v] != 0;
    }
    if (!any_a || !any_b) throw Error(ErrorKind::SetsOverlapOrEmpty, "sets must be non-empty");
}

HarmonicSolver::HarmonicSolver(const Chain& ch, Variant var, const Mask& boundary)
    : ch_(ch), var_(var), boundary_(boundary), index_(ch.n, -1) {
    for (std::uint32_t v = 0; v < ch.n; ++v)
        if (!boundary_[v]) {
            index_[v] = static_cast<std::int64_t>(interior_.size());
            interior_.push_back(v);
        }
    const auto m = static_cast<Eigen::Index>(interior_.size());
    if (m == 0) return;
    std::vector<Eigen::Triplet<double>> trip;
    for (Eigen::Index i = 0; i < m; ++i) {
        std::uint32_t u = interior_[i];
        Accumulator diag;
        for (std::size_t k = ch.adj_ptr[u]; k < ch.adj_ptr[u + 1]; ++k) {
            std::size_t e = ch.adj_edge[k];
            double r = ch.rate_out(e, u, var);
            if (r == 0.0) continue;
            diag.add(r);
            std::uint32_t v = ch.other(e, u);
            if (index_[v] >= 0) trip.emplace_back(i, index_[v], r);
        }
        trip.emplace_back(i, i, -diag.value());
    }
    mat_.resize(m, m);
    mat_.setFromTriplets(trip.begin(), trip.end());
    mat_.makeCompressed();
    lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    lu_->analyzePattern(mat_);
    lu_->factorize(mat_);
    if (lu_->info() != Eigen::Success)
        throw Error(ErrorKind::SolverFailure, "factorization failed: " + lu_->lastErrorMessage());
}

std::vector<std::vector<double>> HarmonicSolver::solve_many(const std::vector<std::vector<double>>& bvals) const {
    const auto m = static_cast<Eigen::Index>(interior_.size());
    const auto nr = static_cast<Eigen::Index>(bvals.size());
    std::vector<std::vector<double>> out(bvals.size());
    for (std::size_t j = 0; j < bvals.size(); ++j) {
        out[j].assign(ch_.n, 0.0);
        for (std::uint32_t v = 0; v < ch_.n; ++v)
            if (boundary_[v]) out[j][v] = bvals[j][v];
    }
    if (m == 0 || nr == 0) return out;
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, nr);
    Eigen::VectorXd scale = Eigen::VectorXd::Zero(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        std::uint32_t u = interior_[i];
        for (std::size_t k = ch_.adj_ptr[u]; k < ch_.adj_ptr[u + 1]; ++k) {
            std::size_t e = ch_.adj_edge[k];
            std::uint32_t v = ch_.other(e, u);
            double r = ch_.rate_out(e, u, var_);
            scale(i) += r;
            if (index_[v] >= 0 || r == 0.0) continue;
            for (Eigen::Index j = 0; j < nr; ++j) rhs(i, j) -= r * bvals[j][v];
        }
    }
    Eigen::MatrixXd x = lu_->solve(rhs);
    if (lu_->info() != Eigen::Success) throw Error(ErrorKind::SolverFailure, "back substitution failed");
    Eigen::MatrixXd res = rhs - mat_ * x;
    x += lu_->solve(res);
    res = rhs - mat_ * x;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < nr; ++j) worst = std::max(worst, std::fabs(res(i, j)) / scale(i));
    residual_ = worst;
    if (!(worst <= 1e-12))
        throw Error(ErrorKind::SolverFailure, "harmonic residual " + std::to_string(worst));
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < nr; ++j) out[j][interior_[i]] = x(i, j);
    return out;
}

std::vector<double> HarmonicSolver::solve(const std::vector<double>& bvals) const {
    return solve_many({bvals})[0];
}

double Potential::diff(std::size_t u, std::size_t v) const {
    if (h[u] + h[v] <= 1.0) return h[u] - h[v];
    return hc[v] - hc[u];
}

Potential equilibrium_potential(const Chain& ch, const Mask& a, const Mask& b, Variant var) {
    check_disjoint(a, b);
    Mask boundary(ch.n, 0);
    std::vector<double> ba(ch.n, 0.0), bb(ch.n, 0.0);
    for (std::size_t v = 0; v < ch.n; ++v) {
        boundary[v] = a[v] || b[v];
        ba[v] = a[v] ? 1.0 : 0.0;
        bb[v] = b[v] ? 1.0 : 0.0;
    }
    HarmonicSolver solver(ch, var, boundary);
    auto sol = solver.solve_many({ba, bb});
    Potential p{std::move(sol[0]), std::move(sol[1])};
    for (std::size_t v = 0; v < ch.n; ++v) {
        p.h[v] = std::clamp(p.h[v], 0.0, 1.0);
        p.hc[v] = std::clamp(p.hc[v], 0.0, 1.0);
    }
    return p;
}

double potential_energy(const Chain& ch, const Potential& p) {
    Accumulator acc;
    for (std::size_t e = 0; e < ch.edges(); ++e) {
        double d = p.diff(ch.lo[e], ch.hi[e]);
        acc.add(ch.cs[e] * d * d);
    }
    return acc.value();
}

double CapacityResult::max_disagreement() const {
    auto rel = [&](double x) { return std::fabs(x - cap) / std::max(cap, 1e-300); };
    return std::max({rel(flux_a), rel(flux_b), rel(cap_star)});
}

CapacityResult solve_capacity(const Chain& ch, const Mask& a, const Mask& b) {
    CapacityResult r;
    r.h = equilibrium_potential(ch, a, b, Variant::Primal);
    r.h_star = equilibrium_potential(ch, a, b, Variant::Adjoint);
    r.h_sym = equilibrium_potential(ch, a, b, Variant::Symmetric);
    r.cap = potential_energy(ch, r.h);
    r.cap_star = potential_energy(ch, r.h_star);
    r.cap_sym = potential_energy(ch, r.h_sym);
    Accumulator fa, fb;
    for (std::uint32_t u = 0; u < ch.n; ++u) {
        if (!a[u] && !b[u]) continue;
        const auto& vals = a[u] ? r.h.hc : r.h.h;
        for (std::size_t k = ch.adj_ptr[u]; k < ch.adj_ptr[u + 1]; ++k) {
            std::size_t e = ch.adj_edge[k];
            double c = ch.c_out(e, u);
            double t = c * vals[ch.other(e, u)];
            if (a[u])
                fa.add(t);
            else
                fb.add(t);
        }
    }
    r.flux_a = fa.value();
    r.flux_b = fb.value();
    return r;
}

double capacity(const Chain& ch, const Mask& a, const Mask& b) {
    return potential_energy(ch, equilibrium_potential(ch, a, b));
}

namespace {

// A = mu (-L) as a sparse matrix; S = (A + A^T) / 2 is the Dirichlet matrix.
Eigen::SparseMatrix<double> forward_matrix(const Chain& ch) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(4 * ch.edges());
    for (std::size_t e = 0; e < ch.edges(); ++e) {
        int u = static_cast<int>(ch.lo[e]), v = static_cast<int>(ch.hi[e]);
        trip.emplace_back(u, u, ch.c_fw[e]);
        trip.emplace_back(u, v, -ch.c_fw[e]);
        trip.emplace_back(v, v, ch.c_bw[e]);
        trip.emplace_back(v, u, -ch.c_bw[e]);
    }
    Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(ch.n), static_cast<Eigen::Index>(ch.n));
    a.setFromTriplets(trip.begin(), trip.end());
    return a;
}

}  // namespace

SectorReport sector_check(const Chain& ch, std::uint64_t seed, int trials) {
    SectorReport rep;
    if (ch.n < 2) return rep;
    const auto n = static_cast<Eigen::Index>(ch.n);
    Eigen::SparseMatrix<double> a = forward_matrix(ch);
    Eigen::SparseMatrix<double> at = a.transpose();
    Eigen::SparseMatrix<double> s = 0.5 * (a + at);
    // state 0 pinned: the reduced Dirichlet matrix is positive definite
    Eigen::SparseMatrix<double> red = s.bottomRightCorner(n - 1, n - 1);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(red);
    if (ldlt.info() != Eigen::Success) throw Error(ErrorKind::SolverFailure, "Dirichlet matrix factorization failed");
    auto pseudo = [&](const Eigen::VectorXd& rhs) {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
        out.tail(n - 1) = ldlt.solve(rhs.tail(n - 1));
        return out;
    };
    for (int t = 0; t < trials; ++t) {
        CounterRng rng(seed, static_cast<std::uint64_t>(t));
        Eigen::VectorXd f(n);
        for (Eigen::Index v = 0; v < n; ++v) f(v) = rng.uniform() - 0.5;
        double df = f.dot(s * f);
        if (!(df > 0.0)) continue;
        // best g for f, then best f for that g; each step can only raise the ratio
        double best = 0.0;
        for (int it = 0; it < 8; ++it) {
            Eigen::VectorXd g = pseudo(a * f);
            double dg = g.dot(s * g);
            if (!(dg > 0.0)) break;
            double num = g.dot(a * f);
            best = std::max(best, num * num / (df * dg));
            f = pseudo(at * g);
            df = f.dot(s * f);
            if (!(df > 0.0)) break;
            num = g.dot(a * f);
            best = std::max(best, num * num / (df * dg));
        }
        rep.c0 = std::max(rep.c0, best);
        ++rep.pairs_used;
    }
    return rep;
}

Optimizers dt_optimizers(const Chain& ch, const CapacityResult& res, const Mask& a, const Mask& b) {
    check_disjoint(a, b);
    if (!(res.cap > 0.0)) throw Error(ErrorKind::ZeroCapacity, "capacity is zero");
    Optimizers o;
    o.cap = res.cap;
    const auto& h = res.h;
    const auto& hs = res.h_star;
    o.f0.resize(ch.n);
    o.g0.resize(ch.n);
    for (std::size_t v = 0; v < ch.n; ++v) {
        o.f0[v] = 0.5 * (h.h[v] + hs.h[v]);
        double d = h.h[v] + hs.h[v] <= 1.0 ? hs.h[v] - h.h[v] : h.hc[v] - hs.hc[v];
        o.g0[v] = d / (2.0 * res.cap);
    }
    Flow phs = flow_phi(ch, hs.h);
    Flow phst = flow_phi_star(ch, h.h);
    o.phi0 = flow_combine(0.5, phs, -0.5, phst);
    o.psi0 = flow_combine(0.5 / res.cap, phs, 0.5 / res.cap, phst);
    return o;
}

double interior_divergence(const Chain& ch, const Flow& phi, const Mask& a, const Mask& b) {
    double worst = 0.0;
    for (std::uint32_t u = 0; u < ch.n; ++u) {
        if (a[u] || b[u]) continue;
        Accumulator acc;
        for (std::size_t k = ch.adj_ptr[u]; k < ch.adj_ptr[u + 1]; ++k) acc.add(oriented(ch, phi, ch.adj_edge[k], u));
        worst = std::max(worst, std::fabs(acc.value()));
    }
    return worst;
}

OptimizerReport verify_optimizers(const Chain& ch, const Optimizers& o, const Mask& a, const Mask& b) {
    OptimizerReport r;
    r.dp_value = flow_norm2(ch, flow_combine(1.0, flow_phi(ch, o.f0), -1.0, o.phi0));
    r.tp_value = flow_norm2(ch, flow_combine(1.0, flow_phi(ch, o.g0), -1.0, o.psi0));
    r.dp_error = std::fabs(r.dp_value - o.cap) / o.cap;
    r.tp_error = std::fabs(r.tp_value - 1.0 / o.cap) * o.cap;
    r.phi0_interior = interior_divergence(ch, o.phi0, a, b) / o.cap;
    r.psi0_interior = interior_divergence(ch, o.psi0, a, b);
    r.phi0_strength = std::fabs(divergence_on(ch, o.phi0, a)) / o.cap;
    r.psi0_strength = std::fabs(divergence_on(ch, o.psi0, a) - 1.0);
    return r;
}

namespace {

double interior_weighted(const Chain& ch, const Mask& a, const Mask& b, const Potential& h, const Flow& phi) {
    auto d = divergence(ch, phi);
    Accumulator acc;
    for (std::size_t v = 0; v < ch.n; ++v)
        if (!a[v] && !b[v]) acc.add(h.h[v] * d[v]);
    return acc.value();
}

void check_boundary(const std::vector<double>& f, const Mask& a, const Mask& b, double on_a) {
    for (std::size_t v = 0; v < f.size(); ++v) {
        if (a[v] && std::fabs(f[v] - on_a) > 1e-12)
            throw Error(ErrorKind::BoundaryConditionViolated, "test function has the wrong value on A");
        if (b[v] && std::fabs(f[v]) > 1e-12)
            throw Error(ErrorKind::BoundaryConditionViolated, "test function has the wrong value on B");
    }
}

}  // namespace

Bound generalized_upper_bound(const Chain& ch, const Mask& a, const Mask& b, const Potential& h,
                              const std::vector<double>& f, const Flow& phi) {
    check_disjoint(a, b);
    check_boundary(f, a, b, 1.0);
    Bound out;
    out.eps = divergence_on(ch, phi, a);
    out.remainder = interior_weighted(ch, a, b, h, phi);
    double norm = flow_norm2(ch, flow_combine(1.0, flow_phi(ch, f), -1.0, phi));
    out.value = norm + 2.0 * out.eps + 2.0 * out.remainder;
    double cap = potential_energy(ch, h);
    double scale = std::max({cap, norm, std::fabs(out.eps), std::fabs(out.remainder)});
    if (out.value < cap - 1e-9 * scale)
        throw Error(ErrorKind::PropertyCheckFailed, "upper bound below the capacity");
    return out;
}

Bound generalized_lower_bound(const Chain& ch, const Mask& a, const Mask& b, const Potential& h,
                              const std::vector<double>& g, const Flow& psi) {
    check_disjoint(a, b);
    check_boundary(g, a, b, 0.0);
    Bound out;
    out.eps = divergence_on(ch, psi, a) - 1.0;
    out.remainder = interior_weighted(ch, a, b, h, psi);
    double denom = flow_norm2(ch, flow_combine(1.0, flow_phi(ch, g), -1.0, psi));
    // <<Phi_g - psi, Psi_h>> = -(1 + eps + remainder), so Cauchy-Schwarz gives this sign
    double bracket = 1.0 + 2.0 * out.eps + 2.0 * out.remainder;
    if (bracket <= 0.0) {
        out.degenerate = true;
        out.value = 0.0;
        return out;
    }
    if (!(denom > 0.0)) throw Error(ErrorKind::DegenerateDenominator, "||Phi_g - psi|| vanishes");
    out.printed = (1.0 - 2.0 * out.eps - 2.0 * out.remainder) / denom;
    out.value = bracket / denom;
    double cap = potential_energy(ch, h);
    double scale = std::max(cap, out.value);
    if (out.value > cap + 1e-9 * scale)
        throw Error(ErrorKind::PropertyCheckFailed, "lower bound above the capacity");
    return out;
}

}  // namespace zrpm
