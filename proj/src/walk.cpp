#include "zrpm/walk.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <numeric>
#include <unsupported/Eigen/MatrixFunctions>

#include "zrpm/error.hpp"

namespace zrpm {

double Walk::out_rate(int x) const {
    double s = 0.0;
    for (int y = 0; y < kappa; ++y) s += r(x, y);
    return s;
}

bool strongly_connected(int n, const std::vector<double>& rates) {
    auto reach = [&](bool forward) {
        std::vector<char> seen(n, 0);
        std::deque<int> q{0};
        seen[0] = 1;
        int count = 1;
        while (!q.empty()) {
            int x = q.front();
            q.pop_front();
            for (int y = 0; y < n; ++y) {
                double v = forward ? rates[x * n + y] : rates[y * n + x];
                if (v > 0.0 && !seen[y]) {
                    seen[y] = 1;
                    ++count;
                    q.push_back(y);
                }
            }
        }
        return count == n;
    };
    return reach(true) && reach(false);
}

Walk make_walk(const std::vector<std::vector<double>>& rates, std::vector<std::string> labels) {
    const int k = static_cast<int>(rates.size());
    if (k < 2) throw Error(ErrorKind::DegenerateModel, "the walk needs at least two sites");
    Walk w;
    w.kappa = k;
    w.rates.assign(static_cast<std::size_t>(k) * k, 0.0);
    for (int x = 0; x < k; ++x) {
        if (static_cast<int>(rates[x].size()) != k)
            throw Error(ErrorKind::DegenerateModel, "rate matrix is not square");
        for (int y = 0; y < k; ++y) {
            double v = rates[x][y];
            if (!std::isfinite(v) || v < 0.0)
                throw Error(ErrorKind::DegenerateModel, "rates must be finite and nonnegative");
            if (x != y) w.rates[x * k + y] = v;
        }
    }
    if (!strongly_connected(k, w.rates))
        throw Error(ErrorKind::NotIrreducible, "the walk is not irreducible");
    if (labels.empty()) {
        for (int x = 0; x < k; ++x) labels.push_back(std::to_string(x + 1));
    }
    if (static_cast<int>(labels.size()) != k)
        throw Error(ErrorKind::DegenerateModel, "label count differs from site count");
    w.labels = std::move(labels);
    return w;
}

bool WalkProfile::in_s_star(int x) const {
    return std::binary_search(s_star.begin(), s_star.end(), x);
}

WalkProfile stationary_measure(const Walk& w, const std::optional<std::vector<int>>& s_star) {
    const int k = w.kappa;
    Eigen::MatrixXd qt = Eigen::MatrixXd::Zero(k, k);
    for (int x = 0; x < k; ++x) {
        for (int y = 0; y < k; ++y) {
            if (x == y) continue;
            qt(y, x) += w.r(x, y);
            qt(x, x) -= w.r(x, y);
        }
    }
    Eigen::MatrixXd sys = qt;
    sys.row(k - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
    rhs(k - 1) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
    Eigen::VectorXd m = lu.solve(rhs);
    for (int it = 0; it < 2; ++it) m += lu.solve(rhs - sys * m);
    if (m.minCoeff() <= 0.0) throw Error(ErrorKind::NotIrreducible, "stationary law is not positive");
    m /= m.sum();

    WalkProfile p;
    p.m.assign(m.data(), m.data() + k);
    p.residual = (qt * m).cwiseAbs().maxCoeff();
    p.m_max = *std::max_element(p.m.begin(), p.m.end());
    if (s_star) {
        p.s_star = *s_star;
        std::sort(p.s_star.begin(), p.s_star.end());
        p.s_star.erase(std::unique(p.s_star.begin(), p.s_star.end()), p.s_star.end());
        if (p.s_star.empty()) throw Error(ErrorKind::DegenerateModel, "empty S_star override");
        for (int x : p.s_star) {
            if (x < 0 || x >= k) throw Error(ErrorKind::DegenerateModel, "S_star site out of range");
            if (std::fabs(p.m[x] - p.m_max) > 1e-6 * p.m_max)
                throw Error(ErrorKind::DegenerateModel, "S_star override contains a site of non-maximal mass");
        }
    } else {
        for (int x = 0; x < k; ++x)
            if (std::fabs(p.m[x] - p.m_max) <= kTieTol * p.m_max) p.s_star.push_back(x);
    }
    if (p.s_star.size() < 2) throw Error(ErrorKind::DegenerateModel, "S_star must contain at least two sites");
    p.m_star.resize(k);
    for (int x = 0; x < k; ++x) {
        if (p.in_s_star(x)) {
            p.m_star[x] = 1.0;
        } else {
            p.m_star[x] = p.m[x] / p.m_max;
            p.rest.push_back(x);
        }
    }
    return p;
}

Walk adjoint_walk(const Walk& w, const WalkProfile& p) {
    Walk a = w;
    for (int x = 0; x < w.kappa; ++x)
        for (int y = 0; y < w.kappa; ++y)
            a.rates[x * w.kappa + y] = x == y ? 0.0 : w.r(y, x) * p.m[y] / p.m[x];
    return a;
}

std::vector<double> walk_generator(const Walk& w, const std::vector<double>& f) {
    std::vector<double> out(w.kappa, 0.0);
    for (int x = 0; x < w.kappa; ++x) {
        Accumulator acc;
        for (int y = 0; y < w.kappa; ++y)
            if (y != x) acc.add(w.r(x, y) * (f[y] - f[x]));
        out[x] = acc.value();
    }
    return out;
}

double walk_dirichlet(const Walk& w, const WalkProfile& p, const std::vector<double>& f) {
    Accumulator acc;
    for (int x = 0; x < w.kappa; ++x)
        for (int y = 0; y < w.kappa; ++y)
            if (y != x) {
                double d = f[y] - f[x];
                acc.add(0.5 * p.m[x] * w.r(x, y) * d * d);
            }
    return acc.value();
}

void check_sets(int n, const std::vector<int>& a, const std::vector<int>& b) {
    if (a.empty() || b.empty()) throw Error(ErrorKind::SetsOverlapOrEmpty, "A and B must be nonempty");
    std::vector<char> mark(n, 0);
    for (int x : a) {
        if (x < 0 || x >= n) throw Error(ErrorKind::SetsOverlapOrEmpty, "set element out of range");
        mark[x] = 1;
    }
    for (int x : b) {
        if (x < 0 || x >= n) throw Error(ErrorKind::SetsOverlapOrEmpty, "set element out of range");
        if (mark[x] == 1) throw Error(ErrorKind::SetsOverlapOrEmpty, "A and B overlap");
    }
}

namespace {

// Solve sum_y q(x,y) (h(y) - h(x)) = 0 off A u B, h = 1 on A, 0 on B.
std::vector<double> dense_harmonic(int n, const std::function<double(int, int)>& q,
                                   const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> role(n, 0);  // 0 interior, 1 A, 2 B
    for (int x : a) role[x] = 1;
    for (int x : b) role[x] = 2;
    std::vector<int> idx(n, -1);
    int m = 0;
    for (int x = 0; x < n; ++x)
        if (role[x] == 0) idx[x] = m++;
    std::vector<double> h(n, 0.0);
    for (int x : a) h[x] = 1.0;
    if (m == 0) return h;
    Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (int x = 0; x < n; ++x) {
        if (role[x] != 0) continue;
        for (int y = 0; y < n; ++y) {
            if (y == x) continue;
            double v = q(x, y);
            if (v == 0.0) continue;
            mat(idx[x], idx[x]) -= v;
            if (role[y] == 0)
                mat(idx[x], idx[y]) += v;
            else if (role[y] == 1)
                rhs(idx[x]) -= v;
        }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(mat);
    if (!lu.isInvertible()) throw Error(ErrorKind::SolverFailure, "singular harmonic system");
    Eigen::VectorXd sol = lu.solve(rhs);
    sol += lu.solve(rhs - mat * sol);
    for (int x = 0; x < n; ++x)
        if (role[x] == 0) h[x] = sol(idx[x]);
    return h;
}

bool close_rel(double a, double b, double tol) {
    return std::fabs(a - b) <= tol * std::max({std::fabs(a), std::fabs(b), 1e-300});
}

}  // namespace

WalkPotential walk_equilibrium(const Walk& w, const WalkProfile& p, const std::vector<int>& a,
                               const std::vector<int>& b) {
    check_sets(w.kappa, a, b);
    WalkPotential out;
    out.h = dense_harmonic(w.kappa, [&](int x, int y) { return w.r(x, y); }, a, b);
    out.cap = walk_dirichlet(w, p, out.h);
    auto lh = walk_generator(w, out.h);
    Accumulator fa, fb;
    for (int x : a) fa.add(-p.m[x] * lh[x]);
    for (int x : b) fb.add(p.m[x] * lh[x]);
    out.flux_a = fa.value();
    out.flux_b = fb.value();
    return out;
}

WalkCapacity walk_capacity(const Walk& w, const WalkProfile& p, const std::vector<int>& a,
                           const std::vector<int>& b) {
    auto fw = walk_equilibrium(w, p, a, b);
    auto bw = walk_equilibrium(w, p, b, a);
    auto adj = walk_equilibrium(adjoint_walk(w, p), p, a, b);
    WalkCapacity c{fw.cap, fw.flux_a, fw.flux_b, bw.cap, adj.cap};
    const double tol = 1e-10;
    if (!close_rel(c.cap, c.flux_a, tol) || !close_rel(c.cap, c.flux_b, tol) ||
        !close_rel(c.cap, c.reversed, tol) || !close_rel(c.cap, c.adjoint, tol))
        throw Error(ErrorKind::SolverFailure, "capacity expressions disagree");
    return c;
}

std::vector<int> canonical_path(const Walk& w, int u, int v) {
    const int k = w.kappa;
    std::vector<int> parent(k, -1);
    std::vector<char> seen(k, 0);
    std::deque<int> q{u};
    seen[u] = 1;
    while (!q.empty()) {
        int x = q.front();
        q.pop_front();
        if (x == v) break;
        for (int y = 0; y < k; ++y) {
            if (y != x && w.r(x, y) > 0.0 && !seen[y]) {
                seen[y] = 1;
                parent[y] = x;
                q.push_back(y);
            }
        }
    }
    if (!seen[v]) throw Error(ErrorKind::NotIrreducible, "no directed path");
    std::vector<int> path{v};
    while (path.back() != u) path.push_back(parent[path.back()]);
    std::reverse(path.begin(), path.end());
    return path;
}

int LimitChain::local(int site) const {
    auto it = std::find(sites.begin(), sites.end(), site);
    return it == sites.end() ? -1 : static_cast<int>(it - sites.begin());
}

LimitChain build_limit_chain(const Walk& w, const WalkProfile& p, const SeriesConstants& c) {
    const int ks = p.kappa_star();
    if (ks < 2) throw Error(ErrorKind::DegenerateModel, "the limit chain needs |S_star| >= 2");
    LimitChain y;
    y.sites = p.s_star;
    y.rate = Eigen::MatrixXd::Zero(ks, ks);
    y.mu.assign(ks, 1.0 / ks);
    const double denom = p.m_max * c.gamma_alpha * c.i_alpha;
    for (int i = 0; i < ks; ++i)
        for (int j = i + 1; j < ks; ++j) {
            double cap = walk_equilibrium(w, p, {y.sites[i]}, {y.sites[j]}).cap;
            y.rate(i, j) = y.rate(j, i) = cap / denom;
        }
    return y;
}

std::vector<double> limit_generator(const LimitChain& y, const std::vector<double>& f) {
    std::vector<double> out(y.size(), 0.0);
    for (int i = 0; i < y.size(); ++i)
        for (int j = 0; j < y.size(); ++j)
            if (j != i) out[i] += y.rate(i, j) * (f[j] - f[i]);
    return out;
}

double limit_dirichlet(const LimitChain& y, const std::vector<double>& f) {
    Accumulator acc;
    for (int i = 0; i < y.size(); ++i)
        for (int j = 0; j < y.size(); ++j)
            if (j != i) {
                double d = f[j] - f[i];
                acc.add(0.5 * y.mu[i] * y.rate(i, j) * d * d);
            }
    return acc.value();
}

LimitPotential limit_potential(const LimitChain& y, const std::vector<int>& a,
                               const std::vector<int>& b) {
    std::vector<int> la, lb;
    for (int x : a) {
        int i = y.local(x);
        if (i < 0) throw Error(ErrorKind::SetsOverlapOrEmpty, "set element outside S_star");
        la.push_back(i);
    }
    for (int x : b) {
        int i = y.local(x);
        if (i < 0) throw Error(ErrorKind::SetsOverlapOrEmpty, "set element outside S_star");
        lb.push_back(i);
    }
    check_sets(y.size(), la, lb);
    LimitPotential out;
    out.h = dense_harmonic(y.size(), [&](int i, int j) { return y.rate(i, j); }, la, lb);
    out.cap = limit_dirichlet(y, out.h);
    return out;
}

Eigen::MatrixXd limit_transition(const LimitChain& y, double t) {
    Eigen::MatrixXd l = y.rate;
    for (int i = 0; i < y.size(); ++i) l(i, i) = -y.rate.row(i).sum();
    return (t * l).exp();
}

}  // namespace zrpm
