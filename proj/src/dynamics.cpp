#include "zrpm/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <unordered_map>

#include "zrpm/collapse.hpp"
#include "zrpm/error.hpp"
#include "zrpm/numeric.hpp"

namespace zrpm {

namespace {

using cd = std::complex<double>;

// Index drawn with probability proportional to w (non-negative entries).
std::size_t pick(const std::vector<double>& w, double u) {
    double tot = 0.0;
    for (double x : w) tot += x;
    double target = u * tot;
    double acc = 0.0;
    std::size_t last = w.size();
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] <= 0.0) continue;
        acc += w[i];
        last = i;
        if (target < acc) return i;
    }
    if (last == w.size()) throw Error(ErrorKind::SolverFailure, "empty categorical law");
    return last;
}

// Site-level dynamics on a configuration updated in place.
class Stepper {
public:
    Stepper(const ZrpModel& m, long n, Variant var)
        : walk_(var == Variant::Adjoint ? adjoint_walk(m.walk, m.profile) : m.walk), k_(m.kappa()) {
        g_.resize(static_cast<std::size_t>(n) + 1);
        for (long j = 0; j <= n; ++j) g_[j] = m.g(j);
        out_.resize(k_);
        for (int x = 0; x < k_; ++x) out_[x] = walk_.out_rate(x);
        w_.resize(k_);
    }

    double total(const Config& c) const {
        double t = 0.0;
        for (int x = 0; x < k_; ++x) t += g_[c[x]] * out_[x];
        return t;
    }

    // Applies one jump chosen with the rates at c; returns (from, to).
    std::pair<int, int> jump(Config& c, CounterRng& rng) {
        for (int x = 0; x < k_; ++x) w_[x] = g_[c[x]] * out_[x];
        int u = static_cast<int>(pick(w_, rng.uniform()));
        std::vector<double> row(k_);
        for (int v = 0; v < k_; ++v) row[v] = walk_.r(u, v);
        int v = static_cast<int>(pick(row, rng.uniform()));
        --c[u];
        ++c[v];
        return {u, v};
    }

    double rate(const Config& c, int u, int v) const { return g_[c[u]] * walk_.r(u, v); }
    const Walk& walk() const { return walk_; }

private:
    Walk walk_;
    int k_;
    std::vector<double> g_, out_, w_;
};

struct Channel {
    int from;  // local state in the well
    int u, v;
    double rate;
};

struct FRow {
    std::vector<double> hit;   // over E positions
    std::vector<double> exit;  // over channels
};

// K^x = {eta_x >= N - L}: enumerated neighbourhood of one valley.
struct Well {
    int x = 0;
    long n = 0;
    long floor_x = 0;  // N - L
    std::vector<Config> states;
    std::unordered_map<std::uint64_t, int> index;
    std::vector<char> in_e;
    std::vector<int> pos;  // position inside E or F
    std::vector<int> e_list, f_list;
    std::vector<std::vector<std::pair<int, double>>> nbr;  // moves staying in K
    std::vector<double> out_total;                         // all moves
    std::vector<Channel> channels;
    std::vector<std::vector<int>> channels_of;
    std::vector<double> exit_rate;  // sum over channels of a state

    // trace on E of the chain killed on leaving K
    PhaseType trace;
    std::vector<double> kill;  // per E position
    std::vector<double> h;     // per F position: leave K before E
    std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lut;
    std::map<int, FRow> rows;

    // real-time sojourn in K
    PhaseType full;
    bool has_full = false;

    int local(const ConfigSpace& space, const Config& c) const {
        if (c[x] < floor_x) return -1;
        auto it = index.find(space.rank(c));
        return it == index.end() ? -1 : it->second;
    }

    const FRow& row(int f_local) {
        auto it = rows.find(f_local);
        if (it != rows.end()) return it->second;
        const int nf = static_cast<int>(f_list.size());
        Eigen::VectorXd e = Eigen::VectorXd::Zero(nf);
        e[pos[f_local]] = 1.0;
        Eigen::VectorXd z = lut->solve(e);
        if (lut->info() != Eigen::Success) throw Error(ErrorKind::SolverFailure, "well excursion solve failed");
        FRow r;
        r.hit.assign(e_list.size(), 0.0);
        r.exit.assign(channels.size(), 0.0);
        for (int j = 0; j < nf; ++j) {
            const double zj = std::max(z[j], 0.0);
            if (zj == 0.0) continue;
            const int s = f_list[j];
            for (auto [t, q] : nbr[s])
                if (in_e[t]) r.hit[pos[t]] += zj * q;
            for (int c : channels_of[s]) r.exit[c] += zj * channels[c].rate;
        }
        return rows.emplace(f_local, std::move(r)).first->second;
    }
};

Well build_well(const ZrpModel& m, const MetastableSets& sets, const ConfigSpace& space, int x, bool real_time) {
    const long n = sets.scales().n;
    const int k = m.kappa();
    const long L = n / 3;
    if (sets.scales().ell > L || 2 * (n - L) <= n)
        throw Error(ErrorKind::ScaleOrderViolated, "valley depth exceeds the sampling well");
    Well w;
    w.x = x;
    w.n = n;
    w.floor_x = n - L;
    std::vector<int> others;
    for (int z = 0; z < k; ++z)
        if (z != x) others.push_back(z);
    for (long j = 0; j <= L; ++j) {
        ConfigSpace sub(j, k - 1);
        for (std::uint64_t r = 0; r < sub.size(); ++r) {
            Config loc = sub.unrank(r);
            Config c(k, 0);
            c[x] = static_cast<int>(n - j);
            for (int i = 0; i < k - 1; ++i) c[others[i]] = loc[i];
            w.index.emplace(space.rank(c), static_cast<int>(w.states.size()));
            w.states.push_back(std::move(c));
        }
    }
    const int ns = static_cast<int>(w.states.size());
    w.in_e.resize(ns);
    w.pos.resize(ns);
    for (int i = 0; i < ns; ++i) {
        w.in_e[i] = sets.in_valley(w.states[i].data(), x);
        if (w.in_e[i]) {
            w.pos[i] = static_cast<int>(w.e_list.size());
            w.e_list.push_back(i);
        } else {
            w.pos[i] = static_cast<int>(w.f_list.size());
            w.f_list.push_back(i);
        }
    }
    w.nbr.resize(ns);
    w.out_total.assign(ns, 0.0);
    w.channels_of.resize(ns);
    w.exit_rate.assign(ns, 0.0);
    for (int i = 0; i < ns; ++i) {
        const Config& c = w.states[i];
        for (int u = 0; u < k; ++u) {
            if (c[u] == 0) continue;
            for (int v = 0; v < k; ++v) {
                const double r = m.walk.r(u, v);
                if (u == v || r <= 0.0) continue;
                const double q = m.g(c[u]) * r;
                w.out_total[i] += q;
                Config d = c;
                --d[u];
                ++d[v];
                int j = w.local(space, d);
                if (j >= 0) {
                    w.nbr[i].emplace_back(j, q);
                } else {
                    w.channels_of[i].push_back(static_cast<int>(w.channels.size()));
                    w.channels.push_back({i, u, v, q});
                    w.exit_rate[i] += q;
                }
            }
        }
    }
    const int ne = static_cast<int>(w.e_list.size());
    const int nf = static_cast<int>(w.f_list.size());
    if (ne == 0) throw Error(ErrorKind::EmptyOrFullValley, "valley is empty");

    Eigen::MatrixXd x_fe = Eigen::MatrixXd::Zero(nf, ne);
    w.h.assign(nf, 0.0);
    if (nf > 0) {
        std::vector<Eigen::Triplet<double>> trip, tript;
        Eigen::MatrixXd q_fe = Eigen::MatrixXd::Zero(nf, ne);
        Eigen::VectorXd q_out(nf);
        for (int j = 0; j < nf; ++j) {
            const int s = w.f_list[j];
            trip.emplace_back(j, j, w.out_total[s]);
            tript.emplace_back(j, j, w.out_total[s]);
            for (auto [t, q] : w.nbr[s]) {
                if (w.in_e[t]) {
                    q_fe(j, w.pos[t]) += q;
                } else {
                    trip.emplace_back(j, w.pos[t], -q);
                    tript.emplace_back(w.pos[t], j, -q);
                }
            }
            q_out[j] = w.exit_rate[s];
        }
        Eigen::SparseMatrix<double> a(nf, nf), at(nf, nf);
        a.setFromTriplets(trip.begin(), trip.end());
        at.setFromTriplets(tript.begin(), tript.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(a);
        if (lu.info() != Eigen::Success) throw Error(ErrorKind::SolverFailure, "well factorization failed");
        x_fe = lu.solve(q_fe);
        Eigen::VectorXd hv = lu.solve(q_out);
        for (int j = 0; j < nf; ++j) w.h[j] = std::max(hv[j], 0.0);
        w.lut = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
        w.lut->compute(at);
        if (w.lut->info() != Eigen::Success) throw Error(ErrorKind::SolverFailure, "well factorization failed");
    }

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(ne, ne);
    Eigen::VectorXd wt(ne);
    w.kill.assign(ne, 0.0);
    for (int a = 0; a < ne; ++a) {
        const int s = w.e_list[a];
        wt[a] = config_weight(m, w.states[s].data());
        t(a, a) -= w.out_total[s];
        w.kill[a] += w.exit_rate[s];
        for (auto [j, q] : w.nbr[s]) {
            if (w.in_e[j]) {
                t(a, w.pos[j]) += q;
            } else {
                t.row(a) += q * x_fe.row(w.pos[j]);
                w.kill[a] += q * w.h[w.pos[j]];
            }
        }
    }
    w.trace = PhaseType(t, wt);

    if (real_time) {
        if (ns > 4000) throw Error(ErrorKind::SolverFailure, "well too large for a dense sojourn law");
        Eigen::MatrixXd tk = Eigen::MatrixXd::Zero(ns, ns);
        Eigen::VectorXd wk(ns);
        for (int i = 0; i < ns; ++i) {
            wk[i] = config_weight(m, w.states[i].data());
            tk(i, i) = -w.out_total[i];
            for (auto [j, q] : w.nbr[i]) tk(i, j) += q;
        }
        w.full = PhaseType(tk, wk);
        w.has_full = true;
    }
    return w;
}

Config xi(int k, long n, int x) {
    Config c(k, 0);
    c[x] = static_cast<int>(n);
    return c;
}

void check_sites(const MetastableSets& sets, int x0) {
    const auto& s = sets.model().profile.s_star;
    if (std::find(s.begin(), s.end(), x0) == s.end())
        throw Error(ErrorKind::SetsOverlapOrEmpty, "start site must lie in S_star");
}

// Regenerative cycles: time in E^x between entering it and leaving for another valley.
struct CycleStats {
    std::vector<std::vector<std::pair<double, int>>> cycles;
    std::vector<double> open;

    explicit CycleStats(int k) : cycles(k), open(k, 0.0) {}

    void finish(JumpRateEstimate& est, const std::vector<int>& sites, int k) const {
        const int ks = static_cast<int>(sites.size());
        est.rate = Eigen::MatrixXd::Zero(ks, ks);
        est.se = Eigen::MatrixXd::Constant(ks, ks, std::numeric_limits<double>::infinity());
        for (int i = 0; i < ks; ++i) {
            const int x = sites[i];
            const double occ = est.occupation[i];
            if (occ <= 0.0) continue;
            const auto& cy = cycles[x];
            const double nc = static_cast<double>(cy.size());
            for (int j = 0; j < ks; ++j) {
                if (i == j) continue;
                const double r = est.count(i, j) / occ;
                est.rate(i, j) = r;
                if (cy.size() < 2) continue;
                double tbar = 0.0;
                for (auto& c : cy) tbar += c.first;
                tbar /= nc;
                Accumulator ss;
                for (auto& c : cy) {
                    double d = (c.second == sites[j] ? 1.0 : 0.0) - r * c.first;
                    ss += d * d;
                }
                est.se(i, j) = std::sqrt(ss.value() / (nc - 1.0) / nc) / tbar;
            }
        }
        (void)k;
    }
};

int site_pos(const std::vector<int>& sites, int x) {
    for (std::size_t i = 0; i < sites.size(); ++i)
        if (sites[i] == x) return static_cast<int>(i);
    return -1;
}

}  // namespace

// ---------------------------------------------------------------- PhaseType

PhaseType::PhaseType(const Eigen::MatrixXd& t, const Eigen::VectorXd& weights) {
    const int n = static_cast<int>(t.rows());
    const double scale = std::max(t.cwiseAbs().maxCoeff(), 1e-300);
    bool sym = weights.size() == n && (weights.array() > 0).all();
    if (sym) {
        for (int i = 0; i < n && sym; ++i)
            for (int j = i + 1; j < n; ++j) {
                double a = weights[i] * t(i, j), b = weights[j] * t(j, i);
                if (std::abs(a - b) > 1e-9 * std::max({std::abs(a), std::abs(b), 1e-300}) &&
                    std::abs(a - b) > 1e-14 * scale * std::max(weights[i], weights[j])) {
                    sym = false;
                    break;
                }
            }
    }
    if (sym) {
        Eigen::VectorXd sq = weights.array().sqrt();
        Eigen::MatrixXd a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = sq[i] * t(i, j) / sq[j];
        a = 0.5 * (a + a.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
        if (es.info() != Eigen::Success) throw Error(ErrorKind::SolverFailure, "eigen solve failed");
        Eigen::MatrixXd u = es.eigenvectors();
        Eigen::MatrixXd v = sq.cwiseInverse().asDiagonal() * u;
        Eigen::MatrixXd vi = u.transpose() * sq.asDiagonal();
        v_ = v.cast<cd>();
        vinv_ = vi.cast<cd>();
        lam_ = es.eigenvalues().cast<cd>();
    } else {
        Eigen::EigenSolver<Eigen::MatrixXd> es(t);
        if (es.info() != Eigen::Success) throw Error(ErrorKind::SolverFailure, "eigen solve failed");
        v_ = es.eigenvectors();
        vinv_ = v_.inverse();
        lam_ = es.eigenvalues();
    }
    Eigen::MatrixXcd rec = v_ * lam_.asDiagonal() * vinv_;
    recon_ = (rec.real() - t).cwiseAbs().maxCoeff() / scale;
    if (!(recon_ < 1e-8)) throw Error(ErrorKind::SolverFailure, "sub-generator is too ill-conditioned");
    w_ = vinv_ * Eigen::VectorXcd::Ones(n);
    slow_ = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) slow_ = std::max(slow_, lam_[k].real());
    if (!(slow_ < 0.0)) throw Error(ErrorKind::SolverFailure, "chain is not killed");
}

double PhaseType::survival(int s, double t) const {
    cd acc = 0.0;
    for (int k = 0; k < lam_.size(); ++k) acc += v_(s, k) * std::exp(lam_[k] * t) * w_[k];
    return std::clamp(acc.real(), 0.0, 1.0);
}

double PhaseType::derivative(int s, double t) const {
    cd acc = 0.0;
    for (int k = 0; k < lam_.size(); ++k) acc += v_(s, k) * lam_[k] * std::exp(lam_[k] * t) * w_[k];
    return acc.real();
}

Eigen::VectorXd PhaseType::occupation(int s, double t) const {
    Eigen::VectorXcd c(lam_.size());
    for (int k = 0; k < lam_.size(); ++k) c[k] = v_(s, k) * std::exp(lam_[k] * t);
    Eigen::VectorXd p = (vinv_.transpose() * c).real();
    return p.cwiseMax(0.0);
}

double PhaseType::sample(int s, double u) const {
    if (u >= 1.0) return 0.0;
    double lo = 0.0, hi = 1.0 / -slow_ * 1e-3;
    for (int i = 0; i < 4000 && survival(s, hi) > u; ++i) {
        lo = hi;
        hi *= 2.0;
    }
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        double f = survival(s, t) - u;
        if (f > 0.0)
            lo = t;
        else
            hi = t;
        double d = derivative(s, t);
        double tn = d < 0.0 ? t - f / d : 0.5 * (lo + hi);
        if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
        if (std::abs(tn - t) <= 1e-14 * t || hi - lo <= 1e-14 * hi) return tn;
        t = tn;
    }
    return t;
}

// ---------------------------------------------------------------- simulate

Trajectory simulate(const ZrpModel& m, const Config& eta0, double horizon, std::uint64_t seed,
                    std::uint64_t index, Variant var, bool record, std::uint64_t max_jumps) {
    long n = 0;
    for (int v : eta0) n += v;
    if (static_cast<int>(eta0.size()) != m.kappa())
        throw Error(ErrorKind::SetsOverlapOrEmpty, "configuration length differs from kappa");
    ConfigSpace space(n, m.kappa());
    Stepper st(m, n, var);
    CounterRng rng(seed, index);
    Trajectory tr;
    tr.seed = seed;
    tr.index = index;
    tr.n = n;
    tr.horizon = horizon;
    Config c = eta0;
    double now = 0.0;
    if (record) {
        tr.times.push_back(0.0);
        tr.ranks.push_back(space.rank(c));
    }
    while (tr.jumps < max_jumps) {
        const double q = st.total(c);
        if (q <= 0.0) break;
        now += rng.exponential(q);
        if (now >= horizon) break;
        st.jump(c, rng);
        ++tr.jumps;
        if (record) {
            tr.times.push_back(now);
            tr.ranks.push_back(space.rank(c));
        }
    }
    tr.final_state = c;
    return tr;
}

bool trajectory_consistent(const ZrpModel& m, const Trajectory& t) {
    if (t.times.size() != t.ranks.size()) return false;
    ConfigSpace space(t.n, m.kappa());
    for (std::size_t i = 1; i < t.times.size(); ++i) {
        if (!(t.times[i] > t.times[i - 1]) || t.times[i] >= t.horizon) return false;
        Config a = space.unrank(t.ranks[i - 1]), b = space.unrank(t.ranks[i]);
        int up = -1, down = -1, diff = 0;
        for (int x = 0; x < m.kappa(); ++x) {
            int d = b[x] - a[x];
            if (d == 0) continue;
            ++diff;
            if (d == 1) up = x;
            if (d == -1) down = x;
        }
        if (diff != 2 || up < 0 || down < 0 || m.walk.r(down, up) <= 0.0) return false;
    }
    return true;
}

// ---------------------------------------------------------------- trace chain

TraceChainExact trace_chain_exact(const ZrpSystem& sys, const std::vector<int>& sites,
                                  const std::vector<Mask>& valleys, bool with_jump_rates, double tol) {
    const Chain& ch = sys.chain;
    const std::size_t ns = ch.n;
    const int ks = static_cast<int>(sites.size());
    if (ks < 2 || valleys.size() != sites.size())
        throw Error(ErrorKind::SetsOverlapOrEmpty, "need one valley per site and at least two sites");
    Mask all(ns, 0);
    for (const Mask& v : valleys) {
        if (v.size() != ns) throw Error(ErrorKind::SetsOverlapOrEmpty, "valley mask size mismatch");
        for (std::size_t i = 0; i < ns; ++i) {
            if (!v[i]) continue;
            if (all[i]) throw Error(ErrorKind::SetsOverlapOrEmpty, "valleys overlap");
            all[i] = 1;
        }
    }
    TraceChainExact out;
    out.sites = sites;
    out.r = Eigen::MatrixXd::Zero(ks, ks);
    out.lambda.assign(ks, 0.0);
    out.mu_valley.assign(ks, 0.0);
    out.cap_valley.assign(ks, 0.0);
    out.escape.assign(static_cast<std::size_t>(ks) * ks, 0.0);

    HarmonicSolver hs(ch, Variant::Primal, all);
    std::vector<std::vector<double>> bv(ks, std::vector<double>(ns, 0.0));
    for (int j = 0; j < ks; ++j)
        for (std::size_t i = 0; i < ns; ++i) bv[j][i] = valleys[j][i] ? 1.0 : 0.0;
    auto u = hs.solve_many(bv);

    for (int i = 0; i < ks; ++i) {
        out.mu_valley[i] = mu_mass(ch, valleys[i]);
        if (out.mu_valley[i] <= 0.0) throw Error(ErrorKind::EmptyOrFullValley, "empty valley");
        std::vector<Accumulator> acc(ks);
        for (std::uint32_t s = 0; s < ns; ++s) {
            if (!valleys[i][s]) continue;
            for (std::size_t p = ch.adj_ptr[s]; p < ch.adj_ptr[s + 1]; ++p) {
                const std::size_t e = ch.adj_edge[p];
                const std::uint32_t t = ch.other(e, s);
                const double c = ch.c_out(e, s);
                for (int j = 0; j < ks; ++j)
                    if (j != i) acc[j] += c * u[j][t];
            }
        }
        for (int j = 0; j < ks; ++j)
            if (j != i) out.r(i, j) = acc[j].value() / out.mu_valley[i];
        out.lambda[i] = out.r.row(i).sum();
    }

    for (int i = 0; i < ks; ++i) {
        Mask rest(ns, 0);
        for (int j = 0; j < ks; ++j)
            if (j != i)
                for (std::size_t s = 0; s < ns; ++s) rest[s] |= valleys[j][s];
        out.cap_valley[i] = capacity(ch, valleys[i], rest);
        const double lhs = out.lambda[i] * out.mu_valley[i];
        out.cap_identity = std::max(out.cap_identity, std::abs(lhs - out.cap_valley[i]) / out.cap_valley[i]);
        CollapsedChain cc = collapse_chain(ch, valleys[i]);
        for (int j = 0; j < ks; ++j) {
            if (j == i) continue;
            Mask others(ns, 0);
            for (int k = 0; k < ks; ++k)
                if (k != i && k != j)
                    for (std::size_t s = 0; s < ns; ++s) others[s] |= valleys[k][s];
            const double p = collapsed_hitting(cc, collapse_set(cc, valleys[j]), collapse_set(cc, others));
            out.escape[static_cast<std::size_t>(i) * ks + j] = p;
            out.hitting_identity = std::max(out.hitting_identity, std::abs(out.r(i, j) / out.lambda[i] - p));
        }
    }
    if (!(out.cap_identity <= tol) || !(out.hitting_identity <= tol))
        throw Error(ErrorKind::SolverFailure, "trace chain identities violated: cap_identity " + std::to_string(out.cap_identity) +
                                                  ", hitting_identity " + std::to_string(out.hitting_identity));

    if (with_jump_rates) {
        std::vector<std::uint32_t> members;
        for (std::uint32_t s = 0; s < ns; ++s)
            if (all[s]) members.push_back(s);
        if (members.size() > 4000) throw Error(ErrorKind::SolverFailure, "too many valley states for j_N");
        for (std::uint32_t z : members) {
            std::vector<double> b(ns, 0.0);
            b[z] = 1.0;
            std::vector<double> hz = hs.solve(b);
            for (std::uint32_t s : members) {
                if (s == z) continue;
                Accumulator acc;
                for (std::size_t p = ch.adj_ptr[s]; p < ch.adj_ptr[s + 1]; ++p) {
                    const std::size_t e = ch.adj_edge[p];
                    acc += ch.rate_out(e, s, Variant::Primal) * hz[ch.other(e, s)];
                }
                if (acc.value() > 0.0) out.jumps.push_back({s, z, acc.value()});
            }
        }
    }
    return out;
}

TraceChainExact trace_chain_exact(const ZrpModel& m, const ZrpSystem& sys, const MetastableSets& sets,
                                  bool with_jump_rates, double tol) {
    const auto& s = m.profile.s_star;
    std::vector<Mask> v;
    for (int x : s) v.push_back(valley_mask(sets, sys, x));
    return trace_chain_exact(sys, s, v, with_jump_rates, tol);
}

// ---------------------------------------------------------------- jump rates

JumpRateEstimate mean_jump_rate_mc(const ZrpModel& m, const MetastableSets& sets, int x0,
                                   std::uint64_t n_transitions, std::uint64_t seed) {
    check_sites(sets, x0);
    const long n = sets.scales().n;
    const int k = m.kappa();
    const auto& sites = m.profile.s_star;
    const int ks = static_cast<int>(sites.size());
    ConfigSpace space(n, k);
    std::vector<Well> wells;
    std::vector<int> well_of_site(k, -1);
    for (int x : sites) {
        well_of_site[x] = static_cast<int>(wells.size());
        wells.push_back(build_well(m, sets, space, x, false));
    }
    Stepper st(m, n, Variant::Primal);
    CounterRng rng(seed, 0);
    JumpRateEstimate est;
    est.sites = sites;
    est.count = Eigen::MatrixXd::Zero(ks, ks);
    est.occupation.assign(ks, 0.0);
    CycleStats cs(k);

    auto find_well = [&](const Config& c) -> std::pair<int, int> {
        for (std::size_t i = 0; i < wells.size(); ++i) {
            int l = wells[i].local(space, c);
            if (l >= 0) return {static_cast<int>(i), l};
        }
        return {-1, -1};
    };

    Config c = xi(k, n, x0);
    int last = x0;
    auto [wi, s] = find_well(c);
    bool in_well = true;
    while (est.transitions < n_transitions) {
        if (!in_well) {
            auto [a, b] = find_well(c);
            if (a >= 0) {
                wi = a;
                s = b;
                in_well = true;
                continue;
            }
            st.jump(c, rng);
            ++est.steps;
            continue;
        }
        Well& w = wells[wi];
        if (!w.in_e[s]) {
            const FRow& r = w.row(s);
            std::vector<double> all(r.hit);
            all.insert(all.end(), r.exit.begin(), r.exit.end());
            std::size_t o = pick(all, rng.uniform());
            if (o < r.hit.size()) {
                s = w.e_list[o];
            } else {
                const Channel& ch = w.channels[o - r.hit.size()];
                c = w.states[ch.from];
                --c[ch.u];
                ++c[ch.v];
                in_well = false;
                continue;
            }
        }
        // inside E^x
        const int x = w.x;
        if (last != x) {
            est.count(site_pos(sites, last), site_pos(sites, x)) += 1.0;
            cs.cycles[last].emplace_back(cs.open[last], x);
            cs.open[last] = 0.0;
            ++est.transitions;
            last = x;
            if (est.transitions >= n_transitions) break;
        }
        const int a = w.pos[s];
        const double tau = w.trace.sample(a, rng.uniform());
        ++est.sojourns;
        est.occupation[site_pos(sites, x)] += tau;
        cs.open[x] += tau;
        Eigen::VectorXd p = w.trace.occupation(a, tau);
        std::vector<double> kw(w.e_list.size());
        for (std::size_t b = 0; b < kw.size(); ++b) kw[b] = p[b] * w.kill[b];
        const int kst = w.e_list[pick(kw, rng.uniform())];
        // leave directly or through F without returning to E
        std::vector<double> opt;
        std::vector<int> tag;
        for (int ci : w.channels_of[kst]) {
            opt.push_back(w.channels[ci].rate);
            tag.push_back(ci);
        }
        for (auto [j, q] : w.nbr[kst]) {
            if (w.in_e[j]) continue;
            opt.push_back(q * w.h[w.pos[j]]);
            tag.push_back(-1 - j);
        }
        const int t = tag[pick(opt, rng.uniform())];
        int chi;
        if (t >= 0) {
            chi = t;
        } else {
            const FRow& r = w.row(-1 - t);
            chi = static_cast<int>(pick(r.exit, rng.uniform()));
        }
        const Channel& ch = w.channels[chi];
        c = w.states[ch.from];
        --c[ch.u];
        ++c[ch.v];
        in_well = false;
    }
    cs.finish(est, sites, k);
    return est;
}

JumpRateEstimate mean_jump_rate_plain(const ZrpModel& m, const MetastableSets& sets, int x0,
                                      std::uint64_t n_transitions, std::uint64_t seed, std::uint64_t max_steps) {
    check_sites(sets, x0);
    const long n = sets.scales().n;
    const int k = m.kappa();
    const auto& sites = m.profile.s_star;
    const int ks = static_cast<int>(sites.size());
    Stepper st(m, n, Variant::Primal);
    CounterRng rng(seed, 0);
    JumpRateEstimate est;
    est.sites = sites;
    est.count = Eigen::MatrixXd::Zero(ks, ks);
    est.occupation.assign(ks, 0.0);
    CycleStats cs(k);
    Config c = xi(k, n, x0);
    int last = x0;
    int cur = x0;
    while (est.transitions < n_transitions && est.steps < max_steps) {
        const double dt = rng.exponential(st.total(c));
        if (cur >= 0) {
            est.occupation[site_pos(sites, cur)] += dt;
            cs.open[cur] += dt;
        }
        st.jump(c, rng);
        ++est.steps;
        cur = sets.valley_of(c.data());
        if (cur >= 0 && cur != last) {
            est.count(site_pos(sites, last), site_pos(sites, cur)) += 1.0;
            cs.cycles[last].emplace_back(cs.open[last], cur);
            cs.open[last] = 0.0;
            ++est.transitions;
            last = cur;
        }
    }
    cs.finish(est, sites, k);
    return est;
}

// ---------------------------------------------------------------- projection

std::vector<int> projection_path(const ZrpModel& m, const MetastableSets& sets, const Trajectory& t,
                                 const std::vector<double>& grid) {
    const double scale = std::pow(static_cast<double>(t.n), 1.0 + m.alpha);
    ConfigSpace space(t.n, m.kappa());
    std::vector<int> out;
    out.reserve(grid.size());
    for (double g : grid) {
        const double real = g * scale;
        if (real > t.horizon) throw Error(ErrorKind::SetsOverlapOrEmpty, "grid time beyond the trajectory horizon");
        auto it = std::upper_bound(t.times.begin(), t.times.end(), real);
        if (it == t.times.begin()) throw Error(ErrorKind::SetsOverlapOrEmpty, "trajectory has no records");
        const std::size_t i = static_cast<std::size_t>(it - t.times.begin()) - 1;
        Config c = space.unrank(t.ranks[i]);
        int v = sets.valley_of(c.data());
        out.push_back(v >= 0 ? v : kNullState);
    }
    return out;
}

std::vector<std::vector<int>> sample_projection_paths(const ZrpModel& m, const MetastableSets& sets, int x0,
                                                      const std::vector<double>& grid, std::size_t paths,
                                                      std::uint64_t seed) {
    check_sites(sets, x0);
    if (!std::is_sorted(grid.begin(), grid.end()) || (!grid.empty() && grid.front() < 0.0))
        throw Error(ErrorKind::SetsOverlapOrEmpty, "grid must be non-negative and sorted");
    const long n = sets.scales().n;
    const int k = m.kappa();
    const double scale = std::pow(static_cast<double>(n), 1.0 + m.alpha);
    ConfigSpace space(n, k);
    std::vector<Well> wells;
    for (int x : m.profile.s_star) wells.push_back(build_well(m, sets, space, x, true));
    Stepper st(m, n, Variant::Primal);
    auto find_well = [&](const Config& c) -> std::pair<int, int> {
        for (std::size_t i = 0; i < wells.size(); ++i) {
            int l = wells[i].local(space, c);
            if (l >= 0) return {static_cast<int>(i), l};
        }
        return {-1, -1};
    };

    std::vector<std::vector<int>> out(paths);
    for (std::size_t p = 0; p < paths; ++p) {
        CounterRng rng(seed, p);
        Config c = xi(k, n, x0);
        auto [wi, s] = find_well(c);
        bool in_well = true;
        double now = 0.0;
        for (double g : grid) {
            const double target = g * scale;
            while (true) {
                if (in_well) {
                    Well& w = wells[wi];
                    const double rem = target - now;
                    const double tau = w.full.sample(s, rng.uniform());
                    if (tau > rem) {
                        Eigen::VectorXd occ = w.full.occupation(s, rem);
                        std::vector<double> pw(occ.data(), occ.data() + occ.size());
                        s = static_cast<int>(pick(pw, rng.uniform()));
                        out[p].push_back(w.in_e[s] ? w.x : kNullState);
                        now = target;
                        break;
                    }
                    now += tau;
                    Eigen::VectorXd occ = w.full.occupation(s, tau);
                    std::vector<double> cw(w.channels.size());
                    for (std::size_t ci = 0; ci < cw.size(); ++ci)
                        cw[ci] = occ[w.channels[ci].from] * w.channels[ci].rate;
                    const Channel& ch = w.channels[pick(cw, rng.uniform())];
                    c = w.states[ch.from];
                    --c[ch.u];
                    ++c[ch.v];
                    in_well = false;
                } else {
                    auto [a, b] = find_well(c);
                    if (a >= 0) {
                        wi = a;
                        s = b;
                        in_well = true;
                        continue;
                    }
                    const double dt = rng.exponential(st.total(c));
                    if (now + dt > target) {
                        int v = sets.valley_of(c.data());
                        out[p].push_back(v >= 0 ? v : kNullState);
                        now = target;
                        break;
                    }
                    now += dt;
                    st.jump(c, rng);
                }
            }
        }
    }
    return out;
}

FddTable empirical_fdd(const std::vector<std::vector<int>>& paths, const std::vector<double>& grid,
                       const std::vector<int>& sites) {
    FddTable t;
    t.times = grid;
    t.states = sites;
    t.states.push_back(kNullState);
    t.paths = paths.size();
    const int ns = static_cast<int>(t.states.size());
    t.prob = Eigen::MatrixXd::Zero(grid.size(), ns);
    for (const auto& p : paths) {
        if (p.size() != grid.size()) throw Error(ErrorKind::ConstituentMissing, "path length differs from grid");
        for (std::size_t i = 0; i < grid.size(); ++i) {
            int j = p[i] == kNullState ? ns - 1 : site_pos(sites, p[i]);
            if (j < 0) throw Error(ErrorKind::ConstituentMissing, "unknown projected state");
            t.prob(i, j) += 1.0;
        }
    }
    const double np = static_cast<double>(std::max<std::size_t>(paths.size(), 1));
    t.prob /= np;
    t.se = (t.prob.array() * (1.0 - t.prob.array()) / np).sqrt();
    return t;
}

Eigen::MatrixXd empirical_two_time(const std::vector<std::vector<int>>& paths, std::size_t i, std::size_t j,
                                   const std::vector<int>& sites) {
    const int ns = static_cast<int>(sites.size()) + 1;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(ns, ns);
    auto idx = [&](int v) { return v == kNullState ? ns - 1 : site_pos(sites, v); };
    for (const auto& p : paths) t(idx(p.at(i)), idx(p.at(j))) += 1.0;
    if (!paths.empty()) t /= static_cast<double>(paths.size());
    return t;
}

Eigen::MatrixXd limit_fdd(const LimitChain& y, int x0, const std::vector<double>& grid) {
    const int a = y.local(x0);
    if (a < 0) throw Error(ErrorKind::SetsOverlapOrEmpty, "start site outside S_star");
    Eigen::MatrixXd out(grid.size(), y.size());
    for (std::size_t i = 0; i < grid.size(); ++i) out.row(i) = limit_transition(y, grid[i]).row(a);
    return out;
}

// ---------------------------------------------------------------- hypotheses

HypothesisReport hypothesis_diagnostics(const ZrpModel& m, const ZrpSystem& sys, const MetastableSets& sets) {
    HypothesisReport rep;
    const auto& sites = m.profile.s_star;
    rep.sites = sites;
    const std::size_t ns = sys.space.size();
    Mask delta = delta_mask(sets, sys);
    const double mu_delta = mu_mass(sys.chain, delta);
    for (int x : sites) {
        Mask v = valley_mask(sets, sys, x);
        Mask rest(ns, 0);
        for (int y : sites)
            if (y != x) {
                Mask o = valley_mask(sets, sys, y);
                for (std::size_t i = 0; i < ns; ++i) rest[i] |= o[i];
            }
        const double muv = mu_mass(sys.chain, v);
        rep.h2.push_back(mu_delta / muv);
        const std::uint32_t top = static_cast<std::uint32_t>(sys.space.rank(xi(m.kappa(), sys.n, x)));
        double sup = 0.0;
        bool any = false;
        for (std::uint32_t s = 0; s < ns; ++s)
            if (v[s] && s != top) any = true;
        if (any) {
            const double num = capacity(sys.chain, v, rest);
            for (std::uint32_t s = 0; s < ns; ++s) {
                if (!v[s] || s == top) continue;
                const double den = capacity(sys.chain, make_mask(ns, {s}), make_mask(ns, {top}));
                sup = std::max(sup, num / den);
            }
        }
        rep.h1.push_back(sup);
    }
    return rep;
}

}  // namespace zrpm
