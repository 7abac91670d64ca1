#include "zrpm/approx.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numeric>

#include "zrpm/error.hpp"
#include "zrpm/numeric.hpp"

namespace zrpm {

namespace {

double raw_bump(double s) {
    if (s <= -1.0 || s >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - s * s));
}

template <class F>
double integrate(F f, double a, double b) {
    if (b <= a) return 0.0;
    return boost::math::quadrature::gauss<double, 30>::integrate(f, a, b);
}

constexpr int kCells = 512;

}  // namespace

RampProfile::RampProfile(double eps, double alpha) : eps_(eps), alpha_(alpha) {
    if (!(eps > 0.0 && eps <= 1.0 / 16.0)) throw Error(ErrorKind::EpsOutOfRange, "eps must lie in (0, 1/16]");
    if (!(alpha > 2.0)) throw Error(ErrorKind::AlphaOutOfRange, "alpha must exceed 2");
    i_alpha_ = boost::math::beta(alpha + 1.0, alpha + 1.0);
    // cumulative tables of the bump and its first moment on [-1, 0]
    const double h = 1.0 / kCells;
    cdf_.assign(kCells + 1, 0.0);
    mom_.assign(kCells + 1, 0.0);
    for (int j = 0; j < kCells; ++j) {
        const double a = -1.0 + j * h;
        cdf_[j + 1] = cdf_[j] + integrate(raw_bump, a, a + h);
        mom_[j + 1] = mom_[j] + integrate([](double u) { return u * raw_bump(u); }, a, a + h);
    }
    norm_ = 2.0 * cdf_[kCells];
}

double RampProfile::bump(double s) const { return raw_bump(s) / norm_; }

double RampProfile::bump_cdf(double s) const {
    if (s <= -1.0) return 0.0;
    if (s >= 1.0) return 1.0;
    if (s > 0.0) return 1.0 - bump_cdf(-s);
    const int j = std::min(kCells - 1, static_cast<int>((s + 1.0) * kCells));
    const double a = -1.0 + static_cast<double>(j) / kCells;
    return (cdf_[j] + integrate(raw_bump, a, s)) / norm_;
}

double RampProfile::bump_moment(double s) const {
    if (s <= -1.0 || s >= 1.0) return 0.0;
    if (s > 0.0) s = -s;
    const int j = std::min(kCells - 1, static_cast<int>((s + 1.0) * kCells));
    const double a = -1.0 + static_cast<double>(j) / kCells;
    return (mom_[j] + integrate([](double u) { return u * raw_bump(u); }, a, s)) / norm_;
}

double RampProfile::gamma_hat(double t) const {
    if (t <= 4.0 * eps_) return 0.0;
    if (t >= 1.0 - 4.0 * eps_) return 1.0;
    return (t - 3.0 * eps_) / (1.0 - 6.0 * eps_);
}

double RampProfile::gamma(double t) const {
    const double e = eps_;
    if (t <= 3.0 * e) return 0.0;
    if (t >= 1.0 - 3.0 * e) return 1.0;
    if (t >= 5.0 * e && t <= 1.0 - 5.0 * e) return (t - 3.0 * e) / (1.0 - 6.0 * e);
    if (t > 0.5) return 1.0 - gamma(1.0 - t);
    const double s_lo = std::clamp((t - 1.0 + 4.0 * e) / e, -1.0, 1.0);
    const double s_hi = std::clamp((t - 4.0 * e) / e, -1.0, 1.0);
    const double f_lo = bump_cdf(s_lo), f_hi = bump_cdf(s_hi);
    const double m_lo = bump_moment(s_lo), m_hi = bump_moment(s_hi);
    return f_lo + ((t - 3.0 * e) * (f_hi - f_lo) - e * (m_hi - m_lo)) / (1.0 - 6.0 * e);
}

double RampProfile::gamma_prime(double t) const {
    const double e = eps_;
    const double s_lo = std::clamp((t - 1.0 + 4.0 * e) / e, -1.0, 1.0);
    const double s_hi = std::clamp((t - 4.0 * e) / e, -1.0, 1.0);
    const double inv = 1.0 / (1.0 - 6.0 * e);
    return inv * (bump_cdf(s_hi) - bump_cdf(s_lo)) + inv * (bump(s_hi) + bump(s_lo));
}

double RampProfile::U(double t) const {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return std::pow(t, alpha_) * std::pow(1.0 - t, alpha_) / i_alpha_;
}

double RampProfile::V(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return boost::math::ibeta(alpha_ + 1.0, alpha_ + 1.0, t);
}

double RampProfile::H(double t) const { return V(gamma(t)); }

double RampProfile::H_prime(double t) const { return gamma_prime(t) * U(gamma(t)); }

const std::vector<double>& RampProfile::H_grid(long n) const {
    auto it = cache_.find(n);
    if (it != cache_.end()) return it->second;
    std::vector<double> g(n + 1);
    for (long k = 0; 2 * k <= n; ++k) {
        g[k] = H(static_cast<double>(k) / static_cast<double>(n));
        g[n - k] = 1.0 - g[k];
    }
    if (n % 2 == 0) g[n / 2] = 0.5;
    return cache_.emplace(n, std::move(g)).first->second;
}

double RampProfile::H_at(long k, long n) const {
    if (k <= 0) return 0.0;
    if (k >= n) return 1.0;
    return H_grid(n)[k];
}

RampCheck RampProfile::check(int points) const {
    RampCheck c;
    const double e = eps_, se = std::sqrt(e);
    c.min_lower_ratio = 1e300;
    for (int i = 0; i <= points; ++i) {
        const double t = static_cast<double>(i) / points;
        const double g = gamma(t);
        double flat = 0.0;
        if (t <= 3.0 * e) flat = std::fabs(g);
        else if (t >= 1.0 - 3.0 * e) flat = std::fabs(g - 1.0);
        else if (t >= 5.0 * e && t <= 1.0 - 5.0 * e) flat = std::fabs(g - (t - 3.0 * e) / (1.0 - 6.0 * e));
        c.flat_defect = std::max(c.flat_defect, flat);
        c.symmetry_defect = std::max(c.symmetry_defect, std::fabs(gamma(1.0 - t) - 1.0 + g));
        c.max_slope = std::max(c.max_slope, gamma_prime(t));
        if (t > 0.0) c.max_upper_ratio = std::max(c.max_upper_ratio, g / t);
        if (t >= se) c.min_lower_ratio = std::min(c.min_lower_ratio, g / t);
        const double u = U(t);
        if (u > 1e-300) {
            const double q = H_prime(t) / u;
            c.max_h_over_u = std::max(c.max_h_over_u, q);
            if (t >= se && t <= 1.0 - se) c.mid_h_over_u_dev = std::max(c.mid_h_over_u_dev, std::fabs(q - 1.0));
        }
    }
    const double tol = 1e-8;
    c.flat = c.flat_defect <= tol;
    c.symmetric = c.symmetry_defect <= 1e-10;
    c.slope = c.max_slope <= 1.0 + se + tol;
    c.upper_ratio = c.max_upper_ratio <= 1.0 + se + tol;
    c.lower_ratio = 1.0 - 4.0 * se > 0.0 && c.min_lower_ratio >= 1.0 - 4.0 * se - tol;
    return c;
}

RampProfile ramp_functions(double eps, double alpha) {
    RampProfile r(eps, alpha);
    if (!(1.0 - 4.0 * std::sqrt(eps) > 0.0))
        throw Error(ErrorKind::PropertyCheckFailed, "1 - 4 sqrt(eps) must be positive");
    return r;
}

void certify_ramp(const RampCheck& c) {
    std::string bad;
    if (!c.flat) bad += " flat";
    if (!c.symmetric) bad += " symmetric";
    if (!c.slope) bad += " slope(max " + std::to_string(c.max_slope) + ")";
    if (!c.upper_ratio) bad += " upper_ratio";
    if (!c.lower_ratio) bad += " lower_ratio";
    if (!bad.empty()) throw Error(ErrorKind::PropertyCheckFailed, "ramp properties failed:" + bad);
}

double TubeFunction::value(const int* eta) const {
    Accumulator acc;
    long part = 0;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        part += eta[order[i]];
        acc.add(gaps[i] * ramp->H_at(part, n));
    }
    return acc.value();
}

std::vector<double> TubeFunction::b_raw(const int* eta) const {
    const int k = static_cast<int>(order.size());
    // dm[u] = gap_u (H(eta^u) - H(eta^u - 1)), dp[u] = gap_u (H(eta^u) - H(eta^u + 1))
    std::vector<double> dm(k, 0.0), dp(k, 0.0);
    long part = 0;
    for (int u = 0; u + 1 < k; ++u) {
        part += eta[order[u]];
        const double hu = ramp->H_at(part, n);
        dm[u] = gaps[u] * (hu - ramp->H_at(part - 1, n));
        dp[u] = gaps[u] * (hu - ramp->H_at(part + 1, n));
    }
    std::vector<double> out(k, 0.0);
    for (int i = 0; i < k; ++i) {
        Accumulator acc;
        double run = 0.0;
        for (int j = i + 1; j < k; ++j) {
            run += dm[j - 1];
            acc.add(walk->r(order[i], order[j]) * run);
        }
        run = 0.0;
        for (int j = i - 1; j >= 0; --j) {
            run += dp[j];
            acc.add(walk->r(order[i], order[j]) * run);
        }
        out[i] = acc.value();
    }
    return out;
}

TubeFunction tube_function(const ZrpModel& m, int x, int y, const RampProfile& ramp, long n) {
    const int k = m.kappa();
    if (x == y || x < 0 || y < 0 || x >= k || y >= k) throw Error(ErrorKind::SetsOverlapOrEmpty, "need x != y");
    if (!m.profile.in_s_star(x) || !m.profile.in_s_star(y))
        throw Error(ErrorKind::SetsOverlapOrEmpty, "tube endpoints must lie in S_star");
    const int lo = std::min(x, y), hi = std::max(x, y);
    auto pot = walk_equilibrium(m.walk, m.profile, {lo}, {hi});
    std::vector<int> mid;
    for (int z = 0; z < k; ++z)
        if (z != lo && z != hi) mid.push_back(z);
    std::stable_sort(mid.begin(), mid.end(), [&](int a, int b) { return pot.h[a] > pot.h[b]; });
    TubeFunction w;
    w.n = n;
    w.ramp = &ramp;
    w.walk = &m.walk;
    w.order.push_back(lo);
    w.order.insert(w.order.end(), mid.begin(), mid.end());
    w.order.push_back(hi);
    w.h = pot.h;
    w.h[lo] = 1.0;
    w.h[hi] = 0.0;
    if (x > y) {
        std::reverse(w.order.begin(), w.order.end());
        for (double& v : w.h) v = 1.0 - v;
    }
    w.x = x;
    w.y = y;
    for (int i = 0; i + 1 < k; ++i) w.gaps.push_back(w.h[w.order[i]] - w.h[w.order[i + 1]]);
    return w;
}

std::vector<double> b_coefficients(const TubeFunction& w, const MetastableSets& sets, const int* eta) {
    if (!w.in_tube(eta, sets.scales().pi)) throw Error(ErrorKind::OutsideTube, "configuration outside the tube");
    return w.b_raw(eta);
}

double le1_residual(const ZrpModel& m, const TubeFunction& w, const ZrpSystem& sys) {
    const int k = m.kappa();
    double worst = 0.0;
    std::vector<int> buf(k);
    for (std::uint64_t r = 0; r < sys.space.size(); ++r) {
        const int* eta = sys.config(r);
        if (eta[w.x] < 1) continue;
        Accumulator acc;
        double scale = 0.0;
        for (int i = 0; i < k; ++i) {
            const int zi = w.order[i];
            std::copy(eta, eta + k, buf.begin());
            --buf[w.x];
            ++buf[zi];
            const double term = m.profile.m[zi] * w.b_raw(buf.data())[i];
            acc.add(term);
            scale = std::max(scale, std::fabs(term));
        }
        if (scale > 0.0) worst = std::max(worst, std::fabs(acc.value()) / scale);
    }
    return worst;
}

namespace {

// a_N mu_{N-1}(eta - e_z) = m_star^{eta - e_z} / (S_N M_star a(eta - e_z))
double removal_weight(const ZrpModel& m, const ZrpSystem& sys, const int* eta, int z, int* buf) {
    const int k = m.kappa();
    std::copy(eta, eta + k, buf);
    --buf[z];
    return config_weight(m, buf) / (sys.s_n * m.profile.m_max);
}

double c_value(const ZrpModel& m, const ZrpSystem& sys, int x, int y, double cap_x, const int* eta) {
    const double pref =
        cap_x / (std::pow(static_cast<double>(sys.n), m.alpha + 1.0) * sys.z_n * m.profile.m_max * m.constants.i_alpha);
    return pref * config_weight(m, eta) * m.a(eta[x]) * m.a(eta[y]);
}

void place(const ZrpModel& m, const ZrpSystem& sys, Flow& phi, std::uint64_t r, int u, int v, double value,
           bool route) {
    if (value == 0.0) return;
    if (!route || m.walk.r(u, v) > 0.0) {
        std::int64_t s = sys.move(r, u, v);
        flow_add(sys.chain, phi, static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(s), value);
        return;
    }
    auto path = canonical_path(m.walk, u, v);
    // eta^j = sigma^{w_1, w_j} eta: the moved particle walks along the path
    std::uint64_t cur = r;
    for (std::size_t j = 0; j + 1 < path.size(); ++j) {
        std::int64_t nxt = sys.move(cur, path[j], path[j + 1]);
        flow_add(sys.chain, phi, static_cast<std::uint32_t>(cur), static_cast<std::uint32_t>(nxt), value);
        cur = static_cast<std::uint64_t>(nxt);
    }
}

}  // namespace

double c_profile(const ZrpModel& m, const ZrpSystem& sys, const MetastableSets& sets, int x, int y,
                 double cap_x, const int* eta) {
    if (!sets.in_tube(eta, x, y)) throw Error(ErrorKind::OutsideTube, "configuration outside the tube");
    return c_value(m, sys, x, y, cap_x, eta);
}

PairCorrection correction_flow(const ZrpModel& m, const ZrpSystem& sys, const MetastableSets& sets,
                               const RampProfile& ramp, int x, int y, bool route) {
    PairCorrection pc;
    pc.x = x;
    pc.y = y;
    pc.w = tube_function(m, x, y, ramp, sys.n);
    pc.cap_x = walk_equilibrium(m.walk, m.profile, {x}, {y}).cap;
    const int k = m.kappa();
    const std::uint64_t size = sys.space.size();
    pc.w_tilde.assign(size, 0.0);
    pc.c.assign(size, 0.0);
    for (std::uint64_t r = 0; r < size; ++r) {
        const int* eta = sys.config(r);
        if (!sets.in_tube(eta, x, y)) continue;
        pc.w_tilde[r] = pc.w.value(eta);
        pc.c[r] = c_value(m, sys, x, y, pc.cap_x, eta);
    }
    pc.chi1 = zero_flow(sys.chain);
    pc.chi2 = zero_flow(sys.chain);
    std::vector<int> buf(k), swapped(k);
    for (std::uint64_t r = 0; r < size; ++r) {
        const int* eta = sys.config(r);
        if (!sets.in_tube(eta, x, y)) continue;
        const auto b = pc.w.b_raw(eta);
        for (int i = 1; i + 1 < k; ++i) {
            const int zi = pc.w.order[i];
            if (eta[zi] < 1) continue;
            const double val = -0.5 * removal_weight(m, sys, eta, zi, buf.data()) * m.profile.m[zi] * b[i];
            place(m, sys, pc.chi1, r, zi, x, val, route);
            place(m, sys, pc.chi1, r, zi, y, val, route);
        }
        if (eta[y] >= 1) {
            std::copy(eta, eta + k, swapped.begin());
            --swapped[y];
            ++swapped[x];
            const auto bs = pc.w.b_raw(swapped.data());
            const double rho = removal_weight(m, sys, eta, y, buf.data());
            const double val = 0.5 * rho * (m.profile.m[x] * bs[0] - m.profile.m[y] * b[k - 1]) - pc.c[r];
            place(m, sys, pc.chi2, r, y, x, val, route);
        }
    }
    pc.chi = flow_combine(1.0, pc.chi1, 1.0, pc.chi2);
    pc.phi_w_star = flow_phi_star(sys.chain, pc.w_tilde);
    pc.phi = flow_combine(1.0, pc.phi_w_star, 1.0, pc.chi);
    return pc;
}

std::vector<double> global_test_function(const MetastableSets& sets, const ZrpSystem& sys,
                                         const LimitPotential& hab, const std::vector<PairCorrection>& pairs) {
    const auto& st = sets.model().profile.s_star;
    auto hval = [&](int site) {
        for (std::size_t i = 0; i < st.size(); ++i)
            if (st[i] == site) return hab.h[i];
        return 0.0;
    };
    std::vector<double> v(sys.space.size(), 0.0);
    for (std::uint64_t r = 0; r < sys.space.size(); ++r) {
        const int* eta = sys.config(r);
        int d = sets.well_of(eta);
        if (d >= 0) {
            v[r] = hval(d);
            continue;
        }
        for (const auto& pc : pairs)
            if (sets.in_saddle(eta, pc.x, pc.y)) {
                v[r] = hval(pc.y) + (hval(pc.x) - hval(pc.y)) * pc.w_tilde[r];
                break;
            }
    }
    return v;
}

GlobalConstruction global_construction(const ZrpModel& m, const ZrpSystem& sys, const MetastableSets& sets,
                                       const RampProfile& ramp, const LimitChain& y, const std::vector<int>& a,
                                       const std::vector<int>& b, bool route) {
    GlobalConstruction g;
    g.a = a;
    g.b = b;
    g.hab = limit_potential(y, a, b);
    g.cap_y = g.hab.cap;
    for (const auto& p : sets.pairs()) g.pairs.push_back(correction_flow(m, sys, sets, ramp, p.x, p.y, route));
    g.v = global_test_function(sets, sys, g.hab, g.pairs);
    g.phi_v_star = flow_phi_star(sys.chain, g.v);
    g.chi = zero_flow(sys.chain);
    for (const auto& pc : g.pairs) {
        const double coef = g.hab.h[y.local(pc.x)] - g.hab.h[y.local(pc.y)];
        for (std::size_t e = 0; e < g.chi.size(); ++e) g.chi[e] += coef * pc.chi[e];
    }
    g.phi_ab = flow_combine(1.0, g.phi_v_star, 1.0, g.chi);
    return g;
}

namespace {

double max_abs(const Flow& f) {
    double s = 0.0;
    for (double v : f) s = std::max(s, std::fabs(v));
    return s;
}

}  // namespace

ApproxReport approx_verification(const ZrpModel& m, const ZrpSystem& sys, const MetastableSets& sets,
                                 const GlobalConstruction& g) {
    const std::size_t want = sets.pairs().size();
    if (g.pairs.size() != want || want == 0 || g.v.size() != sys.space.size() || g.chi.size() != sys.chain.edges())
        throw Error(ErrorKind::ConstituentMissing, "global construction incomplete for this system");
    ApproxReport rep;
    rep.n = sys.n;
    rep.order_ok = sets.scales().order_ok;
    rep.cap_y = g.cap_y;
    const double scale_n = std::pow(static_cast<double>(sys.n), 1.0 + m.alpha);
    const auto& st = m.profile.s_star;
    const std::uint64_t size = sys.space.size();
    const long pi = sets.scales().pi;
    rep.tube_excess_min = 1e300;
    bool first = true;
    for (const auto& pc : g.pairs) {
        const int x = pc.x, y = pc.y;
        auto dchi = divergence(sys.chain, pc.chi);
        // div Phi*_W = -mu L W, read off the generator to avoid cancellation in the edge values
        auto lw = apply_generator(sys.chain, pc.w_tilde, Variant::Primal);
        const double sc_chi = std::max(max_abs(pc.chi), 1e-300);
        const double sc_phi = std::max(max_abs(pc.phi), 1e-300);
        Accumulator ex_div, ex_c, ey_div;
        for (std::uint64_t r = 0; r < size; ++r) {
            const int* eta = sys.config(r);
            const bool vx = sets.in_tube(eta, x, y) && eta[y] == 0;
            const bool vy = sets.in_tube(eta, x, y) && eta[x] == 0;
            const bool j = sets.in_saddle(eta, x, y);
            if (!vx && !vy && !j) rep.tube_div_chi = std::max(rep.tube_div_chi, std::fabs(dchi[r]) / sc_chi);
            if (j && !sets.bd_in_saddle(eta, x, y)) {
                const double res = std::fabs(dchi[r] - sys.mu[r] * lw[r]) / sc_phi;
                rep.tube_div_phi_full = std::max(rep.tube_div_phi_full, res);
                if (!vx && !vy) rep.tube_div_phi = std::max(rep.tube_div_phi, res);
            }
            if (vx && !j) rep.valley_div_chi = std::max(rep.valley_div_chi, std::fabs(dchi[r] - pc.c[r]) / sc_chi);
            if (vy && !j) rep.valley_div_chi = std::max(rep.valley_div_chi, std::fabs(dchi[r] + pc.c[r]) / sc_chi);
            if (sets.in_valley(eta, x)) {
                ex_div.add(dchi[r]);
                if (vx) {
                    ex_c.add(pc.c[r]);
                    if (!(dchi[r] > 0.0)) rep.valley_positive = false;
                } else {
                    rep.valley_off_v = std::max(rep.valley_off_v, std::fabs(dchi[r]) / sc_chi);
                }
            }
            if (sets.in_valley(eta, y)) {
                ey_div.add(dchi[r]);
                if (vy && !(dchi[r] < 0.0)) rep.valley_positive = false;
            }
            if (sets.in_tube(eta, x, y)) {
                const double n = static_cast<double>(sys.n);
                const double u = pc.w.ramp->U(eta[x] / n);
                const double aa = m.a(eta[x]) * m.a(eta[y]) / (std::pow(n, 2.0 * m.alpha) * m.constants.i_alpha);
                const double val = (u - aa) * n / static_cast<double>(std::max(pi, 1L));
                rep.tube_excess = std::max(rep.tube_excess, val);
                rep.tube_excess_min = std::min(rep.tube_excess_min, u - aa);
            }
        }
        rep.valley_sum = std::max(rep.valley_sum, std::fabs(ex_div.value() - ex_c.value()) /
                                                      std::max(std::fabs(ex_c.value()), 1e-300));
        if (first) {
            const double norm = scale_n * m.constants.gamma_alpha * m.profile.m_max * m.constants.i_alpha / pc.cap_x;
            rep.valley_flux = ex_div.value() * norm;
            rep.valley_flux_kappa = rep.valley_flux * m.profile.kappa_star();
            first = false;
        }
        rep.mass_balance = std::max(rep.mass_balance, le1_residual(m, pc.w, sys));
        auto wr = tube_function(m, y, x, *pc.w.ramp, sys.n);
        for (std::uint64_t r = 0; r < size; ++r) {
            const int* eta = sys.config(r);
            if (!sets.in_tube(eta, x, y)) continue;
            rep.complement = std::max(rep.complement, std::fabs(wr.value(eta) + pc.w_tilde[r] - 1.0));
        }
    }
    if (rep.tube_excess_min > 1e299) rep.tube_excess_min = 0.0;

    auto local_h = [&](int site) {
        for (std::size_t i = 0; i < st.size(); ++i)
            if (st[i] == site) return g.hab.h[i];
        return 0.0;
    };
    auto in_set = [](const std::vector<int>& s, int x) { return std::find(s.begin(), s.end(), x) != s.end(); };
    auto dab = divergence(sys.chain, g.phi_ab);
    Accumulator da, db, dd, ds;
    for (std::uint64_t r = 0; r < size; ++r) {
        const int* eta = sys.config(r);
        int x = sets.valley_of(eta);
        if (x >= 0) {
            rep.v_on_valleys = std::max(rep.v_on_valleys, std::fabs(g.v[r] - local_h(x)));
            if (in_set(g.a, x)) da.add(dab[r]);
            else if (in_set(g.b, x)) db.add(dab[r]);
            else ds.add(dab[r]);
        } else {
            dd.add(std::fabs(dab[r]));
        }
    }
    rep.div_a = da.value() * scale_n;
    rep.div_b = db.value() * scale_n;
    rep.div_delta = dd.value() * scale_n;
    rep.div_s_star = std::fabs(ds.value()) * scale_n;
    rep.boundary_signs = da.value() > 0.0 && db.value() < 0.0;
    rep.dirichlet_v = dirichlet_form(sys.chain, g.v) * scale_n;
    rep.chi_norm = flow_norm2(sys.chain, g.chi) * scale_n;
    return rep;
}

}  // namespace zrpm
