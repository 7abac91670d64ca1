#include "zrpm/geometry.hpp"

#include <cmath>

#include "zrpm/error.hpp"
#include "zrpm/numeric.hpp"

namespace zrpm {

namespace {

bool order_holds(const ZrpModel& m, const ScaleParams& s) {
    if (s.ell < 1 || s.ell >= s.eps_n) return false;
    if (m.kappa() > 2 && !(s.eps_n > s.pi && s.pi > s.ell)) return false;
    return true;
}

}  // namespace

ScaleParams default_scales(const ZrpModel& m, long n, double eps) {
    if (!(eps > 0.0 && eps <= 1.0 / 16.0)) throw Error(ErrorKind::EpsOutOfRange, "eps must lie in (0, 1/16]");
    if (n < 1) throw Error(ErrorKind::ScaleOrderViolated, "N must be positive");
    ScaleParams s;
    s.n = n;
    s.eps = eps;
    const double nd = static_cast<double>(n);
    const int k = m.kappa();
    s.pi = static_cast<long>(std::floor(std::pow(nd, 1.0 / m.alpha + 0.5) + 1e-9));
    s.ell = static_cast<long>(std::floor(std::pow(nd, 1.0 / (2.0 * (k - 1))) + 1e-9));
    s.eps_n = static_cast<long>(std::floor(nd * eps + 1e-9));
    s.well = static_cast<long>(std::ceil(nd * (1.0 - 2.0 * eps) - 1e-9));
    s.b.assign(k, -1);
    double prod = 1.0;
    for (int z : m.profile.rest) {
        double ms = m.profile.m_star[z];
        s.b[z] = static_cast<long>(std::floor(std::log(nd) / (-2.0 * k * std::log(ms)) + 1e-9));
        prod *= std::pow(ms, -static_cast<double>(s.b[z]));
    }
    s.amp3 = std::pow(static_cast<double>(s.ell), 1.0 + m.alpha * (k - 1)) / std::pow(nd, 1.0 + m.alpha) * prod;
    s.order_ok = order_holds(m, s);
    return s;
}

long minimal_admissible_n(const ZrpModel& m, double eps) {
    auto ok = [&](long n) { return default_scales(m, n, eps).order_ok; };
    long hi = 2;
    while (!ok(hi)) {
        if (hi > (1L << 50)) return -1;
        hi *= 2;
    }
    long lo = hi / 2;
    while (lo + 1 < hi) {
        long mid = lo + (hi - lo) / 2;
        if (ok(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

void require_scale_order(const ZrpModel& m, const ScaleParams& s) {
    if (s.order_ok) return;
    long nmin = minimal_admissible_n(m, s.eps);
    throw Error(ErrorKind::ScaleOrderViolated,
                "need floor(N eps) > pi_N > ell_N >= 1 at N=" + std::to_string(s.n) +
                    "; smallest admissible N is " + std::to_string(nmin));
}

bool MetastableSets::in_valley(const int* eta, int x) const {
    if (eta[x] < scales_.n - scales_.ell) return false;
    for (int z : model_->profile.rest)
        if (eta[z] > scales_.b[z]) return false;
    return true;
}

int MetastableSets::valley_of(const int* eta) const {
    for (int x : model_->profile.s_star)
        if (in_valley(eta, x)) return x;
    return -1;
}

int MetastableSets::well_of(const int* eta) const {
    for (int x : model_->profile.s_star)
        if (in_well(eta, x)) return x;
    return -1;
}

bool MetastableSets::in_tube_int(const int* eta, int x, int y) const {
    return static_cast<double>(eta[x] + eta[y]) > scales_.n * (1.0 - scales_.eps);
}

bool MetastableSets::in_saddle(const int* eta, int x, int y) const {
    return in_tube(eta, x, y) && !in_well(eta, x) && !in_well(eta, y);
}

bool MetastableSets::in_g(const int* eta) const {
    if (well_of(eta) >= 0) return true;
    for (auto& p : pairs_)
        if (in_saddle(eta, p.x, p.y)) return true;
    return false;
}

bool MetastableSets::in_any_tube_of(const int* eta, int x) const {
    for (int y : model_->profile.s_star)
        if (y != x && in_tube(eta, x, y)) return true;
    return false;
}

bool MetastableSets::bd_in_saddle(const int* eta, int x, int y) const {
    return in_saddle(eta, x, y) && eta[x] + eta[y] == scales_.n - scales_.pi;
}

bool MetastableSets::bd_out_saddle(const int* eta, int x, int y) const {
    return !in_g(eta) && eta[x] + eta[y] == scales_.n - scales_.pi - 1;
}

bool MetastableSets::bd_in_well(const int* eta, int x) const {
    return in_well(eta, x) && eta[x] == scales_.well && !in_any_tube_of(eta, x);
}

bool MetastableSets::bd_out_well(const int* eta, int x) const {
    return !in_g(eta) && eta[x] == scales_.well - 1 && !in_any_tube_of(eta, x);
}

bool MetastableSets::bd_in_g(const int* eta) const {
    for (int x : model_->profile.s_star)
        if (bd_in_well(eta, x)) return true;
    for (auto& p : pairs_)
        if (bd_in_saddle(eta, p.x, p.y)) return true;
    return false;
}

bool MetastableSets::bd_out_g(const int* eta) const {
    for (int x : model_->profile.s_star)
        if (bd_out_well(eta, x)) return true;
    for (auto& p : pairs_)
        if (bd_out_saddle(eta, p.x, p.y)) return true;
    return false;
}

MetastableSets build_sets(const ZrpModel& m, const ScaleParams& s, bool strict) {
    if (strict) require_scale_order(m, s);
    MetastableSets sets(m, s);
    const auto& st = m.profile.s_star;
    for (std::size_t i = 0; i < st.size(); ++i)
        for (std::size_t j = i + 1; j < st.size(); ++j) sets.pairs_.push_back({st[i], st[j]});
    return sets;
}

SetCheckReport check_sets(const MetastableSets& sets, const ZrpSystem& sys) {
    SetCheckReport rep;
    const auto& m = sets.model();
    const auto& s = sets.scales();
    const auto& st = m.profile.s_star;
    rep.states = sys.space.size();
    for (std::uint64_t r = 0; r < sys.space.size(); ++r) {
        const int* eta = sys.config(r);
        const bool g = sets.in_g(eta);
        int pieces = 0;
        for (int x : st) pieces += sets.well_int(eta, x) ? 1 : 0;
        for (auto& p : sets.pairs()) pieces += sets.saddle_int(eta, p.x, p.y) ? 1 : 0;
        pieces += sets.bd_in_g(eta) ? 1 : 0;
        if ((g && pieces != 1) || (!g && pieces != 0)) rep.decomp_g = false;
        if (!g) {
            bool outer = sets.bd_out_g(eta);
            (void)outer;  // (G^c)_int is defined as the complement, so only containment matters
        } else if (sets.bd_out_g(eta)) {
            rep.decomp_gc = false;
        }
        int saddles = 0;
        for (auto& p : sets.pairs())
            if (sets.in_saddle(eta, p.x, p.y)) {
                ++saddles;
                double lo = static_cast<double>(s.n) * s.eps, hi = static_cast<double>(s.n) * (1.0 - 2.0 * s.eps);
                if (eta[p.x] < lo || eta[p.x] > hi || eta[p.y] < lo || eta[p.y] > hi) rep.obe1 = false;
            }
        if (saddles > 1) rep.saddles_disjoint = false;
        for (int x : st) {
            if (sets.in_valley(eta, x) && !sets.in_well(eta, x)) rep.valley_in_well = false;
            for (int y : st)
                for (int z : st) {
                    if (x == y || x == z || y == z) continue;
                    if (sets.in_tube(eta, x, y) && sets.in_tube(eta, x, z) && !sets.in_well(eta, x))
                        rep.tube_overlap_in_well = false;
                }
        }
    }
    Config xi(m.kappa(), 0);
    for (int x : st) {
        std::fill(xi.begin(), xi.end(), 0);
        xi[x] = static_cast<int>(s.n);
        if (!sets.in_valley(xi.data(), x)) rep.xi_in_valley = false;
    }
    return rep;
}

Mask valley_mask(const MetastableSets& sets, const ZrpSystem& sys, int x) {
    Mask m(sys.space.size(), 0);
    for (std::uint64_t r = 0; r < sys.space.size(); ++r) m[r] = sets.in_valley(sys.config(r), x);
    return m;
}

Mask valleys_mask(const MetastableSets& sets, const ZrpSystem& sys, const std::vector<int>& xs) {
    Mask m(sys.space.size(), 0);
    for (std::uint64_t r = 0; r < sys.space.size(); ++r)
        for (int x : xs)
            if (sets.in_valley(sys.config(r), x)) m[r] = 1;
    return m;
}

Mask delta_mask(const MetastableSets& sets, const ZrpSystem& sys) {
    Mask m(sys.space.size(), 0);
    for (std::uint64_t r = 0; r < sys.space.size(); ++r) m[r] = sets.valley_of(sys.config(r)) < 0;
    return m;
}

SetMeasures set_measures(const MetastableSets& sets, const ZrpSystem& sys) {
    const auto& m = sets.model();
    SetMeasures out;
    const int k = m.kappa();
    std::vector<Accumulator> val(k), well(k), sad(sets.pairs().size());
    Accumulator delta, bd, gc;
    out.valley_count.assign(k, 0);
    for (std::uint64_t r = 0; r < sys.space.size(); ++r) {
        const int* eta = sys.config(r);
        const double w = sys.mu[r];
        int x = sets.valley_of(eta);
        if (x >= 0) {
            val[x].add(w);
            ++out.valley_count[x];
        } else {
            delta.add(w);
        }
        int d = sets.well_of(eta);
        if (d >= 0) well[d].add(w);
        for (std::size_t p = 0; p < sets.pairs().size(); ++p)
            if (sets.in_saddle(eta, sets.pairs()[p].x, sets.pairs()[p].y)) sad[p].add(w);
        if (sets.bd_in_g(eta)) bd.add(w);
        if (!sets.in_g(eta)) gc.add(w);
    }
    for (int x = 0; x < k; ++x) {
        out.valley.push_back(val[x].value());
        out.well.push_back(well[x].value());
    }
    for (auto& a : sad) out.saddle.push_back(a.value());
    out.delta = delta.value();
    out.inner_boundary_g = bd.value();
    out.g_complement = gc.value();
    return out;
}

}  // namespace zrpm
