#include "zrpm/zrp.hpp"

#include <algorithm>
#include <cmath>

#include "zrpm/error.hpp"

namespace zrpm {

ZrpModel make_model(Walk walk, double alpha, const std::optional<std::vector<int>>& s_star) {
    if (!(alpha > 2.0) || !std::isfinite(alpha))
        throw Error(ErrorKind::AlphaOutOfRange, "alpha must satisfy alpha > 2");
    ZrpModel m;
    m.profile = stationary_measure(walk, s_star);
    m.walk = std::move(walk);
    m.alpha = alpha;
    m.constants = series_constants(alpha);
    return m;
}

ZrpModel adjoint_model(const ZrpModel& m) {
    ZrpModel a = m;
    a.walk = adjoint_walk(m.walk, m.profile);
    return a;
}

LimitConstants limit_constants(const ZrpModel& m) {
    LimitConstants c;
    c.gamma_alpha = m.constants.gamma_alpha;
    c.i_alpha = m.constants.i_alpha;
    c.gamma_site.resize(m.kappa());
    double prod = 1.0;
    for (int x = 0; x < m.kappa(); ++x) {
        if (m.profile.in_s_star(x)) {
            c.gamma_site[x] = c.gamma_alpha;
        } else {
            c.gamma_site[x] = site_series(m.profile.m_star[x], m.alpha);
            prod *= c.gamma_site[x];
        }
    }
    const int ks = m.profile.kappa_star();
    c.z = ks * std::pow(c.gamma_alpha, ks - 1) * prod;
    return c;
}

namespace {

std::vector<double> site_weights(const ZrpModel& m, int x, long kmax) {
    std::vector<double> w(kmax + 1);
    double p = 1.0;
    const double ms = m.profile.m_star[x];
    for (long j = 0; j <= kmax; ++j) {
        w[j] = p / m.a(j);
        p *= ms;
    }
    return w;
}

std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
    const long n = static_cast<long>(a.size());
    std::vector<double> out(n);
    for (long k = 0; k < n; ++k) {
        Accumulator acc;
        for (long j = 0; j <= k; ++j) acc.add(a[j] * b[k - j]);
        out[k] = acc.value();
    }
    return out;
}

void check_subset(const ZrpModel& m, const std::vector<int>& s0) {
    if (s0.empty()) throw Error(ErrorKind::SetsOverlapOrEmpty, "empty site subset");
    for (int x : s0)
        if (x < 0 || x >= m.kappa()) throw Error(ErrorKind::SetsOverlapOrEmpty, "site out of range");
}

}  // namespace

std::vector<double> partition_sums(const ZrpModel& m, long kmax, const std::vector<int>& s0) {
    check_subset(m, s0);
    std::vector<double> acc = site_weights(m, s0[0], kmax);
    for (std::size_t i = 1; i < s0.size(); ++i) acc = convolve(acc, site_weights(m, s0[i], kmax));
    return acc;
}

double partition_function(const ZrpModel& m, long k, const std::vector<int>& s0) {
    if (k == 0) return 0.0;
    return std::pow(static_cast<double>(k), m.alpha) * partition_sums(m, k, s0)[k];
}

double partition_function_enumerated(const ZrpModel& m, long k, const std::vector<int>& s0) {
    check_subset(m, s0);
    ConfigSpace sp(k, m.kappa(), s0);
    Accumulator acc;
    for (std::uint64_t r = 0; r < sp.size(); ++r) {
        Config full = sp.embed(sp.unrank(r));
        acc.add(config_weight(m, full.data()));
    }
    return k == 0 ? 0.0 : std::pow(static_cast<double>(k), m.alpha) * acc.value();
}

double partition_limit(const ZrpModel& m, const std::vector<int>& s0) {
    check_subset(m, s0);
    auto lc = limit_constants(m);
    int nstar = 0;
    double prod = 1.0;
    for (int x : s0) {
        if (m.profile.in_s_star(x))
            ++nstar;
        else
            prod *= lc.gamma_site[x];
    }
    if (nstar == 0) return 0.0;
    return nstar * std::pow(lc.gamma_alpha, nstar - 1) * prod;
}

double truncated_partition_function(const ZrpModel& m, long k, const std::vector<int>& s0, long d) {
    check_subset(m, s0);
    const long cap = k - d - 1;  // eta_x <= cap on S_star sites
    std::vector<double> acc(k + 1, 0.0);
    acc[0] = 1.0;
    for (int x : s0) {
        auto w = site_weights(m, x, k);
        if (m.profile.in_s_star(x))
            for (long j = std::max(0L, cap + 1); j <= k; ++j) w[j] = 0.0;
        acc = convolve(acc, w);
    }
    return k == 0 ? 0.0 : std::pow(static_cast<double>(k), m.alpha) * acc[k];
}

double removal_constant(const ZrpModel& m, long n) {
    if (n < 1) throw Error(ErrorKind::DegenerateModel, "a_N needs N >= 1");
    std::vector<int> all(m.kappa());
    for (int x = 0; x < m.kappa(); ++x) all[x] = x;
    auto s = partition_sums(m, n, all);
    return s[n - 1] / (s[n] * m.profile.m_max);
}

double config_weight(const ZrpModel& m, const int* eta) {
    double w = 1.0;
    for (int x = 0; x < m.kappa(); ++x) {
        if (eta[x] == 0) continue;
        w *= std::pow(m.profile.m_star[x], eta[x]) / m.a(eta[x]);
    }
    return w;
}

double mu_config(const ZrpModel& m, long, double s_n, const int* eta) {
    return config_weight(m, eta) / s_n;
}

std::int64_t ZrpSystem::move(std::uint64_t r, int x, int y) const {
    const int* eta = space.at(r);
    if (eta[x] == 0) return -1;
    int buf[64];
    const int k = space.parts();
    std::copy(eta, eta + k, buf);
    --buf[x];
    ++buf[y];
    return static_cast<std::int64_t>(space.rank(buf));
}

std::int64_t ZrpSystem::move_edge(std::uint64_t r, int x, int y) const {
    std::int64_t s = move(r, x, y);
    if (s < 0) return -1;
    return chain.find_edge(static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(s));
}

ZrpSystem build_system(const ZrpModel& m, long n, Variant var) {
    if (m.kappa() > 64) throw Error(ErrorKind::DegenerateModel, "at most 64 sites supported");
    ZrpSystem sys{&m, n, ConfigSpace(n, m.kappa()), 0.0, 0.0, {}, {}};
    sys.space.materialize();
    if (sys.space.size() > 0xffffffffULL) throw Error(ErrorKind::Overflow, "too many states");
    std::vector<int> all(m.kappa());
    for (int x = 0; x < m.kappa(); ++x) all[x] = x;
    sys.s_n = partition_sums(m, n, all)[n];
    sys.z_n = n == 0 ? 0.0 : std::pow(static_cast<double>(n), m.alpha) * sys.s_n;
    const std::uint64_t size = sys.space.size();
    sys.mu.resize(size);
    for (std::uint64_t r = 0; r < size; ++r) sys.mu[r] = mu_config(m, n, sys.s_n, sys.space.at(r));

    const Walk w = var == Variant::Adjoint ? adjoint_walk(m.walk, m.profile) : m.walk;
    std::vector<Transition> tr;
    const int k = m.kappa();
    int buf[64];
    for (std::uint64_t r = 0; r < size; ++r) {
        const int* eta = sys.space.at(r);
        for (int x = 0; x < k; ++x) {
            if (eta[x] == 0) continue;
            const double gx = m.g(eta[x]);
            for (int y = 0; y < k; ++y) {
                if (y == x) continue;
                double ry = w.r(x, y);
                if (var == Variant::Symmetric) ry = 0.5 * (m.walk.r(x, y) + m.walk.r(y, x) * m.profile.m[y] / m.profile.m[x]);
                if (ry <= 0.0) continue;
                std::copy(eta, eta + k, buf);
                --buf[x];
                ++buf[y];
                tr.push_back({static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(sys.space.rank(buf)),
                              gx * ry});
            }
        }
    }
    sys.chain = make_chain(size, sys.mu, std::move(tr));
    return sys;
}

double particle_removal_residual(const ZrpSystem& sys) {
    const ZrpModel& m = *sys.model;
    if (sys.n < 1) return 0.0;
    const double an = removal_constant(m, sys.n);
    std::vector<int> all(m.kappa());
    for (int x = 0; x < m.kappa(); ++x) all[x] = x;
    const double s_prev = partition_sums(m, sys.n - 1, all)[sys.n - 1];
    double worst = 0.0, scale = 0.0;
    int buf[64];
    for (std::uint64_t r = 0; r < sys.space.size(); ++r) {
        const int* eta = sys.space.at(r);
        for (int u = 0; u < m.kappa(); ++u) {
            if (eta[u] == 0) continue;
            double lhs = sys.mu[r] * m.g(eta[u]);
            std::copy(eta, eta + m.kappa(), buf);
            --buf[u];
            double rhs = an * mu_config(m, sys.n - 1, s_prev, buf) * m.profile.m[u];
            worst = std::max(worst, std::fabs(lhs - rhs));
            scale = std::max(scale, std::fabs(lhs));
        }
    }
    return scale > 0.0 ? worst / scale : 0.0;
}

double removal_dirichlet_form(const ZrpSystem& sys, const std::vector<double>& f) {
    const ZrpModel& m = *sys.model;
    const int k = m.kappa();
    if (sys.n < 1) return 0.0;
    const double an = removal_constant(m, sys.n);
    std::vector<int> all(k);
    for (int x = 0; x < k; ++x) all[x] = x;
    const double s_prev = partition_sums(m, sys.n - 1, all)[sys.n - 1];
    ConfigSpace lower(sys.n - 1, k);
    Accumulator acc;
    Config zeta(k);
    int buf[64];
    std::vector<double> fx(k);
    for (std::uint64_t r = 0; r < lower.size(); ++r) {
        lower.unrank(r, zeta.data());
        const double mz = mu_config(m, sys.n - 1, s_prev, zeta.data());
        for (int x = 0; x < k; ++x) {
            std::copy(zeta.begin(), zeta.end(), buf);
            ++buf[x];
            fx[x] = f[sys.space.rank(buf)];
        }
        for (int x = 0; x < k; ++x)
            for (int y = 0; y < k; ++y) {
                if (y == x || m.walk.r(x, y) == 0.0) continue;
                double d = fx[x] - fx[y];
                acc.add(mz * m.profile.m[x] * m.walk.r(x, y) * d * d);
            }
    }
    return 0.5 * an * acc.value();
}

}  // namespace zrpm
