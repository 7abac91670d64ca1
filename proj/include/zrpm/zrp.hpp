#pragma once

#include <optional>
#include <vector>

#include "zrpm/chain.hpp"
#include "zrpm/config_space.hpp"
#include "zrpm/walk.hpp"

namespace zrpm {

// Zero-range process with g(n) = a(n)/a(n-1), a(n) = n^alpha, over a walk.
struct ZrpModel {
    Walk walk;
    WalkProfile profile;
    double alpha = 0.0;
    SeriesConstants constants;

    int kappa() const { return walk.kappa; }
    double a(long n) const { return interaction(n, alpha); }
    double g(long n) const { return n <= 0 ? 0.0 : a(n) / a(n - 1); }
};

ZrpModel make_model(Walk walk, double alpha,
                    const std::optional<std::vector<int>>& s_star = std::nullopt);

// Same profile, walk replaced by its adjoint.
ZrpModel adjoint_model(const ZrpModel& m);

struct LimitConstants {
    double gamma_alpha = 0.0;
    double i_alpha = 0.0;
    std::vector<double> gamma_site;  // Gamma_x; equals gamma_alpha on S_star
    double z = 0.0;                  // kappa_star Gamma^{kappa_star-1} prod_{x not in S_star} Gamma_x
};

LimitConstants limit_constants(const ZrpModel& m);

// S_{k}(S0) = sum over compositions of k on S0 of m_star^eta / a(eta), k = 0..kmax.
std::vector<double> partition_sums(const ZrpModel& m, long kmax, const std::vector<int>& s0);

// Z_{k,S0} = k^alpha S_k(S0)
double partition_function(const ZrpModel& m, long k, const std::vector<int>& s0);
double partition_function_enumerated(const ZrpModel& m, long k, const std::vector<int>& s0);

// Limit of Z_{k,S0} as k grows.
double partition_limit(const ZrpModel& m, const std::vector<int>& s0);

// k^alpha times the sum restricted to eta_x < k - d for x in S0 cap S_star.
double truncated_partition_function(const ZrpModel& m, long k, const std::vector<int>& s0, long d);

// a_N = N^alpha Z_{N-1} / ((N-1)^alpha Z_N M_star)
double removal_constant(const ZrpModel& m, long n);

double config_weight(const ZrpModel& m, const int* eta);  // m_star^eta / a(eta)

// Everything exact at one particle number.
struct ZrpSystem {
    const ZrpModel* model = nullptr;
    long n = 0;
    ConfigSpace space;
    double s_n = 0.0;  // Z_N / N^alpha
    double z_n = 0.0;
    std::vector<double> mu;
    Chain chain;

    const int* config(std::uint64_t r) const { return space.at(r); }
    // rank of sigma^{xy} eta, or -1 if eta_x = 0
    std::int64_t move(std::uint64_t r, int x, int y) const;
    // edge joining eta and sigma^{xy} eta, or -1
    std::int64_t move_edge(std::uint64_t r, int x, int y) const;
};

ZrpSystem build_system(const ZrpModel& m, long n, Variant var = Variant::Primal);

double mu_config(const ZrpModel& m, long n, double s_n, const int* eta);

// max |mu_N(eta) g(eta_u) - a_N mu_{N-1}(eta - e_u) m(u)| / max lhs
double particle_removal_residual(const ZrpSystem& sys);

// Dirichlet form written through H_{N-1}.
double removal_dirichlet_form(const ZrpSystem& sys, const std::vector<double>& f);

}  // namespace zrpm
