#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "zrpm/numeric.hpp"

namespace zrpm {

// Irreducible continuous-time walk on S = {0,...,kappa-1}.
struct Walk {
    int kappa = 0;
    std::vector<std::string> labels;
    std::vector<double> rates;  // row-major kappa x kappa, zero diagonal

    double r(int x, int y) const { return rates[static_cast<std::size_t>(x) * kappa + y]; }
    double out_rate(int x) const;
};

Walk make_walk(const std::vector<std::vector<double>>& rates,
               std::vector<std::string> labels = {});

bool strongly_connected(int n, const std::vector<double>& rates);

struct WalkProfile {
    std::vector<double> m;       // stationary law, sums to 1
    double m_max = 0.0;          // M_star
    std::vector<double> m_star;  // m / M_star, exactly 1 on S_star
    std::vector<int> s_star;     // sites of maximal mass, ascending
    std::vector<int> rest;       // S \ S_star
    double residual = 0.0;       // max |m L|

    bool in_s_star(int x) const;
    int kappa_star() const { return static_cast<int>(s_star.size()); }
};

// Relative tie tolerance for S_star detection.
inline constexpr double kTieTol = 1e-9;

WalkProfile stationary_measure(const Walk& w,
                               const std::optional<std::vector<int>>& s_star = std::nullopt);

// r*(x,y) = r(y,x) m(y) / m(x)
Walk adjoint_walk(const Walk& w, const WalkProfile& p);

std::vector<double> walk_generator(const Walk& w, const std::vector<double>& f);
double walk_dirichlet(const Walk& w, const WalkProfile& p, const std::vector<double>& f);

struct WalkPotential {
    std::vector<double> h;
    double cap = 0.0;     // Dirichlet form of h
    double flux_a = 0.0;  // sum_A m (-L h)
    double flux_b = 0.0;  // sum_B m (L h)
};

WalkPotential walk_equilibrium(const Walk& w, const WalkProfile& p, const std::vector<int>& a,
                               const std::vector<int>& b);

struct WalkCapacity {
    double cap = 0.0;
    double flux_a = 0.0;
    double flux_b = 0.0;
    double reversed = 0.0;
    double adjoint = 0.0;
};

// Checks the three expressions, the symmetry in (A,B) and the adjoint value.
WalkCapacity walk_capacity(const Walk& w, const WalkProfile& p, const std::vector<int>& a,
                           const std::vector<int>& b);

// Shortest directed path u -> v through r > 0, ties by smallest next site.
std::vector<int> canonical_path(const Walk& w, int u, int v);

// Rates a(x,y) = cap_X({x},{y}) / (M_star Gamma(alpha) I_alpha) on S_star.
struct LimitChain {
    std::vector<int> sites;     // walk indices of S_star
    Eigen::MatrixXd rate;       // zero diagonal
    std::vector<double> mu;     // uniform
    int size() const { return static_cast<int>(sites.size()); }
    int local(int site) const;  // index of a walk site in `sites`, -1 if absent
};

LimitChain build_limit_chain(const Walk& w, const WalkProfile& p, const SeriesConstants& c);

std::vector<double> limit_generator(const LimitChain& y, const std::vector<double>& f);
double limit_dirichlet(const LimitChain& y, const std::vector<double>& f);

struct LimitPotential {
    std::vector<double> h;  // indexed like LimitChain::sites
    double cap = 0.0;
};

// A, B given as walk site indices inside S_star.
LimitPotential limit_potential(const LimitChain& y, const std::vector<int>& a,
                               const std::vector<int>& b);

Eigen::MatrixXd limit_transition(const LimitChain& y, double t);

void check_sets(int n, const std::vector<int>& a, const std::vector<int>& b);

}  // namespace zrpm
