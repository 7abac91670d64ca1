#pragma once

#include <map>
#include <vector>

#include "zrpm/capacity.hpp"
#include "zrpm/flow.hpp"
#include "zrpm/geometry.hpp"
#include "zrpm/walk.hpp"
#include "zrpm/zrp.hpp"

namespace zrpm {

struct RampCheck {
    bool flat = true;           // 0 below 3 eps, linear on [5 eps, 1 - 5 eps], 1 above 1 - 3 eps
    bool symmetric = true;      // gamma(1-t) = 1 - gamma(t)
    bool slope = true;          // gamma' <= 1 + sqrt(eps)
    bool upper_ratio = true;    // gamma(t)/t <= 1 + sqrt(eps)
    bool lower_ratio = true;    // gamma(t)/t >= 1 - 4 sqrt(eps) > 0 on [sqrt(eps), 1]
    double flat_defect = 0.0;
    double symmetry_defect = 0.0;
    double max_slope = 0.0;
    double max_upper_ratio = 0.0;
    double min_lower_ratio = 0.0;
    double max_h_over_u = 0.0;       // sup H'/U over the grid
    double mid_h_over_u_dev = 0.0;   // sup |H'/U - 1| on [sqrt(eps), 1 - sqrt(eps)]
    bool all() const { return flat && symmetric && slope && upper_ratio && lower_ratio; }
};

// gamma = gamma_hat * bump_eps with the bump exp(-1/(1-s^2)) on [-1,1].
class RampProfile {
public:
    RampProfile(double eps, double alpha);

    double eps() const { return eps_; }
    double alpha() const { return alpha_; }
    double i_alpha() const { return i_alpha_; }

    double bump(double s) const;       // normalized mollifier
    double bump_cdf(double s) const;
    double bump_moment(double s) const;  // int_{-1}^s u bump(u) du
    double gamma_hat(double t) const;
    double gamma(double t) const;
    double gamma_prime(double t) const;
    double U(double t) const;
    double V(double t) const;
    double H(double t) const;
    double H_prime(double t) const;

    // H(k/n) for k = 0..n with H(1 - t) = 1 - H(t) imposed exactly; cached.
    const std::vector<double>& H_grid(long n) const;
    double H_at(long k, long n) const;

    RampCheck check(int points = 10000) const;

private:
    double eps_, alpha_, i_alpha_, norm_;
    std::vector<double> cdf_, mom_;
    mutable std::map<long, std::vector<double>> cache_;
};

// Validates eps and the lower-ratio property; the remaining properties are
// reported by check() and enforced only by certify_ramp().
RampProfile ramp_functions(double eps, double alpha);
void certify_ramp(const RampCheck& c);

// W_{x,y} on the tube T^{x,y}; built from the walk of the model passed in
// (pass the adjoint model for W*).
struct TubeFunction {
    int x = 0, y = 0;
    long n = 0;
    std::vector<int> order;    // z_1 = x, ..., z_kappa = y
    std::vector<double> h;     // h_{x,y} over sites
    std::vector<double> gaps;  // h(z_i) - h(z_{i+1})
    const RampProfile* ramp = nullptr;
    const Walk* walk = nullptr;

    bool in_tube(const int* eta, long pi) const { return eta[x] + eta[y] >= n - pi; }
    double value(const int* eta) const;
    // B(eta; z_i) indexed by enumeration position, no tube check
    std::vector<double> b_raw(const int* eta) const;
};

TubeFunction tube_function(const ZrpModel& m, int x, int y, const RampProfile& ramp, long n);

// B(eta; z_i); throws OutsideTube.
std::vector<double> b_coefficients(const TubeFunction& w, const MetastableSets& sets, const int* eta);

// max over eta with eta_x >= 1 of |sum_i m(z_i) B(sigma^{x,z_i} eta; z_i)| / scale
double le1_residual(const ZrpModel& m, const TubeFunction& w, const ZrpSystem& sys);

// C(eta) for the pair; throws OutsideTube.
double c_profile(const ZrpModel& m, const ZrpSystem& sys, const MetastableSets& sets, int x, int y,
                 double cap_x, const int* eta);

struct PairCorrection {
    int x = 0, y = 0;
    TubeFunction w;
    double cap_x = 0.0;
    std::vector<double> w_tilde;  // W on the tube, 0 elsewhere
    std::vector<double> c;        // C on the tube, 0 elsewhere
    Flow chi1, chi2, chi;
    Flow phi_w_star;              // Phi*_{W~}
    Flow phi;                     // Phi*_{W~} + chi
};

// route = false places every value on the direct edge (needs the undirected edge to exist).
PairCorrection correction_flow(const ZrpModel& m, const ZrpSystem& sys, const MetastableSets& sets,
                               const RampProfile& ramp, int x, int y, bool route = true);

struct GlobalConstruction {
    std::vector<int> a, b;
    LimitPotential hab;
    std::vector<double> v;  // V_{A,B}
    Flow phi_v_star;        // Phi*_{V}
    Flow chi;               // chi_{A,B}
    Flow phi_ab;            // Phi_{A,B}
    std::vector<PairCorrection> pairs;
    double cap_y = 0.0;
};

std::vector<double> global_test_function(const MetastableSets& sets, const ZrpSystem& sys,
                                         const LimitPotential& hab, const std::vector<PairCorrection>& pairs);

GlobalConstruction global_construction(const ZrpModel& m, const ZrpSystem& sys, const MetastableSets& sets,
                                       const RampProfile& ramp, const LimitChain& y, const std::vector<int>& a,
                                       const std::vector<int>& b, bool route = true);

struct ApproxReport {
    long n = 0;
    // exact identities, relative
    double tube_div_chi = 0.0;           // div chi_{x,y} off V^x, V^y, J
    double tube_div_phi = 0.0;           // div Phi_{x,y} on J_int off V^x, V^y
    double tube_div_phi_full = 0.0;      // on all of J_int; differs only when J meets V (scale order violated)
    double valley_div_chi = 0.0;           // div chi = C on V^x and -C on V^y, off J
    double mass_balance = 0.0;
    double valley_sum = 0.0;     // (div chi)(E^x) against sum of C over E^x cap V^x
    bool valley_positive = true; // div chi > 0 on E^x cap V^x, < 0 on E^y cap V^y
    double valley_off_v = 0.0;   // |div chi| on E^x off V^x
    double complement = 0.0;     // W_{y,x} + W_{x,y} - 1
    double v_on_valleys = 0.0;   // V - h(x) on E^x
    bool boundary_signs = true;       // div Phi_{A,B}(E(A)) > 0 > div Phi_{A,B}(E(B))
    // sweep quantities, scaled by N^{1+alpha}
    double valley_flux = 0.0;     // (div chi)(E^x) N^{1+a} Gamma M I / cap_X, first pair
    double valley_flux_kappa = 0.0;     // same times kappa_star
    double dirichlet_v = 0.0;    // N^{1+a} D(V_{A,B})
    double chi_norm = 0.0;       // N^{1+a} ||chi_{A,B}||^2
    double div_a = 0.0;          // N^{1+a} div Phi_{A,B}(E(A))
    double div_b = 0.0;
    double div_delta = 0.0;      // N^{1+a} sum over Delta of |div Phi_{A,B}|
    double div_s_star = 0.0;     // N^{1+a} sum over valleys outside A u B of |div|
    double cap_y = 0.0;
    double tube_excess = 0.0;         // max (U - a a / N^{2a} I) N / pi over tubes
    double tube_excess_min = 0.0;
    bool order_ok = false;
    bool exact_ok(double tol = 1e-11) const {
        return tube_div_chi <= tol && tube_div_phi <= tol && valley_div_chi <= tol && mass_balance <= tol && valley_sum <= tol &&
               complement <= tol && v_on_valleys <= tol && valley_positive && valley_off_v <= tol;
    }
};

ApproxReport approx_verification(const ZrpModel& m, const ZrpSystem& sys, const MetastableSets& sets,
                                 const GlobalConstruction& g);

}  // namespace zrpm
