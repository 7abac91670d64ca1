#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <vector>

#include "zrpm/capacity.hpp"
#include "zrpm/geometry.hpp"
#include "zrpm/walk.hpp"
#include "zrpm/zrp.hpp"

namespace zrpm {

// Jump records (time, rank in ConfigSpace(n, kappa)); the first record is the start.
struct Trajectory {
    std::uint64_t seed = 0;
    std::uint64_t index = 0;
    long n = 0;
    double horizon = 0.0;
    std::uint64_t jumps = 0;
    std::vector<double> times;
    std::vector<std::uint64_t> ranks;
    Config final_state;
};

// Exponential-clock simulation without enumerating the state space.
Trajectory simulate(const ZrpModel& m, const Config& eta0, double horizon, std::uint64_t seed,
                    std::uint64_t index = 0, Variant var = Variant::Primal, bool record = true,
                    std::uint64_t max_jumps = std::numeric_limits<std::uint64_t>::max());

// Times strictly increasing and consecutive records one particle move apart.
bool trajectory_consistent(const ZrpModel& m, const Trajectory& t);

struct TraceJump {
    std::uint64_t from, to;  // ranks in the system
    double rate;
};

struct TraceChainExact {
    std::vector<int> sites;     // S_star
    Eigen::MatrixXd r;          // r_N(x,y), indexed like sites
    std::vector<double> lambda;
    std::vector<double> mu_valley;
    std::vector<double> cap_valley;  // cap(E^x, rest of E)
    std::vector<double> escape;      // collapsed hitting probabilities, row-major like r
    double cap_identity = 0.0;  // max relative residual
    double hitting_identity = 0.0;  // max absolute residual
    std::vector<TraceJump> jumps;  // j_N when requested
};

TraceChainExact trace_chain_exact(const ZrpModel& m, const ZrpSystem& sys, const MetastableSets& sets,
                                  bool with_jump_rates = false, double tol = 1e-9);
// Valleys given directly as disjoint masks, one per site in `sites`.
TraceChainExact trace_chain_exact(const ZrpSystem& sys, const std::vector<int>& sites,
                                  const std::vector<Mask>& valleys, bool with_jump_rates = false,
                                  double tol = 1e-9);

struct JumpRateEstimate {
    std::vector<int> sites;
    Eigen::MatrixXd count;            // transitions x -> y
    Eigen::MatrixXd rate;             // count / occupation
    Eigen::MatrixXd se;               // regenerative standard errors
    std::vector<double> occupation;   // time spent in E^x
    std::uint64_t transitions = 0;
    std::uint64_t steps = 0;          // single jumps simulated
    std::uint64_t sojourns = 0;       // well sojourns sampled in one draw
};

// Trace of the path on the valleys, with each well sojourn drawn exactly from
// its phase-type law and the rest simulated jump by jump.
JumpRateEstimate mean_jump_rate_mc(const ZrpModel& m, const MetastableSets& sets, int x0,
                                   std::uint64_t n_transitions, std::uint64_t seed);

// Same estimator from a plain jump-by-jump path.
JumpRateEstimate mean_jump_rate_plain(const ZrpModel& m, const MetastableSets& sets, int x0,
                                      std::uint64_t n_transitions, std::uint64_t seed,
                                      std::uint64_t max_steps = 2'000'000'000ULL);

inline constexpr int kNullState = -1;

// W_N at the rescaled grid times for one recorded trajectory.
std::vector<int> projection_path(const ZrpModel& m, const MetastableSets& sets, const Trajectory& t,
                                 const std::vector<double>& grid);

// W_N at the rescaled grid times, paths drawn with exact well sojourns.
std::vector<std::vector<int>> sample_projection_paths(const ZrpModel& m, const MetastableSets& sets, int x0,
                                                      const std::vector<double>& grid, std::size_t paths,
                                                      std::uint64_t seed);

struct FddTable {
    std::vector<double> times;
    std::vector<int> states;  // sites of S_star then kNullState
    Eigen::MatrixXd prob;     // times x states
    Eigen::MatrixXd se;
    std::size_t paths = 0;
};

FddTable empirical_fdd(const std::vector<std::vector<int>>& paths, const std::vector<double>& grid,
                       const std::vector<int>& sites);

// Two-time table P[W(s) = u, W(t) = v] for grid indices i < j, flattened u-major.
Eigen::MatrixXd empirical_two_time(const std::vector<std::vector<int>>& paths, std::size_t i, std::size_t j,
                                   const std::vector<int>& sites);

// Q_x[Y_t = y], rows over grid times, columns like y.sites
Eigen::MatrixXd limit_fdd(const LimitChain& y, int x0, const std::vector<double>& grid);

struct HypothesisReport {
    std::vector<int> sites;
    std::vector<double> h1;  // sup cap(E^x, rest) / cap(eta, xi^x)
    std::vector<double> h2;  // mu(Delta) / mu(E^x)
};

HypothesisReport hypothesis_diagnostics(const ZrpModel& m, const ZrpSystem& sys, const MetastableSets& sets);

// Sub-generator of a killed chain; absorption time and occupation law.
class PhaseType {
public:
    PhaseType() = default;
    // weights: reversible measure when available (enables the symmetric solver)
    PhaseType(const Eigen::MatrixXd& t, const Eigen::VectorXd& weights);
    int size() const { return static_cast<int>(lam_.size()); }
    double survival(int s, double t) const;
    Eigen::VectorXd occupation(int s, double t) const;  // e_s^T exp(tT), clamped at 0
    double sample(int s, double u) const;                // solves survival = u
    double reconstruction() const { return recon_; }

private:
    double derivative(int s, double t) const;
    Eigen::MatrixXcd v_, vinv_;
    Eigen::VectorXcd lam_, w_;
    double slow_ = 0.0;
    double recon_ = 0.0;
};

}  // namespace zrpm
