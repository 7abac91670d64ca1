#pragma once

#include <cstdint>
#include <vector>

#include "zrpm/capacity.hpp"
#include "zrpm/chain.hpp"
#include "zrpm/flow.hpp"

namespace zrpm {

// Chain with one valley merged into a single state o (the last index).
struct CollapsedChain {
    Chain chain;
    Mask valley;                          // over the original states
    std::vector<std::int64_t> old_to_new; // valley states map to o
    std::vector<std::int64_t> new_to_old; // o maps to -1
    std::uint32_t o = 0;
    std::vector<std::int64_t> edge_map;   // original edge -> collapsed edge, -1 inside the valley
    std::vector<signed char> edge_sign;   // orientation of original lo->hi in the collapsed edge
};

CollapsedChain collapse_chain(const Chain& ch, const Mask& valley);

Flow collapse_flow(const Chain& ch, const CollapsedChain& cc, const Flow& phi);
std::vector<double> collapse_function(const CollapsedChain& cc, const std::vector<double>& f,
                                      double tol = 1e-12);
// original-state set not meeting the valley, optionally with o added
Mask collapse_set(const CollapsedChain& cc, const Mask& set, bool with_o = false);

// Equality conditions: phi vanishes inside the valley, and phi/c^s is constant over the
// valley neighbours of each outside state. Returns the largest violation.
double collapse_equality_defect(const Chain& ch, const CollapsedChain& cc, const Flow& phi);

struct CollapsedCapacity {
    double cap = 0.0;
    double cap_sym = 0.0;
};
CollapsedCapacity collapsed_capacity(const CollapsedChain& cc, const Mask& a, const Mask& b);

// P_o[tau_A < tau_B]; equals 1 when B is empty.
double collapsed_hitting(const CollapsedChain& cc, const Mask& a, const Mask& b);

}  // namespace zrpm
