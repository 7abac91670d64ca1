#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zrpm/capacity.hpp"
#include "zrpm/zrp.hpp"

namespace zrpm {

struct ScaleParams {
    long n = 0;
    double eps = 0.0;
    long ell = 0;            // valley depth
    long pi = 0;             // tube width, floor(N^{1/alpha + 1/2})
    long eps_n = 0;          // floor(N eps)
    long well = 0;           // ceil(N(1 - 2 eps))
    std::vector<long> b;     // per site; -1 on S_star
    double amp3 = 0.0;       // value of the product condition at this N
    bool order_ok = false;   // floor(N eps) > pi > ell >= 1 (pi exempt when kappa = 2)
};

ScaleParams default_scales(const ZrpModel& m, long n, double eps);
// Throws ScaleOrderViolated naming the smallest admissible N.
void require_scale_order(const ZrpModel& m, const ScaleParams& s);
long minimal_admissible_n(const ZrpModel& m, double eps);

struct SitePair {
    int x, y;  // x < y, both in S_star
};

class MetastableSets {
public:
    MetastableSets(const ZrpModel& m, const ScaleParams& s) : model_(&m), scales_(s) {}

    const ScaleParams& scales() const { return scales_; }
    const std::vector<SitePair>& pairs() const { return pairs_; }

    bool in_valley(const int* eta, int x) const;
    int valley_of(const int* eta) const;  // -1 if in Delta
    bool in_well(const int* eta, int x) const { return eta[x] >= scales_.well; }
    int well_of(const int* eta) const;
    bool in_tube(const int* eta, int x, int y) const { return eta[x] + eta[y] >= scales_.n - scales_.pi; }
    bool in_tube_int(const int* eta, int x, int y) const;
    bool in_saddle(const int* eta, int x, int y) const;
    bool in_g(const int* eta) const;
    bool in_v(const int* eta, int x, int y) const { return in_tube(eta, x, y) && eta[y] == 0; }
    bool in_any_tube_of(const int* eta, int x) const;

    bool bd_in_saddle(const int* eta, int x, int y) const;
    bool bd_out_saddle(const int* eta, int x, int y) const;
    bool bd_in_well(const int* eta, int x) const;
    bool bd_out_well(const int* eta, int x) const;
    bool bd_in_g(const int* eta) const;
    bool bd_out_g(const int* eta) const;
    bool saddle_int(const int* eta, int x, int y) const { return in_saddle(eta, x, y) && !bd_in_saddle(eta, x, y); }
    bool well_int(const int* eta, int x) const { return in_well(eta, x) && !bd_in_well(eta, x); }

    const ZrpModel& model() const { return *model_; }

private:
    friend MetastableSets build_sets(const ZrpModel&, const ScaleParams&, bool);
    const ZrpModel* model_;
    ScaleParams scales_;
    std::vector<SitePair> pairs_;
};

MetastableSets build_sets(const ZrpModel& m, const ScaleParams& s, bool strict = true);

struct SetCheckReport {
    bool decomp_g = true;       // G = disjoint union of D_int, J_int, boundary
    bool decomp_gc = true;      // G^c = (G^c)_int + outer boundary
    bool saddles_disjoint = true;
    bool tube_overlap_in_well = true;
    bool valley_in_well = true;
    bool obe1 = true;
    bool xi_in_valley = true;
    std::uint64_t states = 0;
    bool all() const {
        return decomp_g && decomp_gc && saddles_disjoint && tube_overlap_in_well && valley_in_well && obe1 &&
               xi_in_valley;
    }
};

SetCheckReport check_sets(const MetastableSets& sets, const ZrpSystem& sys);

// Masks over the enumerated space.
Mask valley_mask(const MetastableSets& sets, const ZrpSystem& sys, int x);
Mask valleys_mask(const MetastableSets& sets, const ZrpSystem& sys, const std::vector<int>& xs);
Mask delta_mask(const MetastableSets& sets, const ZrpSystem& sys);

struct SetMeasures {
    std::vector<double> valley;      // per site, 0 off S_star
    double delta = 0.0;
    double inner_boundary_g = 0.0;
    std::vector<double> saddle;      // per pair
    std::vector<double> well;        // per site
    double g_complement = 0.0;
    std::vector<std::uint64_t> valley_count;
};

SetMeasures set_measures(const MetastableSets& sets, const ZrpSystem& sys);

}  // namespace zrpm
