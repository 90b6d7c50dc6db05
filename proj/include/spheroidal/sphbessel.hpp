#pragma once

#include <vector>

namespace spheroidal {

// j[l] = spherical Bessel j_l(x) for l = 0..lmax (Miller downward recurrence,
// normalized against sin(x)/x or its derivative).  x >= 0; x = 0 gives the
// exact limit j_0 = 1, j_l = 0.
void sph_bessel_j_array(int lmax, double x, std::vector<double>& j);

// Per-evaluation-point tables shared across modes: the j array plus the
// spherical Neumann sequence kept in scaled form y_l = ym[l] * 2^{ye[l]} so
// large orders never overflow.
struct BesselWorkspace {
    double x = -1.0;
    std::vector<double> j;
    std::vector<double> ym;
    std::vector<int> ye;

    void reset(double x_new, int lmax);
    // Grows the tables to cover l <= lmax (j is rebuilt, y is extended).
    void ensure(int lmax);
    double y_at(int l) const;  // may overflow to +-inf for extreme orders
};

}  // namespace spheroidal
