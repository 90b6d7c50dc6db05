#pragma once

namespace spheroidal::detail {

// Three-term recurrence of the Legendre-series coefficients of the angle
// functions,
//   alpha_r d_{r+2} + (beta_r - lambda) d_r + gamma_r d_{r-2} = 0,
// with cs = c^2 (prolate) or -c^2 (oblate).
struct Recurrence {
    int m;
    double cs;

    double alpha(int r) const {
        double tm = 2.0 * m, tr = r;
        return (tm + tr + 2.0) * (tm + tr + 1.0) * cs /
               ((tm + 2.0 * tr + 3.0) * (tm + 2.0 * tr + 5.0));
    }
    double beta(int r) const {
        double mr = double(m) + r;
        return mr * (mr + 1.0) + cs * (2.0 * mr * (mr + 1.0) - 2.0 * double(m) * m - 1.0) /
                                     ((2.0 * mr - 1.0) * (2.0 * mr + 3.0));
    }
    double gamma(int r) const {
        double tm2r = 2.0 * (double(m) + r);
        return double(r) * (r - 1.0) * cs / ((tm2r - 3.0) * (tm2r - 1.0));
    }
};

// Minimal-solution ratio d_{r+2}/d_r by backward continued fraction seeded
// 'depth' steps into the tail.
inline double minimal_ratio(const Recurrence& rec, double lambda, int r, int depth) {
    double rho = 0.0;
    for (int rr = r + 2 * depth; rr >= r; rr -= 2) {
        double den = rec.beta(rr + 2) - lambda + rec.alpha(rr + 2) * rho;
        if (den == 0.0) den = 1e-300;
        rho = -rec.gamma(rr + 2) / den;
    }
    return rho;
}

}  // namespace spheroidal::detail
