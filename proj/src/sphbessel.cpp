#include "spheroidal/sphbessel.hpp"

#include <cmath>
#include <stdexcept>

namespace spheroidal {

void sph_bessel_j_array(int lmax, double x, std::vector<double>& j) {
    if (lmax < 0 || x < 0.0) throw std::invalid_argument("sph_bessel_j_array: bad arguments");
    j.assign(std::size_t(lmax) + 1, 0.0);
    if (x == 0.0) {
        j[0] = 1.0;
        return;
    }
    if (x < 1e-4) {
        // Two-term ascending series; the truncation error is below 1e-18
        // relative and the running power underflows harmlessly.
        double v = 1.0;
        for (int l = 0; l <= lmax; ++l) {
            j[l] = v * (1.0 - x * x / (2.0 * (2.0 * l + 3.0)));
            v *= x / (2.0 * l + 3.0);
            if (v == 0.0 && l + 1 <= lmax) break;
        }
        return;
    }
    double j0 = std::sin(x) / x;
    double j1 = j0 / x - std::cos(x) / x;
    if (lmax == 0) {
        j[0] = j0;
        return;
    }
    // Miller downward recurrence from above the transition order; rescale
    // when values grow large.  Entries whose true value underflows stay 0.
    int start = lmax + 16 + int(1.5 * std::sqrt(double(lmax) + 1.0)) + int(x);
    const double cutoff = 1e250;
    double fp = 0.0, fc = 1e-30;
    for (int l = start; l >= 1; --l) {
        double fm = (2.0 * l + 1.0) / x * fc - fp;
        fp = fc;
        fc = fm;
        if (l - 1 <= lmax) j[l - 1] = fc;
        if (std::fabs(fc) > cutoff) {
            fp /= cutoff;
            fc /= cutoff;
            for (int k = (l - 1 > 0 ? l - 1 : 0); k <= lmax; ++k) j[k] /= cutoff;
        }
    }
    double scale = std::fabs(j0) >= std::fabs(j1) ? j0 / j[0] : j1 / j[1];
    for (int l = 0; l <= lmax; ++l) {
        j[l] *= scale;
        if (!std::isfinite(j[l])) j[l] = 0.0;
    }
}

void BesselWorkspace::reset(double x_new, int lmax) {
    if (!(x_new > 0.0)) throw std::invalid_argument("BesselWorkspace: x must be > 0");
    x = x_new;
    sph_bessel_j_array(lmax, x, j);
    ym.clear();
    ye.clear();
    ym.push_back(-std::cos(x) / x);
    ye.push_back(0);
    ym.push_back(-std::cos(x) / (x * x) - std::sin(x) / x);
    ye.push_back(0);
    ensure(lmax);
}

void BesselWorkspace::ensure(int lmax) {
    if (int(j.size()) <= lmax) sph_bessel_j_array(lmax, x, j);
    // Upward recurrence is the stable direction for y; mantissas are knocked
    // down by 2^512 whenever they pass it, keeping any order representable.
    while (int(ym.size()) <= lmax) {
        int l = int(ym.size()) - 1;  // have y_{l-1}, y_l; want y_{l+1}
        double m_hi = ym[l];
        double m_lo = std::ldexp(ym[l - 1], ye[l - 1] - ye[l]);
        double next = (2.0 * l + 1.0) / x * m_hi - m_lo;
        int e = ye[l];
        if (std::fabs(next) > 1.34078079299e154) {  // 2^512
            next = std::ldexp(next, -512);
            e += 512;
        }
        ym.push_back(next);
        ye.push_back(e);
    }
}

double BesselWorkspace::y_at(int l) const { return std::ldexp(ym[l], ye[l]); }

}  // namespace spheroidal
