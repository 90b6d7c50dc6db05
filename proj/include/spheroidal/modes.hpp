#pragma once

#include <vector>

#include "spheroidal/geometry.hpp"

namespace spheroidal {

struct ModeIndex {
    int m = 0;
    int n = 0;
    int parity() const { return (n - m) & 1; }
};

// One angular mode of the spheroidal wave equation at size parameter c = ka.
//
// The angle function is expanded in associated Legendre functions,
//   S_mn(c, eta) = sum'_r d_r P^m_{m+r}(eta),
// with r running over one parity class (r = p, p+2, ...; p = (n-m) mod 2);
// d[j] stores d_{p+2j}.  The scale follows Flammer's convention: S_mn and its
// eta-derivative match P^m_n at eta = 0, so everything reduces to the
// associated Legendre functions at c = 0.
struct ModeCoefficients {
    Kind kind = Kind::Prolate;  // Prolate or Oblate (Disk solves as Oblate)
    double c = 0.0;
    ModeIndex mode;
    double lambda = 0.0;    // separation eigenvalue
    std::vector<double> d;  // Legendre-series coefficients, one parity class
    double n_mn = 0.0;      // normalization integral of S^2 over [-1, 1]
    int truncation = 0;     // retained d count (= d.size())
    double tail_bound = 0.0;  // |first discarded d| / max |d|
};

// Tail tolerance used when truncating the stored d sequence.
inline constexpr double kModeTailTolerance = 1e-24;

// Solves the angular eigenproblem: lambda is the floor((n-m)/2)-th eigenvalue
// (ascending) of the parity class, the branch continuous in c from the c = 0
// limit n(n+1).  Throws convergence_error when the adaptive truncation cap is
// reached.
ModeCoefficients solve_mode(Kind kind, double c, ModeIndex mode, double tol = 1e-12);

struct AngleEval {
    double s;   // S_mn(c, eta)
    double sp;  // d/d eta; +-inf at eta = +-1 for odd m (endpoint singularity)
};

AngleEval angle_s1(const ModeCoefficients& mc, double eta);

// Closed-form normalization integral of S_mn^2 from the d_r (Legendre
// orthogonality); equals the stored n_mn for coefficients from solve_mode.
double norm_nmn(const ModeCoefficients& mc);

// Minimal-solution ratio d_{r+2}/d_r of the three-term recurrence, evaluated
// by backward continued fraction.  Valid in the decaying tail; used to extend
// the stored coefficients for slowly converging radial series.
double mode_tail_ratio(const ModeCoefficients& mc, int r);

}  // namespace spheroidal
