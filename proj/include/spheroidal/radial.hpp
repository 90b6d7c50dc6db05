#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "spheroidal/modes.hpp"
#include "spheroidal/sphbessel.hpp"

namespace spheroidal {

// Radial functions of the first and third kind and their xi-derivatives at
// one point.  R^(3) = R^(1) + i R^(2) is the outgoing-wave solution; the
// wronskian_residual field is the relative defect of the identity
// R1 R2' - R1' R2 = 1 / (c (xi^2 -+ 1)), computed as a built-in accuracy
// certificate for every evaluation.
struct RadialEval {
    std::complex<double> r1, r1p, r3, r3p;
    double wronskian_residual = 0.0;
};

// Per-mode radial evaluator.  Prepares the Bessel-series weights once and,
// for the oblate kind, the exact xi = 0 values plus Taylor expansions about a
// fixed anchor chain; immutable afterwards and safe to share across threads.
//
// Method selection: R^(1) comes from the spherical-Bessel series, R^(2) from
// the spherical-Neumann series where that series converges (xi >= 1.25), and
// from Taylor continuation of the radial ODE otherwise -- outward from the
// exact xi = 0 limit for the oblate kind, inward from a xi = 1.5 anchor for
// the prolate kind.  Evaluations whose Wronskian certificate exceeds the
// internal guard fail loudly instead of returning degraded values.
class RadialEvaluator {
public:
    explicit RadialEvaluator(std::shared_ptr<const ModeCoefficients> mc);

    // ws, when given, must hold tables for x = c * xi (shared across modes at
    // one evaluation point); otherwise a thread-local workspace is used.
    RadialEval eval(double xi, BesselWorkspace* ws = nullptr) const;
    RadialEval at_disk() const;

    const ModeCoefficients& mode() const { return *mc_; }
    // Largest Bessel order the stored series touches at any xi.
    int max_order() const { return m_ + p_ + 2 * (int(f_.size()) - 1); }

private:
    struct SeriesSums {
        double sum, sump;
    };
    SeriesSums bessel_series(double xi, BesselWorkspace& ws, bool neumann) const;
    void disk_values(double& r1, double& r1p, double& r2, double& r2p) const;
    double taylor_from_disk(double xi, bool second_kind, double& deriv) const;

    std::shared_ptr<const ModeCoefficients> mc_;
    int m_, n_, p_;
    double c_, lambda_, delta_;
    std::vector<double> f_;  // ((2m+r)!/r!) d_r
    double F_;               // sum of f
    double sign0_;           // i^{p+m-n}, real
    struct Anchor {
        double xi0;
        std::vector<double> a1, a2;  // Taylor coefficients of R1, R2
    };
    std::vector<Anchor> anchors_;  // oblate only: centers 0, 0.55, 1.05
};

// Convenience wrappers implementing the one-shot operations.
RadialEval radial(const ModeCoefficients& mc, double xi);
RadialEval radial_at_disk(const ModeCoefficients& mc);

// Advances a radial-equation solution (value, derivative) from xi0 by dt via
// the Taylor series of the ODE about xi0; dt must stay inside ~0.6 of the
// distance to the nearest singularity.  Exposed for tests.
void radial_taylor_step(Kind kind, int m, double c, double lambda, double xi0, double dt,
                        double& r, double& rp);

}  // namespace spheroidal
