#pragma once

#include <functional>
#include <string>
#include <vector>

#include "spheroidal/geometry.hpp"

namespace spheroidal::oracle {

// Brute-force reference computations, deliberately independent of the
// primary paths: a dense eigensolve instead of bisection, classical
// Runge-Kutta instead of series, Gauss-Kronrod quadrature for integrals.
// They ship in the library so the CLI validation can run them in the field.

struct OracleReport {
    std::string quantity;
    double primary = 0.0;
    double reference = 0.0;
    double rel_diff = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

OracleReport make_report(const std::string& quantity, double primary, double reference,
                         double tolerance);

// Eigenvalues of one parity class (p = 0 or 1) of the angular recurrence
// matrix, assembled dense at the given truncation and solved with Eigen's
// symmetric eigensolver; sorted ascending.
std::vector<double> dense_eigen_oracle(Kind kind, double c, int m, int parity, int truncation);

struct OdeSample {
    double xi, r, rp;
};

// Integrates the radial ODE from (r0, rp0) at xi_from to xi_to with an
// adaptive step-doubling RK4, returning n_samples points including both
// endpoints.  xi_from and xi_to must stay on one side of the prolate
// singular point xi = 1.
std::vector<OdeSample> ode_integrate_radial(Kind kind, double c, int m, double lambda,
                                            double xi_from, double xi_to, double r0, double rp0,
                                            int n_samples, double tol = 1e-11);

// Adaptive Gauss-Kronrod (7,15) quadrature; throws convergence_error when the
// requested tolerance cannot be reached.
double quadrature(const std::function<double(double)>& f, double a, double b, double tol);

}  // namespace spheroidal::oracle
