#include "spheroidal/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spheroidal/errors.hpp"

namespace spheroidal::oracle {

OracleReport make_report(const std::string& quantity, double primary, double reference,
                         double tolerance) {
    OracleReport r;
    r.quantity = quantity;
    r.primary = primary;
    r.reference = reference;
    double scale = std::max({std::fabs(primary), std::fabs(reference), 1e-300});
    r.rel_diff = std::fabs(primary - reference) / scale;
    r.tolerance = tolerance;
    r.pass = r.rel_diff <= tolerance;
    return r;
}

std::vector<double> dense_eigen_oracle(Kind kind, double c, int m, int parity, int truncation) {
    if (truncation < 50) throw std::invalid_argument("dense_eigen_oracle: truncation >= 50");
    if (parity != 0 && parity != 1) throw std::invalid_argument("dense_eigen_oracle: parity 0/1");
    const double cs = family(kind) == Kind::Prolate ? c * c : -c * c;
    const int N = truncation;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N, N);
    // Assemble the full (nonsymmetric) recurrence matrix and symmetrize it by
    // the diagonal similarity scaling; formulas written out independently of
    // the production path.
    auto alpha = [&](int r) {
        return (2.0 * m + r + 2.0) * (2.0 * m + r + 1.0) * cs /
               ((2.0 * (m + r) + 3.0) * (2.0 * (m + r) + 5.0));
    };
    auto beta = [&](int r) {
        double mr = double(m) + r;
        return mr * (mr + 1.0) + cs * (2.0 * mr * (mr + 1.0) - 2.0 * double(m) * m - 1.0) /
                                     ((2.0 * mr - 1.0) * (2.0 * mr + 3.0));
    };
    auto gamma = [&](int r) {
        return double(r) * (r - 1.0) * cs /
               ((2.0 * (m + r) - 3.0) * (2.0 * (m + r) - 1.0));
    };
    for (int j = 0; j < N; ++j) {
        int r = parity + 2 * j;
        M(j, j) = beta(r);
        if (j + 1 < N) {
            double prod = alpha(r) * gamma(r + 2);
            double e = std::sqrt(std::max(prod, 0.0));
            if (cs < 0.0) e = -e;
            M(j, j + 1) = e;
            M(j + 1, j) = e;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(M, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw convergence_error("dense_eigen_oracle: eigensolver failed");
    std::vector<double> ev(solver.eigenvalues().data(), solver.eigenvalues().data() + N);
    std::sort(ev.begin(), ev.end());
    return ev;
}

namespace {

// R'' from the radial equation (xi^2 - delta) R'' + 2 xi R' -
// (lambda - c^2 xi^2 + delta m^2/(xi^2 - delta)) R = 0.
double radial_rhs(double delta, int m, double c, double lambda, double xi, double r, double rp) {
    double sigma = xi * xi - delta;
    return ((lambda - c * c * xi * xi + delta * double(m) * m / sigma) * r - 2.0 * xi * rp) /
           sigma;
}

struct State {
    double r, rp;
};

State rk4_step(double delta, int m, double c, double lambda, double xi, State s, double h) {
    auto f = [&](double x, State u) -> State {
        return {u.rp, radial_rhs(delta, m, c, lambda, x, u.r, u.rp)};
    };
    State k1 = f(xi, s);
    State k2 = f(xi + 0.5 * h, {s.r + 0.5 * h * k1.r, s.rp + 0.5 * h * k1.rp});
    State k3 = f(xi + 0.5 * h, {s.r + 0.5 * h * k2.r, s.rp + 0.5 * h * k2.rp});
    State k4 = f(xi + h, {s.r + h * k3.r, s.rp + h * k3.rp});
    return {s.r + h / 6.0 * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r),
            s.rp + h / 6.0 * (k1.rp + 2.0 * k2.rp + 2.0 * k3.rp + k4.rp)};
}

// One accepted step with step-doubling error control.
State adaptive_advance(double delta, int m, double c, double lambda, double& xi, State s,
                       double target, double& h, double tol) {
    for (int tries = 0; tries < 200; ++tries) {
        double hh = h;
        if ((target - xi) * hh < 0.0) hh = -hh;
        if (std::fabs(hh) > std::fabs(target - xi)) hh = target - xi;
        State full = rk4_step(delta, m, c, lambda, xi, s, hh);
        State half1 = rk4_step(delta, m, c, lambda, xi, s, 0.5 * hh);
        State half2 = rk4_step(delta, m, c, lambda, xi + 0.5 * hh, half1, 0.5 * hh);
        double scale = std::fabs(half2.r) + std::fabs(half2.rp) + 1e-30;
        double err = (std::fabs(full.r - half2.r) + std::fabs(full.rp - half2.rp)) / scale;
        if (err <= tol) {
            xi += hh;
            if (err < tol / 64.0) h = std::min(std::fabs(h) * 2.0, std::fabs(target - xi) + 1e-30);
            return half2;
        }
        h = 0.5 * std::fabs(hh);
        if (h < 1e-14) throw convergence_error("ode_integrate_radial: step underflow");
    }
    throw convergence_error("ode_integrate_radial: too many step rejections");
}

}  // namespace

std::vector<OdeSample> ode_integrate_radial(Kind kind, double c, int m, double lambda,
                                            double xi_from, double xi_to, double r0, double rp0,
                                            int n_samples, double tol) {
    if (n_samples < 2) throw std::invalid_argument("ode_integrate_radial: n_samples >= 2");
    double delta = family(kind) == Kind::Prolate ? 1.0 : -1.0;
    if (delta > 0.0 && (std::min(xi_from, xi_to) <= 1.0))
        throw std::invalid_argument("ode_integrate_radial: prolate span must stay above xi = 1");
    std::vector<OdeSample> out;
    out.reserve(n_samples);
    State s{r0, rp0};
    double xi = xi_from;
    out.push_back({xi, s.r, s.rp});
    double h = std::fabs(xi_to - xi_from) / (8.0 * n_samples) + 1e-12;
    for (int i = 1; i < n_samples; ++i) {
        double target = xi_from + (xi_to - xi_from) * double(i) / (n_samples - 1);
        while (std::fabs(target - xi) > 1e-13 * (std::fabs(target) + 1.0)) {
            s = adaptive_advance(delta, m, c, lambda, xi, s, target, h, tol);
        }
        xi = target;
        out.push_back({xi, s.r, s.rp});
    }
    return out;
}

namespace {

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule
// (classic QUADPACK constants).
const double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                        0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
                        0.207784955007898467600689403773245, 0.0};
const double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
const double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                       0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

void gk15(const std::function<double(double)>& f, double a, double b, double& result,
          double& err) {
    double mid = 0.5 * (a + b), hl = 0.5 * (b - a);
    double fc = f(mid);
    double resk = fc * kWgk[7];
    double resg = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        double dx = hl * kXgk[j];
        double f1 = f(mid - dx), f2 = f(mid + dx);
        resk += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
    }
    result = resk * hl;
    err = std::fabs((resk - resg) * hl);
}

double adaptive_gk(const std::function<double(double)>& f, double a, double b, double tol,
                   int depth) {
    double result, err;
    gk15(f, a, b, result, err);
    if (err <= tol || std::fabs(b - a) < 1e-14) {
        if (err > tol && depth <= 0)
            throw convergence_error("quadrature: tolerance not reached");
        return result;
    }
    if (depth <= 0) throw convergence_error("quadrature: tolerance not reached");
    double mid = 0.5 * (a + b);
    return adaptive_gk(f, a, mid, 0.5 * tol, depth - 1) +
           adaptive_gk(f, mid, b, 0.5 * tol, depth - 1);
}

}  // namespace

double quadrature(const std::function<double(double)>& f, double a, double b, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("quadrature: tol must be > 0");
    if (a == b) return 0.0;
    return adaptive_gk(f, a, b, tol, 40);
}

}  // namespace spheroidal::oracle
