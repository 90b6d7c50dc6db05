#include "spheroidal/modes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "spheroidal/detail/recurrence.hpp"
#include "spheroidal/errors.hpp"
#include "spheroidal/legendre.hpp"
#include "spheroidal/util.hpp"

namespace spheroidal {

namespace {

using detail::Recurrence;

std::string mode_context(Kind kind, double c, ModeIndex mode, int truncation) {
    return std::string(kind_name(kind)) + " c=" + std::to_string(c) +
           " m=" + std::to_string(mode.m) + " n=" + std::to_string(mode.n) +
           " truncation=" + std::to_string(truncation);
}

// Symmetric tridiagonal form of one parity class: diag[j] = beta(p+2j),
// off[j] couples j and j+1.  alpha*gamma > 0 for both kinds, and the
// symmetrized off-diagonal keeps the sign of cs.
struct Tridiag {
    std::vector<double> diag, off, off2;
};

Tridiag build_tridiag(const Recurrence& rec, int p, int size) {
    Tridiag t;
    t.diag.resize(size);
    t.off.resize(size > 0 ? size - 1 : 0);
    t.off2.resize(t.off.size());
    for (int j = 0; j < size; ++j) t.diag[j] = rec.beta(p + 2 * j);
    for (int j = 0; j + 1 < size; ++j) {
        int r = p + 2 * j;
        double prod = rec.alpha(r) * rec.gamma(r + 2);
        double e = std::sqrt(std::max(prod, 0.0));
        if (rec.cs < 0.0) e = -e;
        t.off[j] = e;
        t.off2[j] = e * e;
    }
    return t;
}

// Number of eigenvalues strictly below x (Sturm sequence via LDL^T).
int sturm_count(const Tridiag& t, double x) {
    int cnt = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < t.diag.size(); ++i) {
        q = t.diag[i] - x - (i ? t.off2[i - 1] / q : 0.0);
        if (q < 0.0) ++cnt;
        if (q == 0.0) q = 1e-300;
    }
    return cnt;
}

// k-th (0-based, ascending) eigenvalue by bisection inside Gershgorin bounds.
double kth_eigenvalue(const Tridiag& t, int k) {
    int n = int(t.diag.size());
    double lo = std::numeric_limits<double>::max();
    double hi = std::numeric_limits<double>::lowest();
    for (int i = 0; i < n; ++i) {
        double r = (i > 0 ? std::fabs(t.off[i - 1]) : 0.0) + (i + 1 < n ? std::fabs(t.off[i]) : 0.0);
        lo = std::min(lo, t.diag[i] - r);
        hi = std::max(hi, t.diag[i] + r);
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (sturm_count(t, mid) <= k)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Solves (T - s I) x = b, tridiagonal LU with partial pivoting; b is
// overwritten with the solution.
void shifted_solve(const Tridiag& t, double s, std::vector<double>& b) {
    int n = int(t.diag.size());
    std::vector<double> d(n), u1(std::max(n - 1, 0)), u2(std::max(n - 2, 0));
    for (int i = 0; i < n; ++i) d[i] = t.diag[i] - s;
    for (int i = 0; i + 1 < n; ++i) u1[i] = t.off[i];
    std::fill(u2.begin(), u2.end(), 0.0);
    double tiny = 1e-300;
    for (int i = 0; i + 1 < n; ++i) {
        double sub = t.off[i];
        if (std::fabs(d[i]) >= std::fabs(sub)) {
            if (d[i] == 0.0) d[i] = tiny;
            double m = sub / d[i];
            d[i + 1] -= m * u1[i];
            b[i + 1] -= m * b[i];
        } else {
            // swap rows i, i+1
            double m = d[i] / sub;
            double di1 = d[i + 1], ui1 = (i + 2 < n) ? u1[i + 1] : 0.0;
            d[i] = sub;
            double new_u1 = di1;
            double new_u2 = ui1;
            d[i + 1] = u1[i] - m * di1;
            if (i + 2 < n) u1[i + 1] = -m * ui1;
            u1[i] = new_u1;
            if (i + 2 < n) u2[i] = new_u2;
            std::swap(b[i], b[i + 1]);
            b[i + 1] -= m * b[i];
        }
    }
    if (d[n - 1] == 0.0) d[n - 1] = tiny;
    b[n - 1] /= d[n - 1];
    if (n >= 2) {
        if (d[n - 2] == 0.0) d[n - 2] = tiny;
        b[n - 2] = (b[n - 2] - u1[n - 2] * b[n - 1]) / d[n - 2];
    }
    for (int i = n - 3; i >= 0; --i) {
        if (d[i] == 0.0) d[i] = tiny;
        b[i] = (b[i] - u1[i] * b[i + 1] - u2[i] * b[i + 2]) / d[i];
    }
}

std::vector<double> eigenvector(const Tridiag& t, double lambda) {
    int n = int(t.diag.size());
    std::vector<double> v(n, 1.0 / std::sqrt(double(n)));
    for (int it = 0; it < 3; ++it) {
        shifted_solve(t, lambda, v);
        double mx = 0.0;
        for (double x : v) mx = std::max(mx, std::fabs(x));
        if (!(mx > 0.0) || !std::isfinite(mx)) throw convergence_error("eigenvector iteration failed");
        for (double& x : v) x /= mx;
    }
    return v;
}

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

double double_factorial(int k) {  // k!!, with (-1)!! = 0!! = 1
    double f = 1.0;
    for (int i = k; i >= 2; i -= 2) f *= i;
    return f;
}

// Ladder of P^m_{m+r}(0) (even parity class) or d/d eta P^m_{m+r}(0) (odd):
//   even: start (2m-1)!!,  step(r -> r+2) = -(2m+r+1)/(r+2)
//   odd:  start (2m+1)!!,  step(r -> r+2) = -(2m+r+2)/(r+1)
struct OriginLadder {
    int m, p;
    double value(int j_target) const {
        double v = p == 0 ? double_factorial(2 * m - 1) : double_factorial(2 * m + 1);
        for (int j = 0; j < j_target; ++j) v *= ratio(p + 2 * j);
        return v;
    }
    double ratio(int r) const {
        return p == 0 ? -(2.0 * m + r + 1.0) / (r + 2.0) : -(2.0 * m + r + 2.0) / (r + 1.0);
    }
};

double norm_weight_ratio(int m, int r) {
    return (2.0 * m + r + 2.0) * (2.0 * m + r + 1.0) / ((r + 2.0) * (r + 1.0)) *
           (2.0 * m + 2.0 * r + 1.0) / (2.0 * m + 2.0 * r + 5.0);
}

// N = sum'_r d_r^2 W_r with W_r = 2 (2m+r)! / ((2m+2r+1) r!), from the
// orthogonality of the associated Legendre functions.
double norm_from_d(int m, int p, const std::vector<double>& d) {
    double weight = p == 0 ? 2.0 * factorial(2 * m) / (2.0 * m + 1.0)
                           : 2.0 * factorial(2 * m + 1) / (2.0 * m + 3.0);
    KahanSum s;
    for (std::size_t j = 0; j < d.size(); ++j) {
        s.add(d[j] * d[j] * weight);
        weight *= norm_weight_ratio(m, p + 2 * int(j));
    }
    return s.value();
}

}  // namespace

double norm_nmn(const ModeCoefficients& mc) {
    return norm_from_d(mc.mode.m, mc.mode.parity(), mc.d);
}

double mode_tail_ratio(const ModeCoefficients& mc, int r) {
    Recurrence rec{mc.mode.m, mc.kind == Kind::Prolate ? mc.c * mc.c : -mc.c * mc.c};
    int depth = 48 + int(mc.c);
    return detail::minimal_ratio(rec, mc.lambda, r, depth);
}

ModeCoefficients solve_mode(Kind kind, double c, ModeIndex mode, double tol) {
    if (mode.m < 0 || mode.n < mode.m) throw std::invalid_argument("solve_mode: need 0 <= m <= n");
    if (!(c >= 0.0)) throw std::invalid_argument("solve_mode: c must be >= 0");
    if (!(tol > 0.0)) throw std::invalid_argument("solve_mode: tol must be > 0");
    if (mode.m > 80) throw std::invalid_argument("solve_mode: m beyond supported range (m <= 80)");
    Kind fam = family(kind);

    ModeCoefficients mc;
    mc.kind = fam;
    mc.c = c;
    mc.mode = mode;

    const int p = mode.parity();
    const int q = (mode.n - mode.m) / 2;  // eigenvalue index within the parity class

    if (c == 0.0) {
        mc.lambda = double(mode.n) * (mode.n + 1.0);
        mc.d.assign(q + 1, 0.0);
        mc.d[q] = 1.0;
        mc.truncation = q + 1;
        mc.tail_bound = 0.0;
        mc.n_mn = norm_from_d(mode.m, p, mc.d);
        return mc;
    }

    Recurrence rec{mode.m, fam == Kind::Prolate ? c * c : -c * c};

    // Adaptive truncation: start near the spec'd floor and double until the
    // eigenvalue is stable to tol.
    int size = 2 * (mode.n - mode.m) + 32 + int(std::ceil(2.0 * c));
    const int size_cap = 40000;
    double lambda = 0.0;
    bool converged = false;
    Tridiag t = build_tridiag(rec, p, size);
    double prev = kth_eigenvalue(t, q);
    while (size < size_cap) {
        int next_size = 2 * size;
        t = build_tridiag(rec, p, next_size);
        lambda = kth_eigenvalue(t, q);
        double scale = std::max(1.0, std::fabs(lambda));
        if (std::fabs(lambda - prev) <= tol * scale) {
            converged = true;
            break;
        }
        prev = lambda;
        size = next_size;
    }
    if (!converged)
        throw convergence_error("solve_mode: eigenvalue did not converge: " +
                                mode_context(fam, c, mode, size));
    mc.lambda = lambda;

    // Eigenvector in the symmetrized basis, then back to d coefficients.
    std::vector<double> w = eigenvector(t, lambda);
    int n_vec = int(w.size());
    std::vector<double> d(n_vec);
    double s = 1.0;
    for (int j = 0; j < n_vec; ++j) {
        d[j] = w[j] / s;
        if (j + 1 < n_vec) {
            int r = p + 2 * j;
            double ratio = rec.alpha(r) / rec.gamma(r + 2);
            s *= std::sqrt(ratio);
        }
    }

    double dmax = 0.0;
    int jpeak = 0;
    for (int j = 0; j < n_vec; ++j)
        if (std::fabs(d[j]) > dmax) {
            dmax = std::fabs(d[j]);
            jpeak = j;
        }
    if (!(dmax > 0.0)) throw convergence_error("solve_mode: null eigenvector: " +
                                               mode_context(fam, c, mode, size));

    // The iterated eigenvector carries absolute noise of order eps * max;
    // rebuild the far tail from the continued-fraction minimal solution so
    // the stored coefficients stay relatively accurate.
    int jrel = jpeak;
    for (int j = jpeak; j < n_vec; ++j)
        if (std::fabs(d[j]) >= 1e-10 * dmax) jrel = j;
    int depth = 48 + int(c);
    for (int j = jrel; j + 1 < n_vec; ++j) {
        double rho = detail::minimal_ratio(rec, lambda, p + 2 * j, depth);
        d[j + 1] = d[j] * rho;
        if (d[j + 1] == 0.0) {
            d.resize(j + 2);
            break;
        }
    }

    // Storage cut at the tail tolerance.
    int keep = int(d.size());
    double dropped = 0.0;
    for (int j = std::max({q + 1, jpeak + 1, 1}); j < int(d.size()); ++j) {
        if (std::fabs(d[j]) < kModeTailTolerance * dmax) {
            keep = j;
            dropped = std::fabs(d[j]) / dmax;
            break;
        }
    }
    d.resize(keep);

    // Flammer scale: match S (even class) or S' (odd class) to P^m_n at 0.
    OriginLadder ladder{mode.m, p};
    KahanSum phi;
    double lv = ladder.value(0);
    for (std::size_t j = 0; j < d.size(); ++j) {
        phi.add(d[j] * lv);
        lv *= ladder.ratio(p + 2 * int(j));
    }
    double target = ladder.value(q);
    if (phi.value() == 0.0)
        throw convergence_error("solve_mode: Flammer normalization degenerate: " +
                                mode_context(fam, c, mode, size));
    double scale = target / phi.value();
    for (double& x : d) x *= scale;

    mc.d = std::move(d);
    mc.truncation = int(mc.d.size());
    mc.tail_bound = dropped;
    mc.n_mn = norm_from_d(mode.m, p, mc.d);
    if (!(mc.n_mn > 0.0) || !std::isfinite(mc.n_mn))
        throw convergence_error("solve_mode: invalid normalization: " +
                                mode_context(fam, c, mode, size));
    return mc;
}

AngleEval angle_s1(const ModeCoefficients& mc, double eta) {
    if (!(eta >= -1.0 && eta <= 1.0)) throw std::invalid_argument("angle_s1: eta outside [-1,1]");
    const int m = mc.mode.m, p = mc.mode.parity();
    const int J = int(mc.d.size());

    if (std::fabs(eta) == 1.0) {
        // Endpoint limits: the (1-eta^2)^{m/2} prefactor decides everything.
        AngleEval out{0.0, 0.0};
        double sgn = eta > 0 ? 1.0 : -1.0;
        auto powsgn = [&](int l, int shift) {  // sgn^{l+shift}
            return (eta > 0 || ((l + shift) % 2 == 0)) ? 1.0 : -1.0;
        };
        if (m == 0) {
            KahanSum sv, dv;
            for (int j = 0; j < J; ++j) {
                int l = p + 2 * j;
                sv.add(mc.d[j] * powsgn(l, 0));
                dv.add(mc.d[j] * powsgn(l, 1) * 0.5 * l * (l + 1.0));
            }
            out.s = sv.value();
            out.sp = dv.value();
        } else if (m == 1) {
            // S ~ sqrt(1-eta^2): the eta-derivative diverges; sign from the
            // regular factor sum G(+-1) with G_l = P_l'.
            KahanSum g;
            for (int j = 0; j < J; ++j) {
                int l = 1 + p + 2 * j;
                g.add(mc.d[j] * powsgn(l, 1) * 0.5 * l * (l + 1.0));
            }
            out.sp = std::copysign(std::numeric_limits<double>::infinity(), -sgn * g.value());
        } else if (m == 2) {
            KahanSum dv;
            for (int j = 0; j < J; ++j) {
                int l = 2 + p + 2 * j;
                double g1 = (l + 2.0) * (l + 1.0) * l * (l - 1.0) / 8.0;  // second derivative of P_l at 1
                dv.add(mc.d[j] * powsgn(l, 0) * (-2.0 * sgn) * g1);
            }
            out.sp = dv.value();
        }
        return out;  // s
    }

    static thread_local std::vector<double> row;
    int count = p + 2 * (J - 1) + 1;
    if (int(row.size()) < count) row.resize(count);
    legendre_row(m, count, eta, row.data());

    KahanSum sv, dnum;
    for (int j = 0; j < J; ++j) {
        int jj = p + 2 * j;
        int l = m + jj;
        sv.add(mc.d[j] * row[jj]);
        double below = jj > 0 ? row[jj - 1] : 0.0;
        dnum.add(mc.d[j] * ((l + m) * below - l * eta * row[jj]));
    }
    return {sv.value(), dnum.value() / ((1.0 - eta) * (1.0 + eta))};
}

}  // namespace spheroidal
