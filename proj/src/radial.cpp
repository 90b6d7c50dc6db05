#include "spheroidal/radial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "spheroidal/detail/recurrence.hpp"
#include "spheroidal/errors.hpp"
#include "spheroidal/util.hpp"

namespace spheroidal {

namespace {

constexpr double kNeumannSeriesMinXi = 1.25;  // y-series term ratio is 1/xi^2
constexpr double kProlateAnchorXi = 1.5;
constexpr double kOblateJSeriesMinXi = 0.6;
constexpr double kWronskianGuard = 1e-4;

std::string ctx(const ModeCoefficients& mc, double xi) {
    return std::string(kind_name(mc.kind)) + " c=" + std::to_string(mc.c) +
           " m=" + std::to_string(mc.mode.m) + " n=" + std::to_string(mc.mode.n) +
           " xi=" + std::to_string(xi);
}

double double_factorial(int k) {
    double f = 1.0;
    for (int i = k; i >= 2; i -= 2) f *= i;
    return f;
}

// Taylor coefficients of the radial ODE about a regular point xi0, after
// multiplying through by sigma = xi^2 - delta:
//   P R'' + Q R' + W R = 0,
//   P = sigma^2, Q = 2 xi sigma, W = -((lambda - c^2 xi^2) sigma + delta m^2).
void taylor_coeffs(double delta, int m, double c, double lambda, double xi0, double r0,
                   double rp0, std::vector<double>& a, int nterms) {
    double s0 = xi0 * xi0 - delta;
    double P[5] = {s0 * s0, 4.0 * xi0 * s0, 4.0 * xi0 * xi0 + 2.0 * s0, 4.0 * xi0, 1.0};
    double Q[4] = {2.0 * xi0 * s0, 2.0 * (s0 + 2.0 * xi0 * xi0), 6.0 * xi0, 2.0};
    double u0 = lambda - c * c * xi0 * xi0, u1 = -2.0 * c * c * xi0, u2 = -c * c;
    double W[5];
    W[0] = -(u0 * s0 + delta * double(m) * m);
    W[1] = -(u0 * 2.0 * xi0 + u1 * s0);
    W[2] = -(u0 + u1 * 2.0 * xi0 + u2 * s0);
    W[3] = -(u1 + u2 * 2.0 * xi0);
    W[4] = -u2;

    a.assign(nterms, 0.0);
    a[0] = r0;
    if (nterms > 1) a[1] = rp0;
    for (int k = 0; k + 2 < nterms; ++k) {
        double rhs = 0.0;
        for (int i = 1; i <= 4 && i <= k + 2; ++i)
            rhs += P[i] * double(k + 2 - i) * double(k + 1 - i) * a[k + 2 - i];
        for (int i = 0; i <= 3 && i <= k + 1; ++i) rhs += Q[i] * double(k + 1 - i) * a[k + 1 - i];
        for (int i = 0; i <= 4 && i <= k; ++i) rhs += W[i] * a[k - i];
        a[k + 2] = -rhs / (P[0] * double(k + 2) * double(k + 1));
    }
}

void eval_poly(const std::vector<double>& a, double t, double& v, double& vp) {
    double s = 0.0, sp = 0.0;
    for (int k = int(a.size()) - 1; k >= 0; --k) {
        sp = sp * t + s;
        s = s * t + a[k];
    }
    v = s;
    vp = sp;
}

void taylor_step_impl(double delta, int m, double c, double lambda, double xi0, double dt,
                      double& r, double& rp) {
    static thread_local std::vector<double> a;
    for (int nterms = 96; nterms <= 1536; nterms *= 2) {
        taylor_coeffs(delta, m, c, lambda, xi0, r, rp, a, nterms);
        double v, vp;
        eval_poly(a, dt, v, vp);
        double tail = 0.0, scale = std::fabs(v) + std::fabs(vp * dt) + 1e-300;
        for (int k = nterms - 4; k < nterms; ++k) tail += std::fabs(a[k]) * std::pow(std::fabs(dt), k);
        if (tail <= 1e-15 * scale) {
            r = v;
            rp = vp;
            return;
        }
    }
    throw convergence_error("radial Taylor step failed to converge (m=" + std::to_string(m) +
                            " c=" + std::to_string(c) + " xi0=" + std::to_string(xi0) + ")");
}

// Walks (r, rp) from 'from' to 'to'; each step covers at most half the
// distance to the nearest ODE singularity (xi = +-1 prolate, +-i oblate).
void step_chain(double delta, int m, double c, double lambda, double from, double to, double& r,
                double& rp) {
    double cur = from;
    for (int guard = 0; guard < 400; ++guard) {
        double radius = delta > 0.0 ? std::fabs(cur - 1.0) : std::sqrt(1.0 + cur * cur);
        double dt = to - cur;
        if (std::fabs(dt) <= 0.5 * radius) {
            taylor_step_impl(delta, m, c, lambda, cur, dt, r, rp);
            return;
        }
        dt = std::copysign(0.5 * radius, dt);
        taylor_step_impl(delta, m, c, lambda, cur, dt, r, rp);
        cur += dt;
    }
    throw convergence_error("radial Taylor chain did not reach target xi");
}

}  // namespace

void radial_taylor_step(Kind kind, int m, double c, double lambda, double xi0, double dt,
                        double& r, double& rp) {
    taylor_step_impl(family(kind) == Kind::Prolate ? 1.0 : -1.0, m, c, lambda, xi0, dt, r, rp);
}

RadialEvaluator::RadialEvaluator(std::shared_ptr<const ModeCoefficients> mc)
    : mc_(std::move(mc)) {
    const ModeCoefficients& md = *mc_;
    m_ = md.mode.m;
    n_ = md.mode.n;
    p_ = md.mode.parity();
    c_ = md.c;
    lambda_ = md.lambda;
    delta_ = md.kind == Kind::Prolate ? 1.0 : -1.0;

    // f_r = ((2m+r)!/r!) d_r via the ratio ladder.
    double facr = 1.0;
    for (int i = 2; i <= 2 * m_ + p_; ++i) facr *= i;  // (2m+p)!/p!, p in {0,1}
    f_.resize(md.d.size());
    KahanSum fsum;
    for (std::size_t j = 0; j < md.d.size(); ++j) {
        f_[j] = facr * md.d[j];
        fsum.add(f_[j]);
        int r = p_ + 2 * int(j);
        facr *= (2.0 * m_ + r + 2.0) * (2.0 * m_ + r + 1.0) / ((r + 2.0) * (r + 1.0));
    }
    F_ = fsum.value();
    if (F_ == 0.0 || !std::isfinite(F_))
        throw convergence_error("radial: degenerate joining sum: " + ctx(md, 0.0));

    int k = (p_ - (n_ - m_)) / 2;  // i^{p+m-n} = (-1)^k with integer k
    sign0_ = (((k % 2) + 2) % 2 == 0) ? 1.0 : -1.0;

    if (md.kind == Kind::Oblate && c_ > 0.0) {
        // Anchor chain covering the small-xi region where the Neumann series
        // diverges: exact xi = 0 values, then Taylor expansions at 0, 0.55,
        // 1.05 (each handoff stays well inside the local convergence disk).
        double r1, r1p, r2, r2p;
        disk_values(r1, r1p, r2, r2p);
        static const double centers[3] = {0.0, 0.55, 1.05};
        anchors_.resize(3);
        double v1 = r1, v1p = r1p, v2 = r2, v2p = r2p;
        for (int i = 0; i < 3; ++i) {
            anchors_[i].xi0 = centers[i];
            taylor_coeffs(delta_, m_, c_, lambda_, centers[i], v1, v1p, anchors_[i].a1, 160);
            taylor_coeffs(delta_, m_, c_, lambda_, centers[i], v2, v2p, anchors_[i].a2, 160);
            if (i + 1 < 3) {
                double dt = centers[i + 1] - centers[i];
                eval_poly(anchors_[i].a1, dt, v1, v1p);
                eval_poly(anchors_[i].a2, dt, v2, v2p);
            }
        }
    }
}

void RadialEvaluator::disk_values(double& r1, double& r1p, double& r2, double& r2p) const {
    if (!(c_ > 0.0)) throw std::domain_error("radial_at_disk: requires c > 0");
    if (p_ == 0) {
        // Even class: R1(0) from the r = 0 term of the Bessel series; R2(0)
        // vanishes by parity and R2'(0) follows from the Wronskian 1/c at 0.
        double A = sign0_ * f_[0] * std::pow(c_, m_) / (double_factorial(2 * m_ + 1) * F_);
        r1 = A;
        r1p = 0.0;
        r2 = 0.0;
        r2p = 1.0 / (c_ * A);
    } else {
        // Odd class: R1(0) = 0, R1'(0) from the r = 1 term; Wronskian gives
        // R2(0) = -1/(c R1'(0)).
        double Ap = sign0_ * f_[0] * std::pow(c_, m_ + 1) / (double_factorial(2 * m_ + 3) * F_);
        r1 = 0.0;
        r1p = Ap;
        r2 = -1.0 / (c_ * Ap);
        r2p = 0.0;
    }
    if (!std::isfinite(r2) || !std::isfinite(r2p))
        throw convergence_error("radial_at_disk: value out of range: " + ctx(*mc_, 0.0));
}

RadialEval RadialEvaluator::at_disk() const {
    if (mc_->kind != Kind::Oblate)
        throw std::domain_error("radial_at_disk: oblate coefficients required");
    double r1, r1p, r2, r2p;
    disk_values(r1, r1p, r2, r2p);
    RadialEval out;
    out.r1 = r1;
    out.r1p = r1p;
    out.r3 = {r1, r2};
    out.r3p = {r1p, r2p};
    out.wronskian_residual = 0.0;  // exact by construction
    return out;
}

double RadialEvaluator::taylor_from_disk(double xi, bool second_kind, double& deriv) const {
    int i = int(anchors_.size()) - 1;
    while (i > 0 && anchors_[i].xi0 > xi) --i;
    const Anchor& an = anchors_[i];
    double v, vp;
    eval_poly(second_kind ? an.a2 : an.a1, xi - an.xi0, v, vp);
    deriv = vp;
    return v;
}

RadialEvaluator::SeriesSums RadialEvaluator::bessel_series(double xi, BesselWorkspace& ws,
                                                           bool neumann) const {
    const double x = c_ * xi;
    const int J = int(f_.size());
    KahanSum s, sp;
    double sgn = sign0_;

    if (!neumann) {
        int lmax = m_ + p_ + 2 * (J - 1);
        ws.ensure(std::max(lmax, 1));
        for (int j = 0; j < J; ++j) {
            int l = m_ + p_ + 2 * j;
            double jl = ws.j[l];
            double jp = (l == 0) ? -ws.j[1] : ws.j[l - 1] - (l + 1.0) / x * ws.j[l];
            s.add(sgn * f_[j] * jl);
            sp.add(sgn * f_[j] * jp);
            sgn = -sgn;
        }
        return {s.value(), sp.value()};
    }

    // Neumann series: term ratio tends to 1/xi^2, so near xi = 1.25 the sum
    // needs coefficients far past the stored tail; those are regenerated from
    // the continued-fraction minimal ratios.  y_l stays in scaled form.
    static thread_local std::vector<double> ext;
    ext.clear();
    detail::Recurrence rec{m_, delta_ > 0.0 ? c_ * c_ : -c_ * c_};
    const int cf_depth = 48 + int(c_);
    double smax = 0.0, spmax = 0.0;
    int small_run = 0;
    const int jmin_stop = (n_ - m_) / 2 + 3;
    double fj = 0.0;
    const int cap = 60000;
    for (int j = 0; j < cap; ++j) {
        int r = p_ + 2 * j;
        int l = m_ + r;
        ws.ensure(std::max(l, 1));
        if (j < J) {
            fj = f_[j];
        } else {
            std::size_t need = std::size_t(j - J) + 1;
            while (ext.size() < need) {
                int r_lo = p_ + 2 * (J - 1 + int(ext.size()));
                int blk = 64;
                std::vector<double> tmp(blk);
                double rho = 0.0;
                for (int rr = r_lo + 2 * (blk + cf_depth); rr >= r_lo; rr -= 2) {
                    double den = rec.beta(rr + 2) - lambda_ + rec.alpha(rr + 2) * rho;
                    if (den == 0.0) den = 1e-300;
                    rho = -rec.gamma(rr + 2) / den;
                    int idx = (rr - r_lo) / 2;
                    if (idx < blk) tmp[idx] = rho;
                }
                ext.insert(ext.end(), tmp.begin(), tmp.end());
            }
            int rr = r - 2;
            double fac_ratio =
                (2.0 * m_ + rr + 2.0) * (2.0 * m_ + rr + 1.0) / ((rr + 2.0) * (rr + 1.0));
            fj *= fac_ratio * ext[std::size_t(j - J)];
            if (fj == 0.0) return {s.value(), sp.value()};
        }

        double yl = ws.ym[l];
        double ylm1 = l >= 1 ? std::ldexp(ws.ym[l - 1], ws.ye[l - 1] - ws.ye[l]) : 0.0;
        double ypl;
        if (l == 0) {
            ws.ensure(1);
            ypl = -std::ldexp(ws.ym[1], ws.ye[1] - ws.ye[0]);
        } else {
            ypl = ylm1 - (l + 1.0) / x * yl;
        }
        double t = sgn * std::ldexp(fj * yl, ws.ye[l]);
        double tp = sgn * std::ldexp(fj * ypl, ws.ye[l]);
        s.add(t);
        sp.add(tp);
        sgn = -sgn;

        smax = std::max(smax, std::fabs(s.value()));
        spmax = std::max(spmax, std::fabs(sp.value()));
        if (!std::isfinite(s.value()) || !std::isfinite(sp.value()))
            throw convergence_error("radial Neumann series overflow: " + ctx(*mc_, xi));
        if (j >= jmin_stop && std::fabs(t) <= 5e-17 * smax && std::fabs(tp) <= 5e-17 * spmax) {
            if (++small_run >= 4) return {s.value(), sp.value()};
        } else {
            small_run = 0;
        }
    }
    throw convergence_error("radial Neumann series did not converge: " + ctx(*mc_, xi));
}

RadialEval RadialEvaluator::eval(double xi, BesselWorkspace* ws) const {
    const ModeCoefficients& mc = *mc_;
    if (!(c_ > 0.0)) throw std::domain_error("radial: requires c > 0");
    static thread_local BesselWorkspace local;
    double r1 = 0.0, r1p = 0.0, r2 = 0.0, r2p = 0.0;

    if (delta_ > 0.0) {  // prolate
        if (!(xi > 1.0)) throw std::domain_error("radial: prolate requires xi > 1");
        BesselWorkspace* w = ws;
        if (!w) {
            local.reset(c_ * xi, max_order() + 2);
            w = &local;
        }
        double pref = std::pow((xi - 1.0) * (xi + 1.0) / (xi * xi), 0.5 * m_);
        double prefp = pref * m_ * delta_ / (xi * (xi * xi - delta_));
        SeriesSums sj = bessel_series(xi, *w, false);
        r1 = pref * sj.sum / F_;
        r1p = prefp * sj.sum / F_ + pref * c_ * sj.sump / F_;
        if (xi >= kNeumannSeriesMinXi) {
            SeriesSums sy = bessel_series(xi, *w, true);
            r2 = pref * sy.sum / F_;
            r2p = prefp * sy.sum / F_ + pref * c_ * sy.sump / F_;
        } else {
            // Anchor the second kind where the Neumann series is solid and
            // continue the ODE inward; R2 grows toward xi = 1, so the inward
            // continuation follows the dominant solution and stays stable.
            static thread_local BesselWorkspace anchor_ws;
            const double axi = kProlateAnchorXi;
            anchor_ws.reset(c_ * axi, max_order() + 2);
            double apref = std::pow((axi - 1.0) * (axi + 1.0) / (axi * axi), 0.5 * m_);
            double aprefp = apref * m_ * delta_ / (axi * (axi * axi - delta_));
            SeriesSums sy = bessel_series(axi, anchor_ws, true);
            r2 = apref * sy.sum / F_;
            r2p = aprefp * sy.sum / F_ + apref * c_ * sy.sump / F_;
            step_chain(delta_, m_, c_, lambda_, axi, xi, r2, r2p);
        }
    } else {  // oblate
        if (!(xi >= 0.0)) throw std::domain_error("radial: oblate requires xi >= 0");
        if (xi == 0.0) return at_disk();
        BesselWorkspace* w = nullptr;
        if (xi >= kOblateJSeriesMinXi) {
            w = ws;
            if (!w) {
                local.reset(c_ * xi, max_order() + 2);
                w = &local;
            }
        }
        double pref = std::pow((xi * xi + 1.0) / (xi * xi), 0.5 * m_);
        double prefp = pref * m_ * delta_ / (xi * (xi * xi - delta_));
        if (xi >= kOblateJSeriesMinXi) {
            SeriesSums sj = bessel_series(xi, *w, false);
            r1 = pref * sj.sum / F_;
            r1p = prefp * sj.sum / F_ + pref * c_ * sj.sump / F_;
        } else {
            r1 = taylor_from_disk(xi, false, r1p);
        }
        if (xi >= kNeumannSeriesMinXi) {
            SeriesSums sy = bessel_series(xi, *w, true);
            r2 = pref * sy.sum / F_;
            r2p = prefp * sy.sum / F_ + pref * c_ * sy.sump / F_;
        } else {
            r2 = taylor_from_disk(xi, true, r2p);
        }
    }

    RadialEval out;
    out.r1 = r1;
    out.r1p = r1p;
    out.r3 = {r1, r2};
    out.r3p = {r1p, r2p};
    double sigma = xi * xi - delta_;
    out.wronskian_residual = std::fabs(c_ * sigma * (r1 * r2p - r1p * r2) - 1.0);
    if (!(out.wronskian_residual < kWronskianGuard) || !std::isfinite(r1) || !std::isfinite(r2))
        throw convergence_error("radial: accuracy breakdown (Wronskian residual " +
                                std::to_string(out.wronskian_residual) + "): " + ctx(mc, xi));
    return out;
}

RadialEval radial(const ModeCoefficients& mc, double xi) {
    RadialEvaluator ev(std::make_shared<ModeCoefficients>(mc));
    return ev.eval(xi);
}

RadialEval radial_at_disk(const ModeCoefficients& mc) {
    RadialEvaluator ev(std::make_shared<ModeCoefficients>(mc));
    return ev.at_disk();
}

}  // namespace spheroidal
