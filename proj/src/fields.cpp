#include "spheroidal/fields.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "spheroidal/cache.hpp"
#include "spheroidal/errors.hpp"
#include "spheroidal/legendre.hpp"
#include "spheroidal/util.hpp"

namespace spheroidal {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kFourPi = 12.566370614359172953850573533118;

double eps_m(int m) { return m == 0 ? 1.0 : 2.0; }

Complex ipow(int n) {
    switch (((n % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

double xi_lower(Kind kind) { return family(kind) == Kind::Prolate ? 1.0 : 0.0; }

// Boundary factor F = (R1 + alpha R1') / (R3 + alpha R3'); Soft and Hard are
// the alpha = 0 and alpha -> inf reductions and Robin(0) dispatches to the
// Soft path so the two are bit-identical.
Complex bc_factor(const BoundaryCondition& bc, const RadialEval& r) {
    Complex num, den;
    switch (bc.type) {
        case BoundaryCondition::Type::Soft:
            num = r.r1;
            den = r.r3;
            break;
        case BoundaryCondition::Type::Hard:
            num = r.r1p;
            den = r.r3p;
            break;
        case BoundaryCondition::Type::Robin:
            if (bc.alpha == Complex{0.0, 0.0}) return bc_factor(BoundaryCondition::soft(), r);
            num = r.r1 + bc.alpha * r.r1p;
            den = r.r3 + bc.alpha * r.r3p;
            break;
    }
    if (std::abs(den) == 0.0)
        throw convergence_error("solve_scattering: vanishing boundary denominator (resonance-like)");
    return num / den;
}

// Typical magnitude of S_mn over eta, used for contribution estimates.
double angle_scale(const ModeCoefficients& mc) {
    return std::sqrt(std::max(mc.n_mn, 0.0) * (mc.mode.n + 0.5));
}

struct Caps {
    int n_floor, n_cap, m_cap;
};

Caps resolve_caps(const TruncationPolicy& pol, double c, double xi_scale) {
    Caps caps;
    caps.n_floor = int(std::ceil(2.0 * c)) + 16;
    int auto_n = std::max(caps.n_floor, int(std::ceil(2.0 * c * std::max(1.0, xi_scale))) + 24);
    caps.n_cap = pol.max_n_excess > 0 ? std::max(pol.max_n_excess, caps.n_floor) : auto_n;
    caps.m_cap = pol.max_m > 0 ? pol.max_m : int(std::ceil(2.0 * c * std::max(1.0, xi_scale))) + 24;
    return caps;
}

Vec3 plane_wavevector(double k, double theta0) {
    return {k * std::sin(theta0), 0.0, k * std::cos(theta0)};
}

// d(x,y,z)/dxi of the coordinate map at a spheroidal point.
Vec3 dxyz_dxi(const Geometry& g, const SpheroidalPoint& p) {
    double delta = family(g.kind) == Kind::Prolate ? 1.0 : -1.0;
    double se = std::sqrt((1.0 - p.eta) * (1.0 + p.eta));
    double sx = std::sqrt(p.xi * p.xi - delta);
    double dr = g.a * se * (sx > 0.0 ? p.xi / sx : 0.0);
    return {dr * std::cos(p.phi), dr * std::sin(p.phi), g.a * p.eta};
}

}  // namespace

void ScatteringProblem::validate() const {
    if (!(k > 0.0)) throw std::invalid_argument("ScatteringProblem: k must be > 0");
    if (geometry.kind == Kind::Disk && xi1 != 0.0)
        throw std::invalid_argument("ScatteringProblem: disk requires xi1 = 0");
    if (family(geometry.kind) == Kind::Prolate) {
        if (!(xi1 > 1.0)) throw std::invalid_argument("ScatteringProblem: prolate requires xi1 > 1");
    } else {
        if (!(xi1 >= 0.0)) throw std::invalid_argument("ScatteringProblem: oblate requires xi1 >= 0");
    }
    if (!(truncation.rel_tol > 0.0))
        throw std::invalid_argument("ScatteringProblem: rel_tol must be > 0");
    if (truncation.consecutive_small < 1)
        throw std::invalid_argument("ScatteringProblem: consecutive_small >= 1");
    if (const auto* ps = std::get_if<PointSource>(&source)) {
        if (!(ps->eta0 >= -1.0 && ps->eta0 <= 1.0))
            throw std::invalid_argument("ScatteringProblem: eta0 outside [-1,1]");
        if (!(ps->xi0 > xi1))
            throw std::invalid_argument("ScatteringProblem: point source must lie outside the surface (xi0 > xi1)");
    }
    if (const auto* bcr = &bc; bcr->type == BoundaryCondition::Type::Robin) {
        if (!std::isfinite(bcr->alpha.real()) || !std::isfinite(bcr->alpha.imag()))
            throw std::invalid_argument("ScatteringProblem: robin alpha must be finite");
    }
}

ModeProvider::ModeProvider(Kind kind, double c, std::optional<std::filesystem::path> cache_dir)
    : kind_(family(kind)), c_(c), cache_dir_(std::move(cache_dir)) {}

const ModeProvider::Handle& ModeProvider::get(int m, int n) {
    auto it = memo_.find({m, n});
    if (it != memo_.end()) return it->second;
    std::shared_ptr<const ModeCoefficients> mc;
    if (cache_dir_) {
        if (auto hit = load(*cache_dir_, CacheKey{kind_, c_, m, n}))
            mc = std::make_shared<const ModeCoefficients>(std::move(*hit));
    }
    if (!mc) mc = std::make_shared<const ModeCoefficients>(solve_mode(kind_, c_, {m, n}));
    Handle h{mc, std::make_shared<const RadialEvaluator>(mc)};
    return memo_.emplace(std::pair<int, int>{m, n}, std::move(h)).first->second;
}

Complex incident_exact(const Geometry& g, const IncidentSource& src, double k, const Vec3& point) {
    if (const auto* pw = std::get_if<PlaneWave>(&src)) {
        Vec3 kv = plane_wavevector(k, pw->theta0);
        double phase = kv.x * point.x + kv.y * point.y + kv.z * point.z;
        return std::polar(1.0, phase);
    }
    const auto& ps = std::get<PointSource>(src);
    Vec3 src_pos = to_cartesian(g, {ps.eta0, ps.xi0, 0.0});
    Vec3 d = point - src_pos;
    double r = std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
    if (r == 0.0) throw std::domain_error("incident_exact: evaluation at the point-source location");
    return std::polar(1.0 / (kFourPi * r), k * r);
}

std::pair<Complex, Complex> incident_exact_with_xi_derivative(const Geometry& g,
                                                              const IncidentSource& src, double k,
                                                              const SpheroidalPoint& p) {
    Vec3 pos = to_cartesian(g, p);
    Vec3 dxi = dxyz_dxi(g, p);
    if (const auto* pw = std::get_if<PlaneWave>(&src)) {
        Vec3 kv = plane_wavevector(k, pw->theta0);
        Complex v = std::polar(1.0, kv.x * pos.x + kv.y * pos.y + kv.z * pos.z);
        Complex dphase{0.0, kv.x * dxi.x + kv.y * dxi.y + kv.z * dxi.z};
        return {v, v * dphase};
    }
    const auto& ps = std::get<PointSource>(src);
    Vec3 src_pos = to_cartesian(g, {ps.eta0, ps.xi0, 0.0});
    Vec3 d = pos - src_pos;
    double r = std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
    if (r == 0.0) throw std::domain_error("incident_exact: evaluation at the point-source location");
    Complex v = std::polar(1.0 / (kFourPi * r), k * r);
    double dr_dxi = (d.x * dxi.x + d.y * dxi.y + d.z * dxi.z) / r;
    Complex dv = v * (Complex{0.0, k} - 1.0 / r) * dr_dxi;
    return {v, dv};
}

namespace {

// Incident-series coefficient of one mode; multiply by S_mn(eta) cos(m phi)
// and the radial factor carried separately.
Complex incident_coefficient(const IncidentSource& src, double k, const ModeCoefficients& mc) {
    if (const auto* pw = std::get_if<PlaneWave>(&src)) {
        double s0 = angle_s1(mc, std::cos(pw->theta0)).s;
        return 2.0 * eps_m(mc.mode.m) * ipow(mc.mode.n) / mc.n_mn * s0;
    }
    const auto& ps = std::get<PointSource>(src);
    double s0 = angle_s1(mc, ps.eta0).s;
    return Complex{0.0, k / kTwoPi} * eps_m(mc.mode.m) / mc.n_mn * s0;
}

}  // namespace

WaveCoefficients solve_scattering(const ScatteringProblem& pb, ModeProvider& provider) {
    pb.validate();
    const double c = pb.c();
    if (provider.kind() != family(pb.geometry.kind) || provider.c() != c)
        throw std::invalid_argument("solve_scattering: provider kind/c mismatch");
    const auto* ps = std::get_if<PointSource>(&pb.source);
    Caps caps = resolve_caps(pb.truncation, c, pb.xi1);
    const double rel_tol = pb.truncation.rel_tol;
    const int need_small = pb.truncation.consecutive_small;

    WaveCoefficients out;
    double running_max = 0.0;
    double tail = 0.0;
    int m_small = 0;
    for (int m = 0; m <= caps.m_cap; ++m) {
        double m_contrib = 0.0;
        int n_small = 0;
        for (int n = m; n - m <= caps.n_cap; ++n) {
            const auto& h = provider.get(m, n);
            RadialEval rs = h.rad->eval(pb.xi1);
            Complex fb = bc_factor(pb.bc, rs);
            Complex inc = incident_coefficient(pb.source, pb.k, *h.mc);
            Complex b = -inc * fb;
            if (ps) b *= h.rad->eval(ps->xi0).r3;
            out.modes.push_back({m, n, Complex{0.0, 0.0}, b, h.mc, h.rad});
            double u = std::abs(b) * std::abs(rs.r3) * angle_scale(*h.mc);
            running_max = std::max(running_max, u);
            m_contrib = std::max(m_contrib, u);
            tail = u;
            if (n - m >= 4 && u <= rel_tol * running_max) {
                if (++n_small >= need_small) break;
            } else {
                n_small = 0;
            }
        }
        out.max_m_used = m;
        if (m >= 1 && m_contrib <= rel_tol * running_max) {
            if (++m_small >= need_small) break;
        } else {
            m_small = 0;
        }
    }
    out.tail_estimate = running_max > 0.0 ? tail / running_max : 0.0;
    return out;
}

namespace {

// Shared per-point scattered-series evaluation.  Row buffers are rebuilt on
// every m change; the Bessel workspace is shared by all modes of the point.
struct ScatterEvalPlan {
    std::map<int, int> row_len;  // per m: Legendre row length needed
    int l_cap = 2;
    Kind kind = Kind::Prolate;

    explicit ScatterEvalPlan(const WaveCoefficients& coeffs) {
        for (const auto& e : coeffs.modes) {
            if (std::abs(e.b) == 0.0) continue;
            const auto& mc = *e.mc;
            int count = mc.mode.parity() + 2 * (int(mc.d.size()) - 1) + 1;
            auto& rl = row_len[e.m];
            rl = std::max(rl, count);
            l_cap = std::max(l_cap, e.rad->max_order() + 2);
            kind = mc.kind;
        }
    }
};

Complex scattered_sum(const WaveCoefficients& coeffs, const ScatterEvalPlan& plan, double c,
                      const SpheroidalPoint& sp, bool derivative, BesselWorkspace& ws,
                      std::vector<double>& row) {
    BesselWorkspace* wsp = nullptr;
    if (plan.kind == Kind::Prolate || sp.xi >= 0.6) {
        ws.reset(c * sp.xi, plan.l_cap);
        wsp = &ws;
    }
    KahanSum re, im;
    int cur_m = -1;
    double cosm = 1.0;
    for (const auto& e : coeffs.modes) {
        if (std::abs(e.b) == 0.0) continue;
        if (e.m != cur_m) {
            cur_m = e.m;
            int count = plan.row_len.at(e.m);
            if (int(row.size()) < count) row.resize(count);
            legendre_row(e.m, count, sp.eta, row.data());
            cosm = std::cos(e.m * sp.phi);
        }
        const auto& mc = *e.mc;
        int p = mc.mode.parity();
        KahanSum sv;
        for (std::size_t j = 0; j < mc.d.size(); ++j) sv.add(mc.d[j] * row[p + 2 * j]);
        RadialEval r = e.rad->eval(sp.xi, wsp);
        Complex term = e.b * (derivative ? r.r3p : r.r3) * (sv.value() * cosm);
        re.add(term.real());
        im.add(term.imag());
    }
    return {re.value(), im.value()};
}

}  // namespace

bool is_inside_scatterer(const ScatteringProblem& pb, const Vec3& point) {
    SpheroidalPoint sp = from_cartesian(pb.geometry, point);
    return sp.xi < pb.xi1 * (1.0 - 1e-12) - 1e-15;
}

std::vector<Complex> eval_field(const ScatteringProblem& pb, const WaveCoefficients& coeffs,
                                std::span<const Vec3> points, FieldKind which, int threads) {
    pb.validate();
    const double c = pb.c();
    ScatterEvalPlan plan(coeffs);
    std::vector<Complex> out(points.size());
    std::exception_ptr eptr;
    std::mutex emu;
    parallel_for(
        points.size(),
        [&](std::size_t b, std::size_t e) {
            try {
                BesselWorkspace ws;
                std::vector<double> row;
                for (std::size_t i = b; i < e; ++i) {
                    SpheroidalPoint sp = from_cartesian(pb.geometry, points[i]);
                    if (sp.xi < pb.xi1 * (1.0 - 1e-12) - 1e-15)
                        throw std::domain_error("eval_field: point inside the scatterer");
                    Complex v{0.0, 0.0};
                    if (which != FieldKind::Scattered)
                        v += incident_exact(pb.geometry, pb.source, pb.k, points[i]);
                    if (which != FieldKind::Incident)
                        v += scattered_sum(coeffs, plan, c, sp, false, ws, row);
                    out[i] = v;
                }
            } catch (...) {
                std::scoped_lock lk(emu);
                if (!eptr) eptr = std::current_exception();
            }
        },
        threads);
    if (eptr) std::rethrow_exception(eptr);
    return out;
}

namespace {

// Incident series restricted to the surface xi = xi1: per-mode coefficients
// for the value and the xi-derivative, truncated independently of the
// scattered mode set.
struct SurfaceIncident {
    struct Entry {
        int m, n;
        Complex val, der;
        std::shared_ptr<const ModeCoefficients> mc;
    };
    std::vector<Entry> entries;
};

SurfaceIncident assemble_incident_surface(const ScatteringProblem& pb, ModeProvider& provider) {
    const double c = pb.c();
    const auto* ps = std::get_if<PointSource>(&pb.source);
    Caps caps = resolve_caps(pb.truncation, c, pb.xi1);
    const double rel_tol = pb.truncation.rel_tol;
    const int need_small = pb.truncation.consecutive_small;
    const double dscale = 1.0 / (c + 1.0);

    SurfaceIncident si;
    double running_max = 0.0;
    int m_small = 0;
    for (int m = 0; m <= caps.m_cap; ++m) {
        double m_contrib = 0.0;
        int n_small = 0;
        for (int n = m; n - m <= caps.n_cap; ++n) {
            const auto& h = provider.get(m, n);
            RadialEval rs = h.rad->eval(pb.xi1);
            Complex inc = incident_coefficient(pb.source, pb.k, *h.mc);
            Complex val = inc * rs.r1;
            Complex der = inc * rs.r1p;
            if (ps) {
                Complex r3src = h.rad->eval(ps->xi0).r3;
                val *= r3src;
                der *= r3src;
            }
            si.entries.push_back({m, n, val, der, h.mc});
            double u = (std::abs(val) + std::abs(der) * dscale) * angle_scale(*h.mc);
            running_max = std::max(running_max, u);
            m_contrib = std::max(m_contrib, u);
            if (n - m >= 4 && u <= rel_tol * running_max) {
                if (++n_small >= need_small) break;
            } else {
                n_small = 0;
            }
        }
        if (m >= 1 && m_contrib <= rel_tol * running_max) {
            if (++m_small >= need_small) break;
        } else {
            m_small = 0;
        }
    }
    return si;
}

}  // namespace

std::vector<Complex> eval_field_xi_derivative(const ScatteringProblem& pb,
                                              const WaveCoefficients& coeffs,
                                              ModeProvider& provider,
                                              std::span<const SpheroidalPoint> points,
                                              FieldKind which) {
    pb.validate();
    const double c = pb.c();
    for (const auto& p : points)
        if (std::fabs(p.xi - pb.xi1) > 1e-9 * std::max(1.0, pb.xi1))
            throw std::invalid_argument("eval_field_xi_derivative: points must lie on xi = xi1");

    SurfaceIncident si;
    if (which != FieldKind::Scattered) si = assemble_incident_surface(pb, provider);

    ScatterEvalPlan plan(coeffs);
    std::vector<Complex> out(points.size());
    BesselWorkspace ws;
    std::vector<double> row;
    for (std::size_t i = 0; i < points.size(); ++i) {
        Complex v{0.0, 0.0};
        if (which != FieldKind::Scattered) {
            KahanSum re, im;
            for (const auto& e : si.entries) {
                double s = angle_s1(*e.mc, points[i].eta).s;
                Complex term = e.der * s * std::cos(e.m * points[i].phi);
                re.add(term.real());
                im.add(term.imag());
            }
            v += Complex{re.value(), im.value()};
        }
        if (which != FieldKind::Incident)
            v += scattered_sum(coeffs, plan, c, points[i], true, ws, row);
        out[i] = v;
    }
    return out;
}

Complex expand_plane_wave(const Geometry& g, double k, double theta0, const SpheroidalPoint& p,
                          const TruncationPolicy& policy, ModeProvider& provider) {
    validate_point(g, p);
    const double c = k * g.a;
    if (provider.kind() != family(g.kind) || provider.c() != c)
        throw std::invalid_argument("expand_plane_wave: provider kind/c mismatch");
    Caps caps = resolve_caps(policy, c, p.xi);
    const double rel_tol = policy.rel_tol;
    const int need_small = policy.consecutive_small;

    BesselWorkspace ws;
    bool use_ws = family(g.kind) == Kind::Prolate || p.xi >= 0.6;
    if (use_ws && p.xi > 0.0) ws.reset(c * p.xi, 8);

    KahanSum re, im;
    double term_max = 0.0, last_term = 0.0;
    int m_small = 0;
    for (int m = 0; m <= caps.m_cap; ++m) {
        double cosm = std::cos(m * p.phi);
        double m_contrib = 0.0;
        int n_small = 0;
        bool n_stopped = false;
        for (int n = m; n - m <= caps.n_cap; ++n) {
            const auto& h = provider.get(m, n);
            Complex inc = incident_coefficient(IncidentSource{PlaneWave{theta0}}, k, *h.mc);
            double s = angle_s1(*h.mc, p.eta).s;
            Complex r1 = h.rad->eval(p.xi, use_ws ? &ws : nullptr).r1;
            Complex term = inc * s * r1 * cosm;
            re.add(term.real());
            im.add(term.imag());
            double u = std::abs(term);
            term_max = std::max(term_max, u);
            m_contrib = std::max(m_contrib, u);
            last_term = u;
            if (n - m >= 4 && u <= rel_tol * term_max) {
                if (++n_small >= need_small) {
                    n_stopped = true;
                    break;
                }
            } else {
                n_small = 0;
            }
        }
        if (!n_stopped)
            throw truncation_error("expand_plane_wave: n cap reached before convergence",
                                   Complex{re.value(), im.value()},
                                   term_max > 0.0 ? last_term / term_max : 0.0);
        if (m >= 1 && m_contrib <= rel_tol * term_max) {
            if (++m_small >= need_small) return {re.value(), im.value()};
        } else {
            m_small = 0;
        }
    }
    throw truncation_error("expand_plane_wave: m cap reached before convergence",
                           Complex{re.value(), im.value()},
                           term_max > 0.0 ? last_term / term_max : 0.0);
}

Complex expand_point_source(const Geometry& g, double k, double eta0, double xi0,
                            const SpheroidalPoint& p, const TruncationPolicy& policy,
                            ModeProvider& provider) {
    validate_point(g, p);
    validate_point(g, {eta0, xi0, 0.0});
    const double c = k * g.a;
    if (provider.kind() != family(g.kind) || provider.c() != c)
        throw std::invalid_argument("expand_point_source: provider kind/c mismatch");
    {
        Vec3 a = to_cartesian(g, p), b = to_cartesian(g, {eta0, xi0, 0.0});
        Vec3 d = a - b;
        if (std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z) < 1e-12 * g.a)
            throw std::domain_error("expand_point_source: evaluation at the source location");
    }
    Caps caps = resolve_caps(policy, c, std::max(p.xi, xi0));
    const double rel_tol = policy.rel_tol;
    const int need_small = policy.consecutive_small;

    BesselWorkspace ws_pt, ws_src;
    bool use_pt = family(g.kind) == Kind::Prolate || p.xi >= 0.6;
    bool use_src = family(g.kind) == Kind::Prolate || xi0 >= 0.6;
    if (use_pt && p.xi > 0.0) ws_pt.reset(c * p.xi, 8);
    if (use_src) ws_src.reset(c * xi0, 8);

    KahanSum re, im;
    double term_max = 0.0, last_term = 0.0;
    int m_small = 0;
    for (int m = 0; m <= caps.m_cap; ++m) {
        double cosm = std::cos(m * p.phi);
        double m_contrib = 0.0;
        int n_small = 0;
        bool n_stopped = false;
        for (int n = m; n - m <= caps.n_cap; ++n) {
            const auto& h = provider.get(m, n);
            Complex inc =
                incident_coefficient(IncidentSource{PointSource{eta0, xi0}}, k, *h.mc);
            double s = angle_s1(*h.mc, p.eta).s;
            RadialEval r_pt = h.rad->eval(p.xi, use_pt ? &ws_pt : nullptr);
            RadialEval r_src = h.rad->eval(xi0, use_src ? &ws_src : nullptr);
            Complex radial_pair =
                p.xi <= xi0 ? r_pt.r1 * r_src.r3 : r_src.r1 * r_pt.r3;
            Complex term = inc * s * radial_pair * cosm;
            re.add(term.real());
            im.add(term.imag());
            double u = std::abs(term);
            term_max = std::max(term_max, u);
            m_contrib = std::max(m_contrib, u);
            last_term = u;
            if (n - m >= 4 && u <= rel_tol * term_max) {
                if (++n_small >= need_small) {
                    n_stopped = true;
                    break;
                }
            } else {
                n_small = 0;
            }
        }
        if (!n_stopped)
            throw truncation_error("expand_point_source: n cap reached before convergence",
                                   Complex{re.value(), im.value()},
                                   term_max > 0.0 ? last_term / term_max : 0.0);
        if (m >= 1 && m_contrib <= rel_tol * term_max) {
            if (++m_small >= need_small) return {re.value(), im.value()};
        } else {
            m_small = 0;
        }
    }
    throw truncation_error("expand_point_source: m cap reached before convergence",
                           Complex{re.value(), im.value()},
                           term_max > 0.0 ? last_term / term_max : 0.0);
}

SurfaceResidualReport eval_surface_residual(const ScatteringProblem& pb,
                                            const WaveCoefficients& coeffs,
                                            ModeProvider& provider, int n_eta, int n_phi) {
    pb.validate();
    SurfaceGrid grid = surface_grid(pb.geometry, pb.xi1, n_eta, n_phi);
    SurfaceIncident si = assemble_incident_surface(pb, provider);

    // Per-mode surface factors of the scattered series.
    struct Row {
        int m;
        Complex val, der;
        const ModeCoefficients* mc;
    };
    std::vector<Row> sc_rows;
    for (const auto& e : coeffs.modes) {
        if (std::abs(e.b) == 0.0) continue;
        RadialEval r = e.rad->eval(pb.xi1);
        sc_rows.push_back({e.m, e.b * r.r3, e.b * r.r3p, e.mc.get()});
    }
    std::vector<Row> in_rows;
    in_rows.reserve(si.entries.size());
    for (const auto& e : si.entries) in_rows.push_back({e.m, e.val, e.der, e.mc.get()});

    // Angle-function table over the eta nodes, shared by both series.
    std::map<const ModeCoefficients*, std::vector<double>> s_table;
    auto fill_table = [&](const std::vector<Row>& rows) {
        for (const auto& r : rows) {
            auto& v = s_table[r.mc];
            if (!v.empty()) continue;
            v.resize(grid.eta_nodes.size());
            for (std::size_t ie = 0; ie < grid.eta_nodes.size(); ++ie)
                v[ie] = angle_s1(*r.mc, grid.eta_nodes[ie]).s;
        }
    };
    fill_table(sc_rows);
    fill_table(in_rows);

    const Complex alpha = pb.bc.alpha;
    auto combine = [&](Complex v, Complex dv) -> Complex {
        switch (pb.bc.type) {
            case BoundaryCondition::Type::Soft: return v;
            case BoundaryCondition::Type::Hard: return dv;
            case BoundaryCondition::Type::Robin: return v + alpha * dv;
        }
        return v;
    };

    SurfaceResidualReport rep;
    rep.n_eta = n_eta;
    rep.n_phi = n_phi;
    double max_q_series = 0.0, max_q_exact = 0.0;
    for (std::size_t ie = 0; ie < grid.eta_nodes.size(); ++ie) {
        for (std::size_t ip = 0; ip < grid.phi_nodes.size(); ++ip) {
            const SpheroidalPoint& pt = grid.points[ie * grid.phi_nodes.size() + ip];
            auto sum_rows = [&](const std::vector<Row>& rows, Complex& v, Complex& dv) {
                KahanSum vr, vi, dr, di;
                for (const auto& r : rows) {
                    double s = s_table[r.mc][ie];
                    double cm = std::cos(r.m * pt.phi);
                    Complex tv = r.val * (s * cm), td = r.der * (s * cm);
                    vr.add(tv.real());
                    vi.add(tv.imag());
                    dr.add(td.real());
                    di.add(td.imag());
                }
                v = {vr.value(), vi.value()};
                dv = {dr.value(), di.value()};
            };
            Complex vi_s, dvi_s, vs, dvs;
            sum_rows(in_rows, vi_s, dvi_s);
            sum_rows(sc_rows, vs, dvs);
            auto [vi_e, dvi_e] = incident_exact_with_xi_derivative(pb.geometry, pb.source, pb.k, pt);

            max_q_series = std::max(max_q_series, std::abs(combine(vi_s + vs, dvi_s + dvs)));
            max_q_exact = std::max(max_q_exact, std::abs(combine(vi_e + vs, dvi_e + dvs)));
            rep.scale_series = std::max(rep.scale_series, std::abs(combine(vi_s, dvi_s)));
            rep.scale_exact = std::max(rep.scale_exact, std::abs(combine(vi_e, dvi_e)));
        }
    }
    rep.residual_series = rep.scale_series > 0.0 ? max_q_series / rep.scale_series : 0.0;
    rep.residual_exact = rep.scale_exact > 0.0 ? max_q_exact / rep.scale_exact : 0.0;
    return rep;
}

}  // namespace spheroidal
