#include "spheroidal/coords.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spheroidal/legendre.hpp"

namespace spheroidal {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Maps atan2 output onto [0, 2*pi).
double wrap_phi(double y, double x) {
    if (x == 0.0 && y == 0.0) return 0.0;
    double phi = std::atan2(y, x);
    if (phi < 0.0) phi += kTwoPi;
    if (phi >= kTwoPi) phi = 0.0;
    return phi;
}

}  // namespace

void validate_point(const Geometry& g, const SpheroidalPoint& p) {
    if (!(p.eta >= -1.0 && p.eta <= 1.0))
        throw std::invalid_argument("SpheroidalPoint: eta outside [-1,1]");
    double xi_lo = family(g.kind) == Kind::Prolate ? 1.0 : 0.0;
    if (!(p.xi >= xi_lo)) throw std::invalid_argument("SpheroidalPoint: xi below lower bound");
    if (!std::isfinite(p.phi)) throw std::invalid_argument("SpheroidalPoint: phi not finite");
}

Vec3 to_cartesian(const Geometry& g, const SpheroidalPoint& p) {
    validate_point(g, p);
    // Factored differences keep full relative accuracy near eta = +-1 and
    // xi = 1.
    double se = (1.0 - p.eta) * (1.0 + p.eta);
    double sx = family(g.kind) == Kind::Prolate ? (p.xi - 1.0) * (p.xi + 1.0)
                                                : p.xi * p.xi + 1.0;
    double rho = g.a * std::sqrt(se) * std::sqrt(sx);
    return {rho * std::cos(p.phi), rho * std::sin(p.phi), g.a * p.eta * p.xi};
}

SpheroidalPoint from_cartesian(const Geometry& g, const Vec3& v) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z))
        throw std::invalid_argument("from_cartesian: coordinates must be finite");
    const double a = g.a;
    const double rho = std::hypot(v.x, v.y);
    const double az = std::fabs(v.z);
    SpheroidalPoint p{};

    if (family(g.kind) == Kind::Prolate) {
        // Foci at z = +-a:  r1 + r2 = 2 a xi,  eta = z / (a xi).
        double r1 = std::hypot(rho, az - a);
        double r2 = std::hypot(rho, az + a);
        // xi - 1 assembled from nonnegative pieces; no cancellation.
        double t1 = rho * rho / (r1 + std::fabs(az - a));
        double t2 = rho * rho / (r2 + az + a);
        double xim1 = (2.0 * std::max(az - a, 0.0) + t1 + t2) / (2.0 * a);
        p.xi = 1.0 + xim1;
        p.eta = v.z / (a * p.xi);
    } else {
        // Focal ring of radius a in the z = 0 plane; meridian distances to
        // the nearest/farthest ring points give sqrt(1+xi^2) = (d1+d2)/(2a).
        double d1 = std::hypot(rho - a, v.z);
        double d2 = std::hypot(rho + a, v.z);
        double t1 = v.z * v.z / (d1 + std::fabs(rho - a));
        double t2 = v.z * v.z / (d2 + rho + a);
        double um1 = (2.0 * std::max(rho - a, 0.0) + t1 + t2) / (2.0 * a);  // sqrt(1+xi^2) - 1
        p.xi = std::sqrt(um1 * (um1 + 2.0));
        if (p.xi > 0.0 && v.z != 0.0) {
            p.eta = v.z / (a * p.xi);
        } else if (p.xi > 0.0) {
            p.eta = 0.0;
        } else {
            // On the disk itself the two faces fold onto one point; take the
            // eta >= 0 branch.
            double s = std::min(rho / a, 1.0);
            p.eta = std::sqrt((1.0 - s) * (1.0 + s));
        }
    }

    p.eta = std::clamp(p.eta, -1.0, 1.0);
    if (p.eta == 0.0) p.eta = 0.0;  // normalize -0 to +0
    p.phi = wrap_phi(v.y, v.x);
    return p;
}

SurfaceGrid surface_grid(const Geometry& g, double xi1, int n_eta, int n_phi) {
    double xi_lo = family(g.kind) == Kind::Prolate ? 1.0 : 0.0;
    if (!(xi1 >= xi_lo)) throw std::invalid_argument("surface_grid: invalid xi1 for kind");
    if (n_eta < 1 || n_phi < 1) throw std::invalid_argument("surface_grid: need n_eta, n_phi >= 1");

    GaussLegendre gl = gauss_legendre(n_eta);
    SurfaceGrid grid;
    grid.eta_nodes = gl.nodes;
    grid.eta_weights = gl.weights;
    grid.phi_nodes.resize(n_phi);
    for (int i = 0; i < n_phi; ++i) grid.phi_nodes[i] = kTwoPi * i / n_phi;
    grid.points.reserve(std::size_t(n_eta) * n_phi);
    for (int ie = 0; ie < n_eta; ++ie)
        for (int ip = 0; ip < n_phi; ++ip)
            grid.points.push_back({grid.eta_nodes[ie], xi1, grid.phi_nodes[ip]});
    return grid;
}

Vec3 FrameRotation::to_canonical(const Vec3& v) const {
    double c = std::cos(angle), s = std::sin(angle);
    return {c * v.x + s * v.y, -s * v.x + c * v.y, v.z};
}

Vec3 FrameRotation::to_world(const Vec3& v) const {
    double c = std::cos(angle), s = std::sin(angle);
    return {c * v.x - s * v.y, s * v.x + c * v.y, v.z};
}

}  // namespace spheroidal
