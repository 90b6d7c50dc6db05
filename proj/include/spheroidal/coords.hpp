#pragma once

#include <vector>

#include "spheroidal/geometry.hpp"

namespace spheroidal {

struct Vec3 {
    double x = 0, y = 0, z = 0;
};

inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }

// (eta, xi, phi) with eta in [-1,1], xi >= 1 (prolate) or >= 0 (oblate/disk),
// phi in [0, 2*pi).  Conventions: phi = 0 on the z axis; eta carries the sign
// of z, with eta = +0 on the z = 0 plane (prolate) and eta >= 0 on the disk
// itself (oblate xi = 0).
struct SpheroidalPoint {
    double eta, xi, phi;
};

// Throws std::invalid_argument when p violates the range invariants for g.kind.
void validate_point(const Geometry& g, const SpheroidalPoint& p);

Vec3 to_cartesian(const Geometry& g, const SpheroidalPoint& p);

SpheroidalPoint from_cartesian(const Geometry& g, const Vec3& v);
inline SpheroidalPoint from_cartesian(const Geometry& g, double x, double y, double z) {
    return from_cartesian(g, Vec3{x, y, z});
}

// Gauss-Legendre nodes in eta crossed with uniform nodes in phi, all on the
// isosurface xi = xi1.  points are ordered phi-major: index = ie * n_phi + ip.
struct SurfaceGrid {
    std::vector<SpheroidalPoint> points;
    std::vector<double> eta_nodes;    // size n_eta
    std::vector<double> eta_weights;  // integrate f(eta) d eta over [-1,1]
    std::vector<double> phi_nodes;    // size n_phi, uniform on [0, 2*pi)
};

SurfaceGrid surface_grid(const Geometry& g, double xi1, int n_eta, int n_phi);

// Rotation about the z axis, used to move general-azimuth sources and
// evaluation points into the canonical phi0 = 0 frame and back.
struct FrameRotation {
    double angle;  // world frame = canonical frame rotated by +angle about z

    Vec3 to_canonical(const Vec3& v) const;
    Vec3 to_world(const Vec3& v) const;
};

}  // namespace spheroidal
