#pragma once

#include <stdexcept>

namespace spheroidal {

enum class Kind { Prolate, Oblate, Disk };

// The disk is the degenerate oblate spheroid: every disk computation runs
// through the oblate code path with surface coordinate xi1 = 0.
constexpr Kind family(Kind k) { return k == Kind::Prolate ? Kind::Prolate : Kind::Oblate; }

constexpr const char* kind_name(Kind k) {
    switch (k) {
        case Kind::Prolate: return "prolate";
        case Kind::Oblate: return "oblate";
        case Kind::Disk: return "disk";
    }
    return "?";
}

// Focal parameter a: half the interfocal distance (prolate), radius of the
// focal ring (oblate), disk radius (disk).
struct Geometry {
    Kind kind;
    double a;

    Geometry(Kind k, double a_) : kind(k), a(a_) {
        if (!(a > 0.0)) throw std::invalid_argument("Geometry: focal parameter a must be > 0");
    }
};

}  // namespace spheroidal
