#pragma once

#include <complex>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "spheroidal/coords.hpp"
#include "spheroidal/modes.hpp"
#include "spheroidal/radial.hpp"

namespace spheroidal {

using Complex = std::complex<double>;

struct BoundaryCondition {
    enum class Type { Soft, Hard, Robin };
    Type type = Type::Soft;
    // Robin parameter in V + alpha dV/dxi = 0; admitted complex (impedance),
    // alpha = 0 reduces to Soft and |alpha| -> inf to Hard.
    Complex alpha{0.0, 0.0};

    static BoundaryCondition soft() { return {Type::Soft, {0.0, 0.0}}; }
    static BoundaryCondition hard() { return {Type::Hard, {0.0, 0.0}}; }
    static BoundaryCondition robin(Complex a) { return {Type::Robin, a}; }
};

// Sources live in the canonical phi0 = 0 frame; use FrameRotation for
// general azimuths.
struct PlaneWave {
    double theta0;  // wavevector k (sin theta0, 0, cos theta0)
};
struct PointSource {
    double eta0, xi0;  // spheroidal position, phi0 = 0
};
using IncidentSource = std::variant<PlaneWave, PointSource>;

struct TruncationPolicy {
    double rel_tol = 1e-8;
    int max_m = 0;         // 0 = automatic cap
    int max_n_excess = 0;  // cap on n - m; 0 = automatic, else floored at ceil(2c)+16
    int consecutive_small = 3;
};

struct ScatteringProblem {
    Geometry geometry;
    double xi1;  // surface coordinate (0 for Disk)
    double k;    // wavenumber
    BoundaryCondition bc;
    IncidentSource source;
    TruncationPolicy truncation;

    double c() const { return k * geometry.a; }
    void validate() const;  // throws std::invalid_argument on violations
};

// Expansion coefficients of a solved problem; A_mn = 0 for every scattering
// solution, B_mn multiplies S_mn(eta) R^(3)(xi) cos(m phi).
struct WaveCoefficients {
    struct Entry {
        int m, n;
        Complex a{0.0, 0.0};
        Complex b{0.0, 0.0};
        std::shared_ptr<const ModeCoefficients> mc;
        std::shared_ptr<const RadialEvaluator> rad;
    };
    std::vector<Entry> modes;  // sorted by (m, n)
    double tail_estimate = 0.0;
    int max_m_used = 0;
};

// Fetches ModeCoefficients from the cache directory when given one (read
// only; misses fall back to a fresh solve) and memoizes handles together
// with their radial evaluators.  Not thread-safe; prefetch before fanning
// out, after which all handles are immutable and shareable.
class ModeProvider {
public:
    ModeProvider(Kind kind, double c, std::optional<std::filesystem::path> cache_dir = {});

    struct Handle {
        std::shared_ptr<const ModeCoefficients> mc;
        std::shared_ptr<const RadialEvaluator> rad;
    };
    const Handle& get(int m, int n);

    Kind kind() const { return kind_; }
    double c() const { return c_; }

private:
    Kind kind_;
    double c_;
    std::optional<std::filesystem::path> cache_dir_;
    std::map<std::pair<int, int>, Handle> memo_;
};

enum class FieldKind { Incident, Scattered, Total };
enum class IncidentForm { Exact, Series };

// Closed-form incident fields: exp(i k.r) and exp(ikr)/(4 pi r).
Complex incident_exact(const Geometry& g, const IncidentSource& src, double k, const Vec3& point);
// Value and d/dxi at a spheroidal point (chain rule through the coordinate
// map); used by exact-form boundary residuals.
std::pair<Complex, Complex> incident_exact_with_xi_derivative(const Geometry& g,
                                                              const IncidentSource& src, double k,
                                                              const SpheroidalPoint& p);

// Truncated expansions of the free fields; they must reproduce the closed
// forms and serve as the global convention check.  Throw truncation_error
// (carrying the partial sum and tail estimate) if the caps are hit first.
Complex expand_plane_wave(const Geometry& g, double k, double theta0, const SpheroidalPoint& p,
                          const TruncationPolicy& policy, ModeProvider& provider);
Complex expand_point_source(const Geometry& g, double k, double eta0, double xi0,
                            const SpheroidalPoint& p, const TruncationPolicy& policy,
                            ModeProvider& provider);

WaveCoefficients solve_scattering(const ScatteringProblem& problem, ModeProvider& provider);

// Field evaluation at Cartesian points (outside or on the surface; points
// strictly inside throw std::domain_error).  Incident values use the closed
// form.  Per-point work is independent and runs on `threads` threads.
std::vector<Complex> eval_field(const ScatteringProblem& problem, const WaveCoefficients& coeffs,
                                std::span<const Vec3> points, FieldKind which, int threads = 0);

// d/dxi of the selected field at surface points (xi = xi1); the incident
// part uses the series form (see eval_surface_residual).
std::vector<Complex> eval_field_xi_derivative(const ScatteringProblem& problem,
                                              const WaveCoefficients& coeffs,
                                              ModeProvider& provider,
                                              std::span<const SpheroidalPoint> points,
                                              FieldKind which);

bool is_inside_scatterer(const ScatteringProblem& problem, const Vec3& point);

// Boundary-condition residual over a Gauss-Legendre x uniform surface grid,
// normalized by the incident scale of the matching quantity:
//   soft  |V|,  hard  |dV/dxi|,  robin  |V + alpha dV/dxi|.
// The series form truncates the incident expansion independently of the
// scattered modes, so an undertruncated scattered set shows up as a large
// residual; the exact form compares against the closed-form incident field.
struct SurfaceResidualReport {
    double residual_series = 0.0;
    double residual_exact = 0.0;
    double scale_series = 0.0;
    double scale_exact = 0.0;
    int n_eta = 0, n_phi = 0;
};

SurfaceResidualReport eval_surface_residual(const ScatteringProblem& problem,
                                            const WaveCoefficients& coeffs,
                                            ModeProvider& provider, int n_eta, int n_phi);

}  // namespace spheroidal
