#pragma once

// Spherical, offset prolate spheroidal and radially-inverted offset prolate
// spheroidal coordinates. All systems are axisymmetric about z and share the
// azimuth phi with the spherical system. Lengths are in units of the sphere
// radius unless stated otherwise.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dielsphere/error.hpp"

namespace dielsphere
{

/// Points with polar angle closer than this to 0 or pi are treated as on-axis.
inline constexpr double axis_tolerance = 1e-12;

/// A field point: spherical coordinates with cached Cartesian components.
class EvaluationPoint
{
public:
    EvaluationPoint() = default;

    static EvaluationPoint spherical(double r, double theta, double phi = 0.0)
    {
        if (!(r >= 0.0) || !std::isfinite(r))
            throw domain_error("EvaluationPoint: r must be finite and non-negative");
        if (!(theta >= 0.0 && theta <= std::numbers::pi))
            throw domain_error("EvaluationPoint: theta must lie in [0, pi]");
        if (!std::isfinite(phi))
            throw domain_error("EvaluationPoint: phi must be finite");
        EvaluationPoint p;
        p.r_ = r;
        p.theta_ = theta;
        p.phi_ = normalize_phi(phi);
        const double rho = r * std::sin(theta);
        p.x_ = rho * std::cos(p.phi_);
        p.y_ = rho * std::sin(p.phi_);
        p.z_ = r * std::cos(theta);
        return p;
    }

    static EvaluationPoint cartesian(double x, double y, double z)
    {
        if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
            throw domain_error("EvaluationPoint: non-finite Cartesian component");
        EvaluationPoint p;
        const double rho = std::hypot(x, y);
        p.r_ = std::hypot(rho, z);
        p.theta_ = std::atan2(rho, z);
        p.phi_ = (rho == 0.0) ? 0.0 : normalize_phi(std::atan2(y, x));
        p.x_ = x;
        p.y_ = y;
        p.z_ = z;
        return p;
    }

    double r() const { return r_; }
    double theta() const { return theta_; }
    double phi() const { return phi_; }
    double x() const { return x_; }
    double y() const { return y_; }
    double z() const { return z_; }
    double rho() const { return std::hypot(x_, y_); }
    double cos_theta() const { return std::cos(theta_); }

    bool near_positive_axis() const { return theta_ < axis_tolerance; }
    bool near_negative_axis() const { return std::numbers::pi - theta_ < axis_tolerance; }

private:
    static double normalize_phi(double phi)
    {
        constexpr double two_pi = 2.0 * std::numbers::pi;
        double out = std::fmod(phi, two_pi);
        if (out < 0.0)
            out += two_pi;
        return out;
    }

    double r_ = 0.0;
    double theta_ = 0.0;
    double phi_ = 0.0;
    double x_ = 0.0;
    double y_ = 0.0;
    double z_ = 0.0;
};

/// |p - c z_hat| for c >= 0, in the form sqrt((r-c)^2 + 4 c r sin^2(theta/2))
/// which has no cancellation near the axis point.
inline double distance_to_axis_point(const EvaluationPoint& p, double c)
{
    if (p.near_positive_axis())
        return std::abs(p.r() - c);
    if (p.near_negative_axis())
        return p.r() + c;
    return std::hypot(p.r() - c, 2.0 * std::sqrt(c * p.r()) * std::sin(0.5 * p.theta()));
}

/// Prolate spheroidal coordinates with foci at the origin and at (0, 0, c).
struct OffsetSpheroidalCoords
{
    double xi = 1.0;
    double eta = 0.0;
    double phi = 0.0;
    double focal = 1.0;
};

/// Offset spheroidal coordinates of the Kelvin image a^2/r of a point, with the
/// focal offset a^2/R_e. The degenerate surface xi = 1 is the ray
/// {theta = 0, r >= R_e}.
struct InvertedSpheroidalCoords
{
    double xi = 1.0;
    double eta = 0.0;
    double phi = 0.0;
    double inversion_radius = 1.0;
    double source_distance = 1.0;
};

inline OffsetSpheroidalCoords to_offset_spheroidal(const EvaluationPoint& p, double c)
{
    if (!(c > 0.0) || !std::isfinite(c))
        throw domain_error("to_offset_spheroidal: focal offset must be positive");
    const double r = p.r();
    OffsetSpheroidalCoords out;
    out.phi = p.phi();
    out.focal = c;
    if (p.near_positive_axis())
    {
        if (r <= c)
        {
            out.xi = 1.0;
            out.eta = 2.0 * r / c - 1.0;
        }
        else
        {
            out.xi = 2.0 * r / c - 1.0;
            out.eta = 1.0;
        }
        return out;
    }
    if (p.near_negative_axis())
    {
        out.xi = 2.0 * r / c + 1.0;
        out.eta = -1.0;
        return out;
    }
    const double rc = distance_to_axis_point(p, c);
    // xi - 1, 1 - eta and 1 + eta each cancel near part of the axis; there they
    // come from 4cr sin^2(t/2) = rc^2 - (c-r)^2 and 4cr cos^2(t/2) = (r+c)^2 - rc^2.
    const double s = std::sin(0.5 * p.theta());
    const double co = std::cos(0.5 * p.theta());
    const double xi_m1 = r < c ? 4.0 * r * s * s / (rc + c - r) : (r + rc - c) / c;
    out.xi = std::max(1.0, 1.0 + xi_m1);
    if (r >= rc)
    {
        const double one_m_eta = r > c ? 4.0 * r * s * s / (rc + r - c) : (c - r + rc) / c;
        out.eta = std::clamp(1.0 - one_m_eta, -1.0, 1.0);
    }
    else
        out.eta = std::clamp(-1.0 + 4.0 * r * co * co / (r + c + rc), -1.0, 1.0);
    return out;
}

/// Inverse map: z = c (1 + xi eta) / 2, rho = (c/2) sqrt((xi^2-1)(1-eta^2)).
inline EvaluationPoint from_offset_spheroidal(const OffsetSpheroidalCoords& s)
{
    if (!(s.xi >= 1.0) || !(std::abs(s.eta) <= 1.0))
        throw domain_error("from_offset_spheroidal: coordinates out of range");
    const double half = 0.5 * s.focal;
    const double rho = half * std::sqrt((s.xi - 1.0) * (s.xi + 1.0) * (1.0 - s.eta) * (1.0 + s.eta));
    const double z = half * (1.0 + s.xi * s.eta);
    return EvaluationPoint::cartesian(rho * std::cos(s.phi), rho * std::sin(s.phi), z);
}

/// Radial inversion in the sphere of radius a: (r, theta, phi) -> (a^2/r, theta, phi).
inline EvaluationPoint kelvin_transform(const EvaluationPoint& p, double a)
{
    if (!(a > 0.0))
        throw domain_error("kelvin_transform: inversion radius must be positive");
    if (p.r() == 0.0)
        throw singularity_error("kelvin_transform: the origin maps to infinity");
    return EvaluationPoint::spherical(a * a / p.r(), p.theta(), p.phi());
}

inline InvertedSpheroidalCoords to_inverted_spheroidal(const EvaluationPoint& p, double a, double source_distance)
{
    if (!(a > 0.0) || !(source_distance > 0.0))
        throw domain_error("to_inverted_spheroidal: a and R_e must be positive");
    if (p.r() == 0.0)
        throw singularity_error("to_inverted_spheroidal: inverted radius is infinite at r = 0");
    const auto s = to_offset_spheroidal(kelvin_transform(p, a), a * a / source_distance);
    return {s.xi, s.eta, s.phi, a, source_distance};
}

inline EvaluationPoint from_inverted_spheroidal(const InvertedSpheroidalCoords& s)
{
    const double a = s.inversion_radius;
    const auto image = from_offset_spheroidal({s.xi, s.eta, s.phi, a * a / s.source_distance});
    return kelvin_transform(image, a);
}

} // namespace dielsphere
