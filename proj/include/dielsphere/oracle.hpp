#pragma once

// Series-free reference values.
//
//   v_in_line_integral   potential inside the sphere from the image line charge
//                        on z >= R_e (density ~ z^{-mu}):
//                          2 Vq/(eps+1) + (a/R_e) beta_inf mu
//                              * int_{R_e}^inf (R_e/z)^mu / |r - z z_hat| dz
//   havelock_offset      (1/2) int_0^{R_i} P_n(2z/R_i - 1) / |r - z z_hat| dz
//                        = Q_n(xib) P_n(etab), offset coordinates with c = R_i
//   havelock_inverted    (1/2) int_{R_e}^inf P_n(2R_e/z - 1) / (z |r - z z_hat|) dz
//                        = Q_n(xic) P_n(etac) / r
//   laplacian_fd         7-point stencil Laplacian of a scalar field

#include <cmath>
#include <functional>
#include <vector>

#include "dielsphere/coords.hpp"
#include "dielsphere/error.hpp"
#include "dielsphere/quadrature.hpp"
#include "dielsphere/series.hpp"

namespace dielsphere
{

namespace detail
{
/// P_n(x) by the three-term recurrence.
inline double legendre_P(int n, double x)
{
    if (n == 0)
        return 1.0;
    double p0 = 1.0, p1 = x;
    for (int k = 1; k < n; ++k)
    {
        const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

/// Distance from the point to the axis interval [lo, hi] (hi may be +inf).
inline double distance_to_axis_interval(const EvaluationPoint& p, double lo, double hi)
{
    const double rho = p.rho();
    const double z = p.z();
    if (z < lo)
        return std::hypot(rho, lo - z);
    if (z > hi)
        return std::hypot(rho, z - hi);
    return rho;
}

inline constexpr double near_field_fraction = 0.01;
} // namespace detail

inline double v_in_line_integral(const EvaluationPoint& p, const ProblemConfig& cfg, const QuadratureSpec& q = {})
{
    cfg.validate();
    if (cfg.side != SourceSide::external)
        throw domain_error("v_in_line_integral: needs an external source");
    const MaterialCoefficients mat = cfg.material();
    const double Re = cfg.R_e();
    const double mu = mat.mu;
    const double rho = p.rho();
    const double z = p.z();
    const double d = detail::distance_to_axis_interval(p, Re, std::numeric_limits<double>::infinity());
    if (d < 1e-12 * Re || (p.near_positive_axis() && p.r() >= Re))
        throw singularity_error("v_in_line_integral: point lies on the image line theta = 0, r >= R_e");

    double I = 0.0;
    if (rho > 0.0 && d < detail::near_field_fraction * Re)
    {
        // z' = z + rho sinh(u) absorbs the 1/distance peak: the integrand becomes (R_e/z')^mu du.
        const double u0 = std::asinh((Re - z) / rho);
        auto g = [&](double u) {
            const double zt = z + rho * std::sinh(u);
            return std::isfinite(zt) ? std::pow(Re / zt, mu) : 0.0;
        };
        const double peak = std::max(u0, 0.0);
        double head = 0.0;
        if (peak > u0)
            head = integrate(g, u0, peak, q).value;
        I = head + integrate_to_infinity(g, peak, q).value;
    }
    else
    {
        // t = R_e/z', then t = s^{1/mu}: I = (R_e/mu) int_0^1 ds / sqrt(t^2 rho^2 + (t z - R_e)^2)
        auto g = [&](double s) {
            const double t = std::pow(s, 1.0 / mu);
            return 1.0 / std::hypot(t * rho, t * z - Re);
        };
        std::vector<double> br{0.0};
        const double denom = rho * rho + z * z;
        if (denom > 0.0)
        {
            const double t0 = Re * z / denom;
            if (t0 > 0.0 && t0 < 1.0)
                br.push_back(std::pow(t0, mu));
        }
        br.push_back(1.0);
        I = (Re / mu) * integrate(g, std::span<const double>(br), q).value;
    }
    const double direct = 2.0 * detail::point_potential(p, cfg.a, Re) / (mat.eps + 1.0);
    return direct + (cfg.a / Re) * mat.beta_inf * mu * I;
}

namespace detail
{
/// int_0^1 L / |r - s(u) L z_hat| du with s = u^{1/mu_exp}, for an image
/// segment [0, L] (inward = true) or the Kelvin-mirrored ray [L, inf)
/// written as L / |L z_hat - s r| (inward = false). Both stay bounded for
/// points off the image set; the breakpoint sits at the foot of the
/// perpendicular.
inline double line_image(const EvaluationPoint& p, double L, double mu, bool inward, const QuadratureSpec& q)
{
    const double rho = p.rho();
    const double z = p.z();
    auto g = [&](double u) {
        const double s = std::pow(u, 1.0 / mu);
        return inward ? L / std::hypot(rho, z - s * L) : L / std::hypot(s * rho, L - s * z);
    };
    std::vector<double> br{0.0};
    double foot = -1.0;
    if (inward)
        foot = z / L;
    else if (rho * rho + z * z > 0.0)
        foot = L * z / (rho * rho + z * z);
    if (foot > 0.0 && foot < 1.0)
        br.push_back(std::pow(foot, mu));
    br.push_back(1.0);
    return integrate(g, std::span<const double>(br), q).value;
}
} // namespace detail

/// The quantity mapped and plotted for each region, from line images alone:
///   external source, r <= a : V_in
///   external source, r >  a : V_r (polarization part of the outside potential)
///   internal source, r <= a : V_r
///   internal source, r >  a : V_out
/// Splitting the spherical coefficients into a constant plus mu/(n+mu) turns
/// each series into a point image plus int_0^1 s^{mu-1} (...) ds.
inline double oracle_potential(const EvaluationPoint& p, const ProblemConfig& cfg, const QuadratureSpec& q = {})
{
    cfg.validate();
    const MaterialCoefficients mat = cfg.material();
    const double a = cfg.a, Re = cfg.R_e(), Ri = cfg.R_i(), mu = mat.mu, b = mat.beta_inf;
    const bool inside = p.r() <= a;
    if (cfg.side == SourceSide::external)
    {
        if (inside)
            return 2.0 * mu * detail::point_potential(p, a, Re) + (a / Re) * b * detail::line_image(p, Re, mu, false, q);
        if (detail::distance_to_axis_interval(p, 0.0, Ri) < 1e-12 * Ri)
            throw singularity_error("oracle_potential: point lies on the image segment");
        return -b * detail::point_potential(p, Ri, Ri) + b * detail::line_image(p, Ri, mu, true, q);
    }
    if (inside)
        return b * detail::point_potential(p, Re, Re) + b * (1.0 - mu) / mu * detail::line_image(p, Re, mu, false, q);
    return mat.eps * (2.0 * mu * detail::point_potential(p, a, Ri) + (a / Ri) * b * detail::line_image(p, Ri, mu, true, q));
}

inline double havelock_offset(int n, const EvaluationPoint& p, double R_i, const QuadratureSpec& q = {})
{
    if (n < 0)
        throw domain_error("havelock_offset: negative degree");
    if (!(R_i > 0.0))
        throw domain_error("havelock_offset: R_i must be positive");
    const double rho = p.rho();
    const double z = p.z();
    if (detail::distance_to_axis_interval(p, 0.0, R_i) < 1e-12 * R_i)
        throw singularity_error("havelock_offset: point lies on the focal segment");
    if (rho > 0.0)
    {
        const double u0 = std::asinh(-z / rho);
        const double u1 = std::asinh((R_i - z) / rho);
        auto g = [&](double u) { return detail::legendre_P(n, 2.0 * (z + rho * std::sinh(u)) / R_i - 1.0); };
        return 0.5 * integrate(g, u0, u1, q).value;
    }
    auto g = [&](double zt) { return detail::legendre_P(n, 2.0 * zt / R_i - 1.0) / std::abs(z - zt); };
    return 0.5 * integrate(g, 0.0, R_i, q).value;
}

enum class HavelockParameterization
{
    unit_interval, ///< t = R_e / z on (0, 1]
    semi_infinite  ///< z = z_p + rho sinh(u), u mapped to [0, 1)
};

inline double havelock_inverted(int n, const EvaluationPoint& p, double R_e, const QuadratureSpec& q = {},
                                HavelockParameterization form = HavelockParameterization::unit_interval)
{
    if (n < 0)
        throw domain_error("havelock_inverted: negative degree");
    if (!(R_e > 0.0))
        throw domain_error("havelock_inverted: R_e must be positive");
    const double rho = p.rho();
    const double z = p.z();
    if (detail::distance_to_axis_interval(p, R_e, std::numeric_limits<double>::infinity()) < 1e-12 * R_e ||
        (p.near_positive_axis() && p.r() >= R_e))
        throw singularity_error("havelock_inverted: point lies on the ray theta = 0, r >= R_e");

    if (form == HavelockParameterization::unit_interval)
    {
        auto g = [&](double t) { return detail::legendre_P(n, 2.0 * t - 1.0) / std::hypot(t * rho, t * z - R_e); };
        std::vector<double> br{0.0};
        const double denom = rho * rho + z * z;
        if (denom > 0.0)
        {
            const double t0 = R_e * z / denom;
            if (t0 > 0.0 && t0 < 1.0)
                br.push_back(t0);
        }
        br.push_back(1.0);
        return 0.5 * integrate(g, std::span<const double>(br), q).value;
    }

    if (rho > 0.0)
    {
        const double u0 = std::asinh((R_e - z) / rho);
        auto g = [&](double u) {
            const double zt = z + rho * std::sinh(u);
            if (!std::isfinite(zt))
                return 0.0;
            return detail::legendre_P(n, 2.0 * R_e / zt - 1.0) / zt;
        };
        const double peak = std::max(u0, 0.0);
        double head = 0.0;
        if (peak > u0)
            head = integrate(g, u0, peak, q).value;
        return 0.5 * (head + integrate_to_infinity(g, peak, q).value);
    }
    auto g = [&](double zt) {
        if (!std::isfinite(zt))
            return 0.0;
        return detail::legendre_P(n, 2.0 * R_e / zt - 1.0) / (zt * (zt - z));
    };
    return 0.5 * integrate_to_infinity(g, R_e, q).value;
}

struct LaplacianEstimate
{
    double value = 0.0;
    /// |f_xx| + |f_yy| + |f_zz|: the size of the terms that cancel in a harmonic field.
    double curvature_scale = 0.0;
};

using ScalarField = std::function<double(double x, double y, double z)>;

inline LaplacianEstimate laplacian_fd_detailed(const ScalarField& field, const EvaluationPoint& p, double h)
{
    if (!(h > 0.0) || !std::isfinite(h))
        throw domain_error("laplacian_fd: step must be positive");
    auto eval = [&](double x, double y, double z) {
        const double v = field(x, y, z);
        if (!std::isfinite(v))
            throw singularity_error("laplacian_fd: stencil point hits a singular set");
        return v;
    };
    const double x = p.x(), y = p.y(), z = p.z();
    const double f0 = eval(x, y, z);
    const double h2 = h * h;
    const double fxx = (eval(x + h, y, z) - 2.0 * f0 + eval(x - h, y, z)) / h2;
    const double fyy = (eval(x, y + h, z) - 2.0 * f0 + eval(x, y - h, z)) / h2;
    const double fzz = (eval(x, y, z + h) - 2.0 * f0 + eval(x, y, z - h)) / h2;
    return {fxx + fyy + fzz, std::abs(fxx) + std::abs(fyy) + std::abs(fzz)};
}

inline double laplacian_fd(const ScalarField& field, const EvaluationPoint& p, double h)
{
    return laplacian_fd_detailed(field, p, h).value;
}

} // namespace dielsphere
