#pragma once

// Series solutions for a point charge on the +z axis near a dielectric sphere
// of radius a and relative permittivity eps. Potentials are dimensionless:
// V = Vbar * q / (4 pi eps0 eps1 a).
//
// External source at R_e > a (image point R_i = a^2/R_e):
//   spherical_reflected      -sum beta_n (R_i/r)^{n+1} P_n(cos t)                 r >= a
//   spherical_internal       (a/R_e) sum (2n+1)/(n(eps+1)+1) (r/R_e)^n P_n        r <= a
//   spheroidal_reflected     -beta_inf R_i/r' + 2 beta_inf sum (2n+1) c_n Q_n(xib) P_n(etab),
//                            offset coordinates with c = R_i                      r >= a
//   inverted_spheroidal_internal
//                            2 Vq/(eps+1) + 2 beta_inf (a/r) sum (2n+1) c_n Q_n(xic) P_n(etac),
//                            radially-inverted coordinates                         r <= a
//   regular_spheroidal_internal
//                            2 Vq/(eps+1) + (a beta_inf/R_e) sum (2n+1) e_n P_n(xib_f) P_n(etab_f)
//
// Internal source at R_i < a (image point R_e = a^2/R_i):
//   spherical_reflected      sum (n+1)(eps-1)/(n(eps+1)+1) (r/R_e)^n P_n           r <= a
//   spherical_outside        eps (a/R_i) sum (2n+1)/(n(eps+1)+1) (R_i/r)^{n+1} P_n r >= a
//   spheroidal_reflected     beta_inf R_e/|r - R_e z| + 2 beta_inf eps (R_e/r) sum (2n+1) c_n Q_n(xic) P_n(etac)
//   spheroidal_outside       eps [2 Vq/(eps+1) + 2 (a beta_inf/R_i) sum (2n+1) c_n Q_n(xib) P_n(etab)]
//
// Here "reflected" means the potential of the polarization charge alone inside
// the source's medium, so the total there is Vq plus the reflected part.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dielsphere/coefficients.hpp"
#include "dielsphere/coords.hpp"
#include "dielsphere/error.hpp"
#include "dielsphere/legendre.hpp"

namespace dielsphere
{

enum class SourceSide
{
    external,
    internal
};

struct ProblemConfig
{
    double a = 1.0;
    double source_distance = 1.02;
    double eps = 2.25;
    SourceSide side = SourceSide::external;

    static ProblemConfig external_source(double R_e, double eps, double a = 1.0)
    {
        ProblemConfig c{a, R_e, eps, SourceSide::external};
        c.validate();
        return c;
    }

    static ProblemConfig internal_source(double R_i, double eps, double a = 1.0)
    {
        ProblemConfig c{a, R_i, eps, SourceSide::internal};
        c.validate();
        return c;
    }

    /// Outer point of the source/image pair.
    double R_e() const { return side == SourceSide::external ? source_distance : a * a / source_distance; }
    /// Inner point of the source/image pair.
    double R_i() const { return side == SourceSide::internal ? source_distance : a * a / source_distance; }

    MaterialCoefficients material() const { return MaterialCoefficients(eps); }

    void validate() const
    {
        if (!(a > 0.0) || !std::isfinite(a))
            throw domain_error("ProblemConfig: sphere radius a must be positive");
        if (!(eps > 0.0) || !std::isfinite(eps))
            throw domain_error("ProblemConfig: eps must be positive and finite");
        if (!std::isfinite(source_distance))
            throw domain_error("ProblemConfig: source distance must be finite");
        if (side == SourceSide::external && !(source_distance > a))
            throw domain_error("ProblemConfig: an external source needs R_e > a");
        if (side == SourceSide::internal && !(source_distance > 0.0 && source_distance < a))
            throw domain_error("ProblemConfig: an internal source needs 0 < R_i < a");
    }
};

struct SeriesEvaluation
{
    double value = 0.0;
    /// Closed-form part added before the series (image or direct term); zero for plain series.
    double closed_part = 0.0;
    std::vector<double> terms;
    /// partial_sums[k] = closed_part + terms[0] + ... + terms[k]
    std::vector<double> partial_sums;
    int N = 0;
    bool converged = false;
    double est_error = 0.0;
    bool diverging = false;
};

enum class PointChargeMode
{
    closed,
    series
};

enum class ExternalBasis
{
    spherical_reflected,
    spherical_internal,
    spheroidal_reflected,
    inverted_spheroidal_internal,
    regular_spheroidal_internal
};

enum class InternalBasis
{
    spherical_reflected,
    spherical_outside,
    spheroidal_reflected,
    spheroidal_outside
};

/// physical: reflected bases only for the source's medium, internal bases only
/// for the sphere. continuation: any point where the series' own analytic
/// continuation is defined (used for one-sided derivatives at r = a).
enum class Domain
{
    physical,
    continuation
};

struct SeriesOptions
{
    Domain domain = Domain::physical;
    /// Precomputed d_n / e_n table for the regular basis; computed on demand otherwise.
    std::shared_ptr<const CoefficientTable> regular_coefficients;
    double coefficient_tol = 1e-13;
};

/// Truncation error estimate: the last term envelope plus a geometric tail with
/// the ratio taken over the last five envelope steps. The envelope
/// max(|t_k|, |t_{k-1}|) keeps alternating zeros (P_odd(0) = 0) from faking
/// convergence.
inline double truncation_estimate(std::span<const double> terms)
{
    if (terms.empty())
        return 0.0;
    const int N = static_cast<int>(terms.size()) - 1;
    auto env = [&](int k) {
        const double cur = std::abs(terms[static_cast<std::size_t>(k)]);
        return k > 0 ? std::max(cur, std::abs(terms[static_cast<std::size_t>(k - 1)])) : cur;
    };
    const double last = env(N);
    if (!std::isfinite(last))
        return std::numeric_limits<double>::infinity();
    if (last == 0.0)
        return 0.0;
    const int back = std::min(5, N);
    if (back == 0)
        return last;
    const double earlier = env(N - back);
    if (earlier == 0.0)
        return std::numeric_limits<double>::infinity();
    const double q = std::pow(last / earlier, 1.0 / back);
    if (q >= 1.0)
        return std::numeric_limits<double>::infinity();
    return last + last * q / (1.0 - q);
}

/// Window over which the divergence detector takes its term envelope.
inline constexpr int divergence_window = 8;
/// Envelope growth over its running minimum that counts as divergence.
inline constexpr double divergence_threshold = 1e6;

/// True when the windowed term envelope has grown by more than
/// divergence_threshold over its running minimum, or a term overflowed.
inline bool divergence_detected(std::span<const double> terms)
{
    double running_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < terms.size(); ++k)
    {
        if (!std::isfinite(terms[k]))
            return true;
        double env = 0.0;
        const std::size_t lo = k + 1 >= divergence_window ? k + 1 - divergence_window : 0;
        for (std::size_t j = lo; j <= k; ++j)
            env = std::max(env, std::abs(terms[j]));
        if (env > 0.0)
        {
            if (env > divergence_threshold * running_min)
                return true;
            running_min = std::min(running_min, env);
        }
    }
    return false;
}

namespace detail
{
inline SeriesEvaluation finish(double closed, std::vector<double> terms)
{
    SeriesEvaluation out;
    out.closed_part = closed;
    out.N = static_cast<int>(terms.size()) - 1;
    out.partial_sums.resize(terms.size());
    double s = closed;
    for (std::size_t k = 0; k < terms.size(); ++k)
    {
        s += terms[k];
        out.partial_sums[k] = s;
    }
    out.value = terms.empty() ? closed : out.partial_sums.back();
    out.terms = std::move(terms);
    out.est_error = truncation_estimate(out.terms);
    out.converged = out.est_error == 0.0 || out.est_error < 1e-3 * std::abs(out.value);
    out.diverging = divergence_detected(out.terms);
    return out;
}

inline void check_N(int N)
{
    if (N < 0)
        throw domain_error("series: truncation degree N must be non-negative");
}

inline double cos_theta_exact(const EvaluationPoint& p)
{
    if (p.near_positive_axis())
        return 1.0;
    if (p.near_negative_axis())
        return -1.0;
    return p.cos_theta();
}

inline constexpr double region_slack = 1e-12;

inline void require_outside(const EvaluationPoint& p, double a, const char* what)
{
    if (p.r() < a * (1.0 - region_slack))
        throw domain_error(std::string(what) + ": requires r >= a");
}

inline void require_inside(const EvaluationPoint& p, double a, const char* what)
{
    if (p.r() > a * (1.0 + region_slack))
        throw domain_error(std::string(what) + ": requires r <= a");
}

/// a / |r - c z|, raising at the source point.
inline double point_potential(const EvaluationPoint& p, double a, double c)
{
    const double d = distance_to_axis_point(p, c);
    if (d == 0.0 || d < region_slack * c)
        throw singularity_error("point charge: evaluation at the source point");
    return a / d;
}

/// (2n+1) c_n Q_n(xib) P_n(etab) in offset coordinates with focal offset c.
inline std::vector<double> offset_q_series(const EvaluationPoint& p, double c, double mu, int N, const char* what)
{
    const auto s = to_offset_spheroidal(p, c);
    if (s.xi < 1.0 + legendre::singularity_guard)
        throw singularity_error(std::string(what) + ": point lies on the focal segment of the Q-series");
    const auto Q = legendre::eval_Q_sequence(0, N, s.xi);
    const auto P = legendre::eval_P_sequence(0, N, s.eta);
    std::vector<double> t(static_cast<std::size_t>(N) + 1);
    double cn = 1.0;
    for (int n = 0; n <= N; ++n)
    {
        if (n > 0)
            cn *= (mu - n) / (mu + n);
        t[n] = (2.0 * n + 1.0) * cn * Q[n] * P[n];
    }
    return t;
}

/// (2n+1) c_n Q_n(xic) P_n(etac) / r in radially-inverted coordinates built on
/// (a, R_e). At r = 0 only n = 0 survives, with limit 1/(2 R_e).
inline std::vector<double> inverted_q_series(const EvaluationPoint& p, double a, double Re, double mu, int N,
                                             const char* what)
{
    std::vector<double> t(static_cast<std::size_t>(N) + 1, 0.0);
    if (p.r() == 0.0)
    {
        t[0] = 0.5 / Re;
        return t;
    }
    const auto s = to_inverted_spheroidal(p, a, Re);
    if (!std::isfinite(s.xi))
    {
        t[0] = 0.5 / Re;
        return t;
    }
    if (s.xi < 1.0 + legendre::singularity_guard)
        throw singularity_error(std::string(what) + ": point lies on the image ray theta = 0, r >= R_e");
    const auto Q = legendre::eval_Q_sequence(0, N, s.xi);
    const auto P = legendre::eval_P_sequence(0, N, s.eta);
    double cn = 1.0;
    for (int n = 0; n <= N; ++n)
    {
        if (n > 0)
            cn *= (mu - n) / (mu + n);
        t[n] = (2.0 * n + 1.0) * cn * Q[n] * P[n] / p.r();
    }
    return t;
}
} // namespace detail

/// Direct potential a/|r - R z| of the unit source, in closed form or as its
/// Legendre expansion (regular about the origin for an external source,
/// irregular for an internal one).
inline SeriesEvaluation v_point_charge(const EvaluationPoint& p, const ProblemConfig& cfg, PointChargeMode mode,
                                       int N)
{
    cfg.validate();
    const double R = cfg.source_distance;
    if (mode == PointChargeMode::closed)
    {
        const double v = detail::point_potential(p, cfg.a, R);
        return detail::finish(0.0, {v});
    }
    detail::check_N(N);
    const double r = p.r();
    const auto P = legendre::eval_P_sequence(0, N, detail::cos_theta_exact(p));
    std::vector<double> t(static_cast<std::size_t>(N) + 1);
    if (cfg.side == SourceSide::external)
    {
        if (!(r < R))
            throw domain_error("v_point_charge: the regular expansion needs r < R_e");
        double pw = cfg.a / R;
        for (int n = 0; n <= N; ++n, pw *= r / R)
            t[n] = pw * P[n];
    }
    else
    {
        if (!(r > R))
            throw domain_error("v_point_charge: the irregular expansion needs r > R_i");
        double pw = cfg.a / r;
        for (int n = 0; n <= N; ++n, pw *= R / r)
            t[n] = pw * P[n];
    }
    return detail::finish(0.0, std::move(t));
}

inline SeriesEvaluation v_external_source(const EvaluationPoint& p, const ProblemConfig& cfg, ExternalBasis basis,
                                          int N, std::optional<double> f = std::nullopt,
                                          const SeriesOptions& opt = {})
{
    cfg.validate();
    if (cfg.side != SourceSide::external)
        throw domain_error("v_external_source: configuration has an internal source");
    detail::check_N(N);
    const MaterialCoefficients mat = cfg.material();
    const double a = cfg.a;
    const double Re = cfg.R_e();
    const double Ri = cfg.R_i();
    const double r = p.r();
    const bool physical = opt.domain == Domain::physical;
    std::vector<double> t(static_cast<std::size_t>(N) + 1);

    switch (basis)
    {
    case ExternalBasis::spherical_reflected: {
        if (physical)
            detail::require_outside(p, a, "spherical_reflected");
        else if (!(r > Ri))
            throw domain_error("spherical_reflected: continuation needs r > R_i");
        const auto P = legendre::eval_P_sequence(0, N, detail::cos_theta_exact(p));
        double pw = Ri / r;
        for (int n = 0; n <= N; ++n, pw *= Ri / r)
            t[n] = -mat.beta(n) * pw * P[n];
        return detail::finish(0.0, std::move(t));
    }
    case ExternalBasis::spherical_internal: {
        if (physical)
            detail::require_inside(p, a, "spherical_internal");
        else if (!(r < Re))
            throw domain_error("spherical_internal: continuation needs r < R_e");
        const auto P = legendre::eval_P_sequence(0, N, detail::cos_theta_exact(p));
        double pw = a / Re;
        for (int n = 0; n <= N; ++n, pw *= r / Re)
            t[n] = (2.0 * n + 1.0) * mat.inverse_denominator(n) * pw * P[n];
        return detail::finish(0.0, std::move(t));
    }
    case ExternalBasis::spheroidal_reflected: {
        if (physical)
            detail::require_outside(p, a, "spheroidal_reflected");
        const auto q = detail::offset_q_series(p, Ri, mat.mu, N, "spheroidal_reflected");
        const double image = -mat.beta_inf * Ri / distance_to_axis_point(p, Ri);
        for (int n = 0; n <= N; ++n)
            t[n] = 2.0 * mat.beta_inf * q[n];
        return detail::finish(image, std::move(t));
    }
    case ExternalBasis::inverted_spheroidal_internal: {
        if (physical)
            detail::require_inside(p, a, "inverted_spheroidal_internal");
        const auto q = detail::inverted_q_series(p, a, Re, mat.mu, N, "inverted_spheroidal_internal");
        const double direct = 2.0 * detail::point_potential(p, a, Re) / (mat.eps + 1.0);
        for (int n = 0; n <= N; ++n)
            t[n] = 2.0 * mat.beta_inf * a * q[n];
        return detail::finish(direct, std::move(t));
    }
    case ExternalBasis::regular_spheroidal_internal: {
        if (physical)
            detail::require_inside(p, a, "regular_spheroidal_internal");
        const double focal = f.value_or(Re);
        if (!(focal > 0.0 && focal <= Re))
            throw domain_error("regular_spheroidal_internal: focal length f must lie in (0, R_e]");
        const double rho = focal / Re;
        std::shared_ptr<const CoefficientTable> table = opt.regular_coefficients;
        if (table)
        {
            if (table->family == CoefficientTable::Family::c || table->eps != mat.eps || table->rho != rho ||
                table->max_degree() < N)
                throw domain_error("regular_spheroidal_internal: supplied coefficient table does not match");
        }
        else
        {
            table = std::make_shared<const CoefficientTable>(
                CoefficientTable::regular_table(N, mat.eps, rho, opt.coefficient_tol));
        }
        const auto s = to_offset_spheroidal(p, focal);
        const auto logPxi = legendre::log_P_offcut(N, s.xi);
        const auto Peta = legendre::eval_P_sequence(0, N, s.eta);
        const double direct = 2.0 * detail::point_potential(p, a, Re) / (mat.eps + 1.0);
        const double pre = a * mat.beta_inf / Re;
        for (int n = 0; n <= N; ++n)
        {
            if (Peta[n] == 0.0)
            {
                t[n] = 0.0;
                continue;
            }
            // P_n(xi) e_n can overflow or underflow separately; combine in logs.
            const double logmag = std::log(pre * (2.0 * n + 1.0) * std::abs(Peta[n])) + logPxi[n] +
                                  table->log_values[static_cast<std::size_t>(n)];
            const double mag = std::exp(logmag);
            t[n] = std::copysign(mag, Peta[n]);
        }
        return detail::finish(direct, std::move(t));
    }
    }
    throw domain_error("v_external_source: unknown basis");
}

inline SeriesEvaluation v_internal_source(const EvaluationPoint& p, const ProblemConfig& cfg, InternalBasis basis,
                                          int N, const SeriesOptions& opt = {})
{
    cfg.validate();
    if (cfg.side != SourceSide::internal)
        throw domain_error("v_internal_source: configuration has an external source");
    detail::check_N(N);
    const MaterialCoefficients mat = cfg.material();
    const double a = cfg.a;
    const double eps = mat.eps;
    const double Re = cfg.R_e();
    const double Ri = cfg.R_i();
    const double r = p.r();
    const bool physical = opt.domain == Domain::physical;
    std::vector<double> t(static_cast<std::size_t>(N) + 1);

    switch (basis)
    {
    case InternalBasis::spherical_reflected: {
        if (physical)
            detail::require_inside(p, a, "spherical_reflected");
        else if (!(r < Re))
            throw domain_error("spherical_reflected: continuation needs r < R_e");
        const auto P = legendre::eval_P_sequence(0, N, detail::cos_theta_exact(p));
        double pw = 1.0;
        for (int n = 0; n <= N; ++n, pw *= r / Re)
            t[n] = (n + 1.0) * (eps - 1.0) * mat.inverse_denominator(n) * pw * P[n];
        return detail::finish(0.0, std::move(t));
    }
    case InternalBasis::spherical_outside: {
        if (physical)
            detail::require_outside(p, a, "spherical_outside");
        else if (!(r > Ri))
            throw domain_error("spherical_outside: continuation needs r > R_i");
        const auto P = legendre::eval_P_sequence(0, N, detail::cos_theta_exact(p));
        double pw = a / r;
        for (int n = 0; n <= N; ++n, pw *= Ri / r)
            t[n] = eps * (2.0 * n + 1.0) * mat.inverse_denominator(n) * pw * P[n];
        return detail::finish(0.0, std::move(t));
    }
    case InternalBasis::spheroidal_reflected: {
        if (physical)
            detail::require_inside(p, a, "spheroidal_reflected");
        const auto q = detail::inverted_q_series(p, a, Re, mat.mu, N, "spheroidal_reflected");
        const double image = mat.beta_inf * detail::point_potential(p, Re, Re);
        for (int n = 0; n <= N; ++n)
            t[n] = 2.0 * mat.beta_inf * eps * Re * q[n];
        return detail::finish(image, std::move(t));
    }
    case InternalBasis::spheroidal_outside: {
        if (physical)
            detail::require_outside(p, a, "spheroidal_outside");
        const auto q = detail::offset_q_series(p, Ri, mat.mu, N, "spheroidal_outside");
        const double direct = eps * 2.0 * detail::point_potential(p, a, Ri) / (eps + 1.0);
        for (int n = 0; n <= N; ++n)
            t[n] = eps * 2.0 * (a * mat.beta_inf / Ri) * q[n];
        return detail::finish(direct, std::move(t));
    }
    }
    throw domain_error("v_internal_source: unknown basis");
}

} // namespace dielsphere
