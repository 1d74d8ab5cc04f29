#pragma once

// Convergence studies on top of the series evaluators: a basis dispatcher that
// picks the right series for each region, convergence curves against a
// reference, half-plane error maps, and the convergence-boundary predictor for
// regular spheroidal series.

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "dielsphere/coords.hpp"
#include "dielsphere/error.hpp"
#include "dielsphere/oracle.hpp"
#include "dielsphere/series.hpp"

namespace dielsphere
{

/// Basis family; the region (inside or outside the sphere) and the source side
/// select the concrete series.
///   spherical            standard solid spherical harmonics
///   spheroidal           irregular offset spheroidal outside the sphere,
///                        radially-inverted spheroidal inside
///   inverted_spheroidal  same as spheroidal (named after the inside series)
///   regular_spheroidal   regular offset spheroidal, external source, inside only
enum class Basis
{
    spherical,
    spheroidal,
    inverted_spheroidal,
    regular_spheroidal
};

inline const char* basis_name(Basis b)
{
    switch (b)
    {
    case Basis::spherical:
        return "spherical";
    case Basis::spheroidal:
        return "spheroidal";
    case Basis::inverted_spheroidal:
        return "inverted-spheroidal";
    case Basis::regular_spheroidal:
        return "regular-spheroidal";
    }
    return "unknown";
}

struct Method
{
    Basis basis = Basis::inverted_spheroidal;
    /// Focal length for regular_spheroidal; R_e when empty.
    std::optional<double> f;
};

/// Evaluates the mapped quantity (see oracle_potential) with the given basis.
inline SeriesEvaluation evaluate_method(const Method& method, const EvaluationPoint& p, const ProblemConfig& cfg,
                                        int N, const SeriesOptions& opt = {})
{
    const bool inside = p.r() <= cfg.a;
    if (cfg.side == SourceSide::external)
    {
        switch (method.basis)
        {
        case Basis::spherical:
            return v_external_source(p, cfg, inside ? ExternalBasis::spherical_internal : ExternalBasis::spherical_reflected,
                                     N, std::nullopt, opt);
        case Basis::spheroidal:
        case Basis::inverted_spheroidal:
            return v_external_source(
                p, cfg, inside ? ExternalBasis::inverted_spheroidal_internal : ExternalBasis::spheroidal_reflected, N,
                std::nullopt, opt);
        case Basis::regular_spheroidal:
            if (!inside)
                throw domain_error("regular-spheroidal basis is only defined inside the sphere");
            return v_external_source(p, cfg, ExternalBasis::regular_spheroidal_internal, N, method.f, opt);
        }
    }
    else
    {
        switch (method.basis)
        {
        case Basis::spherical:
            return v_internal_source(p, cfg, inside ? InternalBasis::spherical_reflected : InternalBasis::spherical_outside,
                                     N, opt);
        case Basis::spheroidal:
        case Basis::inverted_spheroidal:
            return v_internal_source(
                p, cfg, inside ? InternalBasis::spheroidal_reflected : InternalBasis::spheroidal_outside, N, opt);
        case Basis::regular_spheroidal:
            throw domain_error("regular-spheroidal basis is only provided for an external source");
        }
    }
    throw domain_error("evaluate_method: unknown basis");
}

struct ReferenceSpec
{
    enum class Kind
    {
        series,
        oracle
    };
    Kind kind = Kind::series;
    Method method{Basis::spheroidal, std::nullopt};
    int N = 130;
    QuadratureSpec quadrature{};
};

/// A reference series must be converged well below the errors it is used to
/// measure.
inline constexpr double reference_tolerance = 1e-10;

inline double reference_value(const ReferenceSpec& ref, const EvaluationPoint& p, const ProblemConfig& cfg,
                              const SeriesOptions& opt = {})
{
    if (ref.kind == ReferenceSpec::Kind::oracle)
        return oracle_potential(p, cfg, ref.quadrature);
    const auto e = evaluate_method(ref.method, p, cfg, ref.N, opt);
    if (e.diverging || !(e.est_error <= reference_tolerance * std::abs(e.value)))
        throw diagnostics_error("reference series (" + std::string(basis_name(ref.method.basis)) + ", N=" +
                                std::to_string(ref.N) + ") is not converged: est_error " +
                                std::to_string(e.est_error) + " for value " + std::to_string(e.value));
    return e.value;
}

struct ConvergenceRow
{
    int N = 0;
    double partial_sum = 0.0;
    double term = 0.0;
    double rel_error = 0.0;
    /// max_{k >= N} rel_error[k]: non-increasing, immune to crossings of the reference.
    double envelope = 0.0;
};

struct ConvergenceCurve
{
    double reference = 0.0;
    std::vector<ConvergenceRow> rows;
    bool diverging = false;
};

inline ConvergenceCurve convergence_curve(const Method& method, const EvaluationPoint& p, const ProblemConfig& cfg,
                                          int N_max, const ReferenceSpec& ref = {}, const SeriesOptions& opt = {})
{
    if (N_max < 0)
        throw domain_error("convergence_curve: N_max must be non-negative");
    ConvergenceCurve out;
    out.reference = reference_value(ref, p, cfg, opt);
    const auto e = evaluate_method(method, p, cfg, N_max, opt);
    out.diverging = e.diverging;
    const double denom = out.reference != 0.0 ? std::abs(out.reference) : 1.0;
    out.rows.resize(static_cast<std::size_t>(N_max) + 1);
    for (int n = 0; n <= N_max; ++n)
    {
        auto& row = out.rows[static_cast<std::size_t>(n)];
        row.N = n;
        row.partial_sum = e.partial_sums[static_cast<std::size_t>(n)];
        row.term = e.terms[static_cast<std::size_t>(n)];
        row.rel_error = std::abs(row.partial_sum - out.reference) / denom;
    }
    double run = 0.0;
    for (int n = N_max; n >= 0; --n)
    {
        auto& row = out.rows[static_cast<std::size_t>(n)];
        run = std::max(run, row.rel_error);
        row.envelope = run;
    }
    return out;
}

/// First N from which the envelope stays at or below the threshold, or -1.
inline int first_N_below(const ConvergenceCurve& curve, double threshold)
{
    for (const auto& row : curve.rows)
        if (row.envelope <= threshold)
            return row.N;
    return -1;
}

// ---------------------------------------------------------------------------
// error maps

struct GridSpec
{
    enum class Kind
    {
        polar,
        cartesian
    };
    Kind kind = Kind::polar;
    int n1 = 100; ///< r (polar) or x (cartesian) samples
    int n2 = 100; ///< theta (polar) or z (cartesian) samples
    /// polar: r in (lo1, hi1], theta in [0, pi]; cartesian: x in [lo1, hi1], z in [lo2, hi2]
    double lo1 = 0.0, hi1 = 1.0;
    double lo2 = -1.0, hi2 = 1.0;
    int threads = 1;

    void validate() const
    {
        if (n1 < 1 || n2 < 1)
            throw domain_error("GridSpec: grid dimensions must be positive");
        if (!(hi1 > lo1) || (kind == Kind::cartesian && !(hi2 > lo2)))
            throw domain_error("GridSpec: empty grid extent");
        if (kind == Kind::polar && lo1 < 0.0)
            throw domain_error("GridSpec: polar grid needs r >= 0");
        if (threads < 1)
            throw domain_error("GridSpec: threads must be at least 1");
    }

    /// Polar: r_i = lo1 + (hi1-lo1)(i+1)/n1 (excludes lo1, includes hi1),
    /// theta_j = pi j/(n2-1). Cartesian: uniform nodes including both ends, y = 0.
    EvaluationPoint point(int i, int j) const
    {
        if (kind == Kind::polar)
        {
            const double r = lo1 + (hi1 - lo1) * (i + 1) / n1;
            const double t = n2 == 1 ? 0.0 : std::numbers::pi * j / (n2 - 1);
            return EvaluationPoint::spherical(r, std::min(t, std::numbers::pi));
        }
        const double x = n1 == 1 ? lo1 : lo1 + (hi1 - lo1) * i / (n1 - 1);
        const double z = n2 == 1 ? lo2 : lo2 + (hi2 - lo2) * j / (n2 - 1);
        return EvaluationPoint::cartesian(x, 0.0, z);
    }
};

struct GridPoint
{
    EvaluationPoint point;
    bool valid = false;
    std::string flag; ///< "", "singular", "domain", "near_zero", "nonconvergent"
    double value = std::nan("");
    double reference = std::nan("");
    double rel_error = std::nan("");
};

struct FieldGrid
{
    GridSpec spec;
    /// Row-major: index i * n2 + j.
    std::vector<GridPoint> points;
    double median_abs_reference = 0.0;
    /// Denominator floor: 1e-3 * median |reference|.
    double floor = 0.0;

    const GridPoint& at(int i, int j) const { return points[static_cast<std::size_t>(i) * spec.n2 + j]; }
};

inline constexpr double relative_error_floor_fraction = 1e-3;

namespace detail
{
template <class F>
void parallel_for(int count, int threads, const F& body)
{
    if (threads <= 1 || count < 2)
    {
        for (int k = 0; k < count; ++k)
            body(k);
        return;
    }
    // Each index is written by exactly one worker, so the result does not
    // depend on scheduling.
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try
            {
                for (int k = t; k < count; k += threads)
                    body(k);
            }
            catch (...)
            {
                errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
        });
    for (auto& th : pool)
        th.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

inline std::shared_ptr<const CoefficientTable> regular_table_for(const Method& m, const ProblemConfig& cfg, int N,
                                                                  double tol)
{
    if (m.basis != Basis::regular_spheroidal)
        return nullptr;
    const double rho = m.f.value_or(cfg.R_e()) / cfg.R_e();
    return std::make_shared<const CoefficientTable>(CoefficientTable::regular_table(N, cfg.eps, rho, tol));
}
} // namespace detail

/// Relative errors use max(|ref|, 1e-3 median |ref|) as the denominator.
/// Points on a singular set or outside a basis' region are kept and flagged.
inline FieldGrid error_map(const Method& method, const GridSpec& spec, const ProblemConfig& cfg, int N,
                           const ReferenceSpec& ref = {})
{
    spec.validate();
    cfg.validate();
    FieldGrid grid;
    grid.spec = spec;
    const int count = spec.n1 * spec.n2;
    grid.points.resize(static_cast<std::size_t>(count));

    SeriesOptions opt;
    opt.regular_coefficients = detail::regular_table_for(method, cfg, N, opt.coefficient_tol);
    SeriesOptions ref_opt;
    if (ref.kind == ReferenceSpec::Kind::series)
        ref_opt.regular_coefficients = detail::regular_table_for(ref.method, cfg, ref.N, ref_opt.coefficient_tol);

    detail::parallel_for(count, spec.threads, [&](int k) {
        auto& g = grid.points[static_cast<std::size_t>(k)];
        g.point = spec.point(k / spec.n2, k % spec.n2);
        try
        {
            g.reference = reference_value(ref, g.point, cfg, ref_opt);
            g.value = evaluate_method(method, g.point, cfg, N, opt).value;
            g.valid = true;
        }
        catch (const singularity_error&)
        {
            g.flag = "singular";
        }
        catch (const diagnostics_error&)
        {
            g.flag = "nonconvergent";
        }
        catch (const domain_error&)
        {
            g.flag = "domain";
        }
    });

    std::vector<double> mags;
    for (const auto& g : grid.points)
        if (g.valid)
            mags.push_back(std::abs(g.reference));
    if (!mags.empty())
    {
        const auto mid = mags.begin() + static_cast<std::ptrdiff_t>(mags.size() / 2);
        std::nth_element(mags.begin(), mid, mags.end());
        grid.median_abs_reference = *mid;
    }
    grid.floor = relative_error_floor_fraction * grid.median_abs_reference;
    for (auto& g : grid.points)
    {
        if (!g.valid)
            continue;
        const double mag = std::abs(g.reference);
        if (mag < grid.floor)
            g.flag = "near_zero";
        g.rel_error = std::abs(g.value - g.reference) / std::max(mag, grid.floor);
    }
    return grid;
}

// ---------------------------------------------------------------------------
// convergence boundary of regular spheroidal series

struct ConvergenceRegion
{
    double f = 1.0;
    double R_e = 1.0;
    double a = 1.0;
    /// 2 R_e/f - 1: the spheroid xi_f = xi_max passes through the source point.
    double xi_max = 1.0;
    /// f <= R_e - a
    bool sphere_contained = false;

    bool contains(const EvaluationPoint& p) const { return to_offset_spheroidal(p, f).xi < xi_max; }
};

inline ConvergenceRegion convergence_region(double f, double R_e, double a = 1.0)
{
    if (!(f > 0.0) || !(f <= R_e))
        throw domain_error("convergence_region: need 0 < f <= R_e");
    if (!(a > 0.0))
        throw domain_error("convergence_region: a must be positive");
    return {f, R_e, a, 2.0 * R_e / f - 1.0, f <= R_e - a};
}

/// Predicted asymptotic term ratio of the regular spheroidal series:
///   X = (xi_f + sqrt(xi_f^2 - 1)) / (xi_max + sqrt(xi_max^2 - 1)).
inline double term_ratio_X(const EvaluationPoint& p, double f, double R_e)
{
    if (!(f > 0.0) || !(R_e > 0.0))
        throw domain_error("term_ratio_X: f and R_e must be positive");
    const double xi = to_offset_spheroidal(p, f).xi;
    const double xm = 2.0 * R_e / f - 1.0;
    auto lam = [](double u) { return u + std::sqrt(std::max(0.0, (u - 1.0) * (u + 1.0))); };
    return lam(xi) / lam(xm);
}

/// Geometric mean growth of the windowed term envelope between degrees lo and hi.
inline double empirical_term_ratio(std::span<const double> terms, int lo, int hi, int window = 20)
{
    if (lo < 0 || hi <= lo || hi >= static_cast<int>(terms.size()))
        throw domain_error("empirical_term_ratio: need 0 <= lo < hi < terms.size()");
    auto env = [&](int k) {
        double m = 0.0;
        for (int j = std::max(0, k - window + 1); j <= k; ++j)
            m = std::max(m, std::abs(terms[static_cast<std::size_t>(j)]));
        return m;
    };
    const double e_lo = env(lo), e_hi = env(hi);
    if (e_lo == 0.0)
        return e_hi == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::pow(e_hi / e_lo, 1.0 / (hi - lo));
}

} // namespace dielsphere
