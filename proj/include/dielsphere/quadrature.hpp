#pragma once

// Globally adaptive Gauss-Kronrod integration over finite intervals, with
// breakpoints and a tolerance contract (abs_tol, rel_tol, subdivision cap).
// The 21-point Kronrod rule and its embedded Gauss rule come from Boost.Math;
// the subdivision strategy is the usual QUADPACK QAG one: always bisect the
// panel with the largest error estimate.

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dielsphere/error.hpp"

namespace dielsphere
{

struct QuadratureSpec
{
    enum class Scheme
    {
        adaptive,
        fixed_node
    };

    Scheme scheme = Scheme::adaptive;
    double abs_tol = 1e-14;
    double rel_tol = 1e-12;
    /// Adaptive: maximum number of panels. Fixed-node: number of equal panels
    /// of the 30-point Gauss rule.
    int max_subdivisions = 2000;

    void validate() const
    {
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
            throw domain_error("QuadratureSpec: tolerances must be positive");
        if (max_subdivisions < 1)
            throw domain_error("QuadratureSpec: max_subdivisions must be at least 1");
    }
};

struct QuadratureResult
{
    double value = 0.0;
    double error = 0.0;
    int panels = 0;
};

namespace detail
{
struct Panel
{
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

/// One 21-point Kronrod panel with |K21 - G10| as its error. The embedded Gauss
/// value is recomputed from the 10-point rule because the error reported by
/// Boost 1.74 misses the (b-a)/2 Jacobian.
template <class F>
Panel kronrod_panel(const F& f, double a, double b)
{
    using kronrod = boost::math::quadrature::gauss_kronrod<double, 21>;
    using gauss = boost::math::quadrature::gauss<double, 10>;
    const double k = kronrod::integrate(f, a, b, 0, 0.0);
    const double g = gauss::integrate(f, a, b);
    const double floor = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(k);
    return {a, b, k, std::max(std::abs(k - g), floor)};
}
} // namespace detail

/// Integrates f over [breaks.front(), breaks.back()], starting from the panels
/// delimited by the sorted breakpoints.
template <class F>
QuadratureResult integrate(const F& f, std::span<const double> breaks, const QuadratureSpec& spec)
{
    spec.validate();
    if (breaks.size() < 2)
        throw domain_error("integrate: need at least two breakpoints");

    if (spec.scheme == QuadratureSpec::Scheme::fixed_node)
    {
        using gauss30 = boost::math::quadrature::gauss<double, 30>;
        QuadratureResult out;
        const int per = std::max(1, spec.max_subdivisions / int(breaks.size() - 1));
        for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
        {
            const double h = (breaks[i + 1] - breaks[i]) / per;
            for (int j = 0; j < per; ++j)
            {
                const double lo = breaks[i] + j * h;
                const double hi = (j + 1 == per) ? breaks[i + 1] : lo + h;
                const double fine = gauss30::integrate(f, lo, hi);
                const double mid = 0.5 * (lo + hi);
                const double coarse = gauss30::integrate(f, lo, mid) + gauss30::integrate(f, mid, hi);
                out.value += fine;
                out.error += std::abs(fine - coarse);
                ++out.panels;
            }
        }
        return out;
    }

    std::priority_queue<detail::Panel> heap;
    double total = 0.0;
    double total_err = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    {
        if (!(breaks[i + 1] >= breaks[i]))
            throw domain_error("integrate: breakpoints must be sorted");
        if (breaks[i + 1] == breaks[i])
            continue;
        auto p = detail::kronrod_panel(f, breaks[i], breaks[i + 1]);
        total += p.value;
        total_err += p.error;
        heap.push(p);
    }
    int panels = static_cast<int>(heap.size());
    auto target = [&] { return std::max(spec.abs_tol, spec.rel_tol * std::abs(total)); };

    while (!heap.empty() && total_err > target())
    {
        if (panels >= spec.max_subdivisions)
            throw convergence_error("integrate: subdivision limit reached with error estimate " +
                                    std::to_string(total_err));
        const auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b))
            throw convergence_error("integrate: panel width reached machine resolution");
        auto left = detail::kronrod_panel(f, worst.a, mid);
        auto right = detail::kronrod_panel(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++panels;
    }
    if (!std::isfinite(total))
        throw convergence_error("integrate: non-finite integral");

    // Re-add from the panels to drop the drift of the running updates.
    QuadratureResult out;
    out.panels = panels;
    while (!heap.empty())
    {
        out.value += heap.top().value;
        out.error += heap.top().error;
        heap.pop();
    }
    return out;
}

template <class F>
QuadratureResult integrate(const F& f, double a, double b, const QuadratureSpec& spec)
{
    const double breaks[2] = {a, b};
    return integrate(f, std::span<const double>(breaks), spec);
}

/// Integral over [a, infinity) through x = a + v / (1 - v), v in [0, 1).
template <class F>
QuadratureResult integrate_to_infinity(const F& f, double a, const QuadratureSpec& spec)
{
    auto mapped = [&](double v) {
        const double w = 1.0 - v;
        const double val = f(a + v / w);
        return val == 0.0 ? 0.0 : val / (w * w);
    };
    return integrate(mapped, 0.0, 1.0, spec);
}

} // namespace dielsphere
