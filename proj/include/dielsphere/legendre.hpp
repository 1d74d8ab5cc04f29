#pragma once

// Legendre functions of the first and second kind, integer degree and order,
// real argument.
//
// Conventions
//   |x| <= 1 : P_n^m(x) = (-1)^m (1-x^2)^{m/2} d^m P_n / dx^m   (Condon-Shortley)
//   |x| >  1 : P_n^m(x) = (x^2-1)^{m/2} d^m P_n / dx^m          (Hobson, no phase)
//    x  >  1 : Q_n^m(x) = (x^2-1)^{m/2} d^m Q_n / dx^m          (Hobson, no phase)
//
// With these choices the spherical <-> offset spheroidal expansion identities
// hold with the coefficients exactly as written in expansions.hpp.

#include <cmath>
#include <concepts>
#include <numbers>
#include <string>
#include <vector>

#include "dielsphere/error.hpp"

namespace dielsphere::legendre
{

enum class Kind
{
    P,
    Q
};

template <std::floating_point Real = double>
struct Sequence
{
    Kind kind = Kind::P;
    int order = 0;
    int max_degree = 0;
    Real x = 0;
    /// values[n] for n = 0..max_degree; entries with n < order are zero.
    std::vector<Real> values;

    Real operator[](int n) const { return values[static_cast<std::size_t>(n)]; }
};

/// Arguments closer than this to xi = 1 are rejected by the Q evaluators.
inline constexpr double singularity_guard = 1e-12;

namespace detail
{
inline void check_orders(int m, int N)
{
    if (m < 0 || N < 0)
        throw domain_error("legendre: degree and order must be non-negative");
    if (m > N)
        throw domain_error("legendre: order m=" + std::to_string(m) + " exceeds max degree N=" +
                           std::to_string(N));
}

template <std::floating_point Real>
void check_xi(Real xi)
{
    if (!std::isfinite(xi) || xi <= Real(1))
        throw domain_error("legendre: Q_n requires a finite argument xi > 1");
    if (xi < Real(1) + Real(singularity_guard))
        throw singularity_error("legendre: xi is within 1e-12 of the logarithmic singularity at 1");
}
} // namespace detail

/// P_n^m(x) for n = 0..N by upward recurrence in n from the closed seed P_m^m.
template <std::floating_point Real>
Sequence<Real> eval_P_sequence(int m, int N, Real x)
{
    detail::check_orders(m, N);
    if (!std::isfinite(x))
        throw domain_error("legendre: P_n requires a finite argument");

    Sequence<Real> seq{Kind::P, m, N, x, std::vector<Real>(static_cast<std::size_t>(N) + 1, Real(0))};
    auto& v = seq.values;

    const bool on_cut = std::abs(x) <= Real(1);
    // (2m-1)!! * |1 - x^2|^{m/2}
    Real seed = 1;
    if (m > 0)
    {
        const Real w = on_cut ? std::sqrt((Real(1) - x) * (Real(1) + x)) : std::sqrt((x - Real(1)) * (x + Real(1)));
        for (int k = 1; k <= m; ++k)
            seed *= Real(2 * k - 1) * w;
        if (on_cut && (m % 2 == 1))
            seed = -seed;
    }
    v[m] = seed;
    if (N == m)
        return seq;
    v[m + 1] = Real(2 * m + 1) * x * seed;
    for (int n = m + 1; n < N; ++n)
        v[n + 1] = (Real(2 * n + 1) * x * v[n] - Real(n + m) * v[n - 1]) / Real(n - m + 1);
    return seq;
}

/// Start degree of the downward recurrence for Q_n(xi).
inline int backward_start_degree(int N, double xi)
{
    const double growth = std::log(xi + std::sqrt((xi - 1.0) * (xi + 1.0)));
    return N + 20 + static_cast<int>(std::ceil(36.0 / growth));
}

/// Q_0(xi) = atanh(1/xi), written to stay accurate near xi = 1 and for large xi.
template <std::floating_point Real>
Real Q0(Real xi)
{
    return Real(0.5) * std::log1p(Real(2) / (xi - Real(1)));
}

/// Q_n^m(xi) for n = 0..N, xi > 1.
///
/// m = 0 uses Miller's algorithm: the minimal solution of the three-term
/// recurrence is generated downward from backward_start_degree() seeded with
/// (Q_{start+1}, Q_start) = (0, 1) and normalized against Q_0. The downward
/// pass is carried in ratio form r_n = Q_n / Q_{n-1}, which is the same
/// recurrence without the overflow of the unnormalized iterates.
/// m > 0 raises the order with
///   Q_n^{k+1} = ((n-k) xi Q_n^k - (n+k) Q_{n-1}^k) / sqrt(xi^2 - 1),
/// which only needs degrees n >= k; entries with n < m are left at zero.
template <std::floating_point Real>
Sequence<Real> eval_Q_sequence(int m, int N, Real xi)
{
    detail::check_orders(m, N);
    detail::check_xi(xi);

    Sequence<Real> seq{Kind::Q, m, N, xi, std::vector<Real>(static_cast<std::size_t>(N) + 1, Real(0))};
    auto& v = seq.values;

    const int start = backward_start_degree(N, static_cast<double>(xi));
    std::vector<Real> ratio(static_cast<std::size_t>(N) + 1, Real(0));
    Real r_next = 0; // r_{start+1}, from the (0, 1) seed
    for (int n = start; n >= 1; --n)
    {
        const Real r = Real(n) / (Real(2 * n + 1) * xi - Real(n + 1) * r_next);
        if (n <= N)
            ratio[static_cast<std::size_t>(n)] = r;
        r_next = r;
    }
    v[0] = Q0(xi);
    for (int n = 1; n <= N; ++n)
        v[n] = ratio[static_cast<std::size_t>(n)] * v[n - 1];

    if (m > 0)
    {
        const Real w = std::sqrt((xi - Real(1)) * (xi + Real(1)));
        for (int k = 0; k < m; ++k)
        {
            // in place, descending so Q_{n-1}^k is still available
            for (int n = N; n >= k + 1; --n)
                v[n] = (Real(n - k) * xi * v[n] - Real(n + k) * v[n - 1]) / w;
            v[k] = 0;
        }
    }
    return seq;
}

/// log P_n(x) for n = 0..N, x >= 1 (where every P_n(x) >= 1).
/// Forward ratio recurrence; usable far beyond the overflow threshold of P_n.
inline std::vector<double> log_P_offcut(int N, double x)
{
    if (N < 0)
        throw domain_error("legendre: negative max degree");
    if (!std::isfinite(x) || x < 1.0)
        throw domain_error("legendre: log_P_offcut requires x >= 1");
    std::vector<double> out(static_cast<std::size_t>(N) + 1, 0.0);
    if (N == 0)
        return out;
    double s = x; // P_1 / P_0
    out[1] = std::log(x);
    for (int n = 1; n < N; ++n)
    {
        // (n+1) s_{n+1} = (2n+1) x - n / s_n
        s = (double(2 * n + 1) * x - double(n) / s) / double(n + 1);
        out[static_cast<std::size_t>(n) + 1] = out[static_cast<std::size_t>(n)] + std::log(s);
    }
    return out;
}

enum class Asymptote
{
    P_on_cut,
    P_off_cut,
    Q_off_cut
};

/// Large-degree asymptotic forms of P_n (|u| < 1 and u > 1) and Q_n (u > 1).
inline double asymptotic_estimate(Asymptote kind, int n, double u)
{
    using std::numbers::pi;
    if (n < 1)
        throw domain_error("legendre: asymptotic forms need n >= 1");
    switch (kind)
    {
    case Asymptote::P_on_cut:
        if (!(std::abs(u) < 1.0))
            throw domain_error("legendre: on-cut asymptote needs |u| < 1");
        return std::sqrt(2.0 / (pi * n * std::sqrt(1.0 - u * u))) *
               std::sin((n + 0.5) * std::acos(u) + pi / 4.0);
    case Asymptote::P_off_cut:
    case Asymptote::Q_off_cut:
        break;
    }
    if (!(u > 1.0) || !std::isfinite(u))
        throw domain_error("legendre: off-cut asymptotes need u > 1");
    const double s = std::sqrt((u - 1.0) * (u + 1.0));
    const double lam = u + s;
    if (kind == Asymptote::P_off_cut)
        return std::pow(lam, n + 0.5) / (std::sqrt(2.0 * pi * n) * std::sqrt(s));
    return std::sqrt(pi / (2.0 * n)) / (std::sqrt(s) * std::pow(lam, n + 0.5));
}

/// Integral of Q_n from infinity to u: (Q_{n+1}(u) - Q_{n-1}(u)) / (2n+1).
inline double integral_Q(int n, double u)
{
    if (n < 1)
        throw domain_error("legendre: integral_Q is only provided for n >= 1");
    if (std::isinf(u) && u > 0)
        return 0.0;
    const auto q = eval_Q_sequence(0, n + 1, u);
    return (q[n + 1] - q[n - 1]) / double(2 * n + 1);
}

} // namespace dielsphere::legendre
