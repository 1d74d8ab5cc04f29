#pragma once

// Material coefficients and the three series-coefficient families used by the
// spheroidal solutions:
//   c_n = prod_{k=0}^{n} (mu - k)/(mu + k)                      (irregular bases)
//   e_n = sum_{k>=n} rho^k / (k(eps+1)+1) * k!^2/((k-n)!(k+n+1)!)  (regular basis,
//                                                                  rho = f/R_e)
//   d_n = e_n at rho = 1
//
// d_n and e_n have no closed form. They are summed directly with a rigorous
// tail: a geometric majorant when rho < 1, and the Euler-Maclaurin formula
// (through the f''' term, remainder bounded by |f'''|/720) when rho = 1, where
// the summand decays only like 1/k^2.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dielsphere/error.hpp"
#include "dielsphere/quadrature.hpp"

namespace dielsphere
{

/// mu = 1/(eps+1), beta_inf = (eps-1)/(eps+1), beta_n = n(eps-1)/(n(eps+1)+1).
struct MaterialCoefficients
{
    double eps = 2.25;
    double mu = 1.0 / 3.25;
    double beta_inf = 1.25 / 3.25;

    explicit MaterialCoefficients(double permittivity) : eps(permittivity)
    {
        if (!std::isfinite(eps))
            throw domain_error("MaterialCoefficients: permittivity must be finite");
        if (std::abs(eps + 1.0) < 1e-9)
            throw domain_error("MaterialCoefficients: eps = -1 is a pole of mu = 1/(eps+1)");
        mu = 1.0 / (eps + 1.0);
        beta_inf = (eps - 1.0) / (eps + 1.0);
    }

    double beta(int n) const { return n * (eps - 1.0) / (n * (eps + 1.0) + 1.0); }
    /// 1/(n(eps+1)+1)
    double inverse_denominator(int n) const { return 1.0 / (n * (eps + 1.0) + 1.0); }
};

enum class CoefficientMethod
{
    product,
    sum
};

/// c_n. The product form is the reference; the alternating sum form is kept
/// for cross-validation at small n (its terms grow like 6^n).
inline double coeff_c(int n, double mu, CoefficientMethod method = CoefficientMethod::product)
{
    if (n < 0)
        throw domain_error("coeff_c: negative degree");
    if (!std::isfinite(mu))
        throw domain_error("coeff_c: mu must be finite");
    for (int k = 0; k <= n; ++k)
        if (mu + k == 0.0)
            throw domain_error("coeff_c: mu = " + std::to_string(mu) + " hits a pole of the factor k=" +
                               std::to_string(k));
    if (method == CoefficientMethod::product)
    {
        double c = 1.0;
        for (int k = 1; k <= n; ++k)
            c *= (mu - k) / (mu + k);
        return c;
    }
    // mu * sum_k binom(n+k, k) binom(n, k) (-1)^{n+k} / (k + mu)
    double sum = 0.0;
    double b1 = 1.0; // binom(n+k, k)
    double b2 = 1.0; // binom(n, k)
    for (int k = 0; k <= n; ++k)
    {
        if (k > 0)
        {
            b1 = b1 * (n + k) / k;
            b2 = b2 * (n - k + 1) / k;
        }
        const double sign = ((n + k) % 2 == 0) ? 1.0 : -1.0;
        sum += sign * b1 * b2 / (k + mu);
    }
    return mu * sum;
}

struct CoefficientSum
{
    double log_value = 0.0;      ///< natural log of the (positive) coefficient
    double rel_error_bound = 0.0; ///< certified relative truncation bound
    long terms = 0;

    double value() const { return std::exp(log_value); }
};

namespace detail
{
/// ln g(x) - ln g(K) for g(x) = C_n(x) / (beta x + 1), C_n(x) = prod_{j<n}(x-j) / prod_{j=1}^{n+1}(x+j).
inline double log_summand_ratio(int n, double beta, double x, double K)
{
    double acc = 0.0;
    for (int j = 0; j < n; ++j)
        acc += std::log((x - j) / (K - j));
    for (int j = 1; j <= n + 1; ++j)
        acc -= std::log((x + j) / (K + j));
    acc -= std::log((beta * x + 1.0) / (beta * K + 1.0));
    return acc;
}

/// Euler-Maclaurin tail sum_{k>=K} g(k) in units of g(K), and its remainder bound.
inline std::pair<double, double> euler_maclaurin_tail(int n, double beta, double K)
{
    double L1 = 0.0, L2 = 0.0, L3 = 0.0;
    for (int j = 0; j < n; ++j)
    {
        const double u = 1.0 / (K - j);
        L1 += u;
        L2 -= u * u;
        L3 += 2.0 * u * u * u;
    }
    for (int j = 1; j <= n + 1; ++j)
    {
        const double u = 1.0 / (K + j);
        L1 -= u;
        L2 += u * u;
        L3 -= 2.0 * u * u * u;
    }
    {
        const double u = beta / (beta * K + 1.0);
        L1 -= u;
        L2 += u * u;
        L3 -= 2.0 * u * u * u;
    }
    const double d1 = L1;
    const double d3 = L1 * L1 * L1 + 3.0 * L1 * L2 + L3;

    // integral over [K, inf) with x = K/s
    auto h = [&](double s) {
        if (s <= 0.0)
            return 0.0;
        const double x = K / s;
        return std::exp(log_summand_ratio(n, beta, x, K)) * K / (s * s);
    };
    QuadratureSpec spec;
    spec.rel_tol = 1e-13;
    spec.abs_tol = 1e-300;
    const double integral = integrate(h, 0.0, 1.0, spec).value;
    const double tail = integral + 0.5 - d1 / 12.0 + d3 / 720.0;
    return {tail, std::abs(d3) / 720.0};
}
} // namespace detail

/// e_n (rho < 1) or d_n (rho = 1) to relative accuracy tol.
inline CoefficientSum spheroidal_coefficient(int n, double eps, double rho, double tol, long max_terms = 1L << 27)
{
    if (n < 0)
        throw domain_error("spheroidal coefficient: negative degree");
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw domain_error("spheroidal coefficient: eps must be positive");
    if (!(rho > 0.0 && rho <= 1.0))
        throw domain_error("spheroidal coefficient: f/R_e must lie in (0, 1]");
    if (!(tol > 0.0))
        throw domain_error("spheroidal coefficient: tol must be positive");

    const double beta = eps + 1.0;
    // ln t_n, with C_{n,n} = n!^2/(2n+1)! = prod_{j=1}^{n} j/(n+j) / (2n+1)
    double log_scale = n * std::log(rho) - std::log(2.0 * n + 1.0) - std::log(n * beta + 1.0);
    for (int j = 1; j <= n; ++j)
        log_scale += std::log(double(j) / double(n + j));

    constexpr double big = 1e150;
    const double log_big = std::log(big);
    double t = 1.0; // t_k / exp(log_scale)
    double S = 0.0;
    const bool geometric = rho < 1.0;
    long checkpoint = std::max<long>(4L * n * (n + 1), 1024);

    for (long k = n;; ++k)
    {
        if (k - n > max_terms)
            throw convergence_error("spheroidal coefficient: tail bound not below tol after " +
                                    std::to_string(max_terms) + " terms (n=" + std::to_string(n) + ")");
        if (!geometric && k == checkpoint)
        {
            // S holds sum_{j<k}; t is g(k)
            const auto [tail, bound] = detail::euler_maclaurin_tail(n, beta, double(k));
            const double total = S + t * tail;
            if (t * bound <= 0.5 * tol * total)
                return {log_scale + std::log(total), t * bound / total, k - n};
            checkpoint *= 2;
        }
        S += t;

        const double kp1 = double(k + 1);
        const double growth = kp1 * kp1 / ((kp1 - n) * (kp1 + n + 1.0));
        const double ratio = rho * growth * (k * beta + 1.0) / (kp1 * beta + 1.0);
        if (geometric)
        {
            // For j >= k the growth factor never exceeds max(growth_k, 1).
            const double q = rho * std::max(growth, 1.0);
            if (q < 1.0)
            {
                const double bound = t * q / (1.0 - q);
                if (bound <= tol * S)
                    return {log_scale + std::log(S), bound / S, k - n + 1};
            }
        }
        t *= ratio;
        if (t > big)
        {
            t /= big;
            S /= big;
            log_scale += log_big;
        }
    }
}

inline double coeff_d(int n, double eps, double tol)
{
    return spheroidal_coefficient(n, eps, 1.0, tol).value();
}

inline double coeff_e(int n, double eps, double f_over_Re, double tol)
{
    return spheroidal_coefficient(n, eps, f_over_Re, tol).value();
}

/// Immutable table of one coefficient family for degrees 0..N.
struct CoefficientTable
{
    enum class Family
    {
        c,
        d,
        e
    };

    Family family = Family::c;
    double eps = 0.0;
    double rho = 1.0; ///< f/R_e for family e
    double tail_tol = 0.0;
    std::vector<double> values;
    /// ln|values[n]|; always finite even where values[n] underflows.
    std::vector<double> log_values;

    int max_degree() const { return static_cast<int>(values.size()) - 1; }

    static CoefficientTable c_table(int N, double eps)
    {
        const MaterialCoefficients mat(eps);
        CoefficientTable t;
        t.family = Family::c;
        t.eps = eps;
        t.values.resize(static_cast<std::size_t>(N) + 1);
        t.log_values.resize(t.values.size());
        double c = 1.0;
        for (int n = 0; n <= N; ++n)
        {
            if (n > 0)
                c *= (mat.mu - n) / (mat.mu + n);
            t.values[n] = c;
            t.log_values[n] = std::log(std::abs(c));
        }
        return t;
    }

    static CoefficientTable regular_table(int N, double eps, double rho, double tol)
    {
        CoefficientTable t;
        t.family = (rho == 1.0) ? Family::d : Family::e;
        t.eps = eps;
        t.rho = rho;
        t.tail_tol = tol;
        t.values.resize(static_cast<std::size_t>(N) + 1);
        t.log_values.resize(t.values.size());
        for (int n = 0; n <= N; ++n)
        {
            const auto s = spheroidal_coefficient(n, eps, rho, tol);
            t.log_values[n] = s.log_value;
            t.values[n] = s.value();
        }
        return t;
    }
};

} // namespace dielsphere
