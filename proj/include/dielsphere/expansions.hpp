#pragma once

// Expansions between solid spherical harmonics and offset spheroidal harmonics
// (foci at O and c z_hat), both sides evaluated independently.
//
//   PP_in_P   P_n^m(xi)P_n^m(eta) = (n+m)!/(n-m)! sum_{k=m}^{n} (-)^{n+k} (n+k)! / (k!(k+m)!(n-k)!)
//                                   (r/c)^k P_k^m(cos t)
//   P_in_QP   (c/r)^{n+1} P_n^m(cos t) = 2(-)^{n+m}/(n!(n-m)!) sum_{k>=n} (-)^k (2k+1)
//                                   (k+n)!/(k-n)! (k-m)!/(k+m)! Q_k^m(xi) P_k^m(eta)
//   P_in_PP   (r/c)^n P_n^m(cos t) = n!(n+m)! sum_{k=m}^{n} (2k+1)/((n-k)!(n+k+1)!)
//                                   (k-m)!/(k+m)! P_k^m(xi) P_k^m(eta)
//   QP_in_P   Q_n^m(xi)P_n^m(eta) = (-)^m/2 (n+m)!/(n-m)! sum_{k>=n} k!(k-m)!/((k-n)!(k+n+1)!)
//                                   (c/r)^{k+1} P_k^m(cos t)
//
// Factorial ratios go through lgamma with the sign kept separately. The m > 0
// identities hold with the phase convention documented in legendre.hpp.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "dielsphere/coords.hpp"
#include "dielsphere/error.hpp"
#include "dielsphere/legendre.hpp"
#include "dielsphere/quadrature.hpp"
#include "dielsphere/series.hpp"

namespace dielsphere
{

enum class IdentityId
{
    PP_in_P,
    P_in_QP,
    P_in_PP,
    QP_in_P
};

inline const char* identity_name(IdentityId id)
{
    switch (id)
    {
    case IdentityId::PP_in_P:
        return "PP_in_P";
    case IdentityId::P_in_QP:
        return "P_in_QP";
    case IdentityId::P_in_PP:
        return "P_in_PP";
    case IdentityId::QP_in_P:
        return "QP_in_P";
    }
    return "unknown";
}

inline bool identity_is_finite(IdentityId id)
{
    return id == IdentityId::PP_in_P || id == IdentityId::P_in_PP;
}

struct IdentityReport
{
    IdentityId id = IdentityId::PP_in_P;
    int n = 0;
    int m = 0;
    EvaluationPoint point;
    double c = 1.0;
    int K = 0; ///< last degree kept on the right-hand side
    double lhs = 0.0;
    double rhs = 0.0;
    double rel_gap = 0.0;
    /// Right-hand-side terms stopped decaying (outside the region of validity).
    bool terms_growing = false;
    std::vector<double> rhs_terms;
};

namespace detail
{
inline double lfact(int n)
{
    return std::lgamma(double(n) + 1.0);
}

/// |lhs - rhs| relative to max(|lhs|, sum |rhs terms|). The term sum is the
/// scale rounding acts on; a plain max(|lhs|, |rhs|) blows up at the zeros of
/// P_n^m.
inline double relative_gap(double lhs, double rhs, double term_scale)
{
    const double scale = std::max({std::abs(lhs), std::abs(rhs), term_scale});
    if (scale == 0.0)
        return 0.0;
    return std::abs(lhs - rhs) / scale;
}

inline double sign_of_power(int k)
{
    return (k % 2 == 0) ? 1.0 : -1.0;
}

/// sign * exp(log_mag)
inline double signed_exp(double sign, double log_mag)
{
    return sign * std::exp(log_mag);
}
} // namespace detail

/// Coefficient of (r/c)^k P_k^m(cos t) in PP_in_P.
inline double coeff_PP_in_P(int n, int m, int k)
{
    using namespace detail;
    const double lm = lfact(n + m) - lfact(n - m) + lfact(n + k) - lfact(k) - lfact(k + m) - lfact(n - k);
    return signed_exp(sign_of_power(n + k), lm);
}

/// Coefficient of Q_k^m(xi) P_k^m(eta) in P_in_QP.
inline double coeff_P_in_QP(int n, int m, int k)
{
    using namespace detail;
    const double lm = std::log(2.0 * (2 * k + 1)) - lfact(n) - lfact(n - m) + lfact(k + n) - lfact(k - n) +
                      lfact(k - m) - lfact(k + m);
    return signed_exp(sign_of_power(n + m + k), lm);
}

/// Coefficient of P_k^m(xi) P_k^m(eta) in P_in_PP.
inline double coeff_P_in_PP(int n, int m, int k)
{
    using namespace detail;
    const double lm = std::log(2.0 * k + 1) + lfact(n) + lfact(n + m) - lfact(n - k) - lfact(n + k + 1) +
                      lfact(k - m) - lfact(k + m);
    return std::exp(lm);
}

/// Coefficient of (c/r)^{k+1} P_k^m(cos t) in QP_in_P.
inline double coeff_QP_in_P(int n, int m, int k)
{
    using namespace detail;
    const double lm = std::log(0.5) + lfact(n + m) - lfact(n - m) + lfact(k) + lfact(k - m) - lfact(k - n) -
                      lfact(k + n + 1);
    return signed_exp(sign_of_power(m), lm);
}

/// Evaluates both sides of one identity. K is the last degree kept for the
/// two infinite expansions and is ignored by the finite ones.
inline IdentityReport evaluate_identity(IdentityId id, int n, int m, const EvaluationPoint& p, double c, int K)
{
    if (n < 0 || m < 0)
        throw domain_error("evaluate_identity: n and m must be non-negative");
    if (m > n)
        throw domain_error("evaluate_identity: order m exceeds degree n");
    if (!(c > 0.0))
        throw domain_error("evaluate_identity: focal offset c must be positive");

    IdentityReport rep;
    rep.id = id;
    rep.n = n;
    rep.m = m;
    rep.point = p;
    rep.c = c;

    const auto s = to_offset_spheroidal(p, c);
    const double x = detail::cos_theta_exact(p);
    const double r = p.r();
    const bool finite = identity_is_finite(id);
    if (!finite && K < n)
        throw domain_error("evaluate_identity: truncation K must be at least n");
    const int top = finite ? n : K;
    rep.K = top;

    switch (id)
    {
    case IdentityId::PP_in_P: {
        rep.lhs = legendre::eval_P_sequence(m, n, s.xi)[n] * legendre::eval_P_sequence(m, n, s.eta)[n];
        const auto P = legendre::eval_P_sequence(m, n, x);
        double pw = std::pow(r / c, m);
        for (int k = m; k <= n; ++k, pw *= r / c)
            rep.rhs_terms.push_back(coeff_PP_in_P(n, m, k) * pw * P[k]);
        break;
    }
    case IdentityId::P_in_PP: {
        rep.lhs = std::pow(r / c, n) * legendre::eval_P_sequence(m, n, x)[n];
        const auto Px = legendre::eval_P_sequence(m, n, s.xi);
        const auto Pe = legendre::eval_P_sequence(m, n, s.eta);
        for (int k = m; k <= n; ++k)
            rep.rhs_terms.push_back(coeff_P_in_PP(n, m, k) * Px[k] * Pe[k]);
        break;
    }
    case IdentityId::P_in_QP: {
        if (s.xi < 1.0 + legendre::singularity_guard)
            throw singularity_error("evaluate_identity: P_in_QP is singular on the focal segment");
        if (r == 0.0)
            throw singularity_error("evaluate_identity: P_in_QP is singular at the origin");
        rep.lhs = std::pow(c / r, n + 1) * legendre::eval_P_sequence(m, n, x)[n];
        const auto Q = legendre::eval_Q_sequence(m, top, s.xi);
        const auto Pe = legendre::eval_P_sequence(m, top, s.eta);
        for (int k = n; k <= top; ++k)
            rep.rhs_terms.push_back(coeff_P_in_QP(n, m, k) * Q[k] * Pe[k]);
        break;
    }
    case IdentityId::QP_in_P: {
        if (s.xi < 1.0 + legendre::singularity_guard)
            throw singularity_error("evaluate_identity: QP_in_P is singular on the focal segment");
        if (r == 0.0)
            throw singularity_error("evaluate_identity: QP_in_P is singular at the origin");
        rep.lhs = legendre::eval_Q_sequence(m, n, s.xi)[n] * legendre::eval_P_sequence(m, n, s.eta)[n];
        const auto P = legendre::eval_P_sequence(m, top, x);
        // (c/r)^{k+1} through logs: the powers overflow well inside the divergent region
        const double lq = std::log(c / r);
        for (int k = n; k <= top; ++k)
            rep.rhs_terms.push_back(coeff_QP_in_P(n, m, k) * std::exp((k + 1) * lq) * P[k]);
        break;
    }
    }
    double sum = 0.0, mag = 0.0;
    for (double t : rep.rhs_terms)
    {
        sum += t;
        mag += std::abs(t);
    }
    rep.rhs = sum;
    rep.rel_gap = detail::relative_gap(rep.lhs, rep.rhs, std::isfinite(mag) ? mag : 0.0);
    if (!finite)
        rep.terms_growing = divergence_detected(rep.rhs_terms) ||
                            !std::isfinite(truncation_estimate(rep.rhs_terms)) || !std::isfinite(rep.rhs);
    return rep;
}

/// Irregular solid harmonic of the Kelvin image expanded on radially-inverted
/// spheroidal harmonics:
///   (R_e^/r^)^{n+1} P_n(cos t) = sum_{k>=n} (-)^{n+k} 2(2k+1)(k+n)!/(n!^2 (k-n)!) Q_k(xic) P_k(etac),
/// with r^ = a^2/r and R_e^ = a^2/R_e, i.e. (r/R_e)^{n+1} P_n(cos t).
inline std::pair<double, double> inverted_expansion(int n, const EvaluationPoint& p, double a, double R_e, int K)
{
    if (n < 0 || K < n)
        throw domain_error("inverted_expansion: need 0 <= n <= K");
    const auto s = to_inverted_spheroidal(p, a, R_e);
    if (s.xi < 1.0 + legendre::singularity_guard)
        throw singularity_error("inverted_expansion: point lies on the ray theta = 0, r >= R_e");
    const double lhs = std::pow(p.r() / R_e, n + 1) * legendre::eval_P_sequence(0, n, detail::cos_theta_exact(p))[n];
    const auto Q = legendre::eval_Q_sequence(0, K, s.xi);
    const auto P = legendre::eval_P_sequence(0, K, s.eta);
    double rhs = 0.0;
    for (int k = n; k <= K; ++k)
        rhs += coeff_P_in_QP(n, 0, k) * Q[k] * P[k];
    return {lhs, rhs};
}

namespace detail
{
template <class T>
T factorial(int n)
{
    T out(1);
    for (int i = 2; i <= n; ++i)
        out *= T(i);
    return out;
}
} // namespace detail

/// Both sides of
///   sum_{q=0}^{p} (-)^{q+p} (q+p)!/(q!^2 (p-q)!) / (k+q+1) = k!^2/((k-p)!(k+p+1)!).
/// T may be an exact rational type.
template <class T = double>
std::pair<T, T> partial_fraction_identity(int p, int k)
{
    if (p < 0 || k < p)
        throw domain_error("partial_fraction_identity: need 0 <= p <= k");
    using detail::factorial;
    T lhs(0);
    for (int q = 0; q <= p; ++q)
    {
        T term = factorial<T>(q + p) / (factorial<T>(q) * factorial<T>(q) * factorial<T>(p - q) * T(k + q + 1));
        if ((q + p) % 2 == 1)
            term = -term;
        lhs += term;
    }
    const T rhs = factorial<T>(k) * factorial<T>(k) / (factorial<T>(k - p) * factorial<T>(k + p + 1));
    return {lhs, rhs};
}

/// (2n+1)/(n(eps+1)+1) - 2/(eps+1) - beta_inf/(n(eps+1)+1); zero for every n.
template <class T = double>
T coefficient_split_residual(int n, const T& eps)
{
    const T one(1);
    const T denom = T(n) * (eps + one) + one;
    const T beta_inf = (eps - one) / (eps + one);
    return T(2 * n + 1) / denom - T(2) / (eps + one) - beta_inf / denom;
}

inline double shifted_legendre_orthogonality(int n, int p, const QuadratureSpec& q = {})
{
    if (n < 0 || p < 0)
        throw domain_error("shifted_legendre_orthogonality: degrees must be non-negative");
    auto f = [&](double x) {
        const double u = 2.0 * x - 1.0;
        const auto P = legendre::eval_P_sequence(0, std::max(n, p), u);
        return P[n] * P[p];
    };
    QuadratureSpec spec = q;
    // The exact value can be zero, so a purely relative target is unreachable.
    spec.abs_tol = std::max(spec.abs_tol, 1e-15);
    return integrate(f, 0.0, 1.0, spec).value;
}

/// Exact-arithmetic coefficient of either finite transformation, from
/// integer factorials (T may be a rational type).
template <class T>
T finite_coefficient(IdentityId id, int n, int m, int k)
{
    using detail::factorial;
    if (id == IdentityId::PP_in_P)
    {
        T v = factorial<T>(n + m) * factorial<T>(n + k) /
              (factorial<T>(n - m) * factorial<T>(k) * factorial<T>(k + m) * factorial<T>(n - k));
        return (n + k) % 2 == 0 ? v : T(-v);
    }
    if (id == IdentityId::P_in_PP)
        return factorial<T>(n) * factorial<T>(n + m) * T(2 * k + 1) * factorial<T>(k - m) /
               (factorial<T>(n - k) * factorial<T>(n + k + 1) * factorial<T>(k + m));
    throw domain_error("finite_coefficient: only the finite identities have matrix form");
}

/// Dense matrix M[i][j] for degrees n = m + i, k = m + j, of either finite
/// transformation (PP_in_P or P_in_PP); zero above the diagonal.
template <class T = double>
std::vector<std::vector<T>> transformation_matrix(IdentityId id, int m, int nmax)
{
    if (!identity_is_finite(id))
        throw domain_error("transformation_matrix: only the finite identities are matrices");
    if (m < 0 || nmax < m)
        throw domain_error("transformation_matrix: need 0 <= m <= nmax");
    const int size = nmax - m + 1;
    std::vector<std::vector<T>> M(size, std::vector<T>(size, T(0)));
    for (int n = m; n <= nmax; ++n)
        for (int k = m; k <= n; ++k)
            M[n - m][k - m] = finite_coefficient<T>(id, n, m, k);
    return M;
}

/// max |(A B)_{np} - delta_{np}| over both composition orders of the two
/// finite transformations. In double precision the products reach ~1e9 for
/// n = 10, so only an exact T gives a meaningful zero.
template <class T = double>
T composed_delta_error(int m, int nmax)
{
    using std::abs;
    const auto A = transformation_matrix<T>(IdentityId::PP_in_P, m, nmax);
    const auto B = transformation_matrix<T>(IdentityId::P_in_PP, m, nmax);
    const std::size_t size = A.size();
    T worst(0);
    for (int order = 0; order < 2; ++order)
    {
        const auto& L = order == 0 ? A : B;
        const auto& R = order == 0 ? B : A;
        for (std::size_t i = 0; i < size; ++i)
            for (std::size_t j = 0; j < size; ++j)
            {
                T sum(0);
                for (std::size_t k = 0; k < size; ++k)
                    sum += L[i][k] * R[k][j];
                const T target = i == j ? T(1) : T(0);
                const T err = abs(T(sum - target));
                if (worst < err)
                    worst = err;
            }
    }
    return worst;
}

} // namespace dielsphere
