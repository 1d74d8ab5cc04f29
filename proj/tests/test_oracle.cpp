#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dielsphere/oracle.hpp"

using namespace dielsphere;
using std::numbers::pi;

namespace
{
const ProblemConfig external_cfg = ProblemConfig::external_source(1.02, 2.25);
const ProblemConfig inner = ProblemConfig::internal_source(1.0 / 1.02, 2.25);

EvaluationPoint at(double r, double theta)
{
    return EvaluationPoint::spherical(r, theta);
}

double rel(double got, double want)
{
    return std::abs(got - want) / std::abs(want);
}

double inverted_harmonic(int n, const EvaluationPoint& p, double a, double Re)
{
    const auto s = to_inverted_spheroidal(p, a, Re);
    return legendre::eval_Q_sequence(0, n, s.xi)[n] * legendre::eval_P_sequence(0, n, s.eta)[n] / p.r();
}
} // namespace

TEST(Quadrature, PolynomialAndBreakpoints)
{
    auto f = [](double x) { return x * x * x; };
    EXPECT_NEAR(integrate(f, 0.0, 2.0, {}).value, 4.0, 1e-14);
    const std::vector<double> br{0.0, 0.5, 1.0};
    auto kink = [](double x) { return std::abs(x - 0.5); };
    EXPECT_NEAR(integrate(kink, std::span<const double>(br), {}).value, 0.25, 1e-15);
    EXPECT_THROW(integrate(f, std::span<const double>(br.data(), 1), {}), domain_error);
}

TEST(Quadrature, EndpointSingularityAndInfinity)
{
    auto g = [](double x) { return 1.0 / std::sqrt(x); };
    EXPECT_NEAR(integrate(g, 0.0, 1.0, {}).value, 2.0, 1e-11);
    auto h = [](double x) { return 1.0 / (1.0 + x * x); };
    EXPECT_NEAR(integrate_to_infinity(h, 0.0, {}).value, pi / 2, 1e-12);
}

TEST(Quadrature, ErrorEstimateIsHonest)
{
    auto f = [](double x) { return std::log(x) * std::cos(30 * x); };
    QuadratureSpec loose;
    loose.rel_tol = 1e-7;
    loose.abs_tol = 1e-9;
    QuadratureSpec tight = loose;
    tight.rel_tol /= 2;
    tight.abs_tol /= 2;
    const auto a = integrate(f, 0.0, 1.0, loose);
    const auto b = integrate(f, 0.0, 1.0, tight);
    EXPECT_LT(std::abs(a.value - b.value), a.error);
}

TEST(Quadrature, SubdivisionCapAndFixedNodes)
{
    QuadratureSpec capped;
    capped.max_subdivisions = 2;
    auto g = [](double x) { return 1.0 / std::sqrt(x); };
    EXPECT_THROW(integrate(g, 0.0, 1.0, capped), convergence_error);
    QuadratureSpec fixed;
    fixed.scheme = QuadratureSpec::Scheme::fixed_node;
    fixed.max_subdivisions = 8;
    auto s = [](double x) { return std::sin(x); };
    EXPECT_NEAR(integrate(s, 0.0, pi, fixed).value, 2.0, 1e-14);
}

TEST(LineIntegral, OriginReducesToOneOverRe)
{
    EXPECT_NEAR(v_in_line_integral(at(0, 0), external_cfg), 0.9803922, 5e-8);
    EXPECT_LT(rel(v_in_line_integral(at(0, 0), external_cfg), 1.0 / 1.02), 1e-12);
}

TEST(LineIntegral, FrozenValues)
{
    EXPECT_LT(rel(v_in_line_integral(at(1, 0), external_cfg), 31.557336730393), 1e-12);
    EXPECT_LT(rel(v_in_line_integral(at(1, pi), external_cfg), 0.623976918160913), 1e-12);
    EXPECT_LT(rel(v_in_line_integral(at(0.6, 1), external_cfg), 1.11621879661427), 1e-12);
}

TEST(LineIntegral, AgreesWithConvergedInvertedSeries)
{
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> ur(0.0, 1.0), ut(0.0, pi);
    for (double Re : {1.02, 1.5})
        for (double eps : {2.25, 10.0})
        {
            const auto cfg = ProblemConfig::external_source(Re, eps);
            for (int k = 0; k < 100; ++k)
            {
                const auto p = at(std::cbrt(ur(rng)), ut(rng));
                const double series =
                    v_external_source(p, cfg, ExternalBasis::inverted_spheroidal_internal, 130).value;
                EXPECT_LT(rel(v_in_line_integral(p, cfg), series), 1e-8) << "Re=" << Re << " eps=" << eps;
            }
        }
}

TEST(LineIntegral, SingularOnTheImageLine)
{
    EXPECT_THROW(v_in_line_integral(at(1.5 * 1.02, 0), external_cfg), singularity_error);
    EXPECT_THROW(v_in_line_integral(at(0.5, 1), inner), domain_error);
}

TEST(OraclePotential, TableAgainstSphericalSeries)
{
    struct Row
    {
        double r, t, ext, in;
    };
    const Row rows[] = {
        {0.6, 1.0, 1.11621879661427, 1.37525041752014},
        {1.0, 0.0, 31.5573367303929, 21.4240877962519},
        {1.3, 0.5, -0.234161935665879, 2.95867394508608},
        {2.0, 2.0, 0.0319474760421754, 0.949587799104596},
        {1.0, 1.0, 1.03991360223639, 1.33353394081235},
    };
    for (const auto& row : rows)
    {
        EXPECT_LT(rel(oracle_potential(at(row.r, row.t), external_cfg), row.ext), 1e-11) << row.r << " " << row.t;
        EXPECT_LT(rel(oracle_potential(at(row.r, row.t), inner), row.in), 1e-11) << row.r << " " << row.t;
    }
}

TEST(OraclePotential, RegionsMatchTheSeries)
{
    const auto in = at(0.4, 2.2), out = at(1.7, 0.9);
    EXPECT_LT(rel(oracle_potential(in, inner),
                  v_internal_source(in, inner, InternalBasis::spheroidal_reflected, 130).value),
              1e-10);
    EXPECT_LT(rel(oracle_potential(out, inner), v_internal_source(out, inner, InternalBasis::spheroidal_outside, 130).value),
              1e-10);
    EXPECT_LT(rel(oracle_potential(out, external_cfg), v_external_source(out, external_cfg, ExternalBasis::spheroidal_reflected, 130).value),
              1e-10);
}

TEST(Havelock, OffsetMonopoleOnAxis)
{
    const double Ri = 1.0 / 1.02;
    const auto p = EvaluationPoint::cartesian(0, 0, 2 * Ri);
    EXPECT_NEAR(havelock_offset(0, p, Ri), 0.5 * std::log(2.0), 1e-13);
    EXPECT_NEAR(havelock_offset(0, p, Ri), 0.3465736, 5e-8);
}

TEST(Havelock, OffsetDipoleFarBelow)
{
    const double Ri = 1.0;
    const double v1 = havelock_offset(1, EvaluationPoint::cartesian(3, 0, -100), Ri);
    const double v2 = havelock_offset(1, EvaluationPoint::cartesian(6, 0, -200), Ri);
    EXPECT_LT(v1, 0.0);
    EXPECT_LT(v2, 0.0);
    EXPECT_NEAR(v1 / v2, 4.0, 0.05);
}

TEST(Havelock, InvertedNearOriginIsFinite)
{
    const double Re = 1.02;
    const double v = havelock_inverted(0, at(1e-8, 1.0), Re);
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_NEAR(v, 0.5 / Re, 1e-7);
    EXPECT_THROW(havelock_inverted(0, at(1.5, 0.0), Re), singularity_error);
    EXPECT_THROW(havelock_offset(0, at(0.5, 0.0), 1.0), singularity_error);
}

TEST(Havelock, BothFormsMatchQPProducts)
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ur(0.05, 3.0), ut(0.0, pi);
    const double Ri = 1.0 / 1.02, Re = 1.02;
    int checked = 0;
    while (checked < 20)
    {
        const auto p = at(ur(rng), ut(rng));
        if (detail::distance_to_axis_interval(p, 0.0, Ri) < 0.02 ||
            detail::distance_to_axis_interval(p, Re, INFINITY) < 0.02)
            continue;
        ++checked;
        const auto s = to_offset_spheroidal(p, Ri);
        for (int n = 0; n <= 6; ++n)
        {
            const double qp = legendre::eval_Q_sequence(0, n, s.xi)[n] * legendre::eval_P_sequence(0, n, s.eta)[n];
            EXPECT_LT(std::abs(havelock_offset(n, p, Ri) - qp), 1e-8 * std::max(std::abs(qp), 1e-3));
            const double inv = inverted_harmonic(n, p, 1.0, Re);
            for (auto form : {HavelockParameterization::unit_interval, HavelockParameterization::semi_infinite})
                EXPECT_LT(std::abs(havelock_inverted(n, p, Re, {}, form) - inv), 1e-8 * std::max(std::abs(inv), 1e-3))
                    << "n=" << n;
        }
    }
}

TEST(Laplacian, AnalyticFields)
{
    auto r2 = [](double x, double y, double z) { return x * x + y * y + z * z; };
    EXPECT_NEAR(laplacian_fd(r2, at(0.7, 1.1), 1e-3), 6.0, 1e-6);
    auto coulomb = [](double x, double y, double z) { return 1.0 / std::hypot(x, y, z - 1.02); };
    const auto est = laplacian_fd_detailed(coulomb, at(0.5, 0.8), 1e-3);
    EXPECT_LT(std::abs(est.value), 1e-4 * est.curvature_scale);
    EXPECT_THROW(laplacian_fd(r2, at(1, 1), 0.0), domain_error);
    auto blow = [](double, double, double z) { return 1.0 / z; };
    EXPECT_THROW(laplacian_fd(blow, EvaluationPoint::cartesian(0, 0, 1e-3), 1e-3), singularity_error);
}

TEST(Laplacian, InvertedHarmonicIsHarmonic)
{
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> ur(0.1, 0.95), ut(0.2, pi - 0.2);
    for (int k = 0; k < 20; ++k)
    {
        const auto p = at(ur(rng), ut(rng));
        for (int n = 0; n <= 5; ++n)
        {
            auto field = [n](double x, double y, double z) {
                return inverted_harmonic(n, EvaluationPoint::cartesian(x, y, z), 1.0, 1.02);
            };
            const auto est = laplacian_fd_detailed(field, p, 1e-3);
            EXPECT_LT(std::abs(est.value), 1e-4 * est.curvature_scale) << "n=" << n;
        }
    }
}
