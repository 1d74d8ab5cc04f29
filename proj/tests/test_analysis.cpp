#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dielsphere/analysis.hpp"

using namespace dielsphere;
using std::numbers::pi;

namespace
{
const ProblemConfig external_cfg = ProblemConfig::external_source(1.02, 2.25);

EvaluationPoint at(double r, double theta)
{
    return EvaluationPoint::spherical(r, theta);
}

double lambda(double u)
{
    return u + std::sqrt((u - 1) * (u + 1));
}

SeriesEvaluation regular(const EvaluationPoint& p, double f, int N)
{
    SeriesOptions o;
    o.regular_coefficients = detail::regular_table_for(Method{Basis::regular_spheroidal, f}, external_cfg, N, o.coefficient_tol);
    return evaluate_method(Method{Basis::regular_spheroidal, f}, p, external_cfg, N, o);
}
} // namespace

TEST(ConvergenceCurve, ZeroOrderHasOneRow)
{
    const auto c = convergence_curve({}, at(0.5, 1.0), external_cfg, 0);
    ASSERT_EQ(c.rows.size(), 1u);
    EXPECT_EQ(c.rows[0].N, 0);
    EXPECT_EQ(c.rows[0].envelope, c.rows[0].rel_error);
    EXPECT_THROW(convergence_curve({}, at(0.5, 1.0), external_cfg, -1), domain_error);
}

TEST(ConvergenceCurve, SelfReferenceIsExact)
{
    ReferenceSpec ref;
    ref.method = Method{Basis::inverted_spheroidal, std::nullopt};
    ref.N = 130;
    const auto c = convergence_curve({}, at(0.7, 2.0), external_cfg, 130, ref);
    EXPECT_EQ(c.rows.back().rel_error, 0.0);
    EXPECT_EQ(c.reference, c.rows.back().partial_sum);
}

TEST(ConvergenceCurve, EnvelopeIsNonIncreasing)
{
    const auto c = convergence_curve(Method{Basis::spherical, std::nullopt}, at(1.0, pi), external_cfg, 80);
    for (std::size_t k = 1; k < c.rows.size(); ++k)
    {
        EXPECT_LE(c.rows[k].envelope, c.rows[k - 1].envelope);
        EXPECT_GE(c.rows[k].envelope, c.rows[k].rel_error);
    }
}

TEST(ConvergenceCurve, InvertedBeatsSphericalOnTheSurface)
{
    for (double t : {0.0, pi})
    {
        const auto inv = convergence_curve({}, at(1.0, t), external_cfg, 60);
        const auto sph = convergence_curve(Method{Basis::spherical, std::nullopt}, at(1.0, t), external_cfg, 100);
        const int n_inv = first_N_below(inv, 1e-6);
        EXPECT_GE(n_inv, 0);
        EXPECT_LE(n_inv, 40) << "theta=" << t;
        EXPECT_EQ(first_N_below(sph, 1e-6), -1) << "theta=" << t;
    }
}

TEST(ConvergenceCurve, GeometricDecayBoundedByTheCoordinateRatio)
{
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 40; ++k)
    {
        // inside: the inverted series; outside: the reflected spheroidal one
        const bool inside = k % 2 == 0;
        const auto p = inside ? at(0.2 + 0.8 * u(rng), std::acos(2 * u(rng) - 1))
                              : at(1.05 + 2.0 * u(rng), std::acos(2 * u(rng) - 1));
        const double xi = inside ? to_inverted_spheroidal(p, 1.0, 1.02).xi : to_offset_spheroidal(p, 1.02).xi;
        const auto e = evaluate_method({}, p, external_cfg, 60);
        const double bound = 1.0 / lambda(xi);
        EXPECT_LT(empirical_term_ratio(e.terms, 20, 60, 8), 1.05 * bound) << "r=" << p.r() << " t=" << p.theta();
    }
}

TEST(Reference, UnconvergedSeriesIsRejected)
{
    ReferenceSpec ref;
    ref.N = 5;
    EXPECT_THROW(reference_value(ref, at(1.0, 0.0), external_cfg), diagnostics_error);
    ReferenceSpec oracle;
    oracle.kind = ReferenceSpec::Kind::oracle;
    EXPECT_LT(std::abs(reference_value(oracle, at(0.6, 1.0), external_cfg) - 1.11621879661427), 1e-11);
}

TEST(ErrorMap, IdenticalAcrossThreadCounts)
{
    GridSpec g;
    g.n1 = 15;
    g.n2 = 17;
    const auto one = error_map({}, g, external_cfg, 20);
    g.threads = 4;
    const auto four = error_map({}, g, external_cfg, 20);
    ASSERT_EQ(one.points.size(), four.points.size());
    for (std::size_t k = 0; k < one.points.size(); ++k)
    {
        EXPECT_EQ(one.points[k].value, four.points[k].value);
        EXPECT_EQ(one.points[k].rel_error, four.points[k].rel_error);
        EXPECT_EQ(one.points[k].flag, four.points[k].flag);
    }
    EXPECT_EQ(one.floor, four.floor);
}

TEST(ErrorMap, FloorAndFlags)
{
    GridSpec g;
    g.n1 = 20;
    g.n2 = 21;
    const auto m = error_map(Method{Basis::spherical, std::nullopt}, g, external_cfg, 20);
    EXPECT_NEAR(m.floor, 1e-3 * m.median_abs_reference, 1e-18);
    for (const auto& p : m.points)
    {
        ASSERT_TRUE(p.valid);
        EXPECT_EQ(p.flag == "near_zero", std::abs(p.reference) < m.floor);
        EXPECT_EQ(p.rel_error, std::abs(p.value - p.reference) / std::max(std::abs(p.reference), m.floor));
    }
    // the regular basis has no outside series: those points are flagged, not fatal
    GridSpec c;
    c.kind = GridSpec::Kind::cartesian;
    c.n1 = 5;
    c.n2 = 5;
    c.lo1 = 0.0;
    c.hi1 = 1.5;
    c.lo2 = -1.5;
    c.hi2 = 1.5;
    const auto out = error_map(Method{Basis::regular_spheroidal, std::nullopt}, c, external_cfg, 20);
    int domain = 0;
    for (const auto& p : out.points)
        domain += p.flag == "domain";
    EXPECT_GT(domain, 0);
    GridSpec bad;
    bad.n1 = 0;
    EXPECT_THROW(error_map({}, bad, external_cfg, 20), domain_error);
}

TEST(ConvergenceRegion, Examples)
{
    const auto touching = convergence_region(1.02, 1.02);
    EXPECT_DOUBLE_EQ(touching.xi_max, 1.0);
    EXPECT_FALSE(touching.sphere_contained);
    EXPECT_TRUE(convergence_region(0.02, 1.02).sphere_contained);
    EXPECT_FALSE(convergence_region(0.3, 1.02).sphere_contained);
    EXPECT_THROW(convergence_region(2.0, 1.02), domain_error);
    EXPECT_THROW(convergence_region(0.0, 1.02), domain_error);
}

TEST(TermRatio, BoundaryAndTouchingCase)
{
    const auto reg = convergence_region(0.3, 1.02);
    // a point on the boundary spheroid
    const auto p = from_offset_spheroidal({reg.xi_max, -0.4, 0.0, 0.3});
    EXPECT_NEAR(term_ratio_X(p, 0.3, 1.02), 1.0, 1e-12);
    EXPECT_GT(term_ratio_X(at(1.0, pi), 1.02, 1.02), 1.0);
    EXPECT_FALSE(convergence_region(1.02, 1.02).contains(at(1.0, pi)));
}

TEST(TermRatio, ClassifiesTheSouthPoleForFocalLengthPointThree)
{
    const auto p = at(1.0, pi);
    const double X = term_ratio_X(p, 0.3, 1.02);
    EXPECT_GT(X, 1.05);
    const auto e = regular(p, 0.3, 200);
    EXPECT_GT(empirical_term_ratio(e.terms, 100, 200), 1.0);
    EXPECT_TRUE(e.diverging);
    EXPECT_NEAR(empirical_term_ratio(e.terms, 100, 200), X, 0.05 * X);
    EXPECT_FALSE(convergence_region(0.3, 1.02).contains(p));
}

TEST(TermRatio, TouchingFocusConvergesOnlyOnTheSegment)
{
    EXPECT_FALSE(regular(at(1.0, pi), 1.02, 200).converged);
    EXPECT_TRUE(regular(at(1.0, pi), 1.02, 200).diverging);
    EXPECT_TRUE(regular(at(0.5, 0.0), 1.02, 200).converged);
}

TEST(TermRatio, RandomPairsMatchEmpiricalGrowth)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int n = 0, mismatched = 0;
    double worst = 0;
    while (n < 200)
    {
        const double f = 0.05 + 0.97 * u(rng);
        const auto p = at(std::cbrt(u(rng)), std::acos(2 * u(rng) - 1));
        const double X = term_ratio_X(p, f, 1.02);
        if (std::abs(X - 1) <= 0.05)
            continue;
        ++n;
        const double emp = empirical_term_ratio(regular(p, f, 200).terms, 100, 200);
        mismatched += (emp < 1) != (X < 1);
        worst = std::max(worst, std::abs(emp / X - 1));
    }
    EXPECT_EQ(mismatched, 0);
    EXPECT_LT(worst, 0.05);
}

TEST(EmpiricalTermRatio, GeometricSequence)
{
    std::vector<double> t(50);
    for (int k = 0; k < 50; ++k)
        t[k] = std::pow(0.5, k) * (k % 2 ? -1 : 1);
    EXPECT_NEAR(empirical_term_ratio(t, 10, 40, 1), 0.5, 1e-14);
    EXPECT_THROW(empirical_term_ratio(t, 10, 50), domain_error);
}
