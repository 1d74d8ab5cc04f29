// Runs the eight acceptance criteria and prints one PASS/FAIL line for each.
// Exit status is nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

#include "cli.hpp"
#include "dielsphere/dielsphere.hpp"

using namespace dielsphere;
using std::numbers::pi;

namespace
{
const ProblemConfig external_cfg = ProblemConfig::external_source(1.02, 2.25);
const ProblemConfig inner = ProblemConfig::internal_source(1.0 / 1.02, 2.25);

// pinned tolerances
constexpr double c1_fraction = 0.99;
constexpr double c1_roundoff = 1e-15; // both errors at double precision: the ordering is rounding noise
constexpr double c1_seconds = 10.0;
constexpr double c2_threshold = 1e-6;
constexpr double c2_seconds = 5.0;
constexpr double c3_tol = 1e-8;
constexpr double c4_value_tol = 1e-8;
constexpr double c4_flux_tol = 1e-4;
constexpr double c4_h = 1e-4;
constexpr double c5_finite_tol = 1e-11;
constexpr double c5_infinite_tol = 1e-8;
constexpr int c5_K = 80;
constexpr double c5_delta_tol = 1e-11;
constexpr double c6_tol = 1e-8;
constexpr double c7_recurrence_tol = 1e-12;
constexpr double c7_wronskian_tol = 1e-12;
constexpr double c7_reference_tol = 1e-10;
constexpr double c8_tol = 1e-4;

struct Outcome
{
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok)
        {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
        }
    }
    void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

EvaluationPoint at(double r, double theta)
{
    return EvaluationPoint::spherical(r, theta);
}

double rel(double got, double want)
{
    return std::abs(got - want) / std::abs(want);
}

SeriesOptions regular_options(double f, int N)
{
    SeriesOptions o;
    o.regular_coefficients = detail::regular_table_for(Method{Basis::regular_spheroidal, f}, external_cfg, N, o.coefficient_tol);
    return o;
}

// ---------------------------------------------------------------------------

Outcome criterion1()
{
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    GridSpec g; // 100 x 100 polar grid over r in (0, a], theta in [0, pi]
    const auto inv = error_map(Method{Basis::inverted_spheroidal, std::nullopt}, g, external_cfg, 20);
    const auto sph = error_map(Method{Basis::spherical, std::nullopt}, g, external_cfg, 50);
    const double dt = seconds_since(t0);

    int compared = 0, better = 0, raw_better = 0, raw_total = 0, near_zero = 0, roundoff = 0, invalid = 0;
    for (std::size_t k = 0; k < inv.points.size(); ++k)
    {
        const auto& a = inv.points[k];
        const auto& b = sph.points[k];
        if (!a.valid || !b.valid)
        {
            ++invalid;
            continue;
        }
        if (a.flag == "near_zero" || b.flag == "near_zero")
        {
            ++near_zero;
            continue;
        }
        ++raw_total;
        raw_better += a.rel_error < b.rel_error;
        if (a.rel_error <= c1_roundoff && b.rel_error <= c1_roundoff)
        {
            ++roundoff;
            continue;
        }
        ++compared;
        better += a.rel_error < b.rel_error;
    }
    const double frac = compared ? double(better) / compared : 0.0;
    out.require(invalid == 0, std::to_string(invalid) + " points could not be evaluated");
    out.require(compared > 0 && frac >= c1_fraction, "fraction strictly better " + fmt(frac) + " < 0.99");
    out.require(dt < c1_seconds, "runtime " + fmt(dt) + " s");
    out.note("strictly better on " + std::to_string(better) + "/" + std::to_string(compared) + " = " + fmt(frac));
    out.note("raw " + fmt(raw_total ? double(raw_better) / raw_total : 0.0) + " before removing " +
             std::to_string(roundoff) + " points where both errors <= 1e-15");
    out.note(std::to_string(near_zero) + " near-zero points excluded");
    out.note(fmt(dt) + " s");
    return out;
}

Outcome criterion2()
{
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    for (double t : {0.0, pi})
    {
        const std::string where = t == 0.0 ? "theta=0" : "theta=pi";
        const auto p = at(1.0, t);

        // (i) geometric decay of the inverted series, below threshold by N = 40
        const auto inv = convergence_curve({}, p, external_cfg, 60);
        const int n_inv = first_N_below(inv, c2_threshold);
        out.require(n_inv >= 0 && n_inv <= 40, where + " inverted reaches 1e-6 at N=" + std::to_string(n_inv));
        bool geometric = true;
        for (int n = 0; n + 10 <= 60; n += 10)
            if (inv.rows[n].envelope > 1e-12)
                geometric = geometric && inv.rows[n + 10].envelope <= 0.5 * inv.rows[n].envelope;
        out.require(geometric, where + " inverted envelope not geometric");

        // (ii) the spherical series needs more than 100 terms
        const auto sph = convergence_curve(Method{Basis::spherical, std::nullopt}, p, external_cfg, 100);
        const int n_sph = first_N_below(sph, c2_threshold);
        out.require(n_sph == -1, where + " spherical reaches 1e-6 at N=" + std::to_string(n_sph));

        // (iii) regular spheroidal with f = R_e
        const auto reg = convergence_curve(Method{Basis::regular_spheroidal, std::nullopt}, p, external_cfg, 200, {},
                                           regular_options(external_cfg.R_e(), 200));
        if (t == pi)
            out.require(reg.diverging, "regular f=R_e not flagged diverging at theta=pi");
        else
        {
            const double e0 = reg.rows.front().rel_error, e200 = reg.rows.back().rel_error;
            out.require(!reg.diverging && e200 < e0 && e200 > c2_threshold,
                        "regular f=R_e at theta=0 improves from " + fmt(e0) + " to " + fmt(e200));
            out.note("regular f=R_e theta=0: " + fmt(e0) + " -> " + fmt(e200) + " at N=200");
        }
        out.note(where + ": inverted N=" + std::to_string(n_inv) + ", spherical > 100 (error " +
                 fmt(sph.rows.back().rel_error) + " at N=100)");
    }

    // (iv) f = 0.3 a: points on the sphere and inside it, classified by X
    const double f = 0.3;
    const int N = 400;
    const auto opt = regular_options(f, N);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int conv = 0, div = 0, wrong = 0;
    for (int k = 0; k < 80; ++k)
    {
        const auto p = k < 40 ? at(1.0, pi * k / 39) : at(std::cbrt(u(rng)), std::acos(2 * u(rng) - 1));
        const double X = term_ratio_X(p, f, external_cfg.R_e());
        if (std::abs(X - 1) <= 0.05)
            continue;
        const auto e = evaluate_method(Method{Basis::regular_spheroidal, f}, p, external_cfg, N, opt);
        if (X < 1)
        {
            ++conv;
            const double ref = reference_value({}, p, external_cfg);
            wrong += !(e.converged && !e.diverging && rel(e.value, ref) < c2_threshold);
        }
        else
        {
            ++div;
            wrong += !e.diverging;
        }
    }
    out.require(wrong == 0, std::to_string(wrong) + " f=0.3 points misclassified");
    out.require(conv > 0 && div > 0, "f=0.3 sample lacks one class");
    out.note("f=0.3: " + std::to_string(conv) + " converging, " + std::to_string(div) + " diverging");
    const double dt = seconds_since(t0);
    out.require(dt < c2_seconds, "runtime " + fmt(dt) + " s");
    out.note(fmt(dt) + " s");
    return out;
}

Outcome criterion3()
{
    Outcome out;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_in = 0;
    for (int k = 0; k < 100; ++k)
    {
        const auto p = at(std::cbrt(u(rng)), std::acos(2 * u(rng) - 1));
        const auto s = v_external_source(p, external_cfg, ExternalBasis::inverted_spheroidal_internal, 130);
        worst_in = std::max(worst_in, rel(s.value, v_in_line_integral(p, external_cfg)));
    }
    out.require(worst_in < c3_tol, "interior max rel difference " + fmt(worst_in));

    std::vector<EvaluationPoint> pts;
    std::vector<double> spheroidal, spherical;
    for (int k = 0; k < 100; ++k)
    {
        pts.push_back(at(1.05 + 1.95 * u(rng), std::acos(2 * u(rng) - 1)));
        spheroidal.push_back(v_external_source(pts.back(), external_cfg, ExternalBasis::spheroidal_reflected, 130).value);
        spherical.push_back(v_external_source(pts.back(), external_cfg, ExternalBasis::spherical_reflected, 500).value);
    }
    std::vector<double> mags;
    for (double v : spherical)
        mags.push_back(std::abs(v));
    std::nth_element(mags.begin(), mags.begin() + 50, mags.end());
    const double floor = relative_error_floor_fraction * mags[50];
    double worst_out = 0;
    for (std::size_t k = 0; k < pts.size(); ++k)
        worst_out = std::max(worst_out, std::abs(spheroidal[k] - spherical[k]) / std::max(std::abs(spherical[k]), floor));
    out.require(worst_out < c3_tol, "exterior max rel difference " + fmt(worst_out));
    out.note("interior " + fmt(worst_in) + ", exterior " + fmt(worst_out));
    return out;
}

Outcome criterion4()
{
    Outcome out;
    auto with = [](Domain d) {
        SeriesOptions o;
        o.domain = d;
        return o;
    };
    using Field = std::function<double(const EvaluationPoint&, Domain)>;
    const Field ext_in = [](const EvaluationPoint& p, Domain d) {
        SeriesOptions o;
        o.domain = d;
        return v_external_source(p, external_cfg, ExternalBasis::inverted_spheroidal_internal, 130, std::nullopt, o).value;
    };
    const Field ext_out = [&](const EvaluationPoint& p, Domain d) {
        return v_point_charge(p, external_cfg, PointChargeMode::closed, 0).value +
               v_external_source(p, external_cfg, ExternalBasis::spheroidal_reflected, 130, std::nullopt, with(d)).value;
    };
    const Field int_in = [&](const EvaluationPoint& p, Domain d) {
        return v_point_charge(p, inner, PointChargeMode::closed, 0).value +
               v_internal_source(p, inner, InternalBasis::spheroidal_reflected, 130, with(d)).value;
    };
    const Field int_out = [&](const EvaluationPoint& p, Domain d) {
        return v_internal_source(p, inner, InternalBasis::spheroidal_outside, 130, with(d)).value;
    };
    struct Side
    {
        const char* name;
        Field in, outside;
        double eps;
    };
    for (const Side& s : {Side{"external", ext_in, ext_out, external_cfg.eps}, Side{"internal", int_in, int_out, inner.eps}})
    {
        double worst_v = 0, worst_d = 0;
        for (int j = 1; j <= 50; ++j)
        {
            const double t = pi * j / 50.0;
            const double vin = s.in(at(1, t), Domain::physical), vout = s.outside(at(1, t), Domain::physical);
            worst_v = std::max(worst_v, std::abs(vin - vout) / std::max(1.0, std::abs(vin)));
            const auto up = at(1 + c4_h, t), down = at(1 - c4_h, t);
            const double din = (s.in(up, Domain::continuation) - s.in(down, Domain::continuation)) / (2 * c4_h);
            const double dout =
                (s.outside(up, Domain::continuation) - s.outside(down, Domain::continuation)) / (2 * c4_h);
            worst_d = std::max(worst_d, std::abs(dout - s.eps * din) / std::max(1.0, std::abs(dout)));
        }
        out.require(worst_v < c4_value_tol, std::string(s.name) + " potential jump " + fmt(worst_v));
        out.require(worst_d < c4_flux_tol, std::string(s.name) + " flux jump " + fmt(worst_d));
        out.note(std::string(s.name) + ": value " + fmt(worst_v) + ", flux " + fmt(worst_d));
    }
    return out;
}

Outcome criterion5()
{
    using rational = boost::rational<boost::multiprecision::cpp_int>;
    Outcome out;
    double worst_finite = 0, worst_infinite = 0;
    for (IdentityId id : {IdentityId::PP_in_P, IdentityId::P_in_QP, IdentityId::P_in_PP, IdentityId::QP_in_P})
    {
        const auto pts = cli::identity_sample_points(id, 1.0, 20, 5);
        for (int m = 0; m <= 2; ++m)
            for (int n = m; n <= 8; ++n)
                for (const auto& p : pts)
                {
                    const auto rep = evaluate_identity(id, n, m, p, 1.0, c5_K);
                    double& worst = identity_is_finite(id) ? worst_finite : worst_infinite;
                    worst = std::max(worst, rep.rel_gap);
                }
    }
    out.require(worst_finite < c5_finite_tol, "finite identities gap " + fmt(worst_finite));
    out.require(worst_infinite < c5_infinite_tol, "infinite identities gap " + fmt(worst_infinite));

    rational delta(0);
    for (int m = 0; m <= 2; ++m)
        delta = std::max(delta, composed_delta_error<rational>(m, 10));
    out.require(boost::rational_cast<double>(delta) < c5_delta_tol, "composed delta " +
                                                                        fmt(boost::rational_cast<double>(delta)));

    int partial_ok = 0, partial_total = 0;
    for (int p = 0; p <= 8; ++p)
        for (int k = p; k <= 12; ++k)
        {
            const auto [lhs, rhs] = partial_fraction_identity<rational>(p, k);
            ++partial_total;
            partial_ok += lhs == rhs;
        }
    out.require(partial_ok == partial_total, "partial fractions exact in " + std::to_string(partial_ok) + "/" +
                                                 std::to_string(partial_total));
    out.note("finite " + fmt(worst_finite) + ", infinite (K=80) " + fmt(worst_infinite) + ", composed delta " +
             fmt(boost::rational_cast<double>(delta)) + " (exact), partial fractions " + std::to_string(partial_ok) +
             "/" + std::to_string(partial_total));
    return out;
}

Outcome criterion6()
{
    Outcome out;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ur(0.05, 3.0), ut(0.0, pi);
    const double Ri = 1.0 / 1.02, Re = 1.02;
    double worst_offset = 0, worst_inverted = 0;
    int checked = 0;
    while (checked < 20)
    {
        const auto p = at(ur(rng), ut(rng));
        // keep off the two singular segments, where both sides are infinite
        if (detail::distance_to_axis_interval(p, 0.0, Ri) < 0.02 || detail::distance_to_axis_interval(p, Re, INFINITY) < 0.02)
            continue;
        ++checked;
        const auto s = to_offset_spheroidal(p, Ri);
        const auto si = to_inverted_spheroidal(p, 1.0, Re);
        const auto Q = legendre::eval_Q_sequence(0, 6, s.xi), P = legendre::eval_P_sequence(0, 6, s.eta);
        const auto Qi = legendre::eval_Q_sequence(0, 6, si.xi), Pi = legendre::eval_P_sequence(0, 6, si.eta);
        for (int n = 0; n <= 6; ++n)
        {
            const double qp = Q[n] * P[n];
            worst_offset = std::max(worst_offset, std::abs(havelock_offset(n, p, Ri) - qp) / std::max(std::abs(qp), 1e-3));
            const double inv = Qi[n] * Pi[n] / p.r();
            for (auto form : {HavelockParameterization::unit_interval, HavelockParameterization::semi_infinite})
                worst_inverted = std::max(worst_inverted, std::abs(havelock_inverted(n, p, Re, {}, form) - inv) /
                                                              std::max(std::abs(inv), 1e-3));
        }
    }
    out.require(worst_offset < c6_tol, "offset form " + fmt(worst_offset));
    out.require(worst_inverted < c6_tol, "inverted forms " + fmt(worst_inverted));
    out.note("offset " + fmt(worst_offset) + ", inverted " + fmt(worst_inverted));
    return out;
}

Outcome criterion7()
{
    Outcome out;
    double worst_rec = 0, worst_w = 0;
    for (double xi : {1.01, 1.5, 2.0, 10.0})
        for (int m : {0, 1, 2})
        {
            const auto P = legendre::eval_P_sequence(m, 201, xi);
            const auto Q = legendre::eval_Q_sequence(m, 201, xi);
            for (int n = m + 1; n <= 200; ++n)
                for (const auto* v : {&P, &Q})
                {
                    const double a = (n - m + 1) * (*v)[n + 1], b = (2 * n + 1) * xi * (*v)[n], c = (n + m) * (*v)[n - 1];
                    worst_rec = std::max(worst_rec, std::abs(a - b + c) / std::max({std::abs(a), std::abs(b), std::abs(c)}));
                }
            if (m == 0)
                for (int n = 1; n <= 200; ++n)
                    worst_w = std::max(worst_w, rel(P[n] * Q[n - 1] - P[n - 1] * Q[n], 1.0 / n));
        }
    for (double x : {-0.9, -0.3, 0.2, 0.7})
    {
        const auto P = legendre::eval_P_sequence(0, 201, x);
        for (int n = 1; n <= 200; ++n)
        {
            const double a = (n + 1) * P[n + 1], b = (2 * n + 1) * x * P[n], c = n * P[n - 1];
            worst_rec = std::max(worst_rec, std::abs(a - b + c) / std::max({std::abs(a), std::abs(b), std::abs(c)}));
        }
    }

    // 50-digit reference: forward recurrence from the closed Q_0, Q_1
    using big = boost::multiprecision::cpp_dec_float_50;
    const double xi_d = 1.001;
    const big xi = xi_d;
    std::vector<big> ref(61);
    ref[0] = log((xi + 1) / (xi - 1)) / 2;
    ref[1] = xi * ref[0] - 1;
    for (int n = 1; n < 60; ++n)
        ref[n + 1] = ((2 * n + 1) * xi * ref[n] - n * ref[n - 1]) / (n + 1);
    const auto Q = legendre::eval_Q_sequence(0, 60, xi_d);
    double worst_q = 0;
    for (int n = 0; n <= 60; ++n)
        worst_q = std::max(worst_q, rel(Q[n], static_cast<double>(ref[n])));

    out.require(worst_rec < c7_recurrence_tol, "recurrence residual " + fmt(worst_rec));
    out.require(worst_w < c7_wronskian_tol, "Wronskian " + fmt(worst_w));
    out.require(worst_q < c7_reference_tol, "Q at 1.001 " + fmt(worst_q));
    out.note("recurrence " + fmt(worst_rec) + ", Wronskian " + fmt(worst_w) + ", Q(1.001) vs 50 digits " + fmt(worst_q));
    return out;
}

Outcome criterion8()
{
    Outcome out;
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0;
    for (int k = 0; k < 20; ++k)
    {
        const auto p = at(0.1 + 0.85 * std::cbrt(u(rng)), 0.2 + (pi - 0.4) * u(rng));
        for (int n = 0; n <= 5; ++n)
        {
            auto field = [n](double x, double y, double z) {
                const auto q = EvaluationPoint::cartesian(x, y, z);
                const auto s = to_inverted_spheroidal(q, 1.0, 1.02);
                return legendre::eval_Q_sequence(0, n, s.xi)[n] * legendre::eval_P_sequence(0, n, s.eta)[n] / q.r();
            };
            const auto est = laplacian_fd_detailed(field, p, 1e-3);
            worst = std::max(worst, std::abs(est.value) / est.curvature_scale);
        }
    }
    out.require(worst < c8_tol, "Laplacian / curvature scale " + fmt(worst));
    out.note("max |Laplacian| / curvature scale " + fmt(worst));
    return out;
}
} // namespace

int main()
{
    const std::function<Outcome()> criteria[] = {criterion1, criterion2, criterion3, criterion4,
                                                 criterion5, criterion6, criterion7, criterion8};
    int failed = 0;
    for (int k = 0; k < 8; ++k)
    {
        Outcome o;
        try
        {
            o = criteria[k]();
        }
        catch (const std::exception& e)
        {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failed += !o.pass;
        std::printf("Criterion %d: %s (%s)\n", k + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
