// Potential of a unit charge at z = 1.02 a outside a sphere with eps = 2.25,
// summed in two bases and checked against the line-image quadrature.
#include <cmath>
#include <cstdio>
#include <numbers>

#include "dielsphere/dielsphere.hpp"

int main()
{
    using namespace dielsphere;
    const auto cfg = ProblemConfig::external_source(1.02, 2.25);
    const auto p = EvaluationPoint::spherical(1.0, 0.0);

    const double oracle = oracle_potential(p, cfg);
    std::printf("line-image oracle          % .15f\n", oracle);
    for (int N : {20, 40, 80})
    {
        const auto inv = v_external_source(p, cfg, ExternalBasis::inverted_spheroidal_internal, N);
        const auto sph = v_external_source(p, cfg, ExternalBasis::spherical_internal, N);
        std::printf("N = %3d  inverted % .15f (err %.1e)  spherical % .15f (err %.1e)\n", N, inv.value,
                    std::abs(inv.value / oracle - 1.0), sph.value, std::abs(sph.value / oracle - 1.0));
    }

    // The regular spheroidal series with f = 0.3 a converges only inside xi_f < 2 R_e/f - 1.
    const auto region = convergence_region(0.3, cfg.R_e());
    for (double theta : {0.0, std::numbers::pi})
    {
        const auto q = EvaluationPoint::spherical(1.0, theta);
        std::printf("theta = %.4f  X = %.4f  %s\n", theta, term_ratio_X(q, 0.3, cfg.R_e()),
                    region.contains(q) ? "converges" : "diverges");
    }
}
