#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dielsphere/coords.hpp"
#include "dielsphere/expansions.hpp"
#include "dielsphere/series.hpp"

namespace dielsphere::cli
{

inline constexpr const char* tool_version = "0.1.0";

enum ExitCode : int
{
    ok = 0,
    validation = 2,
    nonconvergence = 3
};

/// Every parameter a subcommand can consume. The manifest records the full
/// resolved set, and --config accepts either a flat object with these keys or
/// a previously written manifest.
struct RunParameters
{
    double a = 1.0;
    double eps = 2.25;
    std::optional<double> re;
    std::optional<double> ri;
    std::string side = "external";

    std::string basis = "inverted-spheroidal";
    std::optional<double> f;
    int n = 20;
    int nmax = 60;
    std::optional<double> r;
    double theta = 0.0;
    std::string ref = "series:130";

    std::string grid = "100x100";
    std::string grid_kind = "polar";
    int threads = 1;

    std::string id = "all";
    int mmax = 2;
    int K = 80;
    double c = 1.0;
    int points = 20;
    unsigned seed = 1;

    std::string kind = "isopotential";
    int degree = 0;
    double extent = 3.0;
};

nlohmann::json to_json(const RunParameters& p);

/// Reads a flat key-value JSON document (or a manifest) over `base`. Unknown
/// keys raise domain_error. An empty file leaves `base` unchanged.
RunParameters load_config(const std::string& path, RunParameters base = {});

/// Source configuration from the resolved parameters.
ProblemConfig problem_config(const RunParameters& p);

/// Runs one subcommand; argv[0] is the program name. Diagnostics go to err,
/// short summaries to out.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

/// Random points inside the region where each identity holds: r in
/// [0.05, 3]c for the finite ones, outside the spheroid xi = 2 for P_in_QP
/// and r in [2, 5]c for QP_in_P.
std::vector<EvaluationPoint> identity_sample_points(IdentityId id, double c, int count, unsigned seed);

/// 17 significant digits, which always reads back to the same double.
std::string format_double(double v);

} // namespace dielsphere::cli
