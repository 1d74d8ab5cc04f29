#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "dielsphere/dielsphere.hpp"

namespace dielsphere::cli
{

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace
{

json opt_json(const std::optional<double>& v)
{
    return v ? json(*v) : json(nullptr);
}

// One table of key -> (writer, reader) keeps to_json, load_config and the
// flag bindings in step.
struct Field
{
    std::string key;
    std::function<json(const RunParameters&)> get;
    std::function<void(RunParameters&, const json&)> set;
};

template <class T>
Field plain(const char* key, T RunParameters::*m)
{
    return {key, [m](const RunParameters& p) { return json(p.*m); },
            [m](RunParameters& p, const json& v) { p.*m = v.get<T>(); }};
}

Field optional_double(const char* key, std::optional<double> RunParameters::*m)
{
    return {key, [m](const RunParameters& p) { return opt_json(p.*m); },
            [m](RunParameters& p, const json& v) {
                if (v.is_null())
                    p.*m = std::nullopt;
                else
                    p.*m = v.get<double>();
            }};
}

const std::vector<Field>& fields()
{
    static const std::vector<Field> table = {
        plain("a", &RunParameters::a),
        plain("eps", &RunParameters::eps),
        optional_double("re", &RunParameters::re),
        optional_double("ri", &RunParameters::ri),
        plain("side", &RunParameters::side),
        plain("basis", &RunParameters::basis),
        optional_double("f", &RunParameters::f),
        plain("n", &RunParameters::n),
        plain("nmax", &RunParameters::nmax),
        optional_double("r", &RunParameters::r),
        plain("theta", &RunParameters::theta),
        plain("ref", &RunParameters::ref),
        plain("grid", &RunParameters::grid),
        plain("grid_kind", &RunParameters::grid_kind),
        plain("threads", &RunParameters::threads),
        plain("id", &RunParameters::id),
        plain("mmax", &RunParameters::mmax),
        plain("K", &RunParameters::K),
        plain("c", &RunParameters::c),
        plain("points", &RunParameters::points),
        plain("seed", &RunParameters::seed),
        plain("kind", &RunParameters::kind),
        plain("degree", &RunParameters::degree),
        plain("extent", &RunParameters::extent),
    };
    return table;
}

} // namespace

json to_json(const RunParameters& p)
{
    json j = json::object();
    for (const auto& f : fields())
        j[f.key] = f.get(p);
    return j;
}

RunParameters load_config(const std::string& path, RunParameters base)
{
    std::ifstream in(path);
    if (!in)
        throw domain_error("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos)
        return base;
    json doc;
    try
    {
        doc = json::parse(text);
    }
    catch (const json::exception& e)
    {
        throw domain_error("config: " + path + " is not valid JSON: " + e.what());
    }
    if (doc.is_object() && doc.contains("parameters") && doc.contains("subcommand"))
        doc = doc["parameters"]; // a manifest from a previous run
    if (!doc.is_object())
        throw domain_error("config: top level must be a JSON object");
    for (auto it = doc.begin(); it != doc.end(); ++it)
    {
        const auto* field = [&]() -> const Field* {
            for (const auto& f : fields())
                if (f.key == it.key())
                    return &f;
            return nullptr;
        }();
        if (!field)
            throw domain_error("config: unknown key '" + it.key() + "'");
        try
        {
            field->set(base, it.value());
        }
        catch (const json::exception&)
        {
            throw domain_error("config: key '" + it.key() + "' has the wrong type");
        }
    }
    return base;
}

ProblemConfig problem_config(const RunParameters& p)
{
    if (!(p.a > 0.0))
        throw domain_error("a must be positive");
    if (std::abs(p.eps + 1.0) < 1e-9)
        throw domain_error("eps = -1 is a pole of mu = 1/(eps+1)");
    SourceSide side;
    if (p.side == "external")
        side = SourceSide::external;
    else if (p.side == "internal")
        side = SourceSide::internal;
    else
        throw domain_error("side must be 'external' or 'internal'");

    // re and ri name the outer and inner points of the pair, R_e R_i = a^2.
    double Re = 1.02 * p.a;
    if (p.re && p.ri)
    {
        if (std::abs(*p.re * *p.ri - p.a * p.a) > 1e-12 * p.a * p.a)
            throw domain_error("re and ri must satisfy re * ri = a^2");
        Re = *p.re;
    }
    else if (p.re)
        Re = *p.re;
    else if (p.ri)
    {
        if (!(*p.ri > 0.0))
            throw domain_error("ri must be positive");
        Re = p.a * p.a / *p.ri;
    }
    if (side == SourceSide::external)
    {
        if (!(Re > p.a))
            throw domain_error("an external source needs re > a (got re = " + format_double(Re) + ")");
        return ProblemConfig::external_source(Re, p.eps, p.a);
    }
    if (p.ri)
    {
        if (!(*p.ri < p.a))
            throw domain_error("an internal source needs ri < a");
        return ProblemConfig::internal_source(*p.ri, p.eps, p.a);
    }
    if (!(Re > p.a))
        throw domain_error("an internal source is placed at ri = a^2/re, which needs re > a");
    return ProblemConfig::internal_source(p.a * p.a / Re, p.eps, p.a);
}

namespace
{

Basis parse_basis(const std::string& s)
{
    if (s == "spherical")
        return Basis::spherical;
    if (s == "spheroidal")
        return Basis::spheroidal;
    if (s == "inverted-spheroidal")
        return Basis::inverted_spheroidal;
    if (s == "regular-spheroidal")
        return Basis::regular_spheroidal;
    throw domain_error("unknown basis '" + s + "'");
}

ReferenceSpec parse_reference(const std::string& s)
{
    ReferenceSpec ref;
    if (s == "oracle")
    {
        ref.kind = ReferenceSpec::Kind::oracle;
        return ref;
    }
    const std::string prefix = "series:";
    if (s.rfind(prefix, 0) == 0)
    {
        const std::string num = s.substr(prefix.size());
        int N = -1;
        const auto res = std::from_chars(num.data(), num.data() + num.size(), N);
        if (res.ec == std::errc() && res.ptr == num.data() + num.size() && N >= 0)
        {
            ref.N = N;
            return ref;
        }
    }
    throw domain_error("ref must be 'oracle' or 'series:N' (got '" + s + "')");
}

std::pair<int, int> parse_grid(const std::string& s)
{
    const auto x = s.find('x');
    if (x != std::string::npos)
    {
        int n1 = 0, n2 = 0;
        const auto r1 = std::from_chars(s.data(), s.data() + x, n1);
        const auto r2 = std::from_chars(s.data() + x + 1, s.data() + s.size(), n2);
        if (r1.ec == std::errc() && r1.ptr == s.data() + x && r2.ec == std::errc() &&
            r2.ptr == s.data() + s.size() && n1 > 0 && n2 > 0)
            return {n1, n2};
    }
    throw domain_error("grid must look like NxM with positive N, M (got '" + s + "')");
}

std::optional<IdentityId> parse_identity(const std::string& s)
{
    for (IdentityId id : {IdentityId::PP_in_P, IdentityId::P_in_QP, IdentityId::P_in_PP, IdentityId::QP_in_P})
        if (s == identity_name(id))
            return id;
    if (s == "all")
        return std::nullopt;
    throw domain_error("id must be all, PP_in_P, P_in_QP, P_in_PP or QP_in_P");
}

class CsvWriter
{
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    void header(std::initializer_list<const char*> cols)
    {
        bool first = true;
        for (const char* c : cols)
        {
            os_ << (first ? "" : ",") << c;
            first = false;
        }
        os_ << '\n';
    }

    CsvWriter& operator<<(double v)
    {
        sep();
        os_ << format_double(v);
        return *this;
    }
    CsvWriter& operator<<(int v)
    {
        sep();
        os_ << v;
        return *this;
    }
    CsvWriter& operator<<(bool v)
    {
        sep();
        os_ << (v ? 1 : 0);
        return *this;
    }
    CsvWriter& operator<<(const std::string& v)
    {
        sep();
        os_ << v;
        return *this;
    }
    CsvWriter& operator<<(const char* v) { return *this << std::string(v); }

    void end()
    {
        os_ << '\n';
        fresh_ = true;
        ++rows_;
    }

    int rows() const { return rows_; }

private:
    void sep()
    {
        if (!fresh_)
            os_ << ',';
        fresh_ = false;
    }

    std::ostream& os_;
    bool fresh_ = true;
    int rows_ = 0;
};

std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Output
{
    fs::path dir;
    std::string subcommand;
    std::ofstream csv;

    Output(const std::string& out_dir, const std::string& sub) : dir(out_dir), subcommand(sub)
    {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec)
            throw domain_error("cannot create output directory " + dir.string() + ": " + ec.message());
        csv.open(dir / (sub + ".csv"), std::ios::binary);
        if (!csv)
            throw domain_error("cannot write " + (dir / (sub + ".csv")).string());
    }

    fs::path csv_path() const { return dir / (subcommand + ".csv"); }

    void manifest(const RunParameters& p, int rows) const
    {
        json m;
        m["subcommand"] = subcommand;
        m["parameters"] = to_json(p);
        m["tool_version"] = tool_version;
        m["timestamp"] = utc_timestamp();
        m["outputs"] = json::array({(subcommand + ".csv")});
        m["rows"] = rows;
        std::ofstream os(dir / (subcommand + ".manifest.json"), std::ios::binary);
        os << m.dump(2) << '\n';
    }
};


constexpr double pi = std::numbers::pi;

EvaluationPoint field_point(const RunParameters& p)
{
    return EvaluationPoint::spherical(p.r.value_or(p.a), p.theta);
}

Method method_of(const RunParameters& p)
{
    return {parse_basis(p.basis), p.f};
}

void check_common(const RunParameters& p)
{
    for (double v : {p.a, p.eps, p.theta, p.c, p.extent})
        if (!std::isfinite(v))
            throw domain_error("parameters must be finite");
    // Radians only: anything past pi is most likely a value in degrees.
    if (p.theta < 0.0 || p.theta > pi + 1e-9)
        throw domain_error("theta is in radians and must lie in [0, pi] (got " + format_double(p.theta) + ")");
    if (p.r && !(*p.r >= 0.0))
        throw domain_error("r must be non-negative");
    if (p.n < 0 || p.nmax < 0)
        throw domain_error("n and nmax must be non-negative");
}

int cmd_eval(const RunParameters& p, const std::string& out_dir, std::ostream& out)
{
    const auto cfg = problem_config(p);
    const auto pt = field_point(p);
    const auto e = evaluate_method(method_of(p), pt, cfg, p.n);
    Output o(out_dir, "eval");
    CsvWriter w(o.csv);
    w.header({"r[a]", "theta[rad]", "basis", "N", "value[Vbar]", "est_error[Vbar]", "converged", "diverging"});
    w << pt.r() << p.theta << p.basis << p.n << e.value << e.est_error << e.converged << e.diverging;
    w.end();
    o.manifest(p, w.rows());
    out << "value " << format_double(e.value) << "  est_error " << format_double(e.est_error)
        << (e.converged ? "  converged" : "  not converged") << '\n';
    if (e.diverging)
    {
        out << "series terms are growing: the expansion diverges at this point\n";
        return nonconvergence;
    }
    return ok;
}

int cmd_converge(const RunParameters& p, const std::string& out_dir, std::ostream& out)
{
    const auto cfg = problem_config(p);
    const auto pt = field_point(p);
    const auto method = method_of(p);
    const auto ref = parse_reference(p.ref);
    SeriesOptions opt;
    if (method.basis == Basis::regular_spheroidal)
        opt.regular_coefficients = detail::regular_table_for(method, cfg, p.nmax, opt.coefficient_tol);
    const auto curve = convergence_curve(method, pt, cfg, p.nmax, ref, opt);
    Output o(out_dir, "converge");
    CsvWriter w(o.csv);
    w.header({"N", "partial_sum[Vbar]", "term[Vbar]", "rel_error[1]", "envelope[1]"});
    for (const auto& row : curve.rows)
    {
        w << row.N << row.partial_sum << row.term << row.rel_error << row.envelope;
        w.end();
    }
    o.manifest(p, w.rows());
    out << "reference " << format_double(curve.reference) << "  final rel_error "
        << format_double(curve.rows.back().rel_error) << (curve.diverging ? "  diverging" : "") << '\n';
    return ok;
}

GridSpec map_grid(const RunParameters& p)
{
    GridSpec g;
    const auto [n1, n2] = parse_grid(p.grid);
    g.n1 = n1;
    g.n2 = n2;
    g.threads = p.threads;
    if (p.grid_kind == "polar")
    {
        g.kind = GridSpec::Kind::polar;
        g.lo1 = 0.0;
        g.hi1 = p.a;
    }
    else if (p.grid_kind == "cartesian")
    {
        g.kind = GridSpec::Kind::cartesian;
        g.lo1 = 0.0;
        g.hi1 = p.a;
        g.lo2 = -p.a;
        g.hi2 = p.a;
    }
    else
        throw domain_error("grid-kind must be 'polar' or 'cartesian'");
    g.validate();
    return g;
}

int cmd_map(const RunParameters& p, const std::string& out_dir, std::ostream& out)
{
    const auto cfg = problem_config(p);
    const auto grid = map_grid(p);
    const auto fg = error_map(method_of(p), grid, cfg, p.n, parse_reference(p.ref));
    const bool polar = grid.kind == GridSpec::Kind::polar;
    Output o(out_dir, "map");
    CsvWriter w(o.csv);
    if (polar)
        w.header({"i", "j", "r[a]", "theta[rad]", "value[Vbar]", "reference[Vbar]", "rel_error[1]", "flag"});
    else
        w.header({"i", "j", "x[a]", "z[a]", "value[Vbar]", "reference[Vbar]", "rel_error[1]", "flag"});
    int flagged = 0;
    for (int i = 0; i < grid.n1; ++i)
        for (int j = 0; j < grid.n2; ++j)
        {
            const auto& g = fg.at(i, j);
            w << i << j;
            if (polar)
                w << g.point.r() << g.point.theta();
            else
                w << g.point.x() << g.point.z();
            w << g.value << g.reference << g.rel_error << g.flag;
            w.end();
            flagged += g.flag.empty() ? 0 : 1;
        }
    o.manifest(p, w.rows());
    out << w.rows() << " points, " << flagged << " flagged, median |reference| "
        << format_double(fg.median_abs_reference) << '\n';
    return ok;
}

int cmd_identities(const RunParameters& p, const std::string& out_dir, std::ostream& out)
{
    check_common(p);
    if (!(p.c > 0.0))
        throw domain_error("c must be positive");
    if (p.mmax < 0 || p.points < 1)
        throw domain_error("mmax must be non-negative and points positive");
    const auto only = parse_identity(p.id);
    std::vector<IdentityId> ids;
    for (IdentityId id : {IdentityId::PP_in_P, IdentityId::P_in_QP, IdentityId::P_in_PP, IdentityId::QP_in_P})
        if (!only || *only == id)
            ids.push_back(id);
    for (IdentityId id : ids)
        if (!identity_is_finite(id) && p.K < p.nmax)
            throw domain_error("K must be at least nmax for the infinite expansions");

    Output o(out_dir, "identities");
    CsvWriter w(o.csv);
    w.header({"identity", "finite", "n", "m", "K", "r[c]", "theta[rad]", "lhs[1]", "rhs[1]", "rel_gap[1]",
              "terms_growing"});
    double worst_finite = 0.0, worst_infinite = 0.0;
    for (IdentityId id : ids)
    {
        const auto pts = identity_sample_points(id, p.c, p.points, p.seed);
        for (int m = 0; m <= p.mmax; ++m)
            for (int n = m; n <= p.nmax; ++n)
                for (const auto& pt : pts)
                {
                    const auto rep = evaluate_identity(id, n, m, pt, p.c, p.K);
                    w << identity_name(id) << identity_is_finite(id) << n << m << rep.K << pt.r() / p.c
                      << pt.theta() << rep.lhs << rep.rhs << rep.rel_gap << rep.terms_growing;
                    w.end();
                    double& worst = identity_is_finite(id) ? worst_finite : worst_infinite;
                    worst = std::max(worst, rep.rel_gap);
                }
    }
    o.manifest(p, w.rows());
    out << w.rows() << " rows, worst rel_gap finite " << format_double(worst_finite) << ", infinite "
        << format_double(worst_infinite) << '\n';
    return ok;
}

int cmd_region(const RunParameters& p, const std::string& out_dir, std::ostream& out)
{
    const auto cfg = problem_config(p);
    if (cfg.side != SourceSide::external)
        throw domain_error("region describes the regular spheroidal series, which needs an external source");
    if (!p.f)
        throw domain_error("region needs --f, the focal length of the regular spheroidal coordinates");
    const auto reg = convergence_region(*p.f, cfg.R_e(), cfg.a);
    const auto [n1, n2] = parse_grid(p.grid);
    (void)n2;
    if (n1 < 2)
        throw domain_error("region needs at least 2 boundary samples");

    // Boundary spheroid xi_f = xi_max on the y = 0 plane, traced in eta.
    Output o(out_dir, "region");
    CsvWriter w(o.csv);
    w.header({"eta[1]", "x[a]", "z[a]"});
    for (int k = 0; k < n1; ++k)
    {
        const double eta = -1.0 + 2.0 * k / (n1 - 1);
        const auto b = from_offset_spheroidal({reg.xi_max, eta, 0.0, reg.f});
        w << eta << b.x() << b.z();
        w.end();
    }
    o.manifest(p, w.rows());
    out << "xi_max " << format_double(reg.xi_max) << (reg.sphere_contained ? "  sphere inside region" : "  sphere not inside region")
        << '\n';
    if (p.r)
    {
        const auto pt = field_point(p);
        const double X = term_ratio_X(pt, *p.f, cfg.R_e());
        out << "X " << format_double(X) << (reg.contains(pt) ? "  converges" : "  diverges") << '\n';
    }
    return ok;
}

int cmd_surfaces(const RunParameters& p, const std::string& out_dir, std::ostream& out)
{
    check_common(p);
    if (!(p.a > 0.0) || !(p.extent > 0.0))
        throw domain_error("a and extent must be positive");
    const bool iso = p.kind == "isopotential";
    if (!iso && p.kind != "coordinates")
        throw domain_error("kind must be 'isopotential' or 'coordinates'");
    if (p.degree < 0)
        throw domain_error("degree must be non-negative");
    // Coordinates with unit focal length: the source distance defaults to a.
    const double Re = p.re.value_or(p.a);
    if (!(Re > 0.0))
        throw domain_error("re must be positive");
    const auto [n1, n2] = parse_grid(p.grid);
    if (n1 < 2 || n2 < 2)
        throw domain_error("surfaces needs at least a 2x2 grid");

    Output o(out_dir, "surfaces");
    CsvWriter w(o.csv);
    if (iso)
        w.header({"i", "j", "x[a]", "z[a]", "value[Vbar]", "flag"});
    else
        w.header({"i", "j", "x[a]", "z[a]", "xi[1]", "eta[1]", "flag"});
    const int n = p.degree;
    int singular = 0;
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j)
        {
            const double x = -p.extent + 2.0 * p.extent * i / (n1 - 1);
            const double z = -p.extent + 2.0 * p.extent * j / (n2 - 1);
            const auto pt = EvaluationPoint::cartesian(x, 0.0, z);
            w << i << j << x << z;
            std::string flag;
            double xi = std::nan(""), eta = std::nan(""), value = std::nan("");
            if (pt.r() == 0.0)
            {
                // xi -> inf with Q_n(xi)/r -> 1/(2 R_e) for n = 0 and 0 above
                xi = std::numeric_limits<double>::infinity();
                value = n == 0 ? 0.5 / Re : 0.0;
            }
            else
            {
                const auto s = to_inverted_spheroidal(pt, p.a, Re);
                xi = s.xi;
                eta = s.eta;
                if (s.xi < 1.0 + legendre::singularity_guard)
                    flag = "singular";
                else if (iso)
                    value = legendre::eval_Q_sequence(0, n, s.xi)[n] * legendre::eval_P_sequence(0, n, s.eta)[n] / pt.r();
            }
            if (iso)
                w << value;
            else
                w << xi << eta;
            w << flag;
            w.end();
            singular += flag.empty() ? 0 : 1;
        }
    o.manifest(p, w.rows());
    out << w.rows() << " points, " << singular << " on the singular ray\n";
    return ok;
}

struct Binding
{
    CLI::Option* option;
    std::string key;
};

// Flags land in `flags`; optional doubles go through plain doubles first.
struct FlagStore
{
    RunParameters p;
    double re = 0, ri = 0, f = 0, r = 0;
};

std::vector<Binding> add_parameter_flags(CLI::App& sub, FlagStore& s)
{
    std::vector<Binding> b;
    auto add = [&](const char* flag, const char* key, auto& target, const char* help) {
        b.push_back({sub.add_option(flag, target, help), key});
    };
    add("--a", "a", s.p.a, "sphere radius");
    add("--eps", "eps", s.p.eps, "relative dielectric constant");
    add("--re", "re", s.re, "outer point of the Kelvin pair (external source distance)");
    add("--ri", "ri", s.ri, "inner point of the Kelvin pair (internal source distance)");
    add("--side", "side", s.p.side, "source side: external or internal");
    add("--basis", "basis", s.p.basis, "spherical, spheroidal, inverted-spheroidal or regular-spheroidal");
    add("--f", "f", s.f, "focal length of the regular spheroidal coordinates");
    add("--n", "n", s.p.n, "truncation degree N");
    add("--nmax", "nmax", s.p.nmax, "largest degree (converge, identities)");
    add("--r", "r", s.r, "field point radius (default a)");
    add("--theta", "theta", s.p.theta, "field point polar angle in radians");
    add("--ref", "ref", s.p.ref, "reference: series:N or oracle");
    add("--grid", "grid", s.p.grid, "grid size NxM");
    add("--grid-kind", "grid_kind", s.p.grid_kind, "polar or cartesian");
    add("--threads", "threads", s.p.threads, "worker threads for map");
    add("--id", "id", s.p.id, "identity: all, PP_in_P, P_in_QP, P_in_PP, QP_in_P");
    add("--mmax", "mmax", s.p.mmax, "largest order m");
    add("--K", "K", s.p.K, "truncation of the infinite expansions");
    add("--c", "c", s.p.c, "focal offset of the offset spheroidal coordinates");
    add("--points", "points", s.p.points, "random points per identity");
    add("--seed", "seed", s.p.seed, "random seed");
    add("--kind", "kind", s.p.kind, "isopotential or coordinates");
    add("--degree", "degree", s.p.degree, "degree n of the plotted harmonic");
    add("--extent", "extent", s.p.extent, "half width of the surfaces grid");
    return b;
}

RunParameters resolve(const std::vector<Binding>& bindings, FlagStore s, const std::string& config)
{
    RunParameters resolved = config.empty() ? RunParameters{} : load_config(config);
    for (const auto& [opt, key] : bindings)
        if (opt->count() > 0)
        {
            if (key == "re")
                s.p.re = s.re;
            else if (key == "ri")
                s.p.ri = s.ri;
            else if (key == "f")
                s.p.f = s.f;
            else if (key == "r")
                s.p.r = s.r;
            for (const auto& f : fields())
                if (f.key == key)
                    f.set(resolved, f.get(s.p));
        }
    return resolved;
}

} // namespace

std::vector<EvaluationPoint> identity_sample_points(IdentityId id, double c, int count, unsigned seed)
{
    if (!(c > 0.0) || count < 0)
        throw domain_error("identity_sample_points: need c > 0 and count >= 0");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<EvaluationPoint> pts;
    while (static_cast<int>(pts.size()) < count)
    {
        const double t = std::acos(2.0 * unit(rng) - 1.0);
        EvaluationPoint pt;
        switch (id)
        {
        case IdentityId::PP_in_P:
        case IdentityId::P_in_PP:
            pt = EvaluationPoint::spherical(c * (0.05 + 2.95 * unit(rng)), t);
            break;
        case IdentityId::P_in_QP:
            // outside the spheroid xi = 2, where K = 80 terms are ample
            pt = EvaluationPoint::spherical(c * (0.05 + 4.95 * unit(rng)), t);
            if (to_offset_spheroidal(pt, c).xi < 2.0)
                continue;
            break;
        case IdentityId::QP_in_P:
            pt = EvaluationPoint::spherical(c * (2.0 + 3.0 * unit(rng)), t);
            break;
        }
        pts.push_back(pt);
    }
    return pts;
}

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Potential of a point charge near a dielectric sphere: series, oracles and convergence"};
    app.set_version_flag("--version", tool_version);
    app.require_subcommand(1);

    struct Sub
    {
        const char* name;
        const char* help;
        int (*fn)(const RunParameters&, const std::string&, std::ostream&);
    };
    const Sub subs[] = {
        {"eval", "potential at one point with one basis", cmd_eval},
        {"converge", "partial-sum error against a reference for N = 0..nmax", cmd_converge},
        {"map", "pointwise relative error over a grid", cmd_map},
        {"identities", "both sides of the harmonic expansion identities", cmd_identities},
        {"region", "convergence boundary of the regular spheroidal series", cmd_region},
        {"surfaces", "inverted spheroidal coordinates or harmonics on the y = 0 plane", cmd_surfaces},
    };

    FlagStore store;
    std::string out_dir = ".";
    std::string config;
    std::vector<std::pair<CLI::App*, std::vector<Binding>>> bound;
    for (const auto& s : subs)
    {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--config", config, "JSON parameters or a previous manifest")->check(CLI::ExistingFile);
        bound.emplace_back(sub, add_parameter_flags(*sub, store));
    }

    std::vector<std::string> args(argv.size() > 1 ? argv.begin() + 1 : argv.end(), argv.end());
    std::reverse(args.begin(), args.end()); // CLI11 consumes the vector from the back
    try
    {
        app.parse(args);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : validation;
    }

    try
    {
        for (std::size_t k = 0; k < bound.size(); ++k)
            if (bound[k].first->parsed())
            {
                const auto params = resolve(bound[k].second, store, config);
                check_common(params);
                return subs[k].fn(params, out_dir, out);
            }
        err << "no subcommand given\n";
        return validation;
    }
    catch (const convergence_error& e)
    {
        err << "error: " << e.what() << '\n';
        return nonconvergence;
    }
    catch (const std::domain_error& e)
    {
        err << "error: " << e.what() << '\n';
        return validation;
    }
    catch (const nlohmann::json::exception& e)
    {
        err << "error: " << e.what() << '\n';
        return validation;
    }
}

int run(int argc, const char* const* argv)
{
    return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

} // namespace dielsphere::cli
