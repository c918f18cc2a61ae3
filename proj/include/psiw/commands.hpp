#ifndef PSIW_COMMANDS_HPP
#define PSIW_COMMANDS_HPP

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "branch_solver.hpp"
#include "continuation.hpp"
#include "core_map.hpp"
#include "domain_geometry.hpp"
#include "errors.hpp"
#include "parameter.hpp"
#include "records.hpp"
#include "verify.hpp"

namespace psiw
{

enum ExitCode : int { ok = 0, bad_usage = 1, domain_failure = 2, numeric_failure = 3, verify_failure = 4 };

// Thrown for malformed flag values; maps to exit code 1.
class usage_error : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail
{

inline double parse_double(std::string_view text)
{
    while (!text.empty() && text.front() == ' ') {
        text.remove_prefix(1);
    }
    while (!text.empty() && text.back() == ' ') {
        text.remove_suffix(1);
    }
    double v = 0.0;
    const auto *end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
        throw usage_error("malformed number '" + std::string(text) + "'");
    }
    return v;
}

inline std::vector<double> parse_numbers(std::string_view text, char sep = ',')
{
    std::vector<double> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        out.push_back(parse_double(text.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) {
            return out;
        }
        start = pos + 1;
    }
}

inline complex parse_complex(std::string_view text)
{
    const auto v = parse_numbers(text);
    if (v.size() != 2) {
        throw usage_error("expected re,im but got '" + std::string(text) + "'");
    }
    return {v[0], v[1]};
}

inline Parameter parse_parameter(const std::string &text)
{
    try {
        return Parameter::parse(text);
    } catch (const std::invalid_argument &e) {
        throw usage_error(e.what());
    }
}

inline BranchId parse_branch_flag(const std::string &text)
{
    try {
        return parse_branch(text);
    } catch (const std::invalid_argument &e) {
        throw usage_error(e.what());
    }
}

struct ParsedPath {
    PathSpec spec;
    bool auto_start = false;
};

inline ParsedPath parse_path(const std::string &text, int samples)
{
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw usage_error("path must start with circle: or poly:");
    }
    const std::string kind = text.substr(0, colon);
    const std::string_view body = std::string_view(text).substr(colon + 1);
    ParsedPath out;
    if (kind == "circle") {
        const auto v = parse_numbers(body);
        if (v.size() != 4 && v.size() != 5) {
            throw usage_error("circle path needs cx,cy,r,turns[,start_angle]");
        }
        out.auto_start = v.size() == 4;
        const double turns = v[3];
        const int n = samples > 0 ? samples : 4096 * std::max(1, static_cast<int>(std::ceil(std::abs(turns))));
        out.spec = {Circle{{v[0], v[1]}, v[2], turns, v.size() == 5 ? v[4] : 0.0}, n};
    } else if (kind == "poly") {
        Polyline poly;
        std::size_t start = 0;
        while (true) {
            const auto pos = body.find(';', start);
            poly.points.push_back(parse_complex(body.substr(start, pos == std::string_view::npos ? pos : pos - start)));
            if (pos == std::string_view::npos) {
                break;
            }
            start = pos + 1;
        }
        out.spec = {poly, samples > 0 ? samples : 4096};
    } else {
        throw usage_error("unknown path kind '" + kind + "'");
    }
    try {
        out.spec.validate();
    } catch (const domain_error &e) {
        throw usage_error(e.what());
    }
    if (out.spec.length() == 0.0) {
        throw usage_error("degenerate path of zero length");
    }
    return out;
}

inline void put_complex(OutputRecord &r, const std::string &name, complex v)
{
    r.set(name + "_re", v.real()).set(name + "_im", v.imag());
}

} // namespace detail

struct EvalOptions {
    std::string a;
    std::string z;
    std::string branch = "principal:0";
    bool extended = false;
};

inline std::vector<OutputRecord> cmd_eval(const EvalOptions &o)
{
    const auto a = detail::parse_parameter(o.a);
    const complex z = detail::parse_complex(o.z);
    const auto b = detail::parse_branch_flag(o.branch);
    const BranchSolver solver(a);
    const auto v = solver.solve(z, b, o.extended);
    OutputRecord r{"point", {}};
    r.set("a", a.to_string()).set("branch", to_string(b));
    detail::put_complex(r, "z", z);
    detail::put_complex(r, "w", v.w);
    r.set("residual", v.residual).set("iterations", v.iterations).set("near_branch_point", v.near_branch_point);
    r.set("region", to_string(solver.geometry().region_of(v.w)));
    try {
        detail::put_complex(r, "dpsi", psi_prime(a, z, v.w));
    } catch (const singularity_error &) {
        // psi' is undefined at a critical value; the columns stay empty.
    }
    return {r};
}

struct GeometryOptions {
    std::string a;
    std::string what;
    std::optional<double> eta_max;
    int resolution = 256;
    double xi0 = 0.0;
    double xi_min = -6.0;
    double xi_max = 4.0;
};

inline std::vector<OutputRecord> cmd_geometry(const GeometryOptions &o)
{
    const auto a = detail::parse_parameter(o.a);
    if (o.resolution < 2) {
        throw usage_error("resolution must be at least 2");
    }
    const double eta_max = o.eta_max.value_or(a.period().value_or(4.0 * pi));
    if (!(eta_max > 0.0)) {
        throw usage_error("eta-max must be positive");
    }
    const int n = o.resolution;
    const std::string tag = a.to_string();
    std::vector<OutputRecord> out;
    auto sample_graph = [&](const std::string &curve, double lo, double hi, auto &&extra) {
        for (int i = 0; i < n; ++i) {
            const double eta = lo + (hi - lo) * (i + 0.5) / n;
            const double x = xi(a, eta);
            OutputRecord r{"curve", {}};
            r.set("a", tag).set("curve", curve);
            extra(r);
            r.set("eta", eta).set("xi", x);
            out.push_back(std::move(r));
        }
    };
    if (o.what == "xi") {
        for (const auto &iv : xi_domain(a, eta_max)) {
            sample_graph("xi:" + std::to_string(iv.k), iv.lo, iv.hi, [&](OutputRecord &r) {
                r.set("left", to_string(iv.left)).set("right", to_string(iv.right));
            });
        }
    } else if (o.what == "gamma") {
        for (const auto &gc : gamma_curves(a)) {
            sample_graph("gamma:" + std::to_string(gc.k), gc.lo, gc.hi, [&](OutputRecord &r) {
                r.set("shape", to_string(gc.shape)).set("includes_ray", gc.includes_ray);
            });
        }
    } else if (o.what == "gcurve") {
        for (int i = 0; i <= n; ++i) {
            const double eta = eta_max * i / n;
            const complex z = g_curve(a, o.xi0, eta);
            OutputRecord r{"curve", {}};
            r.set("a", tag).set("curve", "gcurve").set("xi0", o.xi0).set("eta", eta).set("x", z.real()).set("y", z.imag());
            out.push_back(std::move(r));
        }
    } else if (o.what == "regions") {
        const Geometry g(a);
        for (int j = 0; j < n; ++j) {
            const double eta = -eta_max + 2.0 * eta_max * j / (n - 1);
            for (int i = 0; i < n; ++i) {
                const double x = o.xi_min + (o.xi_max - o.xi_min) * i / (n - 1);
                const auto region = g.region_of({x, eta});
                OutputRecord r{"region", {}};
                r.set("a", tag).set("xi", x).set("eta", eta).set("region", to_string(region));
                r.set("branch", region.kind == RegionKind::Unresolved ? std::string() : to_string(branch_of_region(g, region)));
                out.push_back(std::move(r));
            }
        }
    } else if (o.what == "critical-points") {
        const int per = a.principal_sheets_per_period().value_or(1);
        for (const auto &cp : critical_points(a, 0, per - 1)) {
            OutputRecord r{"point", {}};
            r.set("a", tag).set("kind", "critical").set("k", cp.k);
            detail::put_complex(r, "w", cp.w);
            detail::put_complex(r, "z", cp.z);
            out.push_back(std::move(r));
        }
        for (const auto &z : branch_points(a)) {
            OutputRecord r{"point", {}};
            r.set("a", tag).set("kind", "branch-point");
            detail::put_complex(r, "z", z);
            out.push_back(std::move(r));
        }
    } else {
        throw usage_error("unknown --what '" + o.what + "'");
    }
    return out;
}

struct ContinueOptions {
    std::string a;
    std::string path;
    std::string start_branch = "principal:0";
    int samples = 0;
    int stride = 1;
};

inline std::vector<OutputRecord> cmd_continue(const ContinueOptions &o)
{
    const auto a = detail::parse_parameter(o.a);
    const auto b = detail::parse_branch_flag(o.start_branch);
    if (o.stride < 1) {
        throw usage_error("stride must be positive");
    }
    auto parsed = detail::parse_path(o.path, o.samples);
    auto &spec = parsed.spec;
    const auto bps = branch_points(a);
    for (int i = 0; i <= spec.samples; ++i) {
        const complex z = spec.point(static_cast<double>(i) / spec.samples);
        for (const auto &bp : bps) {
            if (std::abs(z - bp) < 1e-6) {
                throw usage_error("path passes within 1e-6 of the branch point " + format_number(bp.real()) + ","
                                  + format_number(bp.imag()));
            }
        }
    }
    const BranchSolver solver(a);
    if (parsed.auto_start) {
        auto &c = std::get<Circle>(spec.kind);
        c.start_angle = start_angle_in(solver.geometry(), b, c.center, c.radius);
    }
    const complex z0 = spec.point(0.0);
    const complex w0 = solver.solve(z0, b).w;
    const auto res = continue_path(a, spec, w0);

    const auto &g = solver.geometry();
    const std::string tag = a.to_string();
    std::vector<OutputRecord> out;
    for (std::size_t i = 0; i < res.samples.size(); ++i) {
        if (i % static_cast<std::size_t>(o.stride) != 0 && i + 1 != res.samples.size()) {
            continue;
        }
        const auto &s = res.samples[i];
        OutputRecord r{"point", {}};
        r.set("a", tag).set("t", s.t);
        detail::put_complex(r, "z", s.z);
        detail::put_complex(r, "w", s.w);
        r.set("sheet", to_string(branch_of_region(g, g.region_of(s.w))));
        out.push_back(std::move(r));
    }
    for (const auto &e : res.events) {
        OutputRecord r{"event", {}};
        r.set("a", tag).set("kind", "crossing").set("t", e.t);
        detail::put_complex(r, "z", e.z);
        detail::put_complex(r, "w", e.w);
        r.set("cut", to_string(e.boundary)).set("from", to_string(e.from)).set("to", to_string(e.to));
        r.set("orientation", e.counterclockwise ? "ccw" : "cw");
        out.push_back(std::move(r));
    }
    OutputRecord fin{"event", {}};
    fin.set("a", tag).set("kind", "final").set("t", 1.0);
    detail::put_complex(fin, "z", res.samples.back().z);
    detail::put_complex(fin, "w", res.samples.back().w);
    fin.set("from", to_string(b)).set("to", to_string(res.final_sheet)).set("max_residual", res.max_residual);
    out.push_back(std::move(fin));
    return out;
}

struct VerifyOptions {
    std::vector<std::string> a;
    std::string suite = "all";
    std::uint64_t seed = 0;
};

inline std::vector<Check> cmd_verify(const VerifyOptions &o)
{
    std::vector<Parameter> params;
    for (const auto &text : o.a.empty() ? std::vector<std::string>{"1/2", "1/3", "1/4"} : o.a) {
        params.push_back(detail::parse_parameter(text));
    }
    Suite suite;
    try {
        suite = parse_suite(o.suite);
    } catch (const std::invalid_argument &e) {
        throw usage_error(e.what());
    }
    return run_verify(params, suite, o.seed);
}

/// Full command-line front end. Records go to `out`, diagnostics to `err`.
inline int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Branches, geometry and continuation of the inverse of sinh(a w) e^w"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version);
    std::string format = "csv";
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

    EvalOptions eval;
    auto *ce = app.add_subcommand("eval", "Evaluate one branch at one point");
    ce->add_option("--a", eval.a, "Parameter as p/q or a decimal")->required();
    ce->add_option("--z", eval.z, "Point as re,im")->required();
    ce->add_option("--branch", eval.branch, "Branch as family:k")->capture_default_str();
    ce->add_flag("--extended", eval.extended, "Accept points on the cut of the branch");
    ce->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));

    GeometryOptions geo;
    double eta_max = 0.0;
    auto *cg = app.add_subcommand("geometry", "Emit curves, regions and critical points");
    cg->add_option("--a", geo.a)->required();
    cg->add_option("--what", geo.what)->required()->check(
        CLI::IsMember({"xi", "gamma", "gcurve", "regions", "critical-points"}));
    auto *eta_opt = cg->add_option("--eta-max", eta_max);
    cg->add_option("--resolution", geo.resolution)->capture_default_str();
    cg->add_option("--xi0", geo.xi0)->capture_default_str();
    cg->add_option("--xi-min", geo.xi_min)->capture_default_str();
    cg->add_option("--xi-max", geo.xi_max)->capture_default_str();
    cg->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));

    ContinueOptions cont;
    auto *cc = app.add_subcommand("continue", "Continue a branch along a path");
    cc->add_option("--a", cont.a)->required();
    cc->add_option("--path", cont.path, "circle:cx,cy,r,turns[,angle] or poly:x1,y1;x2,y2;...")->required();
    cc->add_option("--start-branch", cont.start_branch)->capture_default_str();
    cc->add_option("--samples", cont.samples, "Integration steps (default 4096 per turn)");
    cc->add_option("--stride", cont.stride, "Emit every n-th sample")->capture_default_str();
    cc->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));

    VerifyOptions ver;
    auto *cv = app.add_subcommand("verify", "Run the property checks");
    cv->add_option("--a", ver.a, "Parameter (repeatable)");
    cv->add_option("--suite", ver.suite)->check(CLI::IsMember({"core", "branches", "limits", "monodromy", "all"}))
        ->capture_default_str();
    cv->add_option("--seed", ver.seed)->capture_default_str();
    cv->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForVersion &) {
        out << version << '\n';
        return ok;
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp &) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << '\n';
        return bad_usage;
    }
    if (eta_opt->count() > 0) {
        geo.eta_max = eta_max;
    }

    const Format fmt = format == "json" ? Format::Json : Format::Csv;
    Metadata meta{{"program", "psiw"}, {"version", version}};
    try {
        if (*ce) {
            meta.push_back({"command", "eval"});
            meta.push_back({"a", eval.a});
            write_records(out, fmt, meta, cmd_eval(eval));
        } else if (*cg) {
            meta.push_back({"command", "geometry"});
            meta.push_back({"a", geo.a});
            meta.push_back({"what", geo.what});
            write_records(out, fmt, meta, cmd_geometry(geo));
        } else if (*cc) {
            meta.push_back({"command", "continue"});
            meta.push_back({"a", cont.a});
            meta.push_back({"path", cont.path});
            write_records(out, fmt, meta, cmd_continue(cont));
        } else {
            const auto checks = cmd_verify(ver);
            std::string as;
            for (const auto &t : ver.a.empty() ? std::vector<std::string>{"1/2", "1/3", "1/4"} : ver.a) {
                as += (as.empty() ? "" : ";") + t;
            }
            meta.push_back({"command", "verify"});
            meta.push_back({"a", as});
            meta.push_back({"suite", ver.suite});
            meta.push_back({"seed", std::to_string(ver.seed)});
            std::vector<OutputRecord> records;
            int failed = 0;
            for (const auto &c : checks) {
                records.push_back(c.record());
                failed += !c.passed;
            }
            write_records(out, fmt, meta, records);
            if (failed > 0) {
                err << failed << " of " << checks.size() << " checks failed\n";
                return verify_failure;
            }
        }
    } catch (const usage_error &e) {
        err << "error: " << e.what() << '\n';
        return bad_usage;
    } catch (const domain_error &e) {
        err << "error: " << e.what() << '\n';
        return domain_failure;
    } catch (const range_error &e) {
        err << "error: " << e.what() << '\n';
        return domain_failure;
    } catch (const singularity_error &e) {
        err << "error: " << e.what() << '\n';
        return numeric_failure;
    } catch (const convergence_error &e) {
        err << "error: " << e.what() << '\n';
        return numeric_failure;
    }
    return ok;
}

} // namespace psiw

#endif
