#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <sys/wait.h>

#include <psiw/psiw.hpp>

using namespace psiw;

namespace
{

using Clock = std::chrono::steady_clock;

const std::vector<Parameter> &standard()
{
    static const std::vector<Parameter> ps{Parameter::rational(1, 2), Parameter::rational(1, 3),
                                           Parameter::rational(1, 4)};
    return ps;
}

struct Outcome {
    bool passed = true;
    std::string detail;
};

Outcome require(const std::vector<Check> &checks, const std::vector<std::string> &prefixes, std::size_t min_count)
{
    Outcome o;
    std::size_t seen = 0;
    double worst = 0.0;
    for (const auto &c : checks) {
        const bool wanted = std::any_of(prefixes.begin(), prefixes.end(),
                                        [&](const std::string &p) { return c.name.rfind(p, 0) == 0; });
        if (!wanted) {
            continue;
        }
        ++seen;
        if (!c.passed) {
            o.passed = false;
            o.detail += " " + c.name + "@" + c.a + "=" + format_number(c.error);
        } else if (c.tolerance > 0.0) {
            worst = std::max(worst, c.error / c.tolerance);
        }
    }
    if (seen < min_count) {
        o.passed = false;
        o.detail += " only " + std::to_string(seen) + " checks";
    }
    if (o.passed) {
        o.detail = std::to_string(seen) + " checks, worst error/tolerance " + format_number(worst);
    }
    return o;
}

std::vector<Check> collect(const std::vector<Parameter> &ps, Suite suite)
{
    return run_verify(ps, suite, 0);
}

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::pair<int, std::string> capture(const std::string &cmd)
{
    std::string out;
    FILE *pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        return {-1, out};
    }
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) {
        out.append(buf.data(), n);
    }
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

Outcome closed_forms()
{
    return require(collect(standard(), Suite::Core), {"core.x_a.closed_form", "core.branch_points.closed_form"}, 6);
}

Outcome round_trip()
{
    const auto t0 = Clock::now();
    auto o = require(collect(standard(), Suite::Branches), {"branches.roundtrip.", "branches.codomain."}, 6);
    const double dt = seconds_since(t0);
    if (dt > 10.0) {
        o.passed = false;
    }
    o.detail += ", " + format_number(dt).substr(0, 5) + " s";
    return o;
}

Outcome jacobian_law()
{
    auto ps = standard();
    ps.push_back(Parameter::real((std::sqrt(5.0) - 1.0) / 2.0));
    return require(collect(ps, Suite::Core), {"core.jacobian."}, 11);
}

Outcome real_shape()
{
    return require(collect(standard(), Suite::Branches),
                   {"branches.real.psi0_increasing", "branches.real.psi0_concave", "branches.real.psim1_decreasing",
                    "branches.real.meet"},
                   12);
}

Outcome one_third_closed_form()
{
    return require(collect({Parameter::rational(1, 3)}, Suite::Branches), {"branches.one_third."}, 2);
}

Outcome limit_regimes()
{
    return require(collect({}, Suite::Limits), {"limits.small_a.decreasing", "limits.near_one.decreasing"}, 2);
}

Outcome derivative_check()
{
    return require(collect(standard(), Suite::Branches), {"branches.derivative."}, 6);
}

Outcome monodromy_witnesses()
{
    const auto t0 = Clock::now();
    auto o = require(collect({Parameter::rational(1, 2), Parameter::rational(1, 4)}, Suite::Monodromy),
                     {"monodromy."}, 10);
    const double dt = seconds_since(t0);
    if (dt > 20.0) {
        o.passed = false;
    }
    o.detail += ", " + format_number(dt).substr(0, 5) + " s";
    return o;
}

Outcome geometry_consistency()
{
    return require(collect(standard(), Suite::Core), {"geometry."}, 10);
}

Outcome cli_determinism()
{
    const std::string cmd = std::string(PSIW_CLI_PATH) + " verify --suite all --a 1/2 --a 1/3 --a 1/4 2>/dev/null";
    const auto first = capture(cmd);
    const auto second = capture(cmd);
    Outcome o;
    o.passed = first.first == 0 && second.first == 0 && first.second == second.second && !first.second.empty();
    o.detail = "exit " + std::to_string(first.first) + "/" + std::to_string(second.first) + ", " +
               std::to_string(first.second.size()) + " bytes, " +
               (first.second == second.second ? "identical" : "different");
    return o;
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"closed-form constants", closed_forms},
        {"round-trip inversion", round_trip},
        {"jacobian law", jacobian_law},
        {"real-branch shape", real_shape},
        {"a=1/3 closed form", one_third_closed_form},
        {"limit regimes", limit_regimes},
        {"derivative", derivative_check},
        {"monodromy witnesses", monodromy_witnesses},
        {"geometry consistency", geometry_consistency},
        {"cli determinism", cli_determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.passed;
        std::cout << (o.passed ? "PASS " : "FAIL ") << i + 1 << " " << criteria[i].first << ": " << o.detail
                  << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
