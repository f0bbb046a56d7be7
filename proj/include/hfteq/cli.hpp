#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "hfteq/model.hpp"
#include "hfteq/solver.hpp"

namespace hfteq::cli {

enum ExitCode : int { Ok = 0, CheckFailed = 1, BadConfig = 2 };

/// Defaults for every check `verify` runs. --strict halves the deterministic ones.
struct Tolerances {
    double quartic_residual = 1e-12;
    double nash_residual = 1e-10;
    double identity = 1e-12;
    double dpe_scaled = 1e-9;
    double value_se = 4.0;  ///< objective vs analytic value, in standard errors
    double moment_se = 4.0;
    double slope_se = 3.0;
    double deviation_se = 2.0;  ///< slack for deviation rows

    Tolerances halved() const;
};

struct VerifyOptions {
    std::size_t paths = 400;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    Tolerances tol;
};

struct CheckResult {
    std::string name;
    double value = 0.0;      ///< residual or test statistic
    double tolerance = 0.0;
    bool pass = false;
    bool advisory = false;  ///< reported, never fails the run
    std::string detail;
};

struct VerificationReport {
    std::vector<CheckResult> checks;

    bool passed() const;
    nlohmann::json to_json() const;
};

/// Invariant battery: solver residuals, identities, DPE grid, dealer profit,
/// inventory moments, objective vs value, deviation sweep.
VerificationReport verify(const ValidatedParams& params, const VerifyOptions& options);

nlohmann::json equilibrium_to_json(const Equilibrium& eq);

/// Accepts a bare params object or any document with a "params" member.
MarketParams params_from_document(const nlohmann::json& doc);

/// "a:b:n" -> n geometric points from a to b.
std::vector<double> parse_geometric_grid(const std::string& spec);
/// "a:b:n" -> n evenly spaced points from a to b.
std::vector<double> parse_linear_grid(const std::string& spec);
/// "a..b" -> a, a+1, ..., b.
std::vector<std::size_t> parse_int_range(const std::string& spec);

/// Full command-line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hfteq::cli
