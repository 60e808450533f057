#ifndef GSOV_TOOLS_HARNESS_HPP
#define GSOV_TOOLS_HARNESS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsov/bethe_spectra.hpp"
#include "gsov/gaudin_models.hpp"
#include "gsov/separation_of_variables.hpp"

namespace gsov::harness {

enum ExitCode { Pass = 0, IdentityFailure = 2, InvalidInput = 3, Breakdown = 4 };

/// Model file (JSON):
///   {"N": 3, "z": [0, 1, [0.4, 1.2]], "lambda": [-0.5, -0.5, -0.5],
///    "mu": [...], "q": 0.1, "k": 0, "mu0": 0}
/// Complex entries are numbers or [re, im]. "q" makes the model elliptic; "mu",
/// "k" (default 0) and "mu0" are optional.
GaudinModel parse_model(const nlohmann::json& j);
GaudinModel load_model(const std::string& path);
GaudinModel default_model(SovCase kind);

struct RunConfig {
    std::string command;
    std::optional<std::string> model_path;
    std::optional<SovCase> kind;
    double tol = 0.0;  // 0: per-suite default
    int trials = 0;    // 0: per-suite default
    std::uint64_t seed = 1;
    int trunc = 0;
    std::string out;
    std::string csv;
    int roots = -1;
    int seeds = 32;
    cplx q{0.1, 0.0};          // theta-eval
    std::vector<cplx> points;  // theta-eval
};

struct Record {
    std::string label;
    std::string identity;
    int samples = 0;
    double max_residual = 0.0;
    double tol = 0.0;
    bool pass = false;
    std::string note;
};

struct SuiteResult {
    std::vector<Record> records;
    nlohmann::json data = nlohmann::json::object();
    std::string csv;
    int exit_code = Pass;
    std::string error;
};

Record from_report(const VerificationReport& r, const std::string& identity);
/// Negative control: passes when the wrapped identity fails.
Record negative_control(const VerificationReport& r, const std::string& identity);

/// Special-function identities at modulus q: quasi-periodicity, inversion,
/// q -> 0 degeneration, wp(tau) tau^2 -> 1, kernel product law. `samples` each.
std::vector<Record> special_function_checks(cplx q, int samples, std::uint64_t seed, double tol = 1e-8);

/// Runs the subcommand in cfg.command; never throws (errors map to exit codes).
SuiteResult run_suite(const RunConfig& cfg);

/// Runs several configs on a worker pool (0: hardware concurrency); results in input order.
std::vector<SuiteResult> run_suites(const std::vector<RunConfig>& cfgs, unsigned workers = 0);

/// JSON report; floating point numbers as %.16e.
std::string report_json(const RunConfig& cfg, const SuiteResult& r);

/// Writes a json value with every floating point number printed as %.16e.
std::string dump_scientific(const nlohmann::json& j, int indent = 2);

}  // namespace gsov::harness

#endif
