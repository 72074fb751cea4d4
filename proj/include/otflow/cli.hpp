#pragma once

// Command dispatch for the otflow tool.

#include <string>
#include <vector>

#include "otflow/io.hpp"

namespace otflow::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kIo = 2,
    kParse = 3,
    kStructural = 4,
    kValidation = 5,
    kAdmissibility = 6,
    kMetric = 7,
    kHypothesis = 8,
    kIntegration = 9,
    kCheckFailed = 10,
    kInternal = 11,
};

/// Text block listing every exit code, shown in --help.
std::string exit_code_help();

/// Maps an exception to its exit code (kInternal for unknown types).
int exit_code_for(const std::exception& e);

struct RunOptions {
    /// curvature: chern or bismut.
    std::string which;
    /// soliton, flow and report: chern-ricci, pluriclosed or generalized.
    std::string flow;
    bool strict = false;
    bool exact = false;
    int jobs = 1;
    double tol = kDefaultTol;
    /// report: CSV trace to read.
    std::string trace_in;
};

struct RunResult {
    int exit_code = kOk;
    json document;
    /// One short human-readable line per entry.
    std::vector<std::string> summary;
};

/// Executes one command over every entry of the config, writing the trace
/// CSV when a path is configured. Errors inside sweep entries are recorded
/// per entry; a single-entry run rethrows them.
RunResult run(const RunConfig& config, const RunOptions& options);

/// Default tolerance, overridden by OTFLOW_TOL when set.
double default_tolerance();

/// Full command-line entry point.
int main(int argc, char** argv);

}  // namespace otflow::cli
