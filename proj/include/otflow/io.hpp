#pragma once

// JSON configuration and result documents for the command-line tool.
//
// Complex numbers are {"re": x, "im": y}; a bare number is read as real.
// Matrix entries and mixed-term indices in JSON are 1-based where they name
// frame positions.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "otflow/flow.hpp"
#include "otflow/hermitian_curvature.hpp"
#include "otflow/ot_model.hpp"
#include "otflow/soliton.hpp"

namespace otflow {

inline constexpr const char* kToolVersion = "1.0.0";

using json = nlohmann::ordered_json;

/// Malformed JSON text; line is 1-based.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line) : Error(what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/// Missing, unreadable or unwritable files.
class IoError : public Error {
public:
    using Error::Error;
};

using AlgebraSpec = std::variant<OTParams, SemidirectParams>;

/// Either the normal form (A, B, C) or a full coefficient matrix.
using MetricSpec = std::variant<NormalFormMetric, CMatrix>;

struct OutputPaths {
    std::string report;
    std::string trace;
    friend bool operator==(const OutputPaths&, const OutputPaths&) = default;
};

/// One independent unit of work; sweeps hold several.
struct RunEntry {
    std::optional<AlgebraSpec> params;
    std::optional<MetricSpec> metric;
    friend bool operator==(const RunEntry&, const RunEntry&) = default;
};

struct RunConfig {
    std::string command;
    RunEntry base;
    std::vector<RunEntry> sweep;
    double t_max = 1e5;
    FlowControls controls;
    OutputPaths output;
    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses JSON text, mapping syntax errors to ParseError with the line.
json parse_json_text(const std::string& text, const std::string& source = "<input>");
/// Reads a file; throws IoError when it cannot be opened.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

json complex_to_json(cx z);
cx complex_from_json(const json& j, const std::string& where);
json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const json& j, const std::string& where);

json to_json(const OTParams& p);
json to_json(const SemidirectParams& p);
json to_json(const AlgebraSpec& a);
AlgebraSpec algebra_from_json(const json& j);

json to_json(const NormalFormMetric& m);
json to_json(const MetricSpec& m);
MetricSpec metric_from_json(const json& j);

/// A validated metric in the frame of the given block sizes.
CMetric make_metric(const MetricSpec& m, int n_h, int n_i);

json to_json(const RunConfig& c);
RunConfig config_from_json(const json& j);
RunConfig parse_config(const std::string& text, const std::string& source = "<input>");

/// Entries to process: the sweep entries merged over the base, or the base alone.
std::vector<RunEntry> expand_entries(const RunConfig& c);

json to_json(const ValidationReport& r);
json to_json(const SolitonCertificate& c);
json to_json(const LauretReport& r);
json to_json(const PluriclosedClassification& c);
json to_json(const ConditionFlags& f);
json to_json(const ConvergenceReport& r);

/// Stable text form: two-space indentation and a trailing newline.
std::string dump(const json& j);

}  // namespace otflow
