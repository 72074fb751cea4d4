#include "otflow/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace otflow {

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
    throw StructuralError(where + ": " + what);
}

const json& need(const json& j, const char* key, const std::string& where) {
    if (!j.is_object()) bad(where, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) bad(where, std::string("missing field \"") + key + "\"");
    return *it;
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) bad(where, "expected a number");
    return j.get<double>();
}

int integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) bad(where, "expected an integer");
    return j.get<int>();
}

RealMatrix real_matrix(const json& j, const std::string& where) {
    if (!j.is_array()) bad(where, "expected an array of rows");
    RealMatrix m;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string w = where + "[" + std::to_string(i) + "]";
        if (!j[i].is_array()) bad(w, "expected a row array");
        std::vector<double> row;
        for (std::size_t k = 0; k < j[i].size(); ++k) row.push_back(number(j[i][k], w + "[" + std::to_string(k) + "]"));
        m.push_back(std::move(row));
    }
    return m;
}

std::vector<std::vector<cx>> complex_table(const json& j, const std::string& where) {
    if (!j.is_array()) bad(where, "expected an array of rows");
    std::vector<std::vector<cx>> m;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string w = where + "[" + std::to_string(i) + "]";
        if (!j[i].is_array()) bad(w, "expected a row array");
        std::vector<cx> row;
        for (std::size_t k = 0; k < j[i].size(); ++k) row.push_back(complex_from_json(j[i][k], w + "[" + std::to_string(k) + "]"));
        m.push_back(std::move(row));
    }
    return m;
}

json complex_table_to_json(const std::vector<std::vector<cx>>& m) {
    json out = json::array();
    for (const auto& row : m) {
        json r = json::array();
        for (const cx& z : row) r.push_back(complex_to_json(z));
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<double> real_vector(const json& j, const std::string& where) {
    if (!j.is_array()) bad(where, "expected an array");
    std::vector<double> v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    return v;
}

int line_of(const std::string& text, std::size_t byte) {
    const std::size_t end = std::min(byte, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n'));
}

RunEntry entry_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) bad(where, "expected an object");
    RunEntry e;
    if (j.contains("params")) e.params = algebra_from_json(j.at("params"));
    if (j.contains("metric")) e.metric = metric_from_json(j.at("metric"));
    return e;
}

json entry_to_json(const RunEntry& e) {
    json j = json::object();
    if (e.params) j["params"] = to_json(*e.params);
    if (e.metric) j["metric"] = to_json(*e.metric);
    return j;
}

}  // namespace

json parse_json_text(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const int line = line_of(text, e.byte == 0 ? 0 : e.byte - 1);
        throw ParseError(source + ":" + std::to_string(line) + ": malformed JSON: " + e.what(), line);
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << text;
    if (!out) throw IoError("write failed for " + path);
}

// + 0.0 folds negative zero so equal values print identically
json complex_to_json(cx z) { return json{{"re", z.real() + 0.0}, {"im", z.imag() + 0.0}}; }

cx complex_from_json(const json& j, const std::string& where) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_object()) bad(where, "expected a number or {\"re\", \"im\"}");
    const double re = j.contains("re") ? number(j.at("re"), where + ".re") : 0.0;
    const double im = j.contains("im") ? number(j.at("im"), where + ".im") : 0.0;
    return {re, im};
}

json matrix_to_json(const CMatrix& m) {
    json out = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (std::size_t k = 0; k < m.cols(); ++k) r.push_back(complex_to_json(m(i, k)));
        out.push_back(std::move(r));
    }
    return out;
}

CMatrix matrix_from_json(const json& j, const std::string& where) {
    const auto t = complex_table(j, where);
    const std::size_t rows = t.size();
    const std::size_t cols = rows ? t[0].size() : 0;
    CMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (t[i].size() != cols) bad(where, "ragged matrix at row " + std::to_string(i + 1));
        for (std::size_t k = 0; k < cols; ++k) m(i, k) = t[i][k];
    }
    return m;
}

json to_json(const OTParams& p) { return json{{"r", p.r}, {"s", p.s}, {"b", p.b}, {"c", p.c}}; }

json to_json(const SemidirectParams& p) {
    json inner{{"r", p.r}, {"s", p.s}, {"lambda", complex_table_to_json(p.lambda)}};
    if (p.lambda_prime) inner["lambda_prime"] = complex_table_to_json(*p.lambda_prime);
    return json{{"semidirect", std::move(inner)}};
}

json to_json(const AlgebraSpec& a) {
    return std::visit([](const auto& p) { return to_json(p); }, a);
}

AlgebraSpec algebra_from_json(const json& j) {
    const std::string where = "params";
    if (!j.is_object()) bad(where, "expected an object");
    if (j.contains("semidirect")) {
        const json& sd = j.at("semidirect");
        SemidirectParams p;
        p.r = integer(need(sd, "r", where + ".semidirect"), where + ".semidirect.r");
        p.s = integer(need(sd, "s", where + ".semidirect"), where + ".semidirect.s");
        p.lambda = complex_table(need(sd, "lambda", where + ".semidirect"), where + ".semidirect.lambda");
        if (sd.contains("lambda_prime")) p.lambda_prime = complex_table(sd.at("lambda_prime"), where + ".semidirect.lambda_prime");
        return p;
    }
    OTParams p;
    p.r = integer(need(j, "r", where), where + ".r");
    p.s = integer(need(j, "s", where), where + ".s");
    p.b = real_matrix(need(j, "b", where), where + ".b");
    p.c = real_matrix(need(j, "c", where), where + ".c");
    check_shape(p);
    return p;
}

json to_json(const NormalFormMetric& m) {
    json c = json::array();
    for (const auto& e : m.C) c.push_back(json{{"index", e.index + 1}, {"re", e.value.real()}, {"im", e.value.imag()}});
    return json{{"A", m.A}, {"B", m.B}, {"C", std::move(c)}};
}

json to_json(const MetricSpec& m) {
    if (const auto* nf = std::get_if<NormalFormMetric>(&m)) return to_json(*nf);
    return json{{"g", matrix_to_json(std::get<CMatrix>(m))}};
}

MetricSpec metric_from_json(const json& j) {
    const std::string where = "metric";
    if (!j.is_object()) bad(where, "expected an object");
    if (j.contains("g")) return matrix_from_json(j.at("g"), where + ".g");
    NormalFormMetric m;
    m.A = real_vector(need(j, "A", where), where + ".A");
    m.B = real_vector(need(j, "B", where), where + ".B");
    if (m.A.size() != m.B.size()) bad(where, "A and B have different lengths");
    if (j.contains("C")) {
        const json& c = j.at("C");
        if (!c.is_array()) bad(where + ".C", "expected an array");
        for (std::size_t k = 0; k < c.size(); ++k) {
            const std::string w = where + ".C[" + std::to_string(k) + "]";
            const int idx = integer(need(c[k], "index", w), w + ".index");
            if (idx < 1 || idx > static_cast<int>(m.A.size())) bad(w, "index out of range");
            m.C.push_back({idx - 1, complex_from_json(c[k], w)});
        }
        std::sort(m.C.begin(), m.C.end(), [](const MixedEntry& a, const MixedEntry& b) { return a.index < b.index; });
        for (std::size_t k = 1; k < m.C.size(); ++k)
            if (m.C[k].index == m.C[k - 1].index) bad(where + ".C", "duplicate index " + std::to_string(m.C[k].index + 1));
    }
    return m;
}

CMetric make_metric(const MetricSpec& m, int n_h, int n_i) {
    if (const auto* nf = std::get_if<NormalFormMetric>(&m)) {
        if (nf->s() != n_h || nf->s() != n_i) throw MetricError("normal-form metric size does not match the algebra");
        return nf->to_metric();
    }
    return CMetric(n_h, n_i, std::get<CMatrix>(m));
}

json to_json(const RunConfig& c) {
    json j = json::object();
    j["command"] = c.command;
    if (c.base.params) j["params"] = to_json(*c.base.params);
    if (c.base.metric) j["metric"] = to_json(*c.base.metric);
    if (!c.sweep.empty()) {
        json s = json::array();
        for (const auto& e : c.sweep) s.push_back(entry_to_json(e));
        j["sweep"] = std::move(s);
    }
    j["flow"] = json{{"t_max", c.t_max},
                     {"rtol", c.controls.rtol},
                     {"atol", c.controls.atol},
                     {"max_step", c.controls.max_step},
                     {"step_growth", c.controls.step_growth},
                     {"first_sample", c.controls.first_sample},
                     {"sample_ratio", c.controls.sample_ratio}};
    j["output"] = json{{"report", c.output.report}, {"trace", c.output.trace}};
    return j;
}

RunConfig config_from_json(const json& j) {
    if (!j.is_object()) bad("config", "expected an object at top level");
    RunConfig c;
    if (j.contains("command")) {
        if (!j.at("command").is_string()) bad("command", "expected a string");
        c.command = j.at("command").get<std::string>();
    }
    c.base = entry_from_json(j, "config");
    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        if (!s.is_array()) bad("sweep", "expected an array");
        for (std::size_t k = 0; k < s.size(); ++k) c.sweep.push_back(entry_from_json(s[k], "sweep[" + std::to_string(k) + "]"));
    }
    if (j.contains("flow")) {
        const json& f = j.at("flow");
        if (!f.is_object()) bad("flow", "expected an object");
        auto opt = [&](const char* key, double& dst) {
            if (f.contains(key)) dst = number(f.at(key), std::string("flow.") + key);
        };
        opt("t_max", c.t_max);
        opt("rtol", c.controls.rtol);
        opt("atol", c.controls.atol);
        opt("max_step", c.controls.max_step);
        opt("step_growth", c.controls.step_growth);
        opt("first_sample", c.controls.first_sample);
        opt("sample_ratio", c.controls.sample_ratio);
    }
    if (j.contains("output")) {
        const json& o = j.at("output");
        if (!o.is_object()) bad("output", "expected an object");
        auto opt = [&](const char* key, std::string& dst) {
            if (!o.contains(key)) return;
            if (!o.at(key).is_string()) bad(std::string("output.") + key, "expected a string");
            dst = o.at(key).get<std::string>();
        };
        opt("report", c.output.report);
        opt("trace", c.output.trace);
    }
    return c;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
    return config_from_json(parse_json_text(text, source));
}

std::vector<RunEntry> expand_entries(const RunConfig& c) {
    if (c.sweep.empty()) return {c.base};
    std::vector<RunEntry> out;
    for (const auto& e : c.sweep) {
        RunEntry m = e;
        if (!m.params) m.params = c.base.params;
        if (!m.metric) m.metric = c.base.metric;
        out.push_back(std::move(m));
    }
    return out;
}

json to_json(const ValidationReport& r) {
    auto triple = [](const Triple& t) { return json::array({t.a + 1, t.b + 1, t.c + 1}); };
    json j{{"passed", r.passed()},
           {"tol", r.tol},
           {"antisymmetry_defect", r.antisymmetry_defect},
           {"jacobi_defect", r.jacobi_defect},
           {"conjugation_defect", r.conjugation_defect},
           {"ideal_defect", r.ideal_defect}};
    if (r.antisymmetry_defect > r.tol) j["worst_antisymmetry"] = triple(r.worst_antisymmetry);
    if (r.jacobi_defect > r.tol) j["worst_jacobi"] = triple(r.worst_jacobi);
    if (r.conjugation_defect > r.tol) j["worst_conjugation"] = triple(r.worst_conjugation);
    if (r.ideal_defect > r.tol) j["worst_ideal"] = triple(r.worst_ideal);
    return j;
}

json to_json(const SolitonCertificate& c) {
    return json{{"c", c.c},
                {"D_block", matrix_to_json(c.D_block)},
                {"residual", c.residual},
                {"derivation_defect", c.derivation_defect},
                {"expanding", c.expanding()}};
}

json to_json(const LauretReport& r) {
    json j{{"degenerate", r.degenerate}, {"eigenvalues", r.eigenvalues}};
    j["c"] = r.c ? json(*r.c) : json(nullptr);
    j["criterion1"] = r.criterion1;
    j["criterion2"] = r.criterion2;
    j["criterion2_c"] = r.criterion2_c;
    j["criterion2_residual"] = r.criterion2_residual;
    j["criterion3"] = r.criterion3;
    j["spectrum_ok"] = r.spectrum_ok;
    j["kernel_abelian_ideal"] = r.kernel_abelian_ideal;
    j["complement_subalgebra"] = r.complement_subalgebra;
    j["agree"] = r.agree;
    return j;
}

json to_json(const PluriclosedClassification& c) {
    json adm = json::array();
    for (int p : c.admissible) adm.push_back(p + 1);
    json perm = json::array();
    for (int p : c.permutation) perm.push_back(p + 1);
    return json{{"pluriclosed", c.pluriclosed},
                {"normal_form", c.normal_form},
                {"admissible_indices", std::move(adm)},
                {"column_permutation", std::move(perm)},
                {"violations", c.violations}};
}

json to_json(const ConditionFlags& f) {
    return json{{"i", f.i},
                {"ii", f.ii},
                {"iii", f.iii},
                {"iv", f.iv},
                {"v", f.v},
                {"vi", f.vi},
                {"lambda_prime_supplied", f.lambda_prime_supplied},
                {"jacobi", f.jacobi},
                {"v_spread", f.v_spread},
                {"vi_spread", f.vi_spread},
                {"v_constant", f.v_constant},
                {"vi_constant", f.vi_constant}};
}

json to_json(const ConvergenceReport& r) {
    return json{{"flow", r.flow},
                {"limit_factor", r.limit_factor},
                {"t_final", r.t_final},
                {"condition1", json{{"pass", r.condition1}, {"sup", r.condition1_sup}, {"final_drift", r.condition1_final_drift}}},
                {"condition2", json{{"pass", r.condition2}, {"max_change", r.condition2_max_change}}},
                {"condition3", json{{"pass", r.condition3}, {"sup", r.condition3_sup}}},
                {"limit", json{{"pass", r.limit_ok}, {"deviation", r.limit_deviation}, {"normalized", matrix_to_json(r.normalized_limit)}}}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace otflow
