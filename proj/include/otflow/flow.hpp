#pragma once

// Metric flows on OT-type algebras.
//
// Pluriclosed flow on normal-form metrics reduces to an ODE in (A, B, C);
// the generic path integrates d/dt G = i K(G), K = rho_B^{1,1}, for any
// algebra. The Chern-Ricci flow is affine: G_t = G_0 + t omega_inf.

#include <iosfwd>
#include <string>
#include <vector>

#include "otflow/dense.hpp"
#include "otflow/hermitian_curvature.hpp"
#include "otflow/lie_core.hpp"
#include "otflow/ot_model.hpp"

namespace otflow {

struct FlowControls {
    double rtol = 1e-8;
    double atol = 1e-10;
    /// Step cap near t = 0; later segments allow max(max_step, step_growth * t).
    double max_step = 1.0;
    double step_growth = 0.25;
    /// Sampling grid: 0, first_sample, first_sample * ratio, ..., t_max.
    double first_sample = 0.01;
    double sample_ratio = 1.5;

    friend bool operator==(const FlowControls&, const FlowControls&) = default;
};

/// Geometric sample grid ending exactly at t_max.
std::vector<double> sample_times(double t_max, const FlowControls& controls);

struct FlowState {
    double t = 0.0;
    std::vector<double> A;
    std::vector<double> B;
    /// Mixed entries at admissible indices, in increasing index order.
    std::vector<MixedEntry> C;

    int s() const { return static_cast<int>(A.size()); }
    NormalFormMetric metric() const { return {A, B, C}; }
    static FlowState from_metric(const NormalFormMetric& m, double t = 0.0);
    /// u_r = A_p B_p - |C_r|^2 for each mixed entry.
    std::vector<double> u() const;
};

/// Throws MetricError when A, B or some u_r is not positive.
void check_flow_state(const FlowState& st);

struct FlowDerivative {
    std::vector<double> A;
    std::vector<double> B;
    std::vector<cx> C;
    /// d/dt |C_r|^2 and d/dt u_r.
    std::vector<double> C_norm2;
    std::vector<double> u;
};

/// Right-hand side of the reduced system for admissible normal-form data:
///   A_i' = 3/4 off the mixed indices, A_p' = (3/4)(1 + |C|^2 / u),
///   B' = 0, C' = -(3/16 + c_pp^2/4 + i c_pp/4) B_p C / u.
FlowDerivative pluriclosed_rhs(const FlowState& st, const OTParams& p);

struct FlowTrace {
    std::string flow;
    std::vector<FlowState> states;
    /// max |d/dt G - i rho_B^{1,1}(G)| at each sample, from the generic formula.
    std::vector<double> residual;
    int steps = 0;
};

/// Adaptive Dormand-Prince integration of the reduced system. Invariants are
/// checked after every accepted step; a breach raises IntegrationError.
FlowTrace integrate_pluriclosed(const FlowState& st0, const OTParams& p, double t_max,
                                const FlowControls& controls = {}, bool with_residual = true);

/// Full metric matrices along a flow.
struct MatrixTrace {
    std::string flow;
    int n_h = 0;
    int n_i = 0;
    std::vector<double> t;
    std::vector<CMatrix> g;
    int steps = 0;
};

MatrixTrace to_matrix_trace(const FlowTrace& tr);

/// G_0 + t omega_inf, for t >= 0.
CMatrix chern_ricci_flow_at(const CMetric& g0, double t);
MatrixTrace chern_ricci_trace(const CMetric& g0, double t_max, const FlowControls& controls = {});

/// Generic integration of d/dt G = i rho_B^{1,1}(G) for any algebra.
MatrixTrace integrate_bismut_flow(const StructureConstants<cx>& sc, const CMetric& g0, double t_max,
                                  const FlowControls& controls = {}, const std::vector<double>& times = {});

struct GeneralizedFlowResult {
    MatrixTrace trace;
    /// Whether the closed form G_0 + t i K(G_0) was asserted.
    bool closed_form_checked = false;
    /// Largest entrywise deviation from the closed form relative to 1 + |G|.
    double closed_form_deviation = 0.0;
};

/// True when h and I are orthogonal and the h-block is diagonal within tol.
bool orthogonal_diagonal_h(const CMetric& g, double tol = kDefaultTol);

/// G_0 + t i rho_B^{1,1}(G_0). Needs conditions i-iv and an orthogonal metric
/// with diagonal h-block; throws HypothesisError otherwise.
CMatrix generalized_flow_closed_form(const StructureConstants<cx>& sc, const ConditionFlags& flags,
                                     const CMetric& g0, double t, double tol = kDefaultTol);

/// Generic integration; compares against the closed form whenever its
/// hypotheses hold. With require_closed_form, unmet hypotheses throw.
GeneralizedFlowResult generalized_flow(const StructureConstants<cx>& sc, const ConditionFlags& flags,
                                       const CMetric& g0, double t_max, const FlowControls& controls = {},
                                       bool require_closed_form = false);

/// Phi^T (G_t / (1 + t)) conj(Phi) with Phi = exp(s E), s = log sqrt(1 + t).
/// E is the (1,0) block of the derivation and defaults to diag(0, Id_I).
CMatrix cheeger_gromov_pullback(const CMatrix& g_t, double t, int n_h, int n_i);
CMatrix cheeger_gromov_pullback(const CMatrix& g_t, double t, const CMatrix& e);

/// 3 omega_inf + G_0|I (pluriclosed) or omega_inf + G_0|I (Chern-Ricci).
CMatrix cheeger_gromov_limit(const CMatrix& g0, int n_h, int n_i, double h_factor);

struct ConvergenceReport {
    std::string flow;
    /// 3 for the pluriclosed flow, 1 for Chern-Ricci.
    double limit_factor = 1.0;
    double t_final = 0.0;
    /// sup of |v|_t / (sqrt(1+t)|v|_0) over h and the trace, and its drift over the last samples.
    double condition1_sup = 0.0;
    double condition1_final_drift = 0.0;
    bool condition1 = false;
    /// max |G_t - G_0| on the I-block over the trace.
    double condition2_max_change = 0.0;
    bool condition2 = false;
    /// sup over unit h-vectors of | |v|_t^2 / (1+t) - factor |v|_inf^2 | at the last sample.
    double condition3_sup = 0.0;
    bool condition3 = false;
    /// G_t / (1 + t) at the final sample and its max deviation from factor * omega_inf on h.
    CMatrix normalized_limit;
    double limit_deviation = 0.0;
    bool limit_ok = false;
};

struct ConvergenceThresholds {
    /// Bound on the condition 3 supremum at the last sample.
    double condition3 = 0.02;
    /// Entrywise bound on |G_t/(1+t) - factor omega_inf| over h.
    double limit = 0.01;
    /// Bound on the relative change of the condition 1 ratio over the last two samples.
    double drift = 0.01;
    /// Bound on the I-block change; 0 demands bit-identical entries.
    double invariance = 0.0;
};

/// Norm-level convergence diagnostics for a trace with at least two samples.
ConvergenceReport convergence_report(const MatrixTrace& tr, double limit_factor,
                                     const ConvergenceThresholds& th = {});

/// CSV trace: t, A_1..A_s, B_1..B_s, ReC_r, ImC_r per mixed entry, u_r, norm_resid.
void write_flow_csv(std::ostream& os, const FlowTrace& tr);
/// CSV of full matrices: t, then Re/Im of g_ab for a <= b.
void write_matrix_csv(std::ostream& os, const MatrixTrace& tr);

/// Reads either CSV layout back into matrices. The block sizes come from the
/// header: A_i columns (normal form, n_h = n_i = s) or Re_g_Zi_Wj style names.
MatrixTrace read_trace_csv(std::istream& is, const std::string& flow);

}  // namespace otflow
