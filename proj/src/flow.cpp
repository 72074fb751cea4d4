#include "otflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>
#include <boost/numeric/odeint.hpp>

namespace otflow {

namespace odeint = boost::numeric::odeint;

namespace {

using EMat = Eigen::Matrix<cx, Eigen::Dynamic, Eigen::Dynamic>;
using Vec = std::vector<double>;

std::size_t sz(int v) { return static_cast<std::size_t>(v); }

EMat to_eigen(const CMatrix& m) {
    EMat e(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
    return e;
}

CMatrix from_eigen(const EMat& e) {
    CMatrix m(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
    for (Eigen::Index i = 0; i < e.rows(); ++i)
        for (Eigen::Index j = 0; j < e.cols(); ++j) m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = e(i, j);
    return m;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Reduced-system state layout: A (s), B (s), then (Re C, Im C) per mixed entry.
Vec pack(const FlowState& st) {
    Vec x;
    x.reserve(2 * st.A.size() + 2 * st.C.size());
    x.insert(x.end(), st.A.begin(), st.A.end());
    x.insert(x.end(), st.B.begin(), st.B.end());
    for (const auto& m : st.C) {
        x.push_back(m.value.real());
        x.push_back(m.value.imag());
    }
    return x;
}

FlowState unpack(const Vec& x, const FlowState& shape, double t) {
    FlowState st;
    st.t = t;
    const std::size_t s = shape.A.size();
    st.A.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(s));
    st.B.assign(x.begin() + static_cast<std::ptrdiff_t>(s), x.begin() + static_cast<std::ptrdiff_t>(2 * s));
    st.C = shape.C;
    for (std::size_t r = 0; r < st.C.size(); ++r) st.C[r].value = cx(x[2 * s + 2 * r], x[2 * s + 2 * r + 1]);
    return st;
}

// Full-matrix state layout: Re, Im of every entry, row-major.
Vec pack_matrix(const CMatrix& g) {
    Vec x;
    x.reserve(2 * g.data().size());
    for (const cx& z : g.data()) {
        x.push_back(z.real());
        x.push_back(z.imag());
    }
    return x;
}

CMatrix unpack_matrix(const Vec& x, std::size_t n) {
    CMatrix g(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) g(i, j) = cx(x[2 * (i * n + j)], x[2 * (i * n + j) + 1]);
    // keep the matrix exactly Hermitian
    for (std::size_t i = 0; i < n; ++i) {
        g(i, i) = cx(g(i, i).real(), 0.0);
        for (std::size_t j = i + 1; j < n; ++j) {
            const cx avg = 0.5 * (g(i, j) + std::conj(g(j, i)));
            g(i, j) = avg;
            g(j, i) = std::conj(avg);
        }
    }
    return g;
}

double segment_max_step(double t, const FlowControls& c) { return std::max(c.max_step, c.step_growth * t); }

CMatrix derivative_matrix(const FlowState& st, const FlowDerivative& dv) {
    const int s = st.s();
    CMatrix d(sz(2 * s), sz(2 * s));
    for (int i = 0; i < s; ++i) {
        d(sz(i), sz(i)) = dv.A[sz(i)];
        d(sz(s + i), sz(s + i)) = dv.B[sz(i)];
    }
    for (std::size_t r = 0; r < st.C.size(); ++r) {
        const int p = st.C[r].index;
        d(sz(p), sz(s + p)) = dv.C[r];
        d(sz(s + p), sz(p)) = std::conj(dv.C[r]);
    }
    return d;
}

Eigen::MatrixXcd hblock(const CMatrix& g, int n_h) { return to_eigen(g).topLeftCorner(n_h, n_h); }

}  // namespace

std::vector<double> sample_times(double t_max, const FlowControls& c) {
    if (!(t_max > 0.0)) throw IntegrationError("t_max must be positive");
    if (!(c.first_sample > 0.0) || !(c.sample_ratio > 1.0)) throw IntegrationError("invalid sampling controls");
    std::vector<double> ts{0.0};
    for (double t = c.first_sample; t < t_max; t *= c.sample_ratio) ts.push_back(t);
    ts.push_back(t_max);
    return ts;
}

FlowState FlowState::from_metric(const NormalFormMetric& m, double t) {
    FlowState st;
    st.t = t;
    st.A = m.A;
    st.B = m.B;
    st.C = m.C;
    std::sort(st.C.begin(), st.C.end(), [](const MixedEntry& a, const MixedEntry& b) { return a.index < b.index; });
    return st;
}

std::vector<double> FlowState::u() const {
    std::vector<double> out;
    for (const auto& m : C) out.push_back(A[sz(m.index)] * B[sz(m.index)] - std::norm(m.value));
    return out;
}

void check_flow_state(const FlowState& st) {
    if (st.B.size() != st.A.size()) throw MetricError("A and B have different lengths");
    for (std::size_t i = 0; i < st.A.size(); ++i) {
        if (!(st.A[i] > 0.0)) throw MetricError("A_" + std::to_string(i + 1) + " is not positive");
        if (!(st.B[i] > 0.0)) throw MetricError("B_" + std::to_string(i + 1) + " is not positive");
    }
    const auto u = st.u();
    for (std::size_t r = 0; r < u.size(); ++r)
        if (!(u[r] > 0.0))
            throw MetricError("u at index " + std::to_string(st.C[r].index + 1) + " is not positive (AB - |C|^2 <= 0)");
}

FlowDerivative pluriclosed_rhs(const FlowState& st, const OTParams& p) {
    check_flow_state(st);
    if (!is_normal_form(p)) throw HypothesisError("the reduced system needs admissible parameters in normal form");
    if (st.s() != p.s) throw StructuralError("flow state and parameters have different s");
    const int s = st.s();
    FlowDerivative d;
    d.A.assign(sz(s), 0.75);
    d.B.assign(sz(s), 0.0);
    const auto u = st.u();
    for (std::size_t r = 0; r < st.C.size(); ++r) {
        const int q = st.C[r].index;
        const cx C = st.C[r].value;
        const double c = p.c[sz(q)][sz(q)];
        const double norm2 = std::norm(C);
        const double Bq = st.B[sz(q)];
        d.A[sz(q)] = 0.75 * (1.0 + norm2 / u[r]);
        const cx kappa(3.0 / 16.0 + c * c / 4.0, c / 4.0);
        d.C.push_back(-kappa * Bq * C / u[r]);
        d.C_norm2.push_back(-(3.0 / 8.0 + c * c / 2.0) * Bq * norm2 / u[r]);
        d.u.push_back(d.A[sz(q)] * Bq - d.C_norm2.back());
    }
    return d;
}

FlowTrace integrate_pluriclosed(const FlowState& st0, const OTParams& p, double t_max, const FlowControls& controls,
                                bool with_residual) {
    check_flow_state(st0);
    if (!is_normal_form(p)) throw HypothesisError("the reduced system needs admissible parameters in normal form");
    const std::vector<int> adm = admissible_off_diagonal_indices(p);
    for (const auto& m : st0.C)
        if (std::find(adm.begin(), adm.end(), m.index) == adm.end())
            throw HypothesisError("mixed entry at non-admissible index " + std::to_string(m.index + 1));

    FlowTrace tr;
    tr.flow = "pluriclosed";
    const auto ts = sample_times(t_max, controls);
    const FlowState shape = FlowState::from_metric(st0.metric());
    Vec x = pack(shape);

    StructureConstants<cx> sc;
    if (with_residual) sc = build_ot_algebra(p);
    auto record = [&](double t) {
        FlowState st = unpack(x, shape, t);
        if (with_residual) {
            const CMetric g = st.metric().to_metric();
            const CMatrix dm = derivative_matrix(st, pluriclosed_rhs(st, p));
            tr.residual.push_back((dm - bismut_ricci_11(sc, g) * kI).max_abs());
        }
        tr.states.push_back(std::move(st));
    };

    auto rhs = [&](const Vec& y, Vec& dy, double t) {
        const FlowState st = unpack(y, shape, t);
        const FlowDerivative d = pluriclosed_rhs(st, p);
        dy.assign(y.size(), 0.0);
        const std::size_t s = st.A.size();
        for (std::size_t i = 0; i < s; ++i) dy[i] = d.A[i];
        for (std::size_t r = 0; r < st.C.size(); ++r) {
            dy[2 * s + 2 * r] = d.C[r].real();
            dy[2 * s + 2 * r + 1] = d.C[r].imag();
        }
    };
    auto observe = [&](const Vec& y, double t) {
        ++tr.steps;
        try {
            check_flow_state(unpack(y, shape, t));
        } catch (const MetricError& e) {
            std::ostringstream msg;
            msg << "invariant breached at t = " << t << ": " << e.what();
            throw IntegrationError(msg.str());
        }
    };

    record(0.0);
    for (std::size_t k = 1; k < ts.size(); ++k) {
        const double t0 = ts[k - 1];
        const double t1 = ts[k];
        auto stepper = odeint::make_controlled(controls.atol, controls.rtol, segment_max_step(t0, controls),
                                               odeint::runge_kutta_dopri5<Vec>());
        const double dt0 = std::min(t1 - t0, segment_max_step(t0, controls));
        odeint::integrate_adaptive(stepper, rhs, x, t0, t1, dt0, observe);
        record(t1);
    }
    return tr;
}

MatrixTrace to_matrix_trace(const FlowTrace& tr) {
    MatrixTrace m;
    m.flow = tr.flow;
    m.steps = tr.steps;
    if (tr.states.empty()) return m;
    m.n_h = m.n_i = tr.states.front().s();
    for (const auto& st : tr.states) {
        m.t.push_back(st.t);
        m.g.push_back(st.metric().to_metric().matrix());
    }
    return m;
}

CMatrix chern_ricci_flow_at(const CMetric& g0, double t) {
    if (t < 0.0) throw IntegrationError("Chern-Ricci flow time must be nonnegative");
    return g0.matrix() + omega_infinity(g0.n_h(), g0.n_i()).g * cx(t, 0.0);
}

MatrixTrace chern_ricci_trace(const CMetric& g0, double t_max, const FlowControls& controls) {
    MatrixTrace m;
    m.flow = "chern-ricci";
    m.n_h = g0.n_h();
    m.n_i = g0.n_i();
    for (double t : sample_times(t_max, controls)) {
        m.t.push_back(t);
        m.g.push_back(chern_ricci_flow_at(g0, t));
    }
    return m;
}

MatrixTrace integrate_bismut_flow(const StructureConstants<cx>& sc, const CMetric& g0, double t_max,
                                  const FlowControls& controls, const std::vector<double>& times) {
    const std::vector<double> ts = times.empty() ? sample_times(t_max, controls) : times;
    if (ts.empty() || ts.front() != 0.0) throw IntegrationError("sample times must start at 0");
    const std::size_t n = static_cast<std::size_t>(g0.n());
    MatrixTrace tr;
    tr.flow = "bismut";
    tr.n_h = g0.n_h();
    tr.n_i = g0.n_i();
    Vec x = pack_matrix(g0.matrix());

    auto metric_of = [&](const Vec& y, double t) {
        try {
            return CMetric(g0.n_h(), g0.n_i(), unpack_matrix(y, n));
        } catch (const MetricError& e) {
            std::ostringstream msg;
            msg << "metric degenerated at t = " << t << ": " << e.what();
            throw IntegrationError(msg.str());
        }
    };
    auto rhs = [&](const Vec& y, Vec& dy, double t) {
        const CMetric g = metric_of(y, t);
        dy = pack_matrix(bismut_ricci_11(sc, g) * kI);
    };
    auto observe = [&](const Vec& y, double t) {
        ++tr.steps;
        (void)metric_of(y, t);
    };

    tr.t.push_back(0.0);
    tr.g.push_back(g0.matrix());
    for (std::size_t k = 1; k < ts.size(); ++k) {
        const double t0 = ts[k - 1];
        const double t1 = ts[k];
        auto stepper = odeint::make_controlled(controls.atol, controls.rtol, segment_max_step(t0, controls),
                                               odeint::runge_kutta_dopri5<Vec>());
        odeint::integrate_adaptive(stepper, rhs, x, t0, t1, std::min(t1 - t0, segment_max_step(t0, controls)), observe);
        tr.t.push_back(t1);
        tr.g.push_back(unpack_matrix(x, n));
    }
    return tr;
}

bool orthogonal_diagonal_h(const CMetric& g, double tol) {
    const int nh = g.n_h();
    for (int a = 0; a < nh; ++a)
        for (int b = 0; b < g.n(); ++b)
            if (a != b && std::abs(g(a, b)) > tol) return false;
    return true;
}

CMatrix generalized_flow_closed_form(const StructureConstants<cx>& sc, const ConditionFlags& flags, const CMetric& g0,
                                     double t, double tol) {
    if (!(flags.i && flags.ii && flags.iii && flags.iv))
        throw HypothesisError("closed-form flow needs conditions i-iv");
    if (!flags.jacobi) throw HypothesisError("closed-form flow needs a Lie algebra (Jacobi fails)");
    if (!orthogonal_diagonal_h(g0, tol))
        throw HypothesisError("closed-form flow needs h orthogonal to I and a diagonal h-block");
    if (t < 0.0) throw IntegrationError("flow time must be nonnegative");
    return g0.matrix() + bismut_ricci_11(sc, g0) * cx(0.0, t);
}

GeneralizedFlowResult generalized_flow(const StructureConstants<cx>& sc, const ConditionFlags& flags,
                                       const CMetric& g0, double t_max, const FlowControls& controls,
                                       bool require_closed_form) {
    GeneralizedFlowResult out;
    out.trace = integrate_bismut_flow(sc, g0, t_max, controls);
    out.trace.flow = "generalized";
    const bool hyp = flags.i && flags.ii && flags.iii && flags.iv && flags.jacobi && orthogonal_diagonal_h(g0);
    if (require_closed_form && !hyp) (void)generalized_flow_closed_form(sc, flags, g0, 0.0);
    if (hyp) {
        out.closed_form_checked = true;
        for (std::size_t k = 0; k < out.trace.t.size(); ++k) {
            const CMatrix cf = generalized_flow_closed_form(sc, flags, g0, out.trace.t[k]);
            const double dev = (out.trace.g[k] - cf).max_abs() / (1.0 + cf.max_abs());
            out.closed_form_deviation = std::max(out.closed_form_deviation, dev);
        }
    }
    return out;
}

CMatrix cheeger_gromov_pullback(const CMatrix& g_t, double t, int n_h, int n_i) {
    CMatrix e(sz(n_h + n_i), sz(n_h + n_i));
    for (int i = n_h; i < n_h + n_i; ++i) e(sz(i), sz(i)) = 1.0;
    return cheeger_gromov_pullback(g_t, t, e);
}

CMatrix cheeger_gromov_pullback(const CMatrix& g_t, double t, const CMatrix& e) {
    if (t < 0.0) throw IntegrationError("pullback time must be nonnegative");
    if (e.rows() != g_t.rows() || e.cols() != g_t.cols()) throw StructuralError("pullback: derivation block size differs");
    const double s = std::log(std::sqrt(1.0 + t));
    const EMat phi = (to_eigen(e) * cx(s, 0.0)).exp();
    const EMat out = phi.transpose() * to_eigen(g_t) * phi.conjugate() / (1.0 + t);
    return from_eigen(out);
}

CMatrix cheeger_gromov_limit(const CMatrix& g0, int n_h, int n_i, double h_factor) {
    CMatrix lim(sz(n_h + n_i), sz(n_h + n_i));
    for (int i = 0; i < n_h; ++i) lim(sz(i), sz(i)) = 0.25 * h_factor;
    for (int a = n_h; a < n_h + n_i; ++a)
        for (int b = n_h; b < n_h + n_i; ++b) lim(sz(a), sz(b)) = g0(sz(a), sz(b));
    return lim;
}

ConvergenceReport convergence_report(const MatrixTrace& tr, double limit_factor, const ConvergenceThresholds& th) {
    if (tr.t.size() < 2 || tr.g.size() != tr.t.size()) throw IntegrationError("convergence report needs at least two samples");
    ConvergenceReport rep;
    rep.flow = tr.flow;
    rep.limit_factor = limit_factor;
    rep.t_final = tr.t.back();
    const int nh = tr.n_h;
    const int n = tr.n_h + tr.n_i;
    const CMatrix& g0 = tr.g.front();

    // condition 1: generalized eigenvalues of (G_t|h, G_0|h)
    const Eigen::MatrixXcd h0 = hblock(g0, nh);
    std::vector<double> ratios;
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        double ratio = 0.0;
        if (nh > 0) {
            Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> es(hblock(tr.g[k], nh), h0, Eigen::EigenvaluesOnly);
            ratio = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()) / (1.0 + tr.t[k]));
        }
        ratios.push_back(ratio);
        rep.condition1_sup = std::max(rep.condition1_sup, ratio);
    }
    const double last = ratios.back();
    const double prev = ratios[ratios.size() - 2];
    rep.condition1_final_drift = last > 0.0 ? std::abs(last - prev) / last : 0.0;
    rep.condition1 = std::isfinite(rep.condition1_sup) && rep.condition1_final_drift <= th.drift;

    // condition 2: I-block invariance
    for (const auto& g : tr.g)
        for (int a = nh; a < n; ++a)
            for (int b = nh; b < n; ++b)
                rep.condition2_max_change = std::max(rep.condition2_max_change, std::abs(g(sz(a), sz(b)) - g0(sz(a), sz(b))));
    rep.condition2 = rep.condition2_max_change <= th.invariance;

    // condition 3 and the limit at the final sample
    const double scale = 1.0 / (1.0 + tr.t.back());
    rep.normalized_limit = tr.g.back() * cx(scale, 0.0);
    if (nh > 0) {
        Eigen::MatrixXcd diff = hblock(rep.normalized_limit, nh);
        diff -= Eigen::MatrixXcd::Identity(nh, nh) * (0.25 * limit_factor);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(diff, Eigen::EigenvaluesOnly);
        rep.condition3_sup = es.eigenvalues().cwiseAbs().maxCoeff();
        rep.limit_deviation = diff.cwiseAbs().maxCoeff();
    }
    rep.condition3 = rep.condition3_sup <= th.condition3;
    rep.limit_ok = rep.limit_deviation <= th.limit;
    return rep;
}

namespace {

std::string frame_name(int a, int n_h) {
    return a < n_h ? "Z" + std::to_string(a + 1) : "W" + std::to_string(a - n_h + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

void write_flow_csv(std::ostream& os, const FlowTrace& tr) {
    if (tr.states.empty()) return;
    const FlowState& first = tr.states.front();
    const int s = first.s();
    os << "t";
    for (int i = 0; i < s; ++i) os << ",A_" << i + 1;
    for (int i = 0; i < s; ++i) os << ",B_" << i + 1;
    for (const auto& m : first.C) os << ",ReC_" << m.index + 1 << ",ImC_" << m.index + 1;
    for (const auto& m : first.C) os << ",u_" << m.index + 1;
    os << ",norm_resid\r\n";
    for (std::size_t k = 0; k < tr.states.size(); ++k) {
        const FlowState& st = tr.states[k];
        os << fmt(st.t);
        for (double a : st.A) os << ',' << fmt(a);
        for (double b : st.B) os << ',' << fmt(b);
        for (const auto& m : st.C) os << ',' << fmt(m.value.real()) << ',' << fmt(m.value.imag());
        for (double u : st.u()) os << ',' << fmt(u);
        os << ',' << (k < tr.residual.size() ? fmt(tr.residual[k]) : std::string("nan")) << "\r\n";
    }
}

void write_matrix_csv(std::ostream& os, const MatrixTrace& tr) {
    const int n = tr.n_h + tr.n_i;
    os << "t";
    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b)
            os << ",Re_g_" << frame_name(a, tr.n_h) << '_' << frame_name(b, tr.n_h) << ",Im_g_" << frame_name(a, tr.n_h)
               << '_' << frame_name(b, tr.n_h);
    os << "\r\n";
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        os << fmt(tr.t[k]);
        for (int a = 0; a < n; ++a)
            for (int b = a; b < n; ++b) {
                const cx z = tr.g[k](sz(a), sz(b));
                os << ',' << fmt(z.real()) << ',' << fmt(z.imag());
            }
        os << "\r\n";
    }
}

MatrixTrace read_trace_csv(std::istream& is, const std::string& flow) {
    std::string line;
    if (!std::getline(is, line)) throw StructuralError("trace CSV is empty");
    const auto header = split_csv_line(line);
    if (header.empty() || header[0] != "t") throw StructuralError("trace CSV must start with a t column");
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;

    MatrixTrace tr;
    tr.flow = flow;
    const bool normal = col.count("A_1") > 0;
    int s = 0;
    std::vector<int> mixed;
    if (normal) {
        while (col.count("A_" + std::to_string(s + 1))) ++s;
        for (int i = 0; i < s; ++i)
            if (!col.count("B_" + std::to_string(i + 1))) throw StructuralError("trace CSV lacks B_" + std::to_string(i + 1));
        for (int i = 0; i < s; ++i)
            if (col.count("ReC_" + std::to_string(i + 1))) mixed.push_back(i);
        tr.n_h = tr.n_i = s;
    } else {
        int nz = 0, nw = 0;
        while (col.count("Re_g_Z" + std::to_string(nz + 1) + "_Z" + std::to_string(nz + 1))) ++nz;
        while (col.count("Re_g_W" + std::to_string(nw + 1) + "_W" + std::to_string(nw + 1))) ++nw;
        if (nz + nw == 0) throw StructuralError("trace CSV header has neither A_i nor Re_g_* columns");
        tr.n_h = nz;
        tr.n_i = nw;
    }
    const int n = tr.n_h + tr.n_i;

    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            std::ostringstream msg;
            msg << "trace CSV line " << lineno << " has " << cells.size() << " fields, expected " << header.size();
            throw StructuralError(msg.str());
        }
        auto num = [&](const std::string& name) {
            const std::string& cell = cells.at(col.at(name));
            try {
                return std::stod(cell);
            } catch (const std::exception&) {
                std::ostringstream msg;
                msg << "trace CSV line " << lineno << ": column " << name << " is not a number";
                throw StructuralError(msg.str());
            }
        };
        CMatrix g(sz(n), sz(n));
        if (normal) {
            for (int i = 0; i < s; ++i) {
                g(sz(i), sz(i)) = num("A_" + std::to_string(i + 1));
                g(sz(s + i), sz(s + i)) = num("B_" + std::to_string(i + 1));
            }
            for (int q : mixed) {
                const cx c(num("ReC_" + std::to_string(q + 1)), num("ImC_" + std::to_string(q + 1)));
                g(sz(q), sz(s + q)) = c;
                g(sz(s + q), sz(q)) = std::conj(c);
            }
        } else {
            for (int a = 0; a < n; ++a)
                for (int b = a; b < n; ++b) {
                    const std::string key = frame_name(a, tr.n_h) + "_" + frame_name(b, tr.n_h);
                    const cx z(num("Re_g_" + key), num("Im_g_" + key));
                    g(sz(a), sz(b)) = z;
                    g(sz(b), sz(a)) = std::conj(z);
                }
        }
        const double t = num("t");
        if (!tr.t.empty() && !(t > tr.t.back())) {
            std::ostringstream msg;
            msg << "trace CSV line " << lineno << ": time is not strictly increasing";
            throw StructuralError(msg.str());
        }
        tr.t.push_back(t);
        tr.g.push_back(std::move(g));
    }
    return tr;
}

}  // namespace otflow
