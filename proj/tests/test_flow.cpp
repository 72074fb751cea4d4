#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "otflow/flow.hpp"
#include "otflow/soliton.hpp"
#include "test_support.hpp"

using namespace otflow;
using namespace test_support;

namespace {

const cx I(0.0, 1.0);

double rel_diff(const CMatrix& a, const CMatrix& b) { return (a - b).max_abs() / std::max(1.0, b.max_abs()); }

// Diagonal action with the imaginary row sums forced equal to `im_sum` when requested.
SemidirectParams random_semidirect(std::mt19937_64& rng, int r, int s, std::optional<double> im_sum = {}) {
    SemidirectParams sp;
    sp.r = r;
    sp.s = s;
    sp.lambda.assign(r, std::vector<cx>(s));
    for (int i = 0; i < r; ++i) {
        double acc = 0.0;
        for (int a = 0; a < s; ++a) {
            sp.lambda[i][a] = cx(uniform(rng, -1, 1), uniform(rng, -1, 1));
            acc += sp.lambda[i][a].imag();
        }
        if (im_sum) sp.lambda[i][s - 1] += cx(0.0, *im_sum - acc);
    }
    return sp;
}

// Metric with h orthogonal to I; diagonal h-block when requested.
CMetric orthogonal_metric(std::mt19937_64& rng, int r, int s, bool diagonal_h) {
    CMatrix g(static_cast<std::size_t>(r + s), static_cast<std::size_t>(r + s));
    const CMatrix h = random_pd(rng, r), w = random_pd(rng, s);
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b)
            if (!diagonal_h || a == b) g(a, b) = h(a, b);
    for (int a = 0; a < s; ++a)
        for (int b = 0; b < s; ++b) g(r + a, r + b) = w(a, b);
    return CMetric(r, s, g);
}

}  // namespace

TEST_CASE("sample grid") {
    const auto ts = sample_times(100.0, {});
    REQUIRE(ts.size() > 3);
    CHECK(ts[0] == 0.0);
    CHECK(ts[1] == 0.01);
    CHECK(ts[2] == doctest::Approx(0.015));
    CHECK(ts.back() == 100.0);
    for (std::size_t k = 1; k < ts.size(); ++k) CHECK(ts[k] > ts[k - 1]);
    CHECK_THROWS_AS(sample_times(0.0, {}), IntegrationError);
}

TEST_CASE("reduced right-hand side") {
    std::mt19937_64 rng(71);
    const auto p = admissible_params(rng, 2, {0});
    const FlowState plain{0.0, {1.2, 0.7}, {0.5, 2.0}, {}};
    const auto d0 = pluriclosed_rhs(plain, p);
    CHECK(d0.A == std::vector<double>{0.75, 0.75});
    CHECK(d0.B == std::vector<double>{0.0, 0.0});
    CHECK(d0.C.empty());

    OTParams q = p;
    q.c[0][0] = 0.0;
    const FlowState st{0.0, {1.0, 1.0}, {1.0, 1.0}, {{0, cx(1.0 / std::sqrt(2.0), 0.0)}}};
    const auto d1 = pluriclosed_rhs(st, q);
    CHECK(d1.A[0] == doctest::Approx(1.5));
    CHECK(d1.A[1] == doctest::Approx(0.75));
    CHECK(d1.C_norm2[0] == doctest::Approx(-0.375));
    CHECK(d1.B == std::vector<double>{0.0, 0.0});

    for (int trial = 0; trial < 20; ++trial) {
        const auto pp = admissible_params(rng, 3, {0, 2});
        const auto nf = random_normal_form(rng, 3, {0, 2});
        const auto fs = FlowState::from_metric(nf);
        const auto d = pluriclosed_rhs(fs, pp);
        const CMatrix gdot = bismut_ricci_11(build_ot_algebra(pp), nf.to_metric()) * I;
        for (int i = 0; i < 3; ++i) {
            CHECK(std::abs(d.A[i] - gdot(i, i)) < 1e-10);
            CHECK(std::abs(d.B[i] - gdot(3 + i, 3 + i)) < 1e-10);
        }
        for (std::size_t r = 0; r < fs.C.size(); ++r) {
            const int pi = fs.C[r].index;
            CHECK(std::abs(d.C[r] - gdot(pi, 3 + pi)) < 1e-10);
            CHECK(d.C_norm2[r] <= 0.0);
            CHECK(d.u[r] >= 0.75 * fs.B[pi] - 1e-12);
        }
    }
}

TEST_CASE("flow state invariants") {
    CHECK_THROWS_AS(check_flow_state(FlowState{0.0, {1.0}, {-1.0}, {}}), MetricError);
    CHECK_THROWS_AS(check_flow_state(FlowState{0.0, {1.0}, {1.0}, {{0, cx(1.0, 0.0)}}}), MetricError);
    CHECK_NOTHROW(check_flow_state(FlowState{0.0, {1.0}, {1.0}, {{0, cx(0.5, 0.5)}}}));
}

TEST_CASE("affine solution without mixed terms") {
    const OTParams p{1, 1, {{-1.0}}, {{0.4}}};
    const FlowControls ctl;
    const auto tr = integrate_pluriclosed(FlowState{0.0, {1.0}, {1.0}, {}}, p, 100.0, ctl, false);
    CHECK(tr.states.back().t == 100.0);
    CHECK(std::abs(tr.states.back().A[0] - 76.0) <= ctl.rtol * 76.0);
    for (const auto& st : tr.states) CHECK(std::abs(st.A[0] - (1.0 + 0.75 * st.t)) <= 1e-8 * (1.0 + st.t));
}

TEST_CASE("long-time behaviour of the reduced system") {
    std::mt19937_64 rng(72);
    for (int trial = 0; trial < 5; ++trial) {
        const auto p = admissible_params(rng, 2, {1});
        const auto nf = random_normal_form(rng, 2, {1});
        const auto tr = integrate_pluriclosed(FlowState::from_metric(nf), p, 1e5, {}, false);
        const auto& last = tr.states.back();
        CHECK(last.t == 1e5);
        for (int i = 0; i < 2; ++i) CHECK(std::abs(last.A[i] / (1.0 + last.t) - 0.75) <= 0.01);
        double prev = std::abs(tr.states.front().C[0].value);
        for (const auto& st : tr.states) {
            CHECK(st.B == nf.B);
            const double c = std::abs(st.C[0].value);
            CHECK(c <= prev);
            prev = c;
            const auto d = pluriclosed_rhs(st, p);
            CHECK(d.u[0] >= 0.75 * st.B[1] - 1e-9);
            CHECK_NOTHROW(check_flow_state(st));
        }
    }
}

TEST_CASE("reduced system matches the generic flow on [0, 100]") {
    std::mt19937_64 rng(73);
    for (int trial = 0; trial < 3; ++trial) {
        const auto p = admissible_params(rng, 2, {0});
        const auto nf = random_normal_form(rng, 2, {0});
        const auto ode = integrate_pluriclosed(FlowState::from_metric(nf), p, 100.0, {}, true);
        const auto mt = to_matrix_trace(ode);
        const auto generic = integrate_bismut_flow(build_ot_algebra(p), nf.to_metric(), 100.0, {}, mt.t);
        REQUIRE(generic.t == mt.t);
        for (std::size_t k = 0; k < mt.t.size(); ++k) {
            CHECK(rel_diff(generic.g[k], mt.g[k]) < 1e-6);
            CHECK(ode.residual[k] < 1e-9 * (1.0 + mt.t[k]));
        }
    }
}

TEST_CASE("pluriclosedness is preserved along the flow") {
    std::mt19937_64 rng(74);
    const auto p = admissible_params(rng, 3, {0, 1});
    const auto nf = random_normal_form(rng, 3, {0, 1});
    const auto sc = build_ot_algebra(p);
    const auto mt = to_matrix_trace(integrate_pluriclosed(FlowState::from_metric(nf), p, 1000.0, {}, false));
    for (std::size_t k = 0; k < mt.t.size(); ++k) {
        const double scale = mt.g[k].max_abs();
        CHECK(pluriclosed_defect(sc, CMetric(3, 3, mt.g[k])) <= 1e-12 * scale);
    }
}

TEST_CASE("halving rtol barely moves the terminal state") {
    std::mt19937_64 rng(75);
    const auto p = admissible_params(rng, 2, {0, 1});
    const auto st = FlowState::from_metric(random_normal_form(rng, 2, {0, 1}));
    FlowControls fine;
    fine.rtol = 0.5e-8;
    const auto a = integrate_pluriclosed(st, p, 100.0, {}, false).states.back();
    const auto b = integrate_pluriclosed(st, p, 100.0, fine, false).states.back();
    for (int i = 0; i < 2; ++i) CHECK(std::abs(a.A[i] - b.A[i]) < 10.0 * 1e-8 * a.A[i]);
}

TEST_CASE("Cheeger-Gromov pullback scaling laws") {
    std::mt19937_64 rng(76);
    const CMatrix g = random_pd(rng, 5);
    const int nh = 2, ni = 3;
    CHECK(cheeger_gromov_pullback(g, 0.0, nh, ni) == g);
    for (double t : {0.5, 3.0, 1e5}) {
        const CMatrix pb = cheeger_gromov_pullback(g, t, nh, ni);
        for (int a = 0; a < 5; ++a)
            for (int b = 0; b < 5; ++b) {
                const int blocks = (a >= nh) + (b >= nh);
                const cx expect = blocks == 0 ? g(a, b) / (1.0 + t) : blocks == 1 ? g(a, b) / std::sqrt(1.0 + t) : g(a, b);
                CHECK(std::abs(pb(a, b) - expect) <= 1e-14 * std::abs(expect));
            }
    }
    CHECK_THROWS_AS(cheeger_gromov_pullback(g, -1.0, nh, ni), IntegrationError);
}

TEST_CASE("Chern-Ricci flow") {
    std::mt19937_64 rng(77);
    const auto sc = build_ot_algebra(general_params(rng, 2, 1));
    const CMetric g0(2, 1, random_pd(rng, 3));
    CHECK(chern_ricci_flow_at(g0, 0.0) == g0.matrix());
    CHECK_THROWS_AS(chern_ricci_flow_at(g0, -0.1), IntegrationError);

    for (double t : {0.3, 10.0, 500.0}) {
        const double h = 1e-3;
        const CMatrix fd = (chern_ricci_flow_at(g0, t + h) - chern_ricci_flow_at(g0, t - h)) * cx(1.0 / (2.0 * h));
        const CMetric gt(2, 1, chern_ricci_flow_at(g0, t));
        CHECK((fd - chern_ricci(sc, gt) * I).max_abs() < 1e-9);
    }

    const CMetric canon(2, 1, CMatrix::identity(3));
    const CMatrix lim = chern_ricci_flow_at(canon, 1e9) * cx(1.0 / (1.0 + 1e9));
    CHECK(std::abs(lim(0, 0) - 0.25) < 1e-8);
    CHECK(std::abs(lim(1, 1) - 0.25) < 1e-8);
    CHECK(std::abs(lim(2, 2)) < 1e-8);

    const auto tr = chern_ricci_trace(g0, 1e5);
    const auto rep = convergence_report(tr, 1.0);
    CHECK(rep.limit_factor == 1.0);
    CHECK(rep.condition1);
    CHECK(rep.condition2);
    CHECK(rep.condition2_max_change == 0.0);
    CHECK(rep.limit_ok);
    CHECK(std::abs(rep.normalized_limit(0, 0) - 0.25) < 0.01);
    const CMatrix pb = cheeger_gromov_pullback(tr.g.back(), tr.t.back(), 2, 1);
    CHECK((pb - cheeger_gromov_limit(g0.matrix(), 2, 1, 1.0)).max_abs() <= 0.01);
}

TEST_CASE("pluriclosed convergence diagnostics") {
    std::mt19937_64 rng(78);
    const auto p = admissible_params(rng, 2, {1});
    const auto nf = random_normal_form(rng, 2, {1});
    const auto mt = to_matrix_trace(integrate_pluriclosed(FlowState::from_metric(nf), p, 1e5, {}, false));
    const auto rep = convergence_report(mt, 3.0);
    CHECK(rep.condition1);
    CHECK(rep.condition2);
    CHECK(rep.condition2_max_change == 0.0);
    CHECK(rep.condition3);
    CHECK(rep.condition3_sup <= 0.02);
    CHECK(rep.limit_ok);
    const CMatrix pb = cheeger_gromov_pullback(mt.g.back(), mt.t.back(), 2, 2);
    CHECK((pb - cheeger_gromov_limit(nf.to_metric().matrix(), 2, 2, 3.0)).max_abs() <= 0.01);

    // with the wrong normalization condition 3 fails
    CHECK_FALSE(convergence_report(mt, 1.0).condition3);
}

TEST_CASE("generalized flow on semidirect algebras") {
    std::mt19937_64 rng(79);
    for (int trial = 0; trial < 10; ++trial) {
        const int r = uniform_int(rng, 1, 2), s = uniform_int(rng, 1, 3);
        const auto sd = build_semidirect(random_semidirect(rng, r, s));
        REQUIRE(sd.flags.i);
        REQUIRE(sd.flags.ii);
        REQUIRE(sd.flags.iii);
        REQUIRE(sd.flags.iv);
        REQUIRE(sd.flags.jacobi);
        const CMetric g = orthogonal_metric(rng, r, s, trial % 2 == 0);
        const CMatrix k = bismut_ricci_11(sd.algebra, g);
        for (int a = 0; a < r + s; ++a)
            for (int b = r; b < r + s; ++b) {
                CHECK(std::abs(k(a, b)) < 1e-10);
                CHECK(std::abs(k(b, a)) < 1e-10);
            }
    }

    // 1/2 + sum Im lambda > 0 makes the h-block grow, so the flow is immortal
    const int r = 2, s = 2;
    const auto sd = build_semidirect(random_semidirect(rng, r, s, 0.3));
    const CMetric diag = orthogonal_metric(rng, r, s, true);
    const auto res = generalized_flow(sd.algebra, sd.flags, diag, 50.0, {}, true);
    CHECK(res.closed_form_checked);
    CHECK(res.closed_form_deviation < 1e-6);
    for (std::size_t k = 0; k < res.trace.t.size(); ++k)
        CHECK(rel_diff(res.trace.g[k], generalized_flow_closed_form(sd.algebra, sd.flags, diag, res.trace.t[k])) < 1e-6);

    const CMetric full = orthogonal_metric(rng, r, s, false);
    CHECK_FALSE(orthogonal_diagonal_h(full));
    CHECK_THROWS_AS(generalized_flow(sd.algebra, sd.flags, full, 5.0, {}, true), HypothesisError);
    const auto gen = generalized_flow(sd.algebra, sd.flags, full, 5.0);
    CHECK_FALSE(gen.closed_form_checked);
    // only the h-block evolves
    for (const auto& gt : gen.trace.g)
        for (int a = r; a < r + s; ++a)
            for (int b = 0; b < r + s; ++b) CHECK(std::abs(gt(a, b) - full(a, b)) < 1e-10);
}

TEST_CASE("generalized flow on OT data agrees with the closed form") {
    std::mt19937_64 rng(80);
    const auto p = admissible_params(rng, 2);
    const auto sd = build_semidirect(semidirect_from_ot(p));
    const CMetric g = NormalFormMetric{{0.8, 1.7}, {1.1, 0.6}, {}}.to_metric();
    const auto res = generalized_flow(sd.algebra, sd.flags, g, 20.0, {}, true);
    CHECK(res.closed_form_deviation < 1e-6);
    const auto ode = to_matrix_trace(integrate_pluriclosed(FlowState::from_metric(extract_normal_form(g)), p, 20.0, {}, false));
    CHECK(rel_diff(res.trace.g.back(), ode.g.back()) < 1e-6);
}

TEST_CASE("semidirect soliton constant") {
    std::mt19937_64 rng(81);
    for (double im_sum : {0.0, 0.4, -0.3}) {
        const auto sd = build_semidirect(random_semidirect(rng, 2, 2, im_sum));
        REQUIRE(sd.flags.vi);
        const double A = 1.4;
        CMatrix m = CMatrix::identity(4) * cx(A);
        const CMatrix w = random_pd(rng, 2);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) m(2 + a, 2 + b) = w(a, b);
        const CMetric g(2, 2, m);
        const auto cert = detect_algebraic_soliton(sd.algebra, g, bismut_ricci_11(sd.algebra, g));
        REQUIRE(cert.has_value());
        CHECK(cert->c == doctest::Approx(-(0.5 + sd.flags.vi_constant) / A).epsilon(1e-8));
    }
}

TEST_CASE("trace CSV round trip") {
    std::mt19937_64 rng(82);
    const auto p = admissible_params(rng, 2, {1});
    const auto nf = random_normal_form(rng, 2, {1});
    const auto tr = integrate_pluriclosed(FlowState::from_metric(nf), p, 10.0);
    std::ostringstream os;
    write_flow_csv(os, tr);
    const std::string text = os.str();
    CHECK(text.rfind("t,A_1,A_2,B_1,B_2,ReC_2,ImC_2,u_2,norm_resid\r\n", 0) == 0);
    std::istringstream is(text);
    const auto back = read_trace_csv(is, "pluriclosed");
    const auto mt = to_matrix_trace(tr);
    CHECK(back.t == mt.t);
    REQUIRE(back.g.size() == mt.g.size());
    for (std::size_t k = 0; k < mt.g.size(); ++k) CHECK(back.g[k] == mt.g[k]);

    const auto ct = chern_ricci_trace(CMetric(2, 1, random_pd(rng, 3)), 10.0);
    std::ostringstream mo;
    write_matrix_csv(mo, ct);
    std::istringstream mi(mo.str());
    const auto cb = read_trace_csv(mi, "chern-ricci");
    CHECK(cb.n_h == 2);
    CHECK(cb.n_i == 1);
    for (std::size_t k = 0; k < ct.g.size(); ++k) CHECK(cb.g[k] == ct.g[k]);

    std::istringstream bad("t,A_1,B_1\r\n0,1,1\r\n0,2,1\r\n");
    CHECK_THROWS_AS(read_trace_csv(bad, "pluriclosed"), StructuralError);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_trace_csv(empty, "pluriclosed"), StructuralError);
}
