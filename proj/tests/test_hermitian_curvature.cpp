#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>

#include "otflow/hermitian_curvature.hpp"
#include "test_support.hpp"

using namespace otflow;
using namespace test_support;

namespace {

using EMat = Eigen::MatrixXcd;

const cx I(0.0, 1.0);

// Chern-Ricci form from the anticanonical bundle: with the constant frame
// e_1 ^ ... ^ e_n the (0,1) connection form is theta(conj e_m) = tr pi^{1,0} ad,
// theta(e_m) = -conj theta(conj e_m), and rho(x, y) = -i theta([x, y]).
CMatrix chern_by_trace(const StructureConstants<cx>& sc) {
    const int n = sc.n();
    std::vector<cx> theta(static_cast<std::size_t>(sc.dim()));
    for (int m = 0; m < n; ++m) {
        cx t = 0.0;
        for (int a = 0; a < n; ++a) t += sc(n + m, a, a);
        theta[n + m] = t;
        theta[m] = -std::conj(t);
    }
    CMatrix k(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            cx v = 0.0;
            for (int m = 0; m < sc.dim(); ++m) v += sc(a, n + b, m) * theta[m];
            k(a, b) = -I * v;
        }
    return k;
}

// Bismut-Ricci (1,1) coefficients from the connection. Levi-Civita by
// Koszul, plus half the torsion 3-form sigma * d omega(J., J., J.), with the
// sign sigma fixed by the requirement that the connection preserves J.
// rho(x, y) = i tr of the curvature on g^{1,0}.
struct BismutOracle {
    CMatrix k;
    int sigma = 0;
};

BismutOracle bismut_by_connection(const StructureConstants<cx>& sc, const CMetric& g) {
    const int n = sc.n(), d = sc.dim();
    EMat gc = EMat::Zero(d, d), om = EMat::Zero(d, d);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            gc(a, n + b) = gc(n + b, a) = g(a, b);
            om(a, n + b) = I * g(a, b);
            om(n + b, a) = -I * g(a, b);
        }
    const EMat gci = gc.inverse();
    auto br = [&](int x, int y) {
        Eigen::VectorXcd v(d);
        for (int k = 0; k < d; ++k) v(k) = sc(x, y, k);
        return v;
    };
    auto gv = [&](const Eigen::VectorXcd& v, int z) { return (v.transpose() * gc.col(z))(0); };
    auto ov = [&](const Eigen::VectorXcd& v, int z) { return (v.transpose() * om.col(z))(0); };
    auto jv = [&](int a) { return a < n ? I : -I; };
    auto domega = [&](int x, int y, int z) { return -ov(br(x, y), z) + ov(br(x, z), y) - ov(br(y, z), x); };

    BismutOracle out;
    for (int sigma : {1, -1}) {
        std::vector<EMat> conn(static_cast<std::size_t>(d), EMat::Zero(d, d));
        for (int x = 0; x < d; ++x)
            for (int y = 0; y < d; ++y) {
                Eigen::VectorXcd low(d);
                for (int z = 0; z < d; ++z) {
                    const cx lc = 0.5 * (gv(br(x, y), z) - gv(br(y, z), x) + gv(br(z, x), y));
                    const cx t = double(sigma) * jv(x) * jv(y) * jv(z) * domega(x, y, z);
                    low(z) = lc + 0.5 * t;
                }
                conn[x].col(y) = gci * low;
            }
        double jdefect = 0.0;
        for (int x = 0; x < d; ++x)
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b)
                    if ((a < n) != (b < n)) jdefect = std::max(jdefect, std::abs(conn[x](a, b)));
        if (jdefect > 1e-10) continue;
        CHECK(out.sigma == 0);
        out.sigma = sigma;
        out.k = CMatrix(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                const int x = a, y = n + b;
                EMat r = conn[x] * conn[y] - conn[y] * conn[x];
                for (int k = 0; k < d; ++k) r -= sc(x, y, k) * conn[k];
                out.k(a, b) = I * r.topLeftCorner(n, n).trace();
            }
    }
    return out;
}

CMetric random_metric(std::mt19937_64& rng, int n_h, int n_i) { return CMetric(n_h, n_i, random_pd(rng, n_h + n_i)); }

}  // namespace

TEST_CASE("HermitianMetric rejects bad input") {
    CMatrix g = CMatrix::identity(2);
    g(0, 1) = 0.5;
    CHECK_THROWS_AS(CMetric(1, 1, g), MetricError);
    g(1, 0) = 2.0;
    g(0, 1) = 2.0;
    CHECK_THROWS_AS(CMetric(1, 1, g), MetricError);
    CHECK_THROWS_AS(CMetric(1, 2, CMatrix::identity(2)), MetricError);
    CHECK_NOTHROW(CMetric(1, 1, CMatrix::identity(2)));
}

TEST_CASE("omega_infinity and the normal form round trip") {
    const auto w = omega_infinity(2, 3);
    for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b) CHECK(w.g(a, b) == cx(a == b && a < 2 ? 0.25 : 0.0));
    std::mt19937_64 rng(41);
    const auto nf = random_normal_form(rng, 3, {0, 2});
    CHECK(extract_normal_form(nf.to_metric()) == nf);
    CMatrix bad = nf.to_metric().matrix();
    bad(0, 1) = bad(1, 0) = 0.01;
    CHECK_THROWS_AS(extract_normal_form(CMetric(3, 3, bad)), MetricError);
}

TEST_CASE("Chern-Ricci of an OT algebra is -omega_inf for every metric") {
    std::mt19937_64 rng(42);
    const auto p = general_params(rng, 2, 1);
    const auto sc = build_ot_algebra(p);
    const CMatrix expect = ot_chern_ricci_closed_form(2, 1);
    CHECK((chern_ricci(sc, CMetric(2, 1, CMatrix::identity(3))) - expect).max_abs() < 1e-15);
    for (int trial = 0; trial < 20; ++trial) CHECK((chern_ricci(sc, random_metric(rng, 2, 1)) - expect).max_abs() < 1e-10);
    CHECK(expect(0, 0) == cx(0.0, -0.25));
}

TEST_CASE("Chern-Ricci agrees with the anticanonical-bundle trace formula") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 10; ++trial) {
        const auto sc = build_ot_algebra(general_params(rng, uniform_int(rng, 1, 3), uniform_int(rng, 1, 3)));
        const auto g = random_metric(rng, sc.n_h(), sc.n_i());
        CHECK((chern_ricci(sc, g) - chern_by_trace(sc)).max_abs() < 1e-12);
    }
    for (int trial = 0; trial < 10; ++trial) {
        SemidirectParams sp;
        sp.r = uniform_int(rng, 1, 3);
        sp.s = uniform_int(rng, 1, 3);
        sp.lambda.assign(sp.r, std::vector<cx>(sp.s));
        for (auto& row : sp.lambda)
            for (auto& z : row) z = cx(uniform(rng, -1, 1), uniform(rng, -1, 1));
        const auto sd = build_semidirect(sp);
        const auto g = random_metric(rng, sp.r, sp.s);
        CHECK((chern_ricci(sd.algebra, g) - chern_by_trace(sd.algebra)).max_abs() < 1e-12);
    }
}

TEST_CASE("Chern-Ricci form is closed and vanishes on abelian algebras") {
    std::mt19937_64 rng(44);
    const auto sc = build_ot_algebra(general_params(rng, 2, 2));
    const auto g = random_metric(rng, 2, 2);
    CHECK(ce_differential(chern_ricci_form(sc, g), sc).max_abs() < 1e-12);
    const auto ab = StructureConstants<cx>::zero(1, 2);
    CHECK(chern_ricci(ab, random_metric(rng, 1, 2)).max_abs() == 0.0);
}

TEST_CASE("Bismut-Ricci agrees with the Bismut connection curvature") {
    std::mt19937_64 rng(45);
    for (int trial = 0; trial < 8; ++trial) {
        const auto sc = build_ot_algebra(general_params(rng, uniform_int(rng, 1, 2), uniform_int(rng, 1, 2)));
        const auto g = random_metric(rng, sc.n_h(), sc.n_i());
        const auto oracle = bismut_by_connection(sc, g);
        REQUIRE(oracle.sigma != 0);
        CHECK((bismut_ricci_11(sc, g) - oracle.k).max_abs() < 1e-10);
    }
    const auto p = admissible_params(rng, 2, {1});
    const auto sc = build_ot_algebra(p);
    const auto g = random_normal_form(rng, 2, {1}).to_metric();
    CHECK((bismut_ricci_11(sc, g) - bismut_by_connection(sc, g).k).max_abs() < 1e-10);
}

TEST_CASE("Bismut-Ricci on diagonal metrics is -(3/4) i on h") {
    std::mt19937_64 rng(46);
    const auto p = admissible_params(rng, 3);
    const auto sc = build_ot_algebra(p);
    const auto g = random_normal_form(rng, 3, {}).to_metric();
    const CMatrix k = bismut_ricci_11(sc, g);
    for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) CHECK(std::abs(k(a, b) - (a == b && a < 3 ? cx(0.0, -0.75) : cx(0.0))) < 1e-12);
}

TEST_CASE("Bismut-Ricci at A = B = 1, C = 1/sqrt 2") {
    OTParams p{2, 2, {{-1, 0}, {0, -1}}, {{0.0, 0.0}, {0.0, 0.7}}};
    const NormalFormMetric nf{{1, 1}, {1, 1}, {{0, cx(1.0 / std::sqrt(2.0), 0.0)}}};
    const auto g = nf.to_metric();
    const CMatrix k = bismut_ricci_11(build_ot_algebra(p), g);
    CHECK(std::abs(k(0, 0) - cx(0.0, -1.5)) < 1e-12);
    CHECK(std::abs(k(0, 2) - cx(0.0, 3.0 * std::sqrt(2.0) / 16.0)) < 1e-12);
    CHECK(std::abs(k(1, 1) - cx(0.0, -0.75)) < 1e-12);
    CHECK(reality_defect(k) < 1e-14);
    CHECK((k - ot_bismut_ricci_closed_form(p, g)).max_abs() < 1e-12);
}

TEST_CASE("closed-form Bismut-Ricci matches the general formula") {
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 100; ++trial) {
        const int s = uniform_int(rng, 1, 3);
        std::vector<int> adm;
        for (int q = 0; q < s; ++q)
            if (uniform(rng, 0, 1) < 0.6) adm.push_back(q);
        const auto p = admissible_params(rng, s, adm);
        std::vector<int> mixed;
        for (int q : adm)
            if (uniform(rng, 0, 1) < 0.7) mixed.push_back(q);
        const auto g = random_normal_form(rng, s, mixed).to_metric();
        const CMatrix k = bismut_ricci_11(build_ot_algebra(p), g);
        CHECK((k - ot_bismut_ricci_closed_form(p, g)).max_abs() < 1e-10);
        CHECK(reality_defect(k) < 1e-12);
        CHECK(ce_differential(bismut_ricci_form(build_ot_algebra(p), g), build_ot_algebra(p)).max_abs() < 1e-10);
    }
}

TEST_CASE("closed form in exact arithmetic") {
    const OTParams p{2, 2, {{-1, 0}, {0, -1}}, {{0.5, 0.0}, {0.0, -1.25}}};
    const NormalFormMetric nf{{1.5, 0.75}, {2.0, 1.0}, {{0, cx(0.5, 0.25)}, {1, cx(-0.125, 0.5)}}};
    const auto g = nf.to_metric<GaussianRational>();
    const auto sc = build_ot_algebra<GaussianRational>(p);
    CHECK(bismut_ricci_11(sc, g) == ot_bismut_ricci_closed_form(p, g));
}

TEST_CASE("closed form rejects metrics outside its hypotheses") {
    std::mt19937_64 rng(48);
    const OTParams p{2, 2, {{-1, 0}, {0, -1}}, {{0.3, 0.4}, {0.0, 0.2}}};
    const auto good = random_normal_form(rng, 2, {0});
    CHECK_NOTHROW(ot_bismut_ricci_closed_form(p, good.to_metric()));
    const auto bad = random_normal_form(rng, 2, {1});
    CHECK_THROWS_AS(ot_bismut_ricci_closed_form(p, bad.to_metric()), MetricError);
    CMatrix m = good.to_metric().matrix();
    m(0, 1) = m(1, 0) = 0.05;
    CHECK_THROWS_AS(ot_bismut_ricci_closed_form(p, CMetric(2, 2, m)), MetricError);
    const OTParams perm{2, 2, {{0, -1}, {-1, 0}}, {{0, 0}, {0, 0}}};
    CHECK_THROWS_AS(ot_bismut_ricci_closed_form(perm, good.to_metric()), HypothesisError);
}

TEST_CASE("Ricci endomorphism spectra") {
    std::mt19937_64 rng(49);
    const auto p = general_params(rng, 2, 2);
    const auto sc = build_ot_algebra(p);
    const double A = 1.7;
    CMatrix gm = CMatrix::identity(4) * cx(A);
    const CMatrix gi = random_pd(rng, 2);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) gm(2 + a, 2 + b) = gi(a, b);
    const CMetric g(2, 2, gm);
    auto ev = ricci_eigenvalues(ricci_endomorphism(chern_ricci(sc, g), g), g);
    std::sort(ev.begin(), ev.end());
    CHECK(ev[0] == doctest::Approx(-1.0 / (4.0 * A)));
    CHECK(ev[1] == doctest::Approx(-1.0 / (4.0 * A)));
    CHECK(std::abs(ev[2]) < 1e-12);
    CHECK(std::abs(ev[3]) < 1e-12);

    CHECK(ricci_endomorphism(CMatrix(4, 4), g).max_abs() == 0.0);

    const auto pa = admissible_params(rng, 2);
    const CMetric gd = NormalFormMetric{{A, A}, {0.6, 1.9}, {}}.to_metric();
    const CMatrix P = ricci_endomorphism(bismut_ricci_11(build_ot_algebra(pa), gd), gd);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) CHECK(std::abs(P(a, b) - (a == b && a < 2 ? cx(-3.0 / (4.0 * A)) : cx(0.0))) < 1e-12);
}

TEST_CASE("pluriclosed classifier against del delbar") {
    std::mt19937_64 rng(50);
    const int s = 3;
    const auto p = admissible_params(rng, s, {0, 2});
    const auto sc = build_ot_algebra(p);
    const auto nf = random_normal_form(rng, s, {0, 2});
    const auto g = nf.to_metric();
    auto cls = classify_pluriclosed(p, g);
    CHECK(cls.pluriclosed);
    CHECK(cls.normal_form);
    CHECK(cls.admissible == std::vector<int>{0, 2});
    CHECK(is_pluriclosed_oracle(sc, g, 1e-12));

    // mixed entry at the non-admissible index 1
    CMatrix m = g.matrix();
    m(1, s + 1) = cx(0.2, 0.1);
    m(s + 1, 1) = std::conj(m(1, s + 1));
    cls = classify_pluriclosed(p, CMetric(s, s, m));
    CHECK_FALSE(cls.pluriclosed);
    CHECK(cls.violations.size() == 1);
    CHECK(pluriclosed_defect(sc, CMetric(s, s, m)) > 1e-8);

    // purely imaginary h-block entries keep the metric pluriclosed
    m = g.matrix();
    m(0, 1) = cx(0.0, 0.3);
    m(1, 0) = cx(0.0, -0.3);
    cls = classify_pluriclosed(p, CMetric(s, s, m));
    CHECK(cls.pluriclosed);
    CHECK_FALSE(cls.normal_form);
    CHECK(is_pluriclosed_oracle(sc, CMetric(s, s, m), 1e-12));
    m(0, 1) = cx(0.1, 0.3);
    m(1, 0) = cx(0.1, -0.3);
    CHECK_FALSE(classify_pluriclosed(p, CMetric(s, s, m)).pluriclosed);
    CHECK_FALSE(is_pluriclosed_oracle(sc, CMetric(s, s, m), 1e-8));
}

TEST_CASE("pluriclosed normal form is exactly pluriclosed over Gaussian rationals") {
    const OTParams p{2, 2, {{-1, 0}, {0, -1}}, {{0.5, 0.0}, {0.0, -1.25}}};
    const NormalFormMetric nf{{1.5, 0.75}, {2.0, 1.0}, {{0, cx(0.5, 0.25)}, {1, cx(-0.125, 0.5)}}};
    const auto sc = build_ot_algebra<GaussianRational>(p);
    const auto g = nf.to_metric<GaussianRational>();
    CHECK(del_delbar(g.form(), sc).empty());
    CHECK(classify_pluriclosed(p, g).pluriclosed);
    Matrix<GaussianRational> m = g.matrix();
    m(2, 3) = GaussianRational(0.25, 0.0);
    m(3, 2) = GaussianRational(0.25, 0.0);
    const QMetric bad(2, 2, m);
    CHECK_FALSE(del_delbar(bad.form(), sc).empty());
    CHECK_FALSE(classify_pluriclosed(p, bad).pluriclosed);
}

TEST_CASE("permuted parameters classify after reordering the ideal") {
    std::mt19937_64 rng(51);
    const OTParams p{2, 2, {{0, -1}, {-1, 0}}, {{0.0, 0.7}, {0.4, 0.0}}};
    const auto sc = build_ot_algebra(p);
    // normalized column k is original column permutation[k]; Z_1 pairs with original W_2
    CMatrix m = CMatrix::identity(4);
    m(0, 3) = cx(0.3, 0.2);
    m(3, 0) = std::conj(m(0, 3));
    const CMetric g(2, 2, m);
    CHECK(classify_pluriclosed(p, g).pluriclosed);
    CHECK(is_pluriclosed_oracle(sc, g, 1e-12));
    m = CMatrix::identity(4);
    m(0, 2) = cx(0.3, 0.2);
    m(2, 0) = std::conj(m(0, 2));
    CHECK_FALSE(classify_pluriclosed(p, CMetric(2, 2, m)).pluriclosed);
    CHECK_FALSE(is_pluriclosed_oracle(sc, CMetric(2, 2, m), 1e-8));
}
