#include "otflow/hermitian_curvature.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace otflow {

namespace {

using EMat = Eigen::Matrix<cx, Eigen::Dynamic, Eigen::Dynamic>;

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

std::vector<cx> chern_potential(const StructureConstants<cx>& sc, const CMetric& g) {
    detail::check_same_frame(sc.n_h(), sc.n_i(), g.n_h(), g.n_i());
    const int n = sc.n();
    const CMatrix om = g.omega_matrix();
    const CMatrix m = unitary_frame(g);
    const CMatrix w = m * m.adjoint();  // sum_a X_a (x) conj X_a in the e-basis
    const CMatrix wbar = w.conjugate();
    std::vector<cx> theta(static_cast<std::size_t>(sc.dim()));
    for (int k = 0; k < sc.dim(); ++k)
        theta[k] = (k >= n) ? -detail::contract(sc, om, w, k, 0, n) : -detail::contract(sc, om, wbar, k, n, 0);
    return theta;
}

}  // namespace

void detail::check_same_frame(int sc_h, int sc_i, int g_h, int g_i) {
    if (sc_h != g_h || sc_i != g_i) {
        std::ostringstream msg;
        msg << "algebra frame (" << sc_h << "," << sc_i << ") and metric frame (" << g_h << "," << g_i << ") differ";
        throw StructuralError(msg.str());
    }
}

LimitForm omega_infinity(int n_h, int n_i) {
    LimitForm f{n_h, n_i, CMatrix(static_cast<std::size_t>(n_h + n_i), static_cast<std::size_t>(n_h + n_i))};
    for (int k = 0; k < n_h; ++k) f.g(k, k) = 0.25;
    return f;
}

double NormalFormMetric::u(int p) const {
    const auto c = mixed(p);
    return A.at(static_cast<std::size_t>(p)) * B.at(static_cast<std::size_t>(p)) - (c ? std::norm(*c) : 0.0);
}

std::optional<cx> NormalFormMetric::mixed(int p) const {
    for (const auto& m : C)
        if (m.index == p) return m.value;
    return std::nullopt;
}

CMatrix unitary_frame(const CMetric& g) {
    const EMat ge = to_eigen(g.matrix());
    Eigen::LLT<EMat> llt(ge);
    if (llt.info() != Eigen::Success) throw MetricError("Cholesky factorization failed: metric not positive definite");
    const EMat l = llt.matrixL();
    const EMat m = l.transpose().triangularView<Eigen::Upper>().solve(EMat::Identity(ge.rows(), ge.cols()));
    return from_eigen(m);
}

CMatrix chern_ricci(const StructureConstants<cx>& sc, const CMetric& g) {
    return detail::eleven_block_from_potential(sc, chern_potential(sc, g));
}

Form<cx> chern_ricci_form(const StructureConstants<cx>& sc, const CMetric& g) {
    return detail::two_form_from_potential(sc, chern_potential(sc, g));
}

CMatrix ot_chern_ricci_closed_form(int n_h, int n_i) {
    CMatrix k(static_cast<std::size_t>(n_h + n_i), static_cast<std::size_t>(n_h + n_i));
    // -omega_inf = -i (1/4) sum omega^k ^ conj omega^k
    for (int a = 0; a < n_h; ++a) k(a, a) = cx(0.0, -0.25);
    return k;
}

std::vector<double> ricci_eigenvalues(const CMatrix& p, const CMetric& g) {
    // P = R G^{-1} is similar to L^{-1} R L^{-*}, which is Hermitian.
    const EMat ge = to_eigen(g.matrix());
    Eigen::LLT<EMat> llt(ge);
    if (llt.info() != Eigen::Success) throw MetricError("metric not positive definite");
    const EMat r = to_eigen(p) * ge;
    const EMat l = llt.matrixL();
    EMat tmp = l.triangularView<Eigen::Lower>().solve(r);
    EMat herm = l.triangularView<Eigen::Lower>().solve(tmp.adjoint()).adjoint();
    herm = 0.5 * (herm + herm.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<EMat> es(herm, Eigen::EigenvaluesOnly);
    std::vector<double> out(static_cast<std::size_t>(es.eigenvalues().size()));
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    return out;
}

}  // namespace otflow
