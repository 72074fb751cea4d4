#include "otflow/soliton.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace otflow {

namespace {

using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using EMat = Eigen::Matrix<cx, Eigen::Dynamic, Eigen::Dynamic>;

std::size_t sz(int v) { return static_cast<std::size_t>(v); }

// All derivation-identity components, in a fixed order, for one map.
std::vector<cx> derivation_residuals(const StructureConstants<cx>& sc, const CMatrix& d) {
    const int n = sc.dim();
    std::vector<cx> out;
    out.reserve(sz(n * (n - 1) / 2 * n));
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y)
            for (int m = 0; m < n; ++m) {
                cx acc = 0.0;
                for (int k = 0; k < n; ++k) {
                    const cx& cxy = sc(x, y, k);
                    if (cxy != 0.0) acc += cxy * d(sz(m), sz(k));
                    const cx& dkx = d(sz(k), sz(x));
                    if (dkx != 0.0) acc -= dkx * sc(k, y, m);
                    const cx& dky = d(sz(k), sz(y));
                    if (dky != 0.0) acc -= dky * sc(x, k, m);
                }
                out.push_back(acc);
            }
    return out;
}

RVec least_squares(const RMat& a, const RVec& b) {
    if (a.cols() == 0) return RVec();
    return a.completeOrthogonalDecomposition().solve(b);
}

// Real null space of a by SVD; singular values <= tol * max(1, sigma_max) count as zero.
RMat null_space(const RMat& a, double tol, double* threshold) {
    const Eigen::Index cols = a.cols();
    if (a.rows() == 0) return RMat::Identity(cols, cols);
    Eigen::JacobiSVD<RMat> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cut = tol * std::max(1.0, sv.size() ? sv(0) : 0.0);
    if (threshold) *threshold = cut;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++rank;
    return svd.matrixV().rightCols(cols - rank);
}

// Complex null space of a square complex matrix.
EMat complex_null_space(const EMat& a, double tol) {
    Eigen::JacobiSVD<EMat> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cut = tol * std::max(1.0, sv.size() ? sv(0) : 0.0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++rank;
    return svd.matrixV().rightCols(a.cols() - rank);
}

// Frame vectors spanning V + conj V for (1,0) vectors given as columns.
std::vector<FrameVector<cx>> real_span(const EMat& holo, const StructureConstants<cx>& sc) {
    std::vector<FrameVector<cx>> out;
    const int n = sc.n();
    for (Eigen::Index j = 0; j < holo.cols(); ++j) {
        FrameVector<cx> v(sz(sc.dim()), 0.0);
        for (int a = 0; a < n; ++a) v[sz(a)] = holo(a, j);
        out.push_back(v);
        out.push_back(conjugate_vector(v, sc));
    }
    return out;
}

// Distance of x from span(basis), relative to |x|.
double span_residual(const std::vector<FrameVector<cx>>& basis, const FrameVector<cx>& x) {
    const Eigen::Index d = static_cast<Eigen::Index>(x.size());
    Eigen::Map<const Eigen::VectorXcd> xv(x.data(), d);
    const double norm = xv.norm();
    if (norm == 0.0) return 0.0;
    if (basis.empty()) return 1.0;
    EMat b(d, static_cast<Eigen::Index>(basis.size()));
    for (std::size_t j = 0; j < basis.size(); ++j)
        for (Eigen::Index i = 0; i < d; ++i) b(i, static_cast<Eigen::Index>(j)) = basis[j][sz(static_cast<int>(i))];
    const Eigen::VectorXcd coeff = b.completeOrthogonalDecomposition().solve(xv);
    return (b * coeff - xv).norm() / norm;
}

double max_abs(const std::vector<cx>& v) {
    double m = 0.0;
    for (const cx& z : v) m = std::max(m, std::abs(z));
    return m;
}

}  // namespace

double derivation_defect(const StructureConstants<cx>& sc, const CMatrix& d) {
    if (d.rows() != sz(sc.dim()) || d.cols() != d.rows()) throw StructuralError("derivation_defect: map has wrong size");
    return max_abs(derivation_residuals(sc, d));
}

CMatrix j_commuting_map(const CMatrix& e) {
    const std::size_t n = e.rows();
    CMatrix d(2 * n, 2 * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            d(i, j) = e(i, j);
            d(n + i, n + j) = std::conj(e(i, j));
        }
    return d;
}

DerivationBasis derivation_space(const StructureConstants<cx>& sc, bool commute_with_J, double tol) {
    require_valid(sc);
    const int n = sc.n();
    const int d = sc.dim();
    DerivationBasis out;
    out.commute_with_J = commute_with_J;

    // Real parameter k -> elementary map.
    std::vector<CMatrix> elementary;
    if (commute_with_J) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int part = 0; part < 2; ++part) {
                    CMatrix e(sz(n), sz(n));
                    e(sz(i), sz(j)) = part == 0 ? cx(1.0, 0.0) : cx(0.0, 1.0);
                    elementary.push_back(j_commuting_map(e));
                }
    } else {
        // Real endomorphisms: D(i, j) free for i < n on all columns j, the
        // conjugate rows follow from D(conj i, conj j) = conj D(i, j).
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j)
                for (int part = 0; part < 2; ++part) {
                    CMatrix m(sz(d), sz(d));
                    const cx v = part == 0 ? cx(1.0, 0.0) : cx(0.0, 1.0);
                    m(sz(i), sz(j)) = v;
                    m(sz(sc.conj_index(i)), sz(sc.conj_index(j))) = std::conj(v);
                    elementary.push_back(m);
                }
    }

    std::vector<std::vector<cx>> cols;
    cols.reserve(elementary.size());
    for (const auto& m : elementary) cols.push_back(derivation_residuals(sc, m));
    const Eigen::Index rows = static_cast<Eigen::Index>(cols.empty() ? 0 : cols.front().size());
    RMat a(2 * rows, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k)
        for (Eigen::Index r = 0; r < rows; ++r) {
            a(2 * r, static_cast<Eigen::Index>(k)) = cols[k][sz(static_cast<int>(r))].real();
            a(2 * r + 1, static_cast<Eigen::Index>(k)) = cols[k][sz(static_cast<int>(r))].imag();
        }
    const RMat ns = null_space(a, tol, &out.null_threshold);
    for (Eigen::Index j = 0; j < ns.cols(); ++j) {
        CMatrix m(sz(d), sz(d));
        for (std::size_t k = 0; k < elementary.size(); ++k) {
            const double w = ns(static_cast<Eigen::Index>(k), j);
            if (w != 0.0) m += elementary[k] * cx(w, 0.0);
        }
        out.maps.push_back(m);
        if (commute_with_J) out.blocks.push_back(m.block(0, 0, sz(n), sz(n)));
    }
    return out;
}

bool kills_h_and_preserves_w_lines(const StructureConstants<cx>& sc, const DerivationBasis& basis, double tol) {
    const int d = sc.dim();
    for (const auto& m : basis.maps) {
        for (int j = 0; j < d; ++j) {
            for (int i = 0; i < d; ++i) {
                const double v = std::abs(m(sz(i), sz(j)));
                if (!sc.in_ideal(j)) {
                    if (v > tol) return false;  // h must be in the kernel
                } else if (i != j && v > tol) {
                    return false;  // W_j must map into C W_j
                }
            }
        }
    }
    return true;
}

double soliton_tolerance(const CMatrix& k, double base) { return base * (1.0 + k.max_abs()); }

SolitonFit fit_algebraic_soliton(const StructureConstants<cx>& sc, const CMetric& g, const CMatrix& k,
                                 const DerivationBasis& basis, double base_tol) {
    if (!basis.commute_with_J) throw StructuralError("soliton fit needs the J-commuting derivation basis");
    const int n = sc.n();
    if (k.rows() != sz(n) || g.n() != n) throw StructuralError("soliton fit: sizes differ");
    const CMatrix& gm = g.matrix();
    const std::size_t nunk = 1 + basis.blocks.size();

    // Columns of the complex system K = sum_u x_u M_u.
    std::vector<CMatrix> columns;
    columns.push_back(gm * kI);
    for (const auto& e : basis.blocks) columns.push_back((e.transpose() * gm + gm * e.conjugate()) * cx(0.0, 0.5));

    RMat a(2 * n * n, static_cast<Eigen::Index>(nunk));
    RVec b(2 * n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Eigen::Index r = 2 * (i * n + j);
            for (std::size_t u = 0; u < nunk; ++u) {
                a(r, static_cast<Eigen::Index>(u)) = columns[u](sz(i), sz(j)).real();
                a(r + 1, static_cast<Eigen::Index>(u)) = columns[u](sz(i), sz(j)).imag();
            }
            b(r) = k(sz(i), sz(j)).real();
            b(r + 1) = k(sz(i), sz(j)).imag();
        }
    const RVec x = least_squares(a, b);

    SolitonFit fit;
    fit.tol = soliton_tolerance(k, base_tol);
    fit.best.c = x(0);
    fit.best.D_block = CMatrix(sz(n), sz(n));
    for (std::size_t u = 0; u < basis.blocks.size(); ++u)
        fit.best.D_block += basis.blocks[u] * cx(x(static_cast<Eigen::Index>(u + 1)), 0.0);
    CMatrix model(sz(n), sz(n));
    for (std::size_t u = 0; u < nunk; ++u) model += columns[u] * cx(x(static_cast<Eigen::Index>(u)), 0.0);
    fit.best.residual = (model - k).max_abs();
    fit.best.derivation_defect = derivation_defect(sc, j_commuting_map(fit.best.D_block));
    fit.accepted = fit.best.residual <= fit.tol;
    return fit;
}

SolitonFit fit_algebraic_soliton(const StructureConstants<cx>& sc, const CMetric& g, const CMatrix& k,
                                 double base_tol) {
    return fit_algebraic_soliton(sc, g, k, derivation_space(sc, true), base_tol);
}

std::optional<SolitonCertificate> detect_algebraic_soliton(const StructureConstants<cx>& sc, const CMetric& g,
                                                           const CMatrix& k, double base_tol) {
    SolitonFit fit = fit_algebraic_soliton(sc, g, k, base_tol);
    if (!fit.accepted) return std::nullopt;
    return fit.best;
}

bool classify_chern_ricci_soliton(const OTParams& p, const CMetric& g, double tol) {
    check_shape(p);
    if (g.n_h() != p.r || g.n_i() != p.s) throw MetricError("metric and parameters have different dimensions");
    const int r = p.r;
    const double a = g(0, 0).real();
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            const cx want = (i == j) ? cx(a, 0.0) : cx(0.0, 0.0);
            if (std::abs(g(i, j) - want) > tol) return false;
        }
    for (int i = 0; i < r; ++i)
        for (int j = r; j < g.n(); ++j)
            if (std::abs(g(i, j)) > tol) return false;
    return true;
}

bool classify_pluriclosed_soliton(const OTParams& p, const CMetric& g, double tol) {
    const PluriclosedClassification cls = classify_pluriclosed(p, g, tol);
    if (!cls.pluriclosed) return false;
    const int s = g.n_h();
    const double a = g(0, 0).real();
    for (int i = 0; i < g.n(); ++i)
        for (int j = 0; j < g.n(); ++j) {
            if (i == j) continue;
            if (std::abs(g(i, j)) > tol) return false;
        }
    for (int i = 0; i < s; ++i)
        if (std::abs(g(i, i).real() - a) > tol) return false;
    return true;
}

std::string LauretReport::describe() const {
    std::ostringstream os;
    if (degenerate) {
        os << "degenerate: P = 0";
        return os.str();
    }
    os << "eigenvalues [";
    for (std::size_t i = 0; i < eigenvalues.size(); ++i) os << (i ? ", " : "") << eigenvalues[i];
    os << "]; criterion1=" << criterion1 << " criterion2=" << criterion2 << " criterion3=" << criterion3
       << " (spectrum=" << spectrum_ok << ", kernel abelian ideal=" << kernel_abelian_ideal
       << ", complement subalgebra=" << complement_subalgebra << "); agree=" << agree;
    return os.str();
}

LauretReport theorem_lauret_equivalence_check(const StructureConstants<cx>& sc, const CMetric& g, const CMatrix& k,
                                              double tol) {
    LauretReport rep;
    const int n = sc.n();
    const CMatrix p = ricci_endomorphism(k, g);
    const double scale = 1.0 + p.max_abs();
    if (p.max_abs() <= tol) {
        rep.degenerate = true;
        return rep;
    }
    rep.eigenvalues = ricci_eigenvalues(p, g);

    // criterion (3): spectrum
    std::optional<double> nonzero;
    bool spectrum = true;
    for (double ev : rep.eigenvalues) {
        if (std::abs(ev) <= tol * scale) continue;
        if (!nonzero) nonzero = ev;
        else if (std::abs(ev - *nonzero) > tol * scale) spectrum = false;
    }
    rep.spectrum_ok = spectrum && nonzero.has_value();
    if (rep.spectrum_ok) rep.c = nonzero;

    // The endomorphism acts by e_a -> sum_j P(a, j) e_j, i.e. by the matrix P^T.
    EMat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = p(sz(j), sz(i));
    const EMat ker = complex_null_space(m, tol);
    const auto kspan = real_span(ker, sc);
    bool abelian = true;
    for (const auto& x : kspan)
        for (const auto& y : kspan) {
            const auto br = bracket(x, y, sc);
            for (const cx& z : br)
                if (std::abs(z) > tol * scale) abelian = false;
        }
    bool ideal = true;
    for (int x = 0; x < sc.dim() && ideal; ++x)
        for (const auto& y : kspan)
            if (span_residual(kspan, bracket(basis_vector(sc, x), y, sc)) > tol * scale) {
                ideal = false;
                break;
            }
    rep.kernel_abelian_ideal = abelian && ideal;

    // g-orthogonal complement of ker in g^{1,0}: w^T G conj(k) = 0 for every kernel vector k.
    EMat constraints(std::max<Eigen::Index>(ker.cols(), 1), n);
    constraints.setZero();
    for (Eigen::Index j = 0; j < ker.cols(); ++j)
        for (int a = 0; a < n; ++a) {
            cx acc = 0.0;
            for (int b = 0; b < n; ++b) acc += g(a, b) * std::conj(ker(b, j));
            constraints(j, a) = acc;
        }
    EMat comp;
    if (ker.cols() == 0) comp = EMat::Identity(n, n);
    else {
        Eigen::JacobiSVD<EMat> svd(constraints, Eigen::ComputeFullV);
        Eigen::Index rank = 0;
        const auto& sv = svd.singularValues();
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            if (sv(i) > tol * std::max(1.0, sv(0))) ++rank;
        comp = svd.matrixV().rightCols(n - rank);
    }
    const auto cspan = real_span(comp, sc);
    bool sub = true;
    for (const auto& x : cspan) {
        for (const auto& y : cspan)
            if (span_residual(cspan, bracket(x, y, sc)) > tol * scale) {
                sub = false;
                break;
            }
        if (!sub) break;
    }
    rep.complement_subalgebra = sub;
    rep.criterion3 = rep.spectrum_ok && rep.kernel_abelian_ideal && rep.complement_subalgebra;

    // criterion (2): P^T - c Id in Der^{1,0} for some c. Unknowns c and the
    // coordinates over the J-commuting derivation basis.
    const DerivationBasis basis = derivation_space(sc, true);
    const std::size_t nunk = 1 + basis.blocks.size();
    RMat a(2 * n * n, static_cast<Eigen::Index>(nunk));
    RVec b(2 * n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Eigen::Index r = 2 * (i * n + j);
            const cx id = (i == j) ? cx(1.0, 0.0) : cx(0.0, 0.0);
            a(r, 0) = id.real();
            a(r + 1, 0) = id.imag();
            for (std::size_t u = 0; u < basis.blocks.size(); ++u) {
                a(r, static_cast<Eigen::Index>(u + 1)) = basis.blocks[u](sz(i), sz(j)).real();
                a(r + 1, static_cast<Eigen::Index>(u + 1)) = basis.blocks[u](sz(i), sz(j)).imag();
            }
            b(r) = m(i, j).real();
            b(r + 1) = m(i, j).imag();
        }
    const RVec x = least_squares(a, b);
    double resid = (a * x - b).cwiseAbs().maxCoeff();
    rep.criterion2_c = x(0);
    rep.criterion2_residual = resid;
    rep.criterion2 = resid <= tol * scale;

    rep.certificate = detect_algebraic_soliton(sc, g, k, tol);
    rep.criterion1 = rep.certificate.has_value();
    rep.agree = (rep.criterion1 == rep.criterion2) && (rep.criterion2 == rep.criterion3);
    return rep;
}

}  // namespace otflow
