#pragma once

// Left-invariant Hermitian metrics on the adapted frame and their Ricci-type
// forms.
//
// A metric is stored as G(a, b) = g_{a conj b} over the (1,0) frame, so
//   omega = i sum G(a, b) alpha^a ^ conj alpha^b,   omega(e_a, conj e_b) = i G(a, b).
// A (1,1) form rho is returned as the n x n matrix K(a, b) = rho(e_a, conj e_b),
// i.e. rho = sum K(a, b) alpha^a ^ conj alpha^b. Real forms have conj K = -K^T.

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "otflow/dense.hpp"
#include "otflow/errors.hpp"
#include "otflow/exterior.hpp"
#include "otflow/lie_core.hpp"
#include "otflow/ot_model.hpp"
#include "otflow/scalar.hpp"

namespace otflow {

/// Real pivots of the LDL* factorization of a Hermitian matrix. Positive
/// definite iff every pivot is > 0.
template <class T>
std::vector<double> hermitian_pivots(const Matrix<T>& g) {
    const std::size_t n = g.rows();
    Matrix<T> a = g;
    std::vector<double> piv;
    piv.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double d = ScalarTraits<T>::to_complex(a(k, k)).real();
        piv.push_back(d);
        if (!(d > 0.0)) return piv;
        const T dk = a(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const T f = a(i, k) / dk;
            if (ScalarTraits<T>::negligible(f)) continue;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
        }
    }
    return piv;
}

template <class T>
class HermitianMetric {
public:
    HermitianMetric() = default;

    /// Throws MetricError unless g is n x n, Hermitian within tol and positive definite.
    HermitianMetric(int n_h, int n_i, Matrix<T> g, double tol = kDefaultTol)
        : n_h_(n_h), n_i_(n_i), g_(std::move(g)) {
        const std::size_t n = static_cast<std::size_t>(n_h + n_i);
        if (g_.rows() != n || g_.cols() != n) {
            std::ostringstream msg;
            msg << "metric is " << g_.rows() << "x" << g_.cols() << ", expected " << n << "x" << n;
            throw MetricError(msg.str());
        }
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a; b < n; ++b)
                if (!ScalarTraits<T>::is_zero(g_(a, b) - ScalarTraits<T>::conj(g_(b, a)), tol)) {
                    std::ostringstream msg;
                    msg << "metric is not Hermitian at (" << a + 1 << "," << b + 1 << ")";
                    throw MetricError(msg.str());
                }
        const auto piv = hermitian_pivots(g_);
        for (std::size_t k = 0; k < piv.size(); ++k)
            if (!(piv[k] > 0.0)) {
                std::ostringstream msg;
                msg << "metric is not positive definite (pivot " << k + 1 << " = " << piv[k] << ")";
                throw MetricError(msg.str());
            }
        inverse_ = g_.inverse();
    }

    int n_h() const { return n_h_; }
    int n_i() const { return n_i_; }
    int n() const { return n_h_ + n_i_; }
    const Matrix<T>& matrix() const { return g_; }
    const T& operator()(int a, int b) const { return g_(static_cast<std::size_t>(a), static_cast<std::size_t>(b)); }
    /// H = G^{-1}. In index notation g^{a conj b} = H(b, a) and g^{conj a b} = H(a, b).
    const Matrix<T>& inverse() const { return inverse_; }

    /// The fundamental form as an element of Lambda^{1,1}.
    Form<T> form() const {
        Form<T> f(n_h_, n_i_);
        const T i = ScalarTraits<T>::imag_unit();
        for (int a = 0; a < n(); ++a)
            for (int b = 0; b < n(); ++b) {
                const T& v = (*this)(a, b);
                if (!ScalarTraits<T>::negligible(v)) f.add_term((Monomial{1} << a) | (Monomial{1} << (n() + b)), i * v);
            }
        return f;
    }

    /// The full 2n x 2n matrix Omega(x, y) = omega(e_x, e_y).
    Matrix<T> omega_matrix() const {
        const std::size_t nn = static_cast<std::size_t>(n());
        Matrix<T> om(2 * nn, 2 * nn);
        const T i = ScalarTraits<T>::imag_unit();
        for (std::size_t a = 0; a < nn; ++a)
            for (std::size_t b = 0; b < nn; ++b) {
                om(a, nn + b) = i * g_(a, b);
                om(nn + b, a) = -(i * g_(a, b));
            }
        return om;
    }

private:
    int n_h_ = 0;
    int n_i_ = 0;
    Matrix<T> g_;
    Matrix<T> inverse_;
};

using CMetric = HermitianMetric<cx>;
using QMetric = HermitianMetric<GaussianRational>;

template <class To, class From>
HermitianMetric<To> convert_metric(const HermitianMetric<From>& g) {
    return HermitianMetric<To>(g.n_h(), g.n_i(), convert_matrix<To>(g.matrix()));
}

/// A possibly degenerate (1,1) coefficient matrix, such as omega_infinity.
struct LimitForm {
    int n_h = 0;
    int n_i = 0;
    CMatrix g;
};

/// omega_infinity: (1/4) Id on the h-block, zero elsewhere.
LimitForm omega_infinity(int n_h, int n_i);

/// Mixed entry G(p, s + p) = C of a normal-form metric; index is 0-based.
struct MixedEntry {
    int index = 0;
    cx value;
    friend bool operator==(const MixedEntry&, const MixedEntry&) = default;
};

/// The pluriclosed normal form: A on the h-diagonal, B on the I-diagonal and
/// mixed entries at (p, s + p). Requires n_h = n_i = s.
struct NormalFormMetric {
    std::vector<double> A;
    std::vector<double> B;
    std::vector<MixedEntry> C;

    int s() const { return static_cast<int>(A.size()); }
    /// Gram determinant A_p B_p - |C|^2 of the 2x2 block at p.
    double u(int p) const;
    std::optional<cx> mixed(int p) const;

    template <class T = cx>
    HermitianMetric<T> to_metric() const {
        const int n = s();
        if (static_cast<int>(B.size()) != n) throw MetricError("A and B have different lengths");
        Matrix<T> g(static_cast<std::size_t>(2 * n), static_cast<std::size_t>(2 * n));
        for (int i = 0; i < n; ++i) {
            g(i, i) = ScalarTraits<T>::from_double(A[i]);
            g(n + i, n + i) = ScalarTraits<T>::from_double(B[i]);
        }
        for (const auto& m : C) {
            if (m.index < 0 || m.index >= n) throw MetricError("mixed entry index out of range");
            g(m.index, n + m.index) = ScalarTraits<T>::from_complex(m.value);
            g(n + m.index, m.index) = ScalarTraits<T>::from_complex(std::conj(m.value));
        }
        return HermitianMetric<T>(n, n, std::move(g));
    }

    friend bool operator==(const NormalFormMetric&, const NormalFormMetric&) = default;
};

/// Reads a metric back into normal form; throws MetricError if any entry
/// outside the normal-form pattern exceeds tol or n_h != n_i.
template <class T>
NormalFormMetric extract_normal_form(const HermitianMetric<T>& g, double tol = kDefaultTol) {
    if (g.n_h() != g.n_i()) throw MetricError("normal form needs n_h = n_i");
    const int s = g.n_h();
    NormalFormMetric nf;
    for (int a = 0; a < 2 * s; ++a)
        for (int b = 0; b < 2 * s; ++b) {
            const bool diag = (a == b);
            const bool mixed = (b == a + s) || (a == b + s);
            if (!diag && !mixed && !ScalarTraits<T>::is_zero(g(a, b), tol)) {
                std::ostringstream msg;
                msg << "metric entry (" << a + 1 << "," << b + 1 << ") is outside the normal-form pattern";
                throw MetricError(msg.str());
            }
        }
    for (int i = 0; i < s; ++i) {
        nf.A.push_back(ScalarTraits<T>::to_complex(g(i, i)).real());
        nf.B.push_back(ScalarTraits<T>::to_complex(g(s + i, s + i)).real());
        if (!ScalarTraits<T>::is_zero(g(i, s + i), tol)) nf.C.push_back({i, ScalarTraits<T>::to_complex(g(i, s + i))});
    }
    return nf;
}

namespace detail {

/// Sum over e_c (x) conj e_d of W(c, d), evaluated through a 1-form theta so
/// that rho(x, y) = theta([e_x, e_y]).
template <class T>
Form<T> two_form_from_potential(const StructureConstants<T>& sc, const std::vector<T>& theta) {
    const int d = sc.dim();
    Form<T> f(sc.n_h(), sc.n_i());
    for (int x = 0; x < d; ++x)
        for (int y = x + 1; y < d; ++y) {
            T acc = ScalarTraits<T>::zero();
            for (int m = 0; m < d; ++m) {
                const T& c = sc(x, y, m);
                if (!ScalarTraits<T>::negligible(c)) acc += c * theta[m];
            }
            if (!ScalarTraits<T>::negligible(acc)) f.add_term((Monomial{1} << x) | (Monomial{1} << y), acc);
        }
    return f;
}

template <class T>
Matrix<T> eleven_block_from_potential(const StructureConstants<T>& sc, const std::vector<T>& theta) {
    const int n = sc.n();
    Matrix<T> k(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            T acc = ScalarTraits<T>::zero();
            for (int m = 0; m < sc.dim(); ++m) {
                const T& c = sc(a, n + b, m);
                if (!ScalarTraits<T>::negligible(c)) acc += c * theta[m];
            }
            k(a, b) = acc;
        }
    return k;
}

/// omega([e_k, e_p], e_q) summed against a weight matrix, for the Ricci
/// potentials below: sum_{p,q} W(p, q) omega([e_k, e_{p + po}], e_{q + qo}).
template <class T>
T contract(const StructureConstants<T>& sc, const Matrix<T>& om, const Matrix<T>& w, int k, int po, int qo) {
    const int n = sc.n();
    const int d = sc.dim();
    T acc = ScalarTraits<T>::zero();
    for (int p = 0; p < n; ++p)
        for (int m = 0; m < d; ++m) {
            const T& c = sc(k, p + po, m);
            if (ScalarTraits<T>::negligible(c)) continue;
            T inner = ScalarTraits<T>::zero();
            for (int q = 0; q < n; ++q) {
                const T& wv = w(static_cast<std::size_t>(p), static_cast<std::size_t>(q));
                if (!ScalarTraits<T>::negligible(wv)) inner += wv * om(static_cast<std::size_t>(m), static_cast<std::size_t>(q + qo));
            }
            acc += c * inner;
        }
    return acc;
}

void check_same_frame(int sc_h, int sc_i, int g_h, int g_i);

}  // namespace detail

/// The 1-form theta_B with rho_B(x, y) = theta_B([x, y]) from
///   rho_B(X, Y) = -sum g^{a conj b} omega([[X,Y]^{1,0}, X_a], conj X_b)
///                 + g^{conj a b} omega([[X,Y]^{0,1}, conj X_a], X_b)
///                 + i sum g^{a conj b} omega([X,Y], J[X_a, conj X_b]).
/// Every term is linear in [X, Y], so theta_B collects the coefficients.
template <class T>
std::vector<T> bismut_potential(const StructureConstants<T>& sc, const HermitianMetric<T>& g) {
    detail::check_same_frame(sc.n_h(), sc.n_i(), g.n_h(), g.n_i());
    using Tr = ScalarTraits<T>;
    const int n = sc.n();
    const int d = sc.dim();
    const Matrix<T> om = g.omega_matrix();
    const Matrix<T>& h = g.inverse();
    const Matrix<T> ht = h.transpose();  // ht(a, b) = H(b, a) = g^{a conj b}
    const T i = Tr::imag_unit();

    // J [e_a, conj e_b] weighted by g^{a conj b}, as a frame vector.
    std::vector<T> jbr(static_cast<std::size_t>(d), Tr::zero());
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const T& w = ht(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
            if (Tr::negligible(w)) continue;
            for (int l = 0; l < d; ++l) {
                const T& c = sc(a, n + b, l);
                if (Tr::negligible(c)) continue;
                const T jc = (l < n) ? i * c : -(i * c);
                jbr[l] += w * jc;
            }
        }

    std::vector<T> theta(static_cast<std::size_t>(d), Tr::zero());
    for (int m = 0; m < d; ++m) {
        T acc = Tr::zero();
        if (m < n) acc -= detail::contract(sc, om, ht, m, 0, n);
        else acc -= detail::contract(sc, om, h, m, n, 0);
        T third = Tr::zero();
        for (int l = 0; l < d; ++l)
            if (!Tr::negligible(jbr[l])) third += om(static_cast<std::size_t>(m), static_cast<std::size_t>(l)) * jbr[l];
        acc += i * third;
        theta[m] = acc;
    }
    return theta;
}

/// Full Bismut-Ricci 2-form (all bidegrees).
template <class T>
Form<T> bismut_ricci_form(const StructureConstants<T>& sc, const HermitianMetric<T>& g) {
    return detail::two_form_from_potential(sc, bismut_potential(sc, g));
}

/// (1,1) part of the Bismut-Ricci form, K(a, b) = rho_B(e_a, conj e_b).
template <class T>
Matrix<T> bismut_ricci_11(const StructureConstants<T>& sc, const HermitianMetric<T>& g) {
    return detail::eleven_block_from_potential(sc, bismut_potential(sc, g));
}

/// Chern-Ricci form through a unitary frame X_a = sum_b M(b, a) e_b built
/// from the Cholesky factor of G:
///   rho_C(X, Y) = -sum_a omega([[X,Y]^{0,1}, X_a], conj X_a) + omega([[X,Y]^{1,0}, conj X_a], X_a).
CMatrix chern_ricci(const StructureConstants<cx>& sc, const CMetric& g);
Form<cx> chern_ricci_form(const StructureConstants<cx>& sc, const CMetric& g);

/// The unitary frame used by chern_ricci: column a holds the (1,0)
/// coefficients of X_a, so M^T G conj(M) = Id.
CMatrix unitary_frame(const CMetric& g);

/// Closed-form rho_B^{1,1} of a normal-form pluriclosed metric on admissible
/// OT data. The metric must be in normal form with mixed entries only at
/// admissible indices. The (W_p, conj Z_p) entry is fixed by reality.
template <class T>
Matrix<T> ot_bismut_ricci_closed_form(const OTParams& p, const HermitianMetric<T>& g, double tol = kDefaultTol) {
    using Tr = ScalarTraits<T>;
    if (!is_normal_form(p)) throw HypothesisError("closed form needs admissible parameters in normal form");
    if (g.n_h() != p.r || g.n_i() != p.s) throw MetricError("metric and parameters have different dimensions");
    const NormalFormMetric nf = extract_normal_form(g, tol);
    const std::vector<int> adm = admissible_off_diagonal_indices(p);
    const int s = p.s;
    for (const auto& m : nf.C)
        if (std::find(adm.begin(), adm.end(), m.index) == adm.end()) {
            std::ostringstream msg;
            msg << "mixed entry at index " << m.index + 1 << " is not admissible";
            throw MetricError(msg.str());
        }

    const T i = Tr::imag_unit();
    const T three_quarters = Tr::from_double(0.75);
    Matrix<T> k(static_cast<std::size_t>(2 * s), static_cast<std::size_t>(2 * s));
    for (int a = 0; a < s; ++a) k(a, a) = -(i * three_quarters);
    for (const auto& m : nf.C) {
        const int q = m.index;
        const T A = g(q, q);
        const T B = g(s + q, s + q);
        const T C = g(q, s + q);
        const T c2 = C * Tr::conj(C);
        const T u = A * B - c2;
        k(q, q) = -(i * three_quarters * (Tr::one() + c2 / u));
        const T cc = Tr::from_double(p.c[q][q]);
        const T kappa = Tr::from_double(-3.0 / 16.0) - cc * cc / Tr::from_double(4.0) - i * cc / Tr::from_double(4.0);
        const T mixed = -(i * kappa * B * C / u);
        k(q, s + q) = mixed;
        k(s + q, q) = -Tr::conj(mixed);
    }
    return k;
}

/// -omega_infinity as a (1,1) coefficient matrix: the Chern-Ricci form of every OT algebra.
CMatrix ot_chern_ricci_closed_form(int n_h, int n_i);

/// Hermitian coefficient R = -i K of a (1,1) form, so rho = i sum R(a,b) alpha^a ^ conj alpha^b.
template <class T>
Matrix<T> hermitian_coefficients(const Matrix<T>& k) {
    return k * (-ScalarTraits<T>::imag_unit());
}

/// Largest |conj R - R^T| for R = -i K.
template <class T>
double reality_defect(const Matrix<T>& k) {
    const Matrix<T> r = hermitian_coefficients(k);
    return (r.conjugate() - r.transpose()).max_abs();
}

/// (1,1) coefficient matrix -> form.
template <class T>
Form<T> eleven_form(int n_h, int n_i, const Matrix<T>& k) {
    Form<T> f(n_h, n_i);
    const int n = n_h + n_i;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const T& v = k(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
            if (!ScalarTraits<T>::negligible(v)) f.add_term((Monomial{1} << a) | (Monomial{1} << (n + b)), v);
        }
    return f;
}

/// P_i^j = rho_{i conj k} g^{conj k j}, i.e. P = R H with R = -i K.
template <class T>
Matrix<T> ricci_endomorphism(const Matrix<T>& k, const HermitianMetric<T>& g) {
    if (k.rows() != static_cast<std::size_t>(g.n()) || k.cols() != k.rows())
        throw StructuralError("ricci_endomorphism: form and metric sizes differ");
    return hermitian_coefficients(k) * g.inverse();
}

/// Eigenvalues of P, which are real because P is self-adjoint for g.
std::vector<double> ricci_eigenvalues(const CMatrix& p, const CMetric& g);

// ---------------------------------------------------------------------------
// Pluriclosed classification on admissible OT data.

struct PluriclosedClassification {
    /// Verdict of the shape rule, see classify_pluriclosed.
    bool pluriclosed = false;
    /// Strict normal form: diagonal h and I blocks, mixed terms only at admissible (p, s + p).
    bool normal_form = false;
    /// Admissible indices (0-based, in the normalized column order).
    std::vector<int> admissible;
    /// Column permutation applied to bring the parameters into normal form.
    std::vector<int> permutation;
    /// Human-readable list of failed conditions.
    std::vector<std::string> violations;
};

/// Row/column permutation of the I-block: new W_k = old W_{perm[k]}.
template <class T>
HermitianMetric<T> permute_ideal(const HermitianMetric<T>& g, const std::vector<int>& perm) {
    const int nh = g.n_h();
    const int n = g.n();
    auto map = [&](int a) { return a < nh ? a : nh + perm[static_cast<std::size_t>(a - nh)]; };
    Matrix<T> out(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) out(a, b) = g(map(a), map(b));
    return HermitianMetric<T>(nh, g.n_i(), std::move(out));
}

/// Shape test for pluriclosedness on pluriclosed-admissible OT data:
///   Re G(p, q) = 0 on the h-block for p != q,
///   G(s + p, s + q) = 0 on the I-block for p != q,
///   G(p, s + q) = 0 unless p = q is an admissible index.
/// The h-block condition only constrains the real part: the two terms
/// A_{pq} omega^p ^ conj omega^q and A_{qp} omega^q ^ conj omega^p have
/// del delbar images that cancel when A_{pq} is imaginary.
template <class T>
PluriclosedClassification classify_pluriclosed(const OTParams& params, const HermitianMetric<T>& g0,
                                               double tol = kDefaultTol) {
    const AdmissibleParams ap = normalize_admissible(params);
    const int s = ap.params.s;
    if (g0.n_h() != s || g0.n_i() != s) throw MetricError("metric and parameters have different dimensions");
    const HermitianMetric<T> g = permute_ideal(g0, ap.permutation);
    PluriclosedClassification out;
    out.permutation = ap.permutation;
    out.admissible = admissible_off_diagonal_indices(ap.params);
    auto is_adm = [&](int q) { return std::find(out.admissible.begin(), out.admissible.end(), q) != out.admissible.end(); };
    auto note = [&](const std::string& what, int a, int b) {
        std::ostringstream msg;
        msg << what << " (" << a + 1 << "," << b + 1 << ")";
        out.violations.push_back(msg.str());
    };
    bool imaginary_h = false;
    for (int p = 0; p < s; ++p)
        for (int q = 0; q < s; ++q) {
            if (p == q) continue;
            if (p < q) {
                const cx a = ScalarTraits<T>::to_complex(g(p, q));
                const T re_part = (g(p, q) + ScalarTraits<T>::conj(g(p, q))) * ScalarTraits<T>::from_double(0.5);
                if (!ScalarTraits<T>::is_zero(re_part, tol)) note("h-block entry with nonzero real part", p, q);
                else if (std::abs(a) > tol) imaginary_h = true;
                if (!ScalarTraits<T>::is_zero(g(s + p, s + q), tol)) note("off-diagonal I-block entry", p, q);
            }
            if (!ScalarTraits<T>::is_zero(g(p, s + q), tol)) note("mixed entry off the diagonal", p, q);
        }
    for (int p = 0; p < s; ++p)
        if (!is_adm(p) && !ScalarTraits<T>::is_zero(g(p, s + p), tol)) note("mixed entry at a non-admissible index", p, p);
    out.pluriclosed = out.violations.empty();
    out.normal_form = out.pluriclosed && !imaginary_h;
    return out;
}

/// Brute-force pluriclosed test: the largest coefficient of del delbar omega.
template <class T>
double pluriclosed_defect(const StructureConstants<T>& sc, const HermitianMetric<T>& g, double tol = kDefaultTol) {
    detail::check_same_frame(sc.n_h(), sc.n_i(), g.n_h(), g.n_i());
    return del_delbar(g.form(), sc, tol).max_abs();
}

template <class T>
bool is_pluriclosed_oracle(const StructureConstants<T>& sc, const HermitianMetric<T>& g, double tol = kDefaultTol) {
    const Form<T> dd = del_delbar(g.form(), sc, tol);
    if constexpr (ScalarTraits<T>::exact) return dd.empty();
    else return dd.max_abs() <= tol;
}

}  // namespace otflow
