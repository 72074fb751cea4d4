#pragma once

// Chevalley-Eilenberg calculus on the dual frame
//   (w^1..w^r, g^1..g^s, conj w^1.., conj g^1..)
// in the same order as the frame in lie_core.hpp. A monomial is stored as a
// bitmask of coframe indices in increasing order; wedge signs come from
// counting transpositions.
//
// Conventions: (a ^ b)(x, y) = a(x)b(y) - a(y)b(x) and, for a 1-form,
// d alpha(x, y) = -alpha([x, y]).

#include <bit>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "otflow/errors.hpp"
#include "otflow/lie_core.hpp"
#include "otflow/scalar.hpp"

namespace otflow {

using Monomial = std::uint64_t;

struct Bidegree {
    int p = 0;
    int q = 0;
    friend auto operator<=>(const Bidegree&, const Bidegree&) = default;
};

/// Sign of e^A ^ e^B relative to e^{A|B}, or 0 when A and B overlap.
inline int wedge_sign(Monomial lhs, Monomial rhs) {
    if (lhs & rhs) return 0;
    int swaps = 0;
    Monomial r = rhs;
    while (r) {
        const int j = std::countr_zero(r);
        r &= r - 1;
        // bits of lhs strictly above j must hop over e^j
        swaps += std::popcount(lhs >> (j + 1));
    }
    return (swaps & 1) ? -1 : 1;
}

template <class T>
class Form {
public:
    Form() = default;
    Form(int n_h, int n_i) : n_h_(n_h), n_i_(n_i) {
        if (2 * (n_h + n_i) > 64) throw StructuralError("coframe too large for 64-bit monomials");
    }

    static Form constant(int n_h, int n_i, const T& value) {
        Form f(n_h, n_i);
        f.add_term(0, value);
        return f;
    }
    static Form coframe(int n_h, int n_i, int index, const T& coeff = ScalarTraits<T>::one()) {
        Form f(n_h, n_i);
        f.add_term(Monomial{1} << index, coeff);
        return f;
    }
    /// coeff * e^{i_1} ^ ... ^ e^{i_k} for an arbitrary index list; the sign of
    /// sorting the list is applied.
    static Form monomial(int n_h, int n_i, const std::vector<int>& indices, const T& coeff = ScalarTraits<T>::one()) {
        Form f = constant(n_h, n_i, coeff);
        for (int i : indices) f = f.wedge(coframe(n_h, n_i, i));
        return f;
    }

    int n_h() const { return n_h_; }
    int n_i() const { return n_i_; }
    int n() const { return n_h_ + n_i_; }
    int dim() const { return 2 * n(); }

    const std::map<Monomial, T>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    T coefficient(Monomial m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? ScalarTraits<T>::zero() : it->second;
    }

    /// Coefficient of e^{a} ^ e^{b} (any order), with the reordering sign.
    T coefficient2(int a, int b) const {
        if (a == b) return ScalarTraits<T>::zero();
        const Monomial m = (Monomial{1} << a) | (Monomial{1} << b);
        T c = coefficient(m);
        return a < b ? c : -c;
    }

    void add_term(Monomial m, const T& coeff) {
        if (m >> dim()) throw StructuralError("monomial index outside the coframe");
        auto [it, inserted] = terms_.try_emplace(m, coeff);
        if (!inserted) it->second += coeff;
        if (ScalarTraits<T>::negligible(it->second)) terms_.erase(it);
    }

    Bidegree bidegree_of(Monomial m) const {
        const Monomial low = (Monomial{1} << n()) - 1;
        return {std::popcount(m & low), std::popcount(m >> n())};
    }

    /// The common total degree, or -1 for inhomogeneous (and -1 for the empty form).
    int degree() const {
        int deg = -1;
        for (const auto& [m, c] : terms_) {
            const int k = std::popcount(m);
            if (deg < 0) deg = k;
            else if (deg != k) return -1;
        }
        return deg;
    }

    bool is_pure(Bidegree bd) const {
        for (const auto& [m, c] : terms_)
            if (bidegree_of(m) != bd) return false;
        return true;
    }

    Form& operator+=(const Form& o) {
        check_compatible(o);
        for (const auto& [m, c] : o.terms_) add_term(m, c);
        return *this;
    }
    Form& operator-=(const Form& o) {
        check_compatible(o);
        for (const auto& [m, c] : o.terms_) add_term(m, -c);
        return *this;
    }
    Form& operator*=(const T& s) {
        if (ScalarTraits<T>::negligible(s)) {
            terms_.clear();
            return *this;
        }
        for (auto it = terms_.begin(); it != terms_.end();) {
            it->second *= s;
            if (ScalarTraits<T>::negligible(it->second)) it = terms_.erase(it);
            else ++it;
        }
        return *this;
    }
    friend Form operator+(Form a, const Form& b) { return a += b; }
    friend Form operator-(Form a, const Form& b) { return a -= b; }
    friend Form operator*(Form a, const T& s) { return a *= s; }
    friend Form operator*(const T& s, Form a) { return a *= s; }

    Form wedge(const Form& o) const {
        check_compatible(o);
        Form out(n_h_, n_i_);
        for (const auto& [ma, ca] : terms_)
            for (const auto& [mb, cb] : o.terms_) {
                const int sign = wedge_sign(ma, mb);
                if (sign == 0) continue;
                const T prod = ca * cb;
                out.add_term(ma | mb, sign > 0 ? prod : -prod);
            }
        return out;
    }

    /// Complex conjugate: swaps every coframe index with its conjugate.
    Form conjugate() const {
        Form out(n_h_, n_i_);
        for (const auto& [m, c] : terms_) {
            Form piece = constant(n_h_, n_i_, ScalarTraits<T>::conj(c));
            Monomial r = m;
            while (r) {
                const int j = std::countr_zero(r);
                r &= r - 1;
                piece = piece.wedge(coframe(n_h_, n_i_, j < n() ? j + n() : j - n()));
            }
            out += piece;
        }
        return out;
    }

    /// Part of bidegree (p, q).
    Form project(Bidegree bd) const {
        Form out(n_h_, n_i_);
        for (const auto& [m, c] : terms_)
            if (bidegree_of(m) == bd) out.terms_.emplace(m, c);
        return out;
    }

    double max_abs() const {
        double v = 0.0;
        for (const auto& [m, c] : terms_) v = std::max(v, ScalarTraits<T>::magnitude(c));
        return v;
    }

    /// Evaluates a 2-form on two frame vectors.
    T evaluate2(const FrameVector<T>& x, const FrameVector<T>& y) const {
        T acc = ScalarTraits<T>::zero();
        for (const auto& [m, c] : terms_) {
            if (std::popcount(m) != 2) throw StructuralError("evaluate2 on a form that is not a 2-form");
            const int i = std::countr_zero(m);
            const int j = std::countr_zero(m & (m - 1));
            acc += c * (x[i] * y[j] - x[j] * y[i]);
        }
        return acc;
    }

    friend bool operator==(const Form& a, const Form& b) {
        return a.n_h_ == b.n_h_ && a.n_i_ == b.n_i_ && a.terms_ == b.terms_;
    }

private:
    void check_compatible(const Form& o) const {
        if (n_h_ != o.n_h_ || n_i_ != o.n_i_) throw StructuralError("forms over different coframes");
    }

    int n_h_ = 0;
    int n_i_ = 0;
    std::map<Monomial, T> terms_;
};

using CForm = Form<cx>;
using QForm = Form<GaussianRational>;

/// Splits a form into its pure (p, q) parts.
template <class T>
std::map<Bidegree, Form<T>> bidegree_split(const Form<T>& a) {
    std::map<Bidegree, Form<T>> parts;
    for (const auto& [m, c] : a.terms()) {
        auto [it, inserted] = parts.try_emplace(a.bidegree_of(m), Form<T>(a.n_h(), a.n_i()));
        it->second.add_term(m, c);
    }
    return parts;
}

/// The differential induced by a validated bracket table, with d of every
/// coframe element precomputed.
template <class T>
class ChevalleyEilenberg {
public:
    explicit ChevalleyEilenberg(StructureConstants<T> sc, double tol = kDefaultTol) : sc_(std::move(sc)) {
        require_valid(sc_, tol);
        const int d = sc_.dim();
        d_coframe_.reserve(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) {
            Form<T> f(sc_.n_h(), sc_.n_i());
            for (int a = 0; a < d; ++a)
                for (int b = a + 1; b < d; ++b) {
                    const T& c = sc_(a, b, k);
                    if (!ScalarTraits<T>::negligible(c))
                        f.add_term((Monomial{1} << a) | (Monomial{1} << b), -c);
                }
            d_coframe_.push_back(std::move(f));
        }
    }

    const StructureConstants<T>& algebra() const { return sc_; }
    const Form<T>& d_coframe(int k) const { return d_coframe_[static_cast<std::size_t>(k)]; }

    Form<T> d(const Form<T>& a) const {
        check(a);
        Form<T> out(sc_.n_h(), sc_.n_i());
        for (const auto& [m, coeff] : a.terms()) {
            // d(e^{i0} ^ ... ^ e^{ik}) = sum_j (-1)^j e^{i0..i(j-1)} ^ d e^{ij} ^ e^{i(j+1)..}
            Monomial rest = m;
            Monomial before = 0;
            int j = 0;
            while (rest) {
                const int idx = std::countr_zero(rest);
                rest &= rest - 1;
                const Monomial after = rest;
                const T signed_coeff = (j & 1) ? -coeff : coeff;
                for (const auto& [mk, ck] : d_coframe_[static_cast<std::size_t>(idx)].terms()) {
                    const int s1 = wedge_sign(before, mk);
                    if (s1 == 0) continue;
                    const int s2 = wedge_sign(before | mk, after);
                    if (s2 == 0) continue;
                    const T v = signed_coeff * ck;
                    out.add_term(before | mk | after, (s1 * s2 > 0) ? v : -v);
                }
                before |= Monomial{1} << idx;
                ++j;
            }
        }
        return out;
    }

    /// (p+1, q) part of d on a pure (p, q) form.
    Form<T> del(const Form<T>& a) const { return shifted(a, 1, 0); }
    /// (p, q+1) part of d on a pure (p, q) form.
    Form<T> delbar(const Form<T>& a) const { return shifted(a, 0, 1); }

    /// del delbar of a pure (1,1) form; vanishes exactly when a is pluriclosed.
    Form<T> del_delbar(const Form<T>& a) const {
        check(a);
        if (!a.is_pure({1, 1})) throw StructuralError("del_delbar expects a pure (1,1) form");
        return del(delbar(a));
    }

private:
    void check(const Form<T>& a) const {
        if (a.n_h() != sc_.n_h() || a.n_i() != sc_.n_i())
            throw StructuralError("form and algebra have different coframe dimensions");
    }

    Form<T> shifted(const Form<T>& a, int dp, int dq) const {
        Form<T> out(sc_.n_h(), sc_.n_i());
        for (auto& [bd, part] : bidegree_split(a)) out += d(part).project({bd.p + dp, bd.q + dq});
        return out;
    }

    StructureConstants<T> sc_;
    std::vector<Form<T>> d_coframe_;
};

/// One-shot differential; validates the algebra on every call.
template <class T>
Form<T> ce_differential(const Form<T>& a, const StructureConstants<T>& sc, double tol = kDefaultTol) {
    return ChevalleyEilenberg<T>(sc, tol).d(a);
}

template <class T>
Form<T> del_delbar(const Form<T>& a, const StructureConstants<T>& sc, double tol = kDefaultTol) {
    return ChevalleyEilenberg<T>(sc, tol).del_delbar(a);
}

}  // namespace otflow
