#pragma once

// Complexified Lie algebras g = h + I with an adapted frame.
//
// The frame order is fixed everywhere as
//   (Z_1..Z_r, W_1..W_s, conj Z_1..conj Z_r, conj W_1..conj W_s),
// so index a < n = r + s is a (1,0) vector and conj_index(a) = a +- n.

#include <algorithm>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "otflow/errors.hpp"
#include "otflow/scalar.hpp"

namespace otflow {

template <class T>
using FrameVector = std::vector<T>;

template <class T>
class StructureConstants {
public:
    StructureConstants() = default;

    /// Takes a flat table with c[a][b][k] at ((a * dim) + b) * dim + k.
    StructureConstants(int n_h, int n_i, std::vector<T> table, bool ot_type = false)
        : n_h_(n_h), n_i_(n_i), table_(std::move(table)), ot_type_(ot_type) {
        if (n_h < 0 || n_i < 0) throw StructuralError("negative frame block size");
        const std::size_t d = static_cast<std::size_t>(dim());
        if (table_.size() != d * d * d) {
            std::ostringstream msg;
            msg << "bracket table has " << table_.size() << " entries, expected " << d * d * d;
            throw StructuralError(msg.str());
        }
    }

    static StructureConstants zero(int n_h, int n_i, bool ot_type = false) {
        const std::size_t d = 2 * static_cast<std::size_t>(n_h + n_i);
        return StructureConstants(n_h, n_i, std::vector<T>(d * d * d, ScalarTraits<T>::zero()), ot_type);
    }

    int n_h() const { return n_h_; }
    int n_i() const { return n_i_; }
    /// Complex dimension of g^{1,0}.
    int n() const { return n_h_ + n_i_; }
    /// Size of the full complexified frame.
    int dim() const { return 2 * n(); }
    bool ot_type() const { return ot_type_; }

    int z(int k) const { return k; }
    int w(int i) const { return n_h_ + i; }
    int zbar(int k) const { return n() + k; }
    int wbar(int i) const { return n() + n_h_ + i; }
    int conj_index(int a) const { return a < n() ? a + n() : a - n(); }
    bool is_holomorphic(int a) const { return a < n(); }
    bool in_ideal(int a) const { return (a % n()) >= n_h_; }

    const T& operator()(int a, int b, int k) const { return table_[index(a, b, k)]; }

    const std::vector<T>& table() const { return table_; }

private:
    std::size_t index(int a, int b, int k) const {
        const std::size_t d = static_cast<std::size_t>(dim());
        return (static_cast<std::size_t>(a) * d + static_cast<std::size_t>(b)) * d + static_cast<std::size_t>(k);
    }

    template <class>
    friend class BracketBuilder;

    int n_h_ = 0;
    int n_i_ = 0;
    std::vector<T> table_;
    bool ot_type_ = false;
};

/// Accumulates brackets with antisymmetry built in.
template <class T>
class BracketBuilder {
public:
    BracketBuilder(int n_h, int n_i, bool ot_type = false) : sc_(StructureConstants<T>::zero(n_h, n_i, ot_type)) {}

    /// Adds coeff * e_k to [e_a, e_b] (and -coeff * e_k to [e_b, e_a]).
    BracketBuilder& add(int a, int b, int k, const T& coeff) {
        if (a == b) throw StructuralError("bracket of a frame vector with itself is zero");
        sc_.table_[sc_.index(a, b, k)] += coeff;
        sc_.table_[sc_.index(b, a, k)] -= coeff;
        return *this;
    }

    /// Adds [e_a, e_b] += coeff * e_k together with the conjugate relation.
    BracketBuilder& add_with_conjugate(int a, int b, int k, const T& coeff) {
        add(a, b, k, coeff);
        add(sc_.conj_index(a), sc_.conj_index(b), sc_.conj_index(k), ScalarTraits<T>::conj(coeff));
        return *this;
    }

    const StructureConstants<T>& peek() const { return sc_; }
    StructureConstants<T> build() && { return std::move(sc_); }

private:
    StructureConstants<T> sc_;
};

template <class T>
FrameVector<T> basis_vector(const StructureConstants<T>& sc, int a) {
    FrameVector<T> v(static_cast<std::size_t>(sc.dim()), ScalarTraits<T>::zero());
    v[static_cast<std::size_t>(a)] = ScalarTraits<T>::one();
    return v;
}

/// Bilinear extension of the bracket table.
template <class T>
FrameVector<T> bracket(const FrameVector<T>& x, const FrameVector<T>& y, const StructureConstants<T>& sc) {
    const int d = sc.dim();
    if (static_cast<int>(x.size()) != d || static_cast<int>(y.size()) != d)
        throw StructuralError("bracket: vector length does not match frame dimension");
    FrameVector<T> out(static_cast<std::size_t>(d), ScalarTraits<T>::zero());
    for (int a = 0; a < d; ++a) {
        if (ScalarTraits<T>::negligible(x[a])) continue;
        for (int b = 0; b < d; ++b) {
            if (a == b || ScalarTraits<T>::negligible(y[b])) continue;
            const T xy = x[a] * y[b];
            for (int k = 0; k < d; ++k) {
                const T& c = sc(a, b, k);
                if (!ScalarTraits<T>::negligible(c)) out[k] += xy * c;
            }
        }
    }
    return out;
}

template <class T>
FrameVector<T> conjugate_vector(const FrameVector<T>& x, const StructureConstants<T>& sc) {
    FrameVector<T> out(x.size(), ScalarTraits<T>::zero());
    for (int a = 0; a < sc.dim(); ++a) out[sc.conj_index(a)] = ScalarTraits<T>::conj(x[a]);
    return out;
}

/// (1,0) component: entries on conj frame vectors zeroed.
template <class T>
FrameVector<T> holomorphic_part(FrameVector<T> x, const StructureConstants<T>& sc) {
    for (int a = sc.n(); a < sc.dim(); ++a) x[a] = ScalarTraits<T>::zero();
    return x;
}

/// (0,1) component.
template <class T>
FrameVector<T> antiholomorphic_part(FrameVector<T> x, const StructureConstants<T>& sc) {
    for (int a = 0; a < sc.n(); ++a) x[a] = ScalarTraits<T>::zero();
    return x;
}

struct Triple {
    int a = -1;
    int b = -1;
    int c = -1;
};

struct ValidationReport {
    double antisymmetry_defect = 0.0;
    double jacobi_defect = 0.0;
    double conjugation_defect = 0.0;
    /// Only measured for OT-type algebras: largest [I, I] coefficient plus
    /// the largest component of [g, I] outside I.
    double ideal_defect = 0.0;
    double tol = kDefaultTol;
    Triple worst_antisymmetry;
    Triple worst_jacobi;
    Triple worst_conjugation;
    Triple worst_ideal;

    bool passed() const {
        return antisymmetry_defect <= tol && jacobi_defect <= tol && conjugation_defect <= tol && ideal_defect <= tol;
    }

    std::string describe() const {
        std::ostringstream os;
        auto line = [&](const char* name, double v, const Triple& t) {
            os << name << "=" << v;
            if (v > tol) os << " (FAIL at " << t.a << "," << t.b << "," << t.c << ")";
            os << "; ";
        };
        line("antisymmetry", antisymmetry_defect, worst_antisymmetry);
        line("jacobi", jacobi_defect, worst_jacobi);
        line("conjugation", conjugation_defect, worst_conjugation);
        line("ideal", ideal_defect, worst_ideal);
        return os.str();
    }
};

/// Measures every axiom; never throws on defects, only on malformed input.
template <class T>
ValidationReport validate_algebra(const StructureConstants<T>& sc, double tol = kDefaultTol) {
    const int d = sc.dim();
    if (static_cast<int>(sc.table().size()) != d * d * d)
        throw StructuralError("validate_algebra: table is not dim^3");
    ValidationReport rep;
    rep.tol = tol;
    auto bump = [](double& slot, Triple& where, double v, Triple t) {
        if (v > slot) {
            slot = v;
            where = t;
        }
    };

    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int k = 0; k < d; ++k) {
                bump(rep.antisymmetry_defect, rep.worst_antisymmetry, magnitude(sc(a, b, k) + sc(b, a, k)), {a, b, k});
                const T mirrored = sc(sc.conj_index(a), sc.conj_index(b), sc.conj_index(k));
                bump(rep.conjugation_defect, rep.worst_conjugation,
                     magnitude(mirrored - ScalarTraits<T>::conj(sc(a, b, k))), {a, b, k});
            }

    // Jacobi on frame triples: [a,[b,c]] + [b,[c,a]] + [c,[a,b]].
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b)
            for (int c = b + 1; c < d; ++c) {
                for (int m = 0; m < d; ++m) {
                    T acc = ScalarTraits<T>::zero();
                    for (int k = 0; k < d; ++k) {
                        const T& bc = sc(b, c, k);
                        if (!ScalarTraits<T>::negligible(bc)) acc += bc * sc(a, k, m);
                        const T& ca = sc(c, a, k);
                        if (!ScalarTraits<T>::negligible(ca)) acc += ca * sc(b, k, m);
                        const T& ab = sc(a, b, k);
                        if (!ScalarTraits<T>::negligible(ab)) acc += ab * sc(c, k, m);
                    }
                    bump(rep.jacobi_defect, rep.worst_jacobi, magnitude(acc), {a, b, c});
                }
            }

    if (sc.ot_type()) {
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                if (!sc.in_ideal(b)) continue;
                for (int k = 0; k < d; ++k) {
                    const double v = magnitude(sc(a, b, k));
                    if (sc.in_ideal(a) || !sc.in_ideal(k)) bump(rep.ideal_defect, rep.worst_ideal, v, {a, b, k});
                }
            }
    }
    return rep;
}

/// Throws ValidationError naming the offending triple when any defect exceeds tol.
template <class T>
void require_valid(const StructureConstants<T>& sc, double tol = kDefaultTol) {
    const ValidationReport rep = validate_algebra(sc, tol);
    if (!rep.passed()) throw ValidationError("algebra validation failed: " + rep.describe());
}

/// True iff [g^{1,0}, g^{1,0}] has no (0,1) component above tol.
template <class T>
bool check_integrability(const StructureConstants<T>& sc, double tol = kDefaultTol) {
    for (int a = 0; a < sc.n(); ++a)
        for (int b = 0; b < sc.n(); ++b)
            for (int k = sc.n(); k < sc.dim(); ++k)
                if (magnitude(sc(a, b, k)) > tol) return false;
    return true;
}

template <class To, class From>
StructureConstants<To> convert_structure(const StructureConstants<From>& sc) {
    std::vector<To> table;
    table.reserve(sc.table().size());
    for (const auto& v : sc.table()) table.push_back(ScalarTraits<To>::from_complex(ScalarTraits<From>::to_complex(v)));
    return StructureConstants<To>(sc.n_h(), sc.n_i(), std::move(table), sc.ot_type());
}

}  // namespace otflow
