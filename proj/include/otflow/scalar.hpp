#pragma once

// Scalar types shared by every module: binary64 complex numbers for the
// numerical paths and exact Gaussian rationals (Q[i]) for identity checks.

#include <cmath>
#include <complex>
#include <ostream>
#include <string>

#include <gmpxx.h>

namespace otflow {

using cx = std::complex<double>;

inline constexpr cx kI{0.0, 1.0};

/// Coefficients at or below this magnitude are dropped from sparse forms.
inline constexpr double kPruneThreshold = 1e-14;

/// Default tolerance for algebraic validations.
inline constexpr double kDefaultTol = 1e-10;

/// Exact element of Q[i]. Every finite double converts exactly.
class GaussianRational {
public:
    GaussianRational() = default;
    GaussianRational(int re) : re_(re) {}  // NOLINT(google-explicit-constructor)
    GaussianRational(mpq_class re, mpq_class im = 0) : re_(std::move(re)), im_(std::move(im)) {
        re_.canonicalize();
        im_.canonicalize();
    }

    static GaussianRational from_double(double re, double im = 0.0) {
        return GaussianRational(mpq_class(re), mpq_class(im));
    }
    static GaussianRational from_complex(const cx& z) { return from_double(z.real(), z.imag()); }

    const mpq_class& re() const { return re_; }
    const mpq_class& im() const { return im_; }

    bool is_zero() const { return sgn(re_) == 0 && sgn(im_) == 0; }

    GaussianRational conj() const { return {re_, -im_}; }
    mpq_class norm() const { return re_ * re_ + im_ * im_; }
    cx to_complex() const { return {re_.get_d(), im_.get_d()}; }

    GaussianRational operator-() const { return {-re_, -im_}; }

    GaussianRational& operator+=(const GaussianRational& o) {
        re_ += o.re_;
        im_ += o.im_;
        return *this;
    }
    GaussianRational& operator-=(const GaussianRational& o) {
        re_ -= o.re_;
        im_ -= o.im_;
        return *this;
    }
    GaussianRational& operator*=(const GaussianRational& o) {
        mpq_class r = re_ * o.re_ - im_ * o.im_;
        mpq_class i = re_ * o.im_ + im_ * o.re_;
        re_ = std::move(r);
        im_ = std::move(i);
        return *this;
    }
    GaussianRational& operator/=(const GaussianRational& o) {
        const mpq_class d = o.norm();
        mpq_class r = (re_ * o.re_ + im_ * o.im_) / d;
        mpq_class i = (im_ * o.re_ - re_ * o.im_) / d;
        re_ = std::move(r);
        im_ = std::move(i);
        return *this;
    }

    friend GaussianRational operator+(GaussianRational a, const GaussianRational& b) { return a += b; }
    friend GaussianRational operator-(GaussianRational a, const GaussianRational& b) { return a -= b; }
    friend GaussianRational operator*(GaussianRational a, const GaussianRational& b) { return a *= b; }
    friend GaussianRational operator/(GaussianRational a, const GaussianRational& b) { return a /= b; }
    friend bool operator==(const GaussianRational& a, const GaussianRational& b) {
        return a.re_ == b.re_ && a.im_ == b.im_;
    }
    friend bool operator!=(const GaussianRational& a, const GaussianRational& b) { return !(a == b); }

    friend std::ostream& operator<<(std::ostream& os, const GaussianRational& z) {
        return os << z.re_ << (sgn(z.im_) < 0 ? "-" : "+") << abs(z.im_) << "i";
    }

private:
    mpq_class re_{0};
    mpq_class im_{0};
};

/// Uniform scalar interface used by the templated algebra code.
template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<cx> {
    static constexpr bool exact = false;
    static cx zero() { return {0.0, 0.0}; }
    static cx one() { return {1.0, 0.0}; }
    static cx imag_unit() { return kI; }
    static cx from_double(double re, double im = 0.0) { return {re, im}; }
    static cx from_complex(const cx& z) { return z; }
    static cx conj(const cx& z) { return std::conj(z); }
    static cx to_complex(const cx& z) { return z; }
    static double magnitude(const cx& z) { return std::abs(z); }
    static bool negligible(const cx& z) { return std::abs(z) <= kPruneThreshold; }
    static bool is_zero(const cx& z, double tol) { return std::abs(z) <= tol; }
};

template <>
struct ScalarTraits<GaussianRational> {
    static constexpr bool exact = true;
    static GaussianRational zero() { return {}; }
    static GaussianRational one() { return {1}; }
    static GaussianRational imag_unit() { return {mpq_class(0), mpq_class(1)}; }
    static GaussianRational from_double(double re, double im = 0.0) {
        return GaussianRational::from_double(re, im);
    }
    static GaussianRational from_complex(const cx& z) { return GaussianRational::from_complex(z); }
    static GaussianRational conj(const GaussianRational& z) { return z.conj(); }
    static cx to_complex(const GaussianRational& z) { return z.to_complex(); }
    static double magnitude(const GaussianRational& z) { return std::sqrt(z.norm().get_d()); }
    static bool negligible(const GaussianRational& z) { return z.is_zero(); }
    // Exact arithmetic ignores the tolerance: zero means zero.
    static bool is_zero(const GaussianRational& z, double /*tol*/) { return z.is_zero(); }
};

template <class T>
T conj(const T& z) {
    return ScalarTraits<T>::conj(z);
}

template <class T>
double magnitude(const T& z) {
    return ScalarTraits<T>::magnitude(z);
}

}  // namespace otflow
