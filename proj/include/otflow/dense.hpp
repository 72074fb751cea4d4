#pragma once

// Small dense row-major matrices over any ScalarTraits type. Dimensions in
// this project are tiny (complex dimension <= 8), so clarity wins over speed.

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "otflow/errors.hpp"
#include "otflow/scalar.hpp"

namespace otflow {

template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, ScalarTraits<T>::zero()) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = ScalarTraits<T>::one();
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Matrix conjugate() const {
        Matrix t(rows_, cols_);
        for (std::size_t k = 0; k < data_.size(); ++k) t.data_[k] = ScalarTraits<T>::conj(data_[k]);
        return t;
    }

    Matrix adjoint() const { return transpose().conjugate(); }

    Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
        Matrix b(nr, nc);
        for (std::size_t i = 0; i < nr; ++i)
            for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
        return b;
    }

    Matrix& operator+=(const Matrix& o) {
        check_same_shape(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }
    Matrix& operator-=(const Matrix& o) {
        check_same_shape(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }
    Matrix& operator*=(const T& s) {
        for (auto& v : data_) v *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, const T& s) { return a *= s; }
    friend Matrix operator*(const T& s, Matrix a) { return a *= s; }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) throw StructuralError("matrix product: inner dimension mismatch");
        Matrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const T& aik = a(i, k);
                if (ScalarTraits<T>::negligible(aik)) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    /// Largest entry magnitude.
    double max_abs() const {
        double m = 0.0;
        for (const auto& v : data_) m = std::max(m, ScalarTraits<T>::magnitude(v));
        return m;
    }

    /// Inverse by Gauss-Jordan elimination. Pivoting picks the largest
    /// magnitude, which for exact scalars just means "first nonzero".
    Matrix inverse() const {
        if (rows_ != cols_) throw StructuralError("inverse of a non-square matrix");
        const std::size_t n = rows_;
        Matrix a = *this;
        Matrix inv = identity(n);
        for (std::size_t col = 0; col < n; ++col) {
            std::size_t piv = col;
            double best = ScalarTraits<T>::magnitude(a(col, col));
            for (std::size_t r = col + 1; r < n; ++r) {
                const double m = ScalarTraits<T>::magnitude(a(r, col));
                if (m > best) {
                    best = m;
                    piv = r;
                }
            }
            if (ScalarTraits<T>::is_zero(a(piv, col), 0.0) || best == 0.0)
                throw MetricError("matrix is singular");
            if (piv != col) {
                for (std::size_t j = 0; j < n; ++j) {
                    std::swap(a(col, j), a(piv, j));
                    std::swap(inv(col, j), inv(piv, j));
                }
            }
            const T p = a(col, col);
            for (std::size_t j = 0; j < n; ++j) {
                a(col, j) /= p;
                inv(col, j) /= p;
            }
            for (std::size_t r = 0; r < n; ++r) {
                if (r == col) continue;
                const T f = a(r, col);
                if (ScalarTraits<T>::is_zero(f, 0.0)) continue;
                for (std::size_t j = 0; j < n; ++j) {
                    a(r, j) -= f * a(col, j);
                    inv(r, j) -= f * inv(col, j);
                }
            }
        }
        return inv;
    }

    const std::vector<T>& data() const { return data_; }

private:
    void check_same_shape(const Matrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) throw StructuralError("matrix shape mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using CMatrix = Matrix<cx>;
using QMatrix = Matrix<GaussianRational>;

template <class To, class From>
Matrix<To> convert_matrix(const Matrix<From>& m) {
    Matrix<To> out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            out(i, j) = ScalarTraits<To>::from_complex(ScalarTraits<From>::to_complex(m(i, j)));
    return out;
}

/// Max-norm of the difference after mapping both to binary64.
template <class T>
double max_abs_diff(const Matrix<T>& a, const Matrix<T>& b) {
    return (a - b).max_abs();
}

}  // namespace otflow
