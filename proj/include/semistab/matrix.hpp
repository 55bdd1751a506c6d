#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace semistab {

using complex = std::complex<double>;
using ComplexVector = std::vector<complex>;

/// Dense row-major complex matrix. Most operators in the library are square,
/// but rectangular shapes are allowed for column blocks and right-hand sides.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
    explicit ComplexMatrix(std::size_t n) : ComplexMatrix(n, n) {}

    ComplexMatrix(std::initializer_list<std::initializer_list<complex>> rows) {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw InputError("ComplexMatrix: ragged initializer");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static ComplexMatrix zero(std::size_t n) { return ComplexMatrix(n); }

    static ComplexMatrix diagonal(std::span<const complex> d) {
        ComplexMatrix m(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    static ComplexMatrix column(std::span<const complex> v) {
        ComplexMatrix m(v.size(), 1);
        std::copy(v.begin(), v.end(), m.data_.begin());
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    /// Dimension of a square matrix.
    std::size_t n() const noexcept { return rows_; }
    bool square() const noexcept { return rows_ == cols_; }
    bool empty() const noexcept { return data_.empty(); }

    complex& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    const complex& operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    std::span<complex> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<const complex> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

    std::span<complex> data() noexcept { return data_; }
    std::span<const complex> data() const noexcept { return data_; }

    ComplexVector col(std::size_t j) const {
        ComplexVector v(rows_);
        for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
        return v;
    }

    void set_col(std::size_t j, std::span<const complex> v) {
        for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
    }

    ComplexMatrix adjoint() const {
        ComplexMatrix r(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
        return r;
    }

    bool all_finite() const noexcept {
        return std::all_of(data_.begin(), data_.end(),
                           [](const complex& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
    }

    double norm_fro() const noexcept {
        double s = 0.0;
        for (const auto& z : data_) s += std::norm(z);
        return std::sqrt(s);
    }

    /// Maximum absolute column sum.
    double norm_one() const noexcept {
        double best = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
            best = std::max(best, s);
        }
        return best;
    }

    double max_abs() const noexcept {
        double best = 0.0;
        for (const auto& z : data_) best = std::max(best, std::abs(z));
        return best;
    }

    ComplexMatrix& operator+=(const ComplexMatrix& o) {
        check_same(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }
    ComplexMatrix& operator-=(const ComplexMatrix& o) {
        check_same(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }
    ComplexMatrix& operator*=(complex c) noexcept {
        for (auto& z : data_) z *= c;
        return *this;
    }

    /// this + c I
    ComplexMatrix& add_diagonal(complex c) noexcept {
        const std::size_t k = std::min(rows_, cols_);
        for (std::size_t i = 0; i < k; ++i) (*this)(i, i) += c;
        return *this;
    }

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(complex c, ComplexMatrix a) { return a *= c; }
    friend ComplexMatrix operator*(ComplexMatrix a, complex c) { return a *= c; }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        if (a.cols_ != b.rows_) throw InputError("ComplexMatrix: product shape mismatch");
        ComplexMatrix r(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            complex* out = r.data_.data() + i * r.cols_;
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const complex aik = a(i, k);
                if (aik == complex{}) continue;
                const complex* brow = b.data_.data() + k * b.cols_;
                for (std::size_t j = 0; j < b.cols_; ++j) out[j] += aik * brow[j];
            }
        }
        return r;
    }

    friend ComplexVector operator*(const ComplexMatrix& a, std::span<const complex> x) {
        if (a.cols_ != x.size()) throw InputError("ComplexMatrix: matvec shape mismatch");
        ComplexVector y(a.rows_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            complex s{};
            for (std::size_t j = 0; j < a.cols_; ++j) s += a(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }

    friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

private:
    void check_same(const ComplexMatrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) throw InputError("ComplexMatrix: shape mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<complex> data_;
};

inline double norm2(std::span<const complex> v) noexcept {
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s);
}

inline bool all_finite(std::span<const complex> v) noexcept {
    return std::all_of(v.begin(), v.end(),
                       [](const complex& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

inline void require_square(const ComplexMatrix& m, const char* who) {
    if (!m.square() || m.rows() == 0) throw InputError(std::string(who) + ": expected a non-empty square matrix");
}

inline void require_finite(const ComplexMatrix& m, const char* who) {
    if (!m.all_finite()) throw InputError(std::string(who) + ": matrix has non-finite entries");
}

} // namespace semistab
