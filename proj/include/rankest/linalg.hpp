#pragma once

// Snapshots, windowed sample covariance and Hermitian eigendecomposition.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <deque>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rankest/error.hpp"

namespace rankest {

using Complex = std::complex<double>;

/// Scalar field of the observations. The value is the random-matrix beta.
enum class Field : int { real = 1, complex = 2 };

inline int beta_of(Field f) { return static_cast<int>(f); }

inline Field field_from_beta(int beta) {
    if (beta != 1 && beta != 2) throw DomainError("beta must be 1 or 2, got " + std::to_string(beta));
    return static_cast<Field>(beta);
}

/// Dense row-major complex matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::vector<Complex> column(std::size_t j) const {
        std::vector<Complex> c(rows_);
        for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }

    /// First k columns.
    Matrix leading_columns(std::size_t k) const {
        Matrix m(rows_, k);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < k; ++j) m(i, j) = (*this)(i, j);
        return m;
    }

    Matrix adjoint() const {
        Matrix m(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
        return m;
    }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) throw DimensionError("matrix product: inner dimensions differ");
        Matrix m(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const Complex aik = a(i, k);
                for (std::size_t j = 0; j < b.cols_; ++j) m(i, j) += aik * b(k, j);
            }
        return m;
    }

    friend Matrix operator-(Matrix a, const Matrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw DimensionError("matrix difference: shapes differ");
        for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] -= b.data_[i];
        return a;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw DimensionError("matrix sum: shapes differ");
        for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] += b.data_[i];
        return a;
    }

    Matrix& operator*=(double s) {
        for (auto& v : data_) v *= s;
        return *this;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (const auto& v : data_) s += std::norm(v);
        return std::sqrt(s);
    }

    double trace_real() const {
        double s = 0.0;
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i).real();
        return s;
    }

    std::span<const Complex> data() const { return data_; }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<Complex> data_;
};

/// One array observation x(t).
struct Snapshot {
    long time_index = 0;
    std::vector<Complex> values;
};

/// Fixed-capacity window over the most recent snapshots, oldest evicted
/// first. Every stored snapshot has the window's dimension and field.
class SnapshotWindow {
public:
    SnapshotWindow(std::size_t capacity, std::size_t dimension, Field field)
        : capacity_(capacity), dimension_(dimension), field_(field) {
        if (capacity == 0) throw DomainError("window capacity must be at least 1");
        if (dimension == 0) throw DomainError("snapshot dimension must be at least 1");
    }

    void push(Snapshot s) {
        if (s.values.size() != dimension_) {
            throw DimensionError("snapshot has dimension " + std::to_string(s.values.size()) + ", window expects " +
                                 std::to_string(dimension_));
        }
        for (const auto& v : s.values) {
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw DomainError("snapshot entry not finite");
            if (field_ == Field::real && v.imag() != 0.0) throw DomainError("complex entry in a real-field window");
        }
        if (snapshots_.size() == capacity_) snapshots_.pop_front();
        snapshots_.push_back(std::move(s));
    }

    std::size_t capacity() const { return capacity_; }
    std::size_t dimension() const { return dimension_; }
    Field field() const { return field_; }
    std::size_t size() const { return snapshots_.size(); }
    bool empty() const { return snapshots_.empty(); }
    bool full() const { return snapshots_.size() == capacity_; }
    const std::deque<Snapshot>& snapshots() const { return snapshots_; }

private:
    std::size_t capacity_;
    std::size_t dimension_;
    Field field_;
    std::deque<Snapshot> snapshots_;
};

/// (1/N) sum x x^* over the N stored snapshots. The lower triangle is the
/// exact conjugate mirror of the upper one and the diagonal is real.
inline Matrix sample_covariance(const SnapshotWindow& window) {
    if (window.empty()) throw DomainError("sample_covariance: empty window");
    const std::size_t n = window.dimension();
    Matrix c(n, n);
    for (const auto& s : window.snapshots()) {
        const auto& x = s.values;
        for (std::size_t i = 0; i < n; ++i) {
            c(i, i) += std::norm(x[i]);
            for (std::size_t j = i + 1; j < n; ++j) c(i, j) += x[i] * std::conj(x[j]);
        }
    }
    const double inv = 1.0 / static_cast<double>(window.size());
    for (std::size_t i = 0; i < n; ++i) {
        c(i, i) = Complex(c(i, i).real() * inv, 0.0);
        for (std::size_t j = i + 1; j < n; ++j) {
            c(i, j) *= inv;
            c(j, i) = std::conj(c(i, j));
        }
    }
    return c;
}

/// Eigenvalues in descending order with the matching orthonormal
/// eigenvectors as columns.
struct EigenSystem {
    std::vector<double> values;
    Matrix vectors;

    std::size_t dimension() const { return values.size(); }
};

struct JacobiOptions {
    int max_sweeps = 100;
    double relative_threshold = 1e-12;  // off-diagonal Frobenius norm / ||A||_F
    double hermitian_tolerance = 1e-10;
};

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix using complex
/// rotations. Real-symmetric inputs only ever see real rotations, so their
/// eigenvectors come out with identically zero imaginary parts.
inline EigenSystem hermitian_eig(const Matrix& input, const JacobiOptions& opt = {}) {
    const std::size_t n = input.rows();
    if (n == 0 || input.cols() != n) throw DimensionError("hermitian_eig: matrix must be square and nonempty");
    const double norm = input.frobenius_norm();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            if (std::abs(input(i, j) - std::conj(input(j, i))) > opt.hermitian_tolerance * std::max(1.0, norm)) {
                throw DomainError("hermitian_eig: input is not Hermitian at (" + std::to_string(i) + ", " +
                                  std::to_string(j) + ")");
            }
        }
    }

    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        a(i, i) = input(i, i).real();
        for (std::size_t j = i + 1; j < n; ++j) {
            a(i, j) = 0.5 * (input(i, j) + std::conj(input(j, i)));
            a(j, i) = std::conj(a(i, j));
        }
    }
    Matrix v = Matrix::identity(n);

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * std::norm(a(i, j));
        return std::sqrt(s);
    };
    const double target = opt.relative_threshold * norm;

    int sweep = 0;
    while (off_norm() > target) {
        if (++sweep > opt.max_sweeps) {
            throw ConvergenceError("hermitian_eig: no convergence after " + std::to_string(opt.max_sweeps) + " sweeps");
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const Complex b = a(p, q);
                const double mag = std::abs(b);
                if (mag == 0.0) continue;
                // U = diag(1, conj(e)) * R brings the (p, q) block to real
                // symmetric form and then annihilates it.
                const Complex e = b / mag;
                const Complex ebar = std::conj(e);
                const double app = a(p, p).real(), aqq = a(q, q).real();
                const double theta = (aqq - app) / (2.0 * mag);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {  // A <- A U
                    const Complex akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * ebar * akq;
                    a(k, q) = s * akp + c * ebar * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {  // A <- U^* A
                    const Complex apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * e * aqk;
                    a(q, k) = s * apk + c * e * aqk;
                }
                a(p, p) = app - t * mag;
                a(q, q) = aqq + t * mag;
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {  // V <- V U
                    const Complex vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * ebar * vkq;
                    v(k, q) = s * vkp + c * ebar * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i).real() > a(j, j).real(); });
    EigenSystem es;
    es.values.resize(n);
    es.vectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        es.values[j] = a(order[j], order[j]).real();
        for (std::size_t i = 0; i < n; ++i) es.vectors(i, j) = v(i, order[j]);
    }
    return es;
}

/// Squared Frobenius distance between the orthogonal projectors onto the
/// column spans of two orthonormal bases, ||W W^* - V V^*||_F^2.
inline double subspace_error(const Matrix& w, const Matrix& v) {
    if (w.rows() != v.rows()) throw DimensionError("subspace_error: bases live in different dimensions");
    const Matrix d = w * w.adjoint() - v * v.adjoint();
    const double f = d.frobenius_norm();
    return f * f;
}

}  // namespace rankest
