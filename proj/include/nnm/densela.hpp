#pragma once

/**
 * @file densela.hpp
 * @brief Small dense linear algebra: row-major matrices, LU with partial
 *        pivoting, cyclic Jacobi for symmetric eigenproblems and the
 *        generalized problem K phi = omega^2 M phi.
 *
 * Sizes here are desk scale (a few hundred unknowns at most); nothing is
 * blocked or vectorized.
 */

#include <cstddef>
#include <span>
#include <vector>

namespace nnm {

using Vector = std::vector<double>;

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, value) {}

    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> d);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const noexcept {
        return {data_.data() + i * cols_, cols_};
    }
    Vector column(std::size_t j) const;

    Matrix transposed() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Vector operator*(const Matrix& a, std::span<const double> x);

/// A^T x without forming the transpose.
Vector transpose_times(const Matrix& a, std::span<const double> x);

double norm2(std::span<const double> x) noexcept;
double norm_inf(std::span<const double> x) noexcept;
double dot(std::span<const double> x, std::span<const double> y) noexcept;
double frobenius_norm(const Matrix& a) noexcept;
[[nodiscard]] Vector axpy(double alpha, std::span<const double> x, std::span<const double> y);
Vector subtract(std::span<const double> x, std::span<const double> y);

/// Induced 2-norm by power iteration on A^T A (at most 50 sweeps, stops at
/// relative change below 1e-12).
double induced_norm2(const Matrix& a);

/// LU factorization with partial pivoting, P A = L U stored compactly.
class LuFactorization {
public:
    /// Throws Error(SingularMatrix) when a pivot falls below 1e-14 * ||A||.
    explicit LuFactorization(Matrix a);

    std::size_t size() const noexcept { return lu_.rows(); }
    Vector solve(std::span<const double> b) const;

    /// ||A||_1 * ||A^{-1}||_1, with the inverse formed column by column.
    double condition_1norm() const;

private:
    Matrix lu_;
    std::vector<std::size_t> perm_;
    double norm1_ = 0.0;
};

Vector lu_solve(const Matrix& a, std::span<const double> b);

struct SymmetricEigen {
    Vector values;  ///< ascending
    Matrix vectors; ///< orthonormal columns, matching `values`
};

/// Cyclic Jacobi; off-diagonal Frobenius norm is driven below tol * ||A||_F.
SymmetricEigen symmetric_eigen(const Matrix& a, double tol = 1e-13);

/// Singular values (descending) from the eigenvalues of A^T A.
Vector singular_values(const Matrix& a);

/// Modal basis of K phi = omega^2 M phi with M diagonal.
struct ModalSystem {
    Vector omega2; ///< ascending
    Matrix phi;    ///< columns are modes, phi^T M phi = I

    std::size_t size() const noexcept { return omega2.size(); }
    double omega(std::size_t k) const;
};

/// Reduces to M^{-1/2} K M^{-1/2}, runs cyclic Jacobi and maps back.
/// Zero eigenvalues (rigid-body modes of a semidefinite K) are reported as is.
/// Each mode is signed so its largest-magnitude entry is positive.
ModalSystem generalized_modes(const Matrix& stiffness, std::span<const double> masses);

} // namespace nnm
