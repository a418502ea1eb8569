#include "nnm/densela.hpp"

#include "nnm/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace nnm {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

double norm1(const Matrix& a) {
    double best = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) s += std::abs(a(i, j));
        best = std::max(best, s);
    }
    return best;
}

} // namespace

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

Vector Matrix::column(std::size_t j) const {
    Vector c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.rows(), "matrix product dimension mismatch");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), "matrix sum dimension mismatch");
    Matrix c = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) += b(i, j);
    return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) { return a + (-1.0) * b; }

Matrix operator*(double s, const Matrix& a) {
    Matrix c = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) *= s;
    return c;
}

Vector operator*(const Matrix& a, std::span<const double> x) {
    require(a.cols() == x.size(), "matrix-vector dimension mismatch");
    Vector y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        const auto r = a.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) s += r[j] * x[j];
        y[i] = s;
    }
    return y;
}

Vector transpose_times(const Matrix& a, std::span<const double> x) {
    require(a.rows() == x.size(), "transpose-vector dimension mismatch");
    Vector y(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        if (x[i] == 0.0) continue;
        const auto r = a.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) y[j] += r[j] * x[i];
    }
    return y;
}

double norm2(std::span<const double> x) noexcept {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

double norm_inf(std::span<const double> x) noexcept {
    double s = 0.0;
    for (double v : x) s = std::max(s, std::abs(v));
    return s;
}

double dot(std::span<const double> x, std::span<const double> y) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double frobenius_norm(const Matrix& a) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (double v : a.row(i)) s += v * v;
    return std::sqrt(s);
}

Vector axpy(double alpha, std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size(), "axpy dimension mismatch");
    Vector r(y.begin(), y.end());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += alpha * x[i];
    return r;
}

Vector subtract(std::span<const double> x, std::span<const double> y) { return axpy(-1.0, y, x); }

double induced_norm2(const Matrix& a) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    // Deterministic, non-symmetric start so no eigenvector is missed by symmetry.
    Vector v(a.cols());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = 1.0 + 0.1 * static_cast<double>(j % 7);
    double nv = norm2(v);
    for (double& x : v) x /= nv;

    double sigma2 = 0.0;
    for (int it = 0; it < 50; ++it) {
        Vector w = transpose_times(a, a * v);
        const double next = norm2(w);
        if (next == 0.0) return 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) v[j] = w[j] / next;
        const bool done = std::abs(next - sigma2) <= 1e-12 * next;
        sigma2 = next;
        if (done) break;
    }
    return std::sqrt(sigma2);
}

LuFactorization::LuFactorization(Matrix a) : lu_(std::move(a)) {
    require(lu_.square(), "LU requires a square matrix");
    const std::size_t n = lu_.rows();
    norm1_ = norm1(lu_);
    perm_.resize(n);
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});

    const double floor = 1e-14 * std::max(norm1_, frobenius_norm(lu_));
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(lu_(i, k)) > std::abs(lu_(p, k))) p = i;
        if (!(std::abs(lu_(p, k)) >= floor) || lu_(p, k) == 0.0)
            throw Error(ErrorCode::SingularMatrix,
                        "pivot " + std::to_string(k) + " below 1e-14*||A||; matrix is singular");
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
            std::swap(perm_[k], perm_[p]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double l = lu_(i, k) / lu_(k, k);
            lu_(i, k) = l;
            if (l == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= l * lu_(k, j);
        }
    }
}

Vector LuFactorization::solve(std::span<const double> b) const {
    const std::size_t n = size();
    require(b.size() == n, "LU solve dimension mismatch");
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu_(i, j) * x[j];
        x[i] /= lu_(i, i);
    }
    return x;
}

double LuFactorization::condition_1norm() const {
    const std::size_t n = size();
    double inv_norm = 0.0;
    Vector e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        const Vector c = solve(e);
        e[j] = 0.0;
        double s = 0.0;
        for (double v : c) s += std::abs(v);
        inv_norm = std::max(inv_norm, s);
    }
    return norm1_ * inv_norm;
}

Vector lu_solve(const Matrix& a, std::span<const double> b) { return LuFactorization(a).solve(b); }

SymmetricEigen symmetric_eigen(const Matrix& a, double tol) {
    require(a.square(), "eigenproblem requires a square matrix");
    const std::size_t n = a.rows();
    Matrix m = a;
    Matrix v = Matrix::identity(n);
    const double scale = frobenius_norm(a);

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) s += m(i, j) * m(i, j);
        return std::sqrt(s);
    };

    for (int sweep = 0; sweep < 100 && scale > 0.0 && off_norm() > tol * scale; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = m(p, q);
                if (apq == 0.0) continue;
                const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double mkp = m(k, p), mkq = m(k, q);
                    m(k, p) = c * mkp - s * mkq;
                    m(k, q) = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double mpk = m(p, k), mqk = m(q, k);
                    m(p, k) = c * mpk - s * mqk;
                    m(q, k) = s * mpk + c * mqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return m(i, i) < m(j, j); });

    SymmetricEigen out{Vector(n), Matrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = m(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

Vector singular_values(const Matrix& a) {
    const auto eig = symmetric_eigen(a.transposed() * a);
    Vector s(eig.values.rbegin(), eig.values.rend());
    for (double& x : s) x = std::sqrt(std::max(x, 0.0));
    return s;
}

double ModalSystem::omega(std::size_t k) const { return std::sqrt(std::max(omega2.at(k), 0.0)); }

ModalSystem generalized_modes(const Matrix& stiffness, std::span<const double> masses) {
    require(stiffness.square() && stiffness.rows() == masses.size(),
            "stiffness and mass dimensions differ");
    const std::size_t n = masses.size();
    Vector inv_sqrt(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(masses[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "masses must be strictly positive");
        inv_sqrt[i] = 1.0 / std::sqrt(masses[i]);
    }
    Matrix reduced(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            reduced(i, j) = 0.5 * (stiffness(i, j) + stiffness(j, i)) * inv_sqrt[i] * inv_sqrt[j];

    auto eig = symmetric_eigen(reduced);
    ModalSystem out{eig.values, Matrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t big = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(eig.vectors(i, k)) > std::abs(eig.vectors(big, k)) + 1e-12) big = i;
        const double sign = eig.vectors(big, k) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) out.phi(i, k) = sign * inv_sqrt[i] * eig.vectors(i, k);
    }
    return out;
}

} // namespace nnm
