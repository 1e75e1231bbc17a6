#pragma once

#include <cstddef>
#include <vector>

namespace parsrec {

// Dense row-major matrix, just enough for the normal equations and Newton
// steps at feature dimension ~160.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

// In-place Cholesky factorization A = L L^T of a symmetric positive-definite
// matrix. Returns false when a pivot drops below tolerance.
bool cholesky_factor(Matrix& a, double tol = 1e-12);

// Solves L L^T x = b given the factor produced by cholesky_factor.
std::vector<double> cholesky_solve(const Matrix& l, const std::vector<double>& b);

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Eigenvalues land in `values`, matching eigenvectors in the columns of
// `vectors`.
void jacobi_eigen(const Matrix& a, std::vector<double>& values, Matrix& vectors,
                  int max_sweeps = 64);

// Minimum-norm solution of the (possibly singular) symmetric system A x = b
// via the eigendecomposition pseudo-inverse.
std::vector<double> solve_min_norm(const Matrix& a, const std::vector<double>& b,
                                   double rel_tol = 1e-12);

}  // namespace parsrec
