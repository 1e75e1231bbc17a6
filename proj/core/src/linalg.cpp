#include "parsrec/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace parsrec {

bool cholesky_factor(Matrix& a, double tol) {
    const std::size_t n = a.rows();
    if (n != a.cols()) throw std::invalid_argument("cholesky: matrix not square");
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::fabs(a.at(i, i)));
    if (scale == 0.0) scale = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
        double d = a.at(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= a.at(j, k) * a.at(j, k);
        if (d <= tol * scale) return false;
        const double l = std::sqrt(d);
        a.at(j, j) = l;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a.at(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= a.at(i, k) * a.at(j, k);
            a.at(i, j) = s / l;
        }
    }
    return true;
}

std::vector<double> cholesky_solve(const Matrix& l, const std::vector<double>& b) {
    const std::size_t n = l.rows();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l.at(i, k) * y[k];
        y[i] = s / l.at(i, i);
    }
    std::vector<double> x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l.at(k, ii) * x[k];
        x[ii] = s / l.at(ii, ii);
    }
    return x;
}

void jacobi_eigen(const Matrix& a_in, std::vector<double>& values, Matrix& vectors,
                  int max_sweeps) {
    const std::size_t n = a_in.rows();
    Matrix a = a_in;
    vectors = Matrix(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) vectors.at(i, i) = 1.0;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a.at(p, q) * a.at(p, q);
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a.at(p, q);
                if (std::fabs(apq) < 1e-300) continue;
                const double app = a.at(p, p);
                const double aqq = a.at(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t =
                    (theta >= 0.0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a.at(k, p);
                    const double akq = a.at(k, q);
                    a.at(k, p) = c * akp - s * akq;
                    a.at(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a.at(p, k);
                    const double aqk = a.at(q, k);
                    a.at(p, k) = c * apk - s * aqk;
                    a.at(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = vectors.at(k, p);
                    const double vkq = vectors.at(k, q);
                    vectors.at(k, p) = c * vkp - s * vkq;
                    vectors.at(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    values.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) values[i] = a.at(i, i);
}

std::vector<double> solve_min_norm(const Matrix& a, const std::vector<double>& b, double rel_tol) {
    const std::size_t n = a.rows();
    std::vector<double> values;
    Matrix v;
    jacobi_eigen(a, values, v);
    double max_abs = 0.0;
    for (double lam : values) max_abs = std::max(max_abs, std::fabs(lam));
    const double cutoff = max_abs * rel_tol;

    // x = V diag(1/lambda_i) V^T b over the non-negligible eigenvalues
    std::vector<double> vtb(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) vtb[i] += v.at(k, i) * b[k];
    std::vector<double> x(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (std::fabs(values[i]) <= cutoff) continue;
        const double coef = vtb[i] / values[i];
        for (std::size_t k = 0; k < n; ++k) x[k] += v.at(k, i) * coef;
    }
    return x;
}

}  // namespace parsrec
