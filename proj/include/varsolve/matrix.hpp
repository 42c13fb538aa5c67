#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "varsolve/common.hpp"

namespace varsolve {

namespace detail {

/// Cyclic Jacobi rotations on a dense symmetric matrix (values only).
/// `a` is row-major n*n storage, destroyed in place. Stops when the
/// off-diagonal Frobenius norm drops below tol relative to the matrix scale.
inline std::vector<double> jacobi_eigenvalues(std::vector<double> a, int n,
                                              double tol = 1e-12,
                                              int max_sweeps = 100) {
    auto off_norm = [&]() {
        double s = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) s += a[p * n + q] * a[p * n + q];
        return std::sqrt(2.0 * s);
    };
    double frob = 0.0;
    for (double v : a) frob += v * v;
    frob = std::sqrt(frob);
    const double stop = tol * std::max(1.0, frob);

    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        if (off_norm() <= stop) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::abs(apq) <= stop / (n * n + 1.0)) continue;
                const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                a[p * n + p] -= t * apq;
                a[q * n + q] += t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for (int r = 0; r < n; ++r) {
                    if (r == p || r == q) continue;
                    const double arp = a[r * n + p];
                    const double arq = a[r * n + q];
                    a[r * n + p] = a[p * n + r] = arp - s * (arq + tau * arp);
                    a[r * n + q] = a[q * n + r] = arq + s * (arp - tau * arq);
                }
            }
        }
    }
    if (sweep == max_sweeps && off_norm() > stop) {
        throw NumericalError("jacobi eigensolver: no convergence after " +
                                 std::to_string(max_sweeps) +
                                 " sweeps, off-diagonal norm " + fmt17(off_norm()),
                             off_norm());
    }
    std::vector<double> eig(n);
    for (int i = 0; i < n; ++i) eig[i] = a[i * n + i];
    std::sort(eig.begin(), eig.end());
    return eig;
}

} // namespace detail

/// The bijection k = i + m*(j-1) between grid points (i,j) in
/// Z[1,m] x Z[1,n] and linear indices in Z[1,mn]. All 1-based.
struct GridIndexMap {
    int rows = 0; // m
    int cols = 0; // n

    int to_linear(int i, int j) const {
        if (i < 1 || i > rows || j < 1 || j > cols)
            throw InvalidDimensionError("grid index (" + std::to_string(i) + "," +
                                        std::to_string(j) + ") outside grid");
        return i + rows * (j - 1);
    }

    std::pair<int, int> to_grid(int k) const {
        if (k < 1 || k > rows * cols)
            throw InvalidDimensionError("linear index " + std::to_string(k) +
                                        " outside grid");
        const int j = (k - 1) / rows + 1;
        const int i = k - rows * (j - 1);
        return {i, j};
    }
};

/// Dense symmetric matrix with a lazily computed, cached, ordered spectrum.
/// Immutable after construction; spectrum caching is compute-once and safe
/// under concurrent first access.
class SpdMatrix {
public:
    enum class Structure { general, second_difference, grid_laplacian };

    static SpdMatrix dense(int n, std::vector<double> entries) {
        if (n < 1) throw InvalidDimensionError("matrix order must be >= 1");
        if (static_cast<int>(entries.size()) != n * n)
            throw InvalidDimensionError("entry count does not match order");
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (entries[i * n + j] != entries[j * n + i])
                    throw StructuralError("matrix is not symmetric at (" +
                                          std::to_string(i + 1) + "," +
                                          std::to_string(j + 1) + ")");
        return SpdMatrix(n, std::move(entries), Structure::general, 0, 0);
    }

    static SpdMatrix identity(int n) {
        if (n < 1) throw InvalidDimensionError("matrix order must be >= 1");
        std::vector<double> e(static_cast<std::size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i) e[i * n + i] = 1.0;
        return SpdMatrix(n, std::move(e), Structure::general, 0, 0);
    }

    int order() const { return n_; }
    double at(int i, int j) const { return a_[i * static_cast<std::size_t>(n_) + j]; }
    const std::vector<double>& entries() const { return a_; }
    Structure structure() const { return structure_; }
    int grid_rows() const { return grid_m_; }
    int grid_cols() const { return grid_n_; }

    /// Full ordered spectrum, computed once and cached.
    const std::vector<double>& spectrum() const {
        std::call_once(cache_->flag, [this] {
            cache_->values = detail::jacobi_eigenvalues(a_, n_);
        });
        return cache_->values;
    }

    double lambda_min() const { return spectrum().front(); }
    double lambda_max() const { return spectrum().back(); }

    /// Throws unless lambda_1 clears the positive-definiteness floor.
    void require_positive_definite() const {
        if (lambda_min() <= 1e-10)
            throw StructuralError("matrix is not positive-definite: lambda_1 = " +
                                  fmt17(lambda_min()));
    }

    double quadratic_form(std::span<const double> u) const {
        if (static_cast<int>(u.size()) != n_)
            throw InvalidDimensionError("vector length does not match matrix order");
        double s = 0.0;
        for (int i = 0; i < n_; ++i) {
            double row = 0.0;
            const double* ai = a_.data() + i * static_cast<std::size_t>(n_);
            for (int j = 0; j < n_; ++j) row += ai[j] * u[j];
            s += u[i] * row;
        }
        return s;
    }

    void mul(std::span<const double> u, std::span<double> out) const {
        if (static_cast<int>(u.size()) != n_ || static_cast<int>(out.size()) != n_)
            throw InvalidDimensionError("vector length does not match matrix order");
        for (int i = 0; i < n_; ++i) {
            double row = 0.0;
            const double* ai = a_.data() + i * static_cast<std::size_t>(n_);
            for (int j = 0; j < n_; ++j) row += ai[j] * u[j];
            out[i] = row;
        }
    }

    double trace() const {
        double s = 0.0;
        for (int i = 0; i < n_; ++i) s += at(i, i);
        return s;
    }

    /// Sum of strictly-upper entries a_ij, i < j.
    double upper_offdiag_sum() const {
        double s = 0.0;
        for (int i = 0; i < n_; ++i)
            for (int j = i + 1; j < n_; ++j) s += at(i, j);
        return s;
    }

    /// 1^t A 1, the all-ones quadratic form. Equals trace + 2*sum_{i<j} a_ij.
    double ones_form() const {
        double s = 0.0;
        for (double v : a_) s += v;
        return s;
    }

    std::string describe() const {
        switch (structure_) {
            case Structure::second_difference:
                return "second-difference n=" + std::to_string(n_);
            case Structure::grid_laplacian:
                return "grid-laplacian " + std::to_string(grid_m_) + "x" +
                       std::to_string(grid_n_);
            default:
                return "general n=" + std::to_string(n_);
        }
    }

private:
    friend SpdMatrix second_difference_matrix(int);
    friend std::pair<SpdMatrix, GridIndexMap> grid_laplacian(int, int);

    struct Cache {
        std::once_flag flag;
        std::vector<double> values;
    };

    SpdMatrix(int n, std::vector<double> entries, Structure s, int gm, int gn)
        : n_(n), a_(std::move(entries)), structure_(s), grid_m_(gm), grid_n_(gn),
          cache_(std::make_shared<Cache>()) {}

    int n_;
    std::vector<double> a_;
    Structure structure_;
    int grid_m_, grid_n_;
    std::shared_ptr<Cache> cache_;
};

/// Tridiagonal matrix with 2 on the diagonal and -1 off it.
inline SpdMatrix second_difference_matrix(int n) {
    if (n < 1) throw InvalidDimensionError("second-difference order must be >= 1");
    std::vector<double> e(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        e[i * static_cast<std::size_t>(n) + i] = 2.0;
        if (i + 1 < n) {
            e[i * static_cast<std::size_t>(n) + i + 1] = -1.0;
            e[(i + 1) * static_cast<std::size_t>(n) + i] = -1.0;
        }
    }
    return SpdMatrix(n, std::move(e), SpdMatrix::Structure::second_difference, 0, 0);
}

/// Block-tridiagonal mn x mn matrix: D blocks (m x m tridiagonal, 4 on the
/// diagonal, -1 off) on the diagonal and -I_m on the off-diagonal blocks.
/// Node (i,j) couples to its four grid neighbors; boundary values are zero.
inline std::pair<SpdMatrix, GridIndexMap> grid_laplacian(int m, int n) {
    if (m < 1 || n < 1) throw InvalidDimensionError("grid dimensions must be >= 1");
    const int N = m * n;
    GridIndexMap map{m, n};
    std::vector<double> e(static_cast<std::size_t>(N) * N, 0.0);
    auto set = [&](int k, int l, double v) {
        e[(k - 1) * static_cast<std::size_t>(N) + (l - 1)] = v;
    };
    for (int j = 1; j <= n; ++j) {
        for (int i = 1; i <= m; ++i) {
            const int k = map.to_linear(i, j);
            set(k, k, 4.0);
            if (i > 1) set(k, map.to_linear(i - 1, j), -1.0);
            if (i < m) set(k, map.to_linear(i + 1, j), -1.0);
            if (j > 1) set(k, map.to_linear(i, j - 1), -1.0);
            if (j < n) set(k, map.to_linear(i, j + 1), -1.0);
        }
    }
    return {SpdMatrix(N, std::move(e), SpdMatrix::Structure::grid_laplacian, m, n),
            map};
}

/// The sup-norm box radius c = sqrt(2r / lambda_1): every u with
/// u^t A u < 2r has |u_k| <= c.
inline double sup_norm_radius(const SpdMatrix& A, double r) {
    if (!(r > 0.0)) throw InvalidDimensionError("sup_norm_radius requires r > 0");
    A.require_positive_definite();
    return std::sqrt(2.0 * r / A.lambda_min());
}

} // namespace varsolve
