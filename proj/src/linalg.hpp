#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace qnkit::detail {

using Matrix = std::vector<std::vector<double>>;

// Gaussian elimination with partial pivoting. Returns nullopt when a pivot
// falls below `singular_tol` relative to the largest entry of the matrix.
inline std::optional<std::vector<double>> solve_dense(Matrix a, std::vector<double> b, double singular_tol = 1e-13)
{
    const std::size_t n = a.size();
    double scale = 0.0;
    for (const auto& row : a) {
        for (double v : row) {
            scale = std::max(scale, std::abs(v));
        }
    }
    if (scale == 0.0) {
        return std::nullopt;
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) {
                pivot = r;
            }
        }
        if (std::abs(a[pivot][col]) <= singular_tol * scale) {
            return std::nullopt;
        }
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) {
                continue;
            }
            for (std::size_t c = col; c < n; ++c) {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) {
            s -= a[i][c] * x[c];
        }
        x[i] = s / a[i][i];
    }
    return x;
}

} // namespace qnkit::detail
