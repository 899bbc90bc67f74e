#pragma once

#include <vector>

namespace podinn {

/// Row-major dense matrix, just enough for the small port-space blocks.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    [[nodiscard]] double at(int r, int c) const {
        return data[static_cast<std::size_t>(r) * cols + c];
    }
};

struct SvdResult {
    std::vector<double> singular_values;     ///< descending
    Matrix right_vectors;                    ///< columns are right singular vectors, same order
};

/// One-sided Jacobi SVD; adequate for the <=20-dimensional blocks used here.
SvdResult jacobi_svd(const Matrix& a);

struct RankResult {
    int rank = 0;
    std::vector<double> singular_values;
    Matrix nullspace;  ///< columns span the (numerical) kernel
};

/// Numerical rank with threshold `rel_tol * sigma_max`, plus a kernel basis.
RankResult numerical_rank(const Matrix& a, double rel_tol = 1e-8);

}  // namespace podinn
