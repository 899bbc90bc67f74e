#include "podinn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace podinn {

SvdResult jacobi_svd(const Matrix& a) {
    const int m = a.rows;
    const int n = a.cols;
    Matrix u = a;
    Matrix v(n, n);
    for (int i = 0; i < n; ++i) v.at(i, i) = 1.0;

    const double eps = 1e-15;
    for (int sweep = 0; sweep < 60; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double app = 0.0;
                double aqq = 0.0;
                double apq = 0.0;
                for (int i = 0; i < m; ++i) {
                    app += u.at(i, p) * u.at(i, p);
                    aqq += u.at(i, q) * u.at(i, q);
                    apq += u.at(i, p) * u.at(i, q);
                }
                if (std::abs(apq) <= eps * std::sqrt(app * aqq) || apq == 0.0) continue;
                rotated = true;
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double cs = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = cs * t;
                for (int i = 0; i < m; ++i) {
                    const double up = u.at(i, p);
                    const double uq = u.at(i, q);
                    u.at(i, p) = cs * up - sn * uq;
                    u.at(i, q) = sn * up + cs * uq;
                }
                for (int i = 0; i < n; ++i) {
                    const double vp = v.at(i, p);
                    const double vq = v.at(i, q);
                    v.at(i, p) = cs * vp - sn * vq;
                    v.at(i, q) = sn * vp + cs * vq;
                }
            }
        }
        if (!rotated) break;
    }

    std::vector<double> sigma(n, 0.0);
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += u.at(i, j) * u.at(i, j);
        sigma[j] = std::sqrt(s);
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) { return sigma[x] > sigma[y]; });

    SvdResult out;
    out.singular_values.resize(n);
    out.right_vectors = Matrix(n, n);
    for (int j = 0; j < n; ++j) {
        out.singular_values[j] = sigma[order[j]];
        for (int i = 0; i < n; ++i) out.right_vectors.at(i, j) = v.at(i, order[j]);
    }
    return out;
}

RankResult numerical_rank(const Matrix& a, double rel_tol) {
    SvdResult svd = jacobi_svd(a);
    RankResult out;
    out.singular_values = svd.singular_values;
    const double smax = svd.singular_values.empty() ? 0.0 : svd.singular_values.front();
    const double tol = rel_tol * smax;
    int rank = 0;
    for (double s : svd.singular_values) {
        if (smax > 0.0 && s > tol) ++rank;
    }
    out.rank = rank;
    const int n = a.cols;
    const int null_dim = n - rank;
    out.nullspace = Matrix(n, null_dim);
    for (int j = 0; j < null_dim; ++j) {
        for (int i = 0; i < n; ++i) {
            out.nullspace.at(i, j) = svd.right_vectors.at(i, rank + j);
        }
    }
    return out;
}

}  // namespace podinn
