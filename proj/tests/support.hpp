#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

#include "apgkit/operators.hpp"

namespace testing {

using apgkit::Index;
using apgkit::Matrix;
using apgkit::Vector;

inline Matrix gaussian(Index r, Index c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix M(r, c);
    for (Index j = 0; j < c; ++j)
        for (Index i = 0; i < r; ++i) M(i, j) = n(rng);
    return M;
}

inline Vector gaussian(Index r, std::uint64_t seed) { return gaussian(r, 1, seed).col(0); }

/// Orthonormal basis of the column space, via full-pivot SVD.
inline Matrix range_basis(const Matrix& M, double tol = 1e-10) {
    if (M.cols() == 0) return Matrix(M.rows(), 0);
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU);
    const auto& s = svd.singularValues();
    Index r = 0;
    while (r < s.size() && s[r] > tol * std::max(1.0, s[0])) ++r;
    return svd.matrixU().leftCols(r);
}

/// Orthonormal basis of the null space, via full SVD.
inline Matrix null_basis(const Matrix& M, double tol = 1e-10) {
    if (M.rows() == 0) return Matrix::Identity(M.cols(), M.cols());
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    Index r = 0;
    while (r < s.size() && s[r] > tol * std::max(1.0, s[0])) ++r;
    return svd.matrixV().rightCols(M.cols() - r);
}

}  // namespace testing
