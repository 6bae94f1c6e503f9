#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "apgkit/errors.hpp"

namespace apgkit {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

namespace detail {
/// Non-deduced vector parameter, so Eigen expressions convert implicitly.
template <typename Scalar>
using Vec_t = std::type_identity_t<VectorX<Scalar>>;
}  // namespace detail

enum class MapKind { Dense, RowSampling, OrthonormalRows, Dct2d, Composition, ScaledSum, Identity };

inline const char* to_string(MapKind kind) {
    switch (kind) {
        case MapKind::Dense: return "dense";
        case MapKind::RowSampling: return "row-sampling";
        case MapKind::OrthonormalRows: return "orthonormal-rows";
        case MapKind::Dct2d: return "dct2d";
        case MapKind::Composition: return "composition";
        case MapKind::ScaledSum: return "scaled-sum";
        case MapKind::Identity: return "identity";
    }
    return "unknown";
}

/// Matrix-free linear operator X -> Y together with its adjoint.
///
/// Instances are immutable and cheap to copy (shared state). `apply`
/// accepts vectors of length `cols()` and returns length `rows()`;
/// `adjoint_apply` goes the other way. Dense maps keep their matrix so
/// `to_dense()` is free for them; every other kind materializes by
/// applying to unit vectors.
template <typename Scalar>
class LinearMap {
public:
    using Vec = VectorX<Scalar>;
    using Mat = MatrixX<Scalar>;
    using Action = std::function<Vec(const Vec&)>;

    LinearMap(Index rows, Index cols, MapKind kind, Action apply, Action adjoint_apply)
        : impl_(std::make_shared<Impl>()) {
        impl_->rows = rows;
        impl_->cols = cols;
        impl_->kind = kind;
        impl_->apply = std::move(apply);
        impl_->adjoint = std::move(adjoint_apply);
    }

    Index rows() const { return impl_->rows; }
    Index cols() const { return impl_->cols; }
    MapKind kind() const { return impl_->kind; }

    Vec apply(const Vec& x) const {
        require_dims(x.size(), cols(), "LinearMap::apply");
        return impl_->apply(x);
    }

    Vec adjoint_apply(const Vec& y) const {
        require_dims(y.size(), rows(), "LinearMap::adjoint_apply");
        return impl_->adjoint(y);
    }

    LinearMap adjoint() const {
        LinearMap out(cols(), rows(), kind(), impl_->adjoint, impl_->apply);
        if (impl_->dense) out.impl_->dense = std::make_shared<const Mat>(impl_->dense->transpose());
        return out;
    }

    /// Applies the map column by column.
    Mat apply_columns(const Mat& X) const {
        require_dims(X.rows(), cols(), "LinearMap::apply_columns");
        if (impl_->dense) return (*impl_->dense) * X;
        Mat out(rows(), X.cols());
        for (Index j = 0; j < X.cols(); ++j) out.col(j) = impl_->apply(X.col(j));
        return out;
    }

    Mat to_dense() const {
        if (impl_->dense) return *impl_->dense;
        // Materialize through whichever side is cheaper to sweep.
        if (rows() < cols()) {
            Mat At(cols(), rows());
            Vec e = Vec::Zero(rows());
            for (Index i = 0; i < rows(); ++i) {
                e[i] = Scalar(1);
                At.col(i) = impl_->adjoint(e);
                e[i] = Scalar(0);
            }
            return At.transpose();
        }
        Mat M(rows(), cols());
        Vec e = Vec::Zero(cols());
        for (Index j = 0; j < cols(); ++j) {
            e[j] = Scalar(1);
            M.col(j) = impl_->apply(e);
            e[j] = Scalar(0);
        }
        return M;
    }

    const Mat* dense_matrix() const { return impl_->dense.get(); }

    /// For orthonormal-row maps cut out of a square orthogonal map: the
    /// map made of the remaining rows. Empty for every other kind.
    std::optional<LinearMap> row_complement() const {
        if (!impl_->parent) return std::nullopt;
        const LinearMap& parent = *impl_->parent;
        std::vector<bool> taken(static_cast<std::size_t>(parent.rows()), false);
        for (Index i : impl_->selected) taken[static_cast<std::size_t>(i)] = true;
        std::vector<Index> rest;
        for (Index i = 0; i < parent.rows(); ++i)
            if (!taken[static_cast<std::size_t>(i)]) rest.push_back(i);
        return select_rows_unchecked(parent, std::move(rest));
    }

    // Factory hooks (used by the free functions below).
    static LinearMap from_dense(Mat M) {
        auto shared = std::make_shared<const Mat>(std::move(M));
        LinearMap out(
            shared->rows(), shared->cols(), MapKind::Dense,
            [shared](const Vec& x) -> Vec { return (*shared) * x; },
            [shared](const Vec& y) -> Vec { return shared->transpose() * y; });
        out.impl_->dense = shared;
        return out;
    }

    static LinearMap select_rows_unchecked(const LinearMap& parent, std::vector<Index> indices) {
        auto idx = std::make_shared<const std::vector<Index>>(std::move(indices));
        const Index total = parent.rows();
        LinearMap out(
            static_cast<Index>(idx->size()), parent.cols(), MapKind::OrthonormalRows,
            [parent, idx](const Vec& x) -> Vec {
                const Vec full = parent.apply(x);
                Vec y(static_cast<Index>(idx->size()));
                for (std::size_t i = 0; i < idx->size(); ++i) y[static_cast<Index>(i)] = full[(*idx)[i]];
                return y;
            },
            [parent, idx, total](const Vec& y) -> Vec {
                Vec full = Vec::Zero(total);
                for (std::size_t i = 0; i < idx->size(); ++i) full[(*idx)[i]] = y[static_cast<Index>(i)];
                return parent.adjoint_apply(full);
            });
        out.impl_->parent = std::make_shared<const LinearMap>(parent);
        out.impl_->selected = *idx;
        return out;
    }

private:
    struct Impl {
        Index rows = 0;
        Index cols = 0;
        MapKind kind = MapKind::Dense;
        Action apply;
        Action adjoint;
        std::shared_ptr<const Mat> dense;
        std::shared_ptr<const LinearMap> parent;
        std::vector<Index> selected;
    };
    std::shared_ptr<Impl> impl_;
};

using LinearMapd = LinearMap<double>;

template <typename Scalar>
VectorX<Scalar> operator*(const LinearMap<Scalar>& A, const VectorX<Scalar>& x) {
    return A.apply(x);
}

template <typename Scalar>
LinearMap<Scalar> dense_map(MatrixX<Scalar> M) {
    return LinearMap<Scalar>::from_dense(std::move(M));
}

template <typename Scalar>
LinearMap<Scalar> identity_map(Index n) {
    using Vec = VectorX<Scalar>;
    return LinearMap<Scalar>(
        n, n, MapKind::Identity, [](const Vec& x) { return x; }, [](const Vec& y) { return y; });
}

template <typename Scalar>
LinearMap<Scalar> adjoint(const LinearMap<Scalar>& A) {
    return A.adjoint();
}

/// outer ∘ inner.
template <typename Scalar>
LinearMap<Scalar> compose(const LinearMap<Scalar>& outer, const LinearMap<Scalar>& inner) {
    using Vec = VectorX<Scalar>;
    if (outer.cols() != inner.rows())
        throw DimensionError("compose: inner map has " + std::to_string(inner.rows()) +
                             " rows, outer expects " + std::to_string(outer.cols()));
    return LinearMap<Scalar>(
        outer.rows(), inner.cols(), MapKind::Composition,
        [outer, inner](const Vec& x) -> Vec { return outer.apply(inner.apply(x)); },
        [outer, inner](const Vec& y) -> Vec { return inner.adjoint_apply(outer.adjoint_apply(y)); });
}

/// a·A + b·B.
template <typename Scalar>
LinearMap<Scalar> scaled_sum(Scalar a, const LinearMap<Scalar>& A, Scalar b, const LinearMap<Scalar>& B) {
    using Vec = VectorX<Scalar>;
    if (A.rows() != B.rows() || A.cols() != B.cols())
        throw DimensionError("scaled_sum: operand shapes differ");
    return LinearMap<Scalar>(
        A.rows(), A.cols(), MapKind::ScaledSum,
        [a, A, b, B](const Vec& x) -> Vec { return a * A.apply(x) + b * B.apply(x); },
        [a, A, b, B](const Vec& y) -> Vec { return a * A.adjoint_apply(y) + b * B.adjoint_apply(y); });
}

template <typename Scalar>
LinearMap<Scalar> row_sampling_map(Index total, std::vector<Index> indices) {
    using Vec = VectorX<Scalar>;
    std::vector<bool> seen(static_cast<std::size_t>(std::max<Index>(total, 0)), false);
    for (Index i : indices) {
        if (i < 0 || i >= total)
            throw ConstructionError("row_sampling_map: index " + std::to_string(i) + " out of range [0, " +
                                    std::to_string(total) + ")");
        if (seen[static_cast<std::size_t>(i)])
            throw ConstructionError("row_sampling_map: duplicate index " + std::to_string(i));
        seen[static_cast<std::size_t>(i)] = true;
    }
    auto idx = std::make_shared<const std::vector<Index>>(std::move(indices));
    return LinearMap<Scalar>(
        static_cast<Index>(idx->size()), total, MapKind::RowSampling,
        [idx](const Vec& x) -> Vec {
            Vec y(static_cast<Index>(idx->size()));
            for (std::size_t i = 0; i < idx->size(); ++i) y[static_cast<Index>(i)] = x[(*idx)[i]];
            return y;
        },
        [idx, total](const Vec& y) -> Vec {
            Vec x = Vec::Zero(total);
            for (std::size_t i = 0; i < idx->size(); ++i) x[(*idx)[i]] = y[static_cast<Index>(i)];
            return x;
        });
}

/// Orthonormal 1-D DCT-II matrix: row k is s_k cos(pi (2j+1) k / 2n) with
/// s_0 = sqrt(1/n) and s_k = sqrt(2/n) otherwise.
template <typename Scalar>
MatrixX<Scalar> dct_matrix(Index n) {
    if (n < 1) throw ConstructionError("dct_matrix: n must be >= 1");
    using std::cos;
    using std::sqrt;
    const Scalar pi = Scalar(3.14159265358979323846264338327950288L);
    MatrixX<Scalar> D(n, n);
    for (Index k = 0; k < n; ++k) {
        const Scalar scale = k == 0 ? sqrt(Scalar(1) / Scalar(n)) : sqrt(Scalar(2) / Scalar(n));
        for (Index j = 0; j < n; ++j)
            D(k, j) = scale * cos(pi * Scalar(2 * j + 1) * Scalar(k) / Scalar(2 * n));
    }
    return D;
}

/// Orthonormal 2-D DCT-II on n×n images flattened row-major (Q ⊗ Q);
/// rows are transformed first, then columns. The adjoint is the inverse.
template <typename Scalar>
LinearMap<Scalar> dct2d_map(Index n) {
    using Vec = VectorX<Scalar>;
    using RowMat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    auto D = std::make_shared<const MatrixX<Scalar>>(dct_matrix<Scalar>(n));
    return LinearMap<Scalar>(
        n * n, n * n, MapKind::Dct2d,
        [D, n](const Vec& x) -> Vec {
            Eigen::Map<const RowMat> img(x.data(), n, n);
            RowMat rows = img * D->transpose();
            Vec out(n * n);
            Eigen::Map<RowMat>(out.data(), n, n).noalias() = (*D) * rows;
            return out;
        },
        [D, n](const Vec& y) -> Vec {
            Eigen::Map<const RowMat> coef(y.data(), n, n);
            RowMat cols = D->transpose() * coef;
            Vec out(n * n);
            Eigen::Map<RowMat>(out.data(), n, n).noalias() = cols * (*D);
            return out;
        });
}

namespace detail {

template <typename Scalar>
VectorX<Scalar> gaussian_vector(Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    VectorX<Scalar> v(n);
    for (Index i = 0; i < n; ++i) v[i] = Scalar(normal(rng));
    return v;
}

/// Randomized check of C Cᵀ = Id.
template <typename Scalar>
bool rows_orthonormal(const LinearMap<Scalar>& C, Scalar tol, int trials = 3, std::uint64_t seed = 0x5eed) {
    std::mt19937_64 rng(seed);
    for (int t = 0; t < trials; ++t) {
        const VectorX<Scalar> y = gaussian_vector<Scalar>(C.rows(), rng);
        if ((C.apply(C.adjoint_apply(y)) - y).norm() > tol * y.norm()) return false;
    }
    return true;
}

}  // namespace detail

/// Rows `indices` of a square orthogonal map Q (e.g. the 2-D DCT). The
/// result knows its row complement.
template <typename Scalar>
LinearMap<Scalar> orthonormal_rows(const LinearMap<Scalar>& Q, std::vector<Index> indices) {
    if (Q.rows() != Q.cols()) throw ConstructionError("orthonormal_rows: parent map must be square");
    // validates distinctness and range
    (void)row_sampling_map<Scalar>(Q.rows(), indices);
    if (!detail::rows_orthonormal(Q, Scalar(1e-10)))
        throw ConstructionError("orthonormal_rows: parent map is not orthogonal");
    return LinearMap<Scalar>::select_rows_unchecked(Q, std::move(indices));
}

/// Dense matrix with orthonormal rows (C Cᵀ = Id), checked on construction.
template <typename Scalar>
LinearMap<Scalar> orthonormal_rows(MatrixX<Scalar> C) {
    const Index m = C.rows();
    if ((C * C.transpose() - MatrixX<Scalar>::Identity(m, m)).norm() > Scalar(1e-10) * std::sqrt(Scalar(m) + 1))
        throw ConstructionError("orthonormal_rows: rows of C are not orthonormal");
    auto base = dense_map<Scalar>(std::move(C));
    using Vec = VectorX<Scalar>;
    LinearMap<Scalar> out(
        base.rows(), base.cols(), MapKind::OrthonormalRows, [base](const Vec& x) { return base.apply(x); },
        [base](const Vec& y) { return base.adjoint_apply(y); });
    return out;
}

/// Power iteration on A*A did not reach the requested tolerance.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, std::vector<double> last_iterate, double last_estimate)
        : Error("non-convergence", what), last_iterate_(std::move(last_iterate)), last_estimate_(last_estimate) {}
    const std::vector<double>& last_iterate() const { return last_iterate_; }
    double last_estimate() const { return last_estimate_; }

private:
    std::vector<double> last_iterate_;
    double last_estimate_;
};

template <typename Scalar>
struct PowerIterationResult {
    Scalar value = 0;
    Index iterations = 0;
    std::uint64_t seed = 0;
};

inline constexpr std::uint64_t kDefaultPowerSeed = 20240917;
inline constexpr double kLipschitzSafety = 1.0 + 1e-6;

/// Estimates ‖A*A‖ by power iteration from a seeded Gaussian start. The
/// returned value is a Rayleigh quotient, hence never above the true norm
/// (up to rounding).
template <typename Scalar>
PowerIterationResult<Scalar> power_iteration_normal(const LinearMap<Scalar>& A, Scalar tol = Scalar(1e-12),
                                                    Index max_iter = 100000,
                                                    std::uint64_t seed = kDefaultPowerSeed) {
    if (!(tol > 0)) throw PreconditionError("operator_norm_sq: tol must be positive");
    PowerIterationResult<Scalar> result;
    result.seed = seed;
    if (A.rows() == 0 || A.cols() == 0) return result;

    std::mt19937_64 rng(seed);
    VectorX<Scalar> v = detail::gaussian_vector<Scalar>(A.cols(), rng);
    v /= v.norm();
    Scalar previous = -1;
    for (Index it = 1; it <= max_iter; ++it) {
        const VectorX<Scalar> w = A.adjoint_apply(A.apply(v));
        const Scalar lambda = v.dot(w);
        const Scalar wn = w.norm();
        result.value = lambda;
        result.iterations = it;
        if (wn == Scalar(0)) {
            result.value = 0;
            return result;
        }
        using std::abs;
        if (previous >= 0 && abs(lambda - previous) <= tol * abs(lambda)) return result;
        previous = lambda;
        v = w / wn;
    }
    std::vector<double> last(static_cast<std::size_t>(v.size()));
    for (Index i = 0; i < v.size(); ++i) last[static_cast<std::size_t>(i)] = double(v[i]);
    throw NonConvergence("operator_norm_sq: no convergence in " + std::to_string(max_iter) + " iterations",
                         std::move(last), double(result.value));
}

template <typename Scalar>
Scalar operator_norm_sq(const LinearMap<Scalar>& A, Scalar tol = Scalar(1e-12), Index max_iter = 100000,
                        std::uint64_t seed = kDefaultPowerSeed) {
    return power_iteration_normal(A, tol, max_iter, seed).value;
}

/// Lipschitz constant fed to the stepsize 1/lip from a Rayleigh estimate.
template <typename Scalar>
Scalar safe_lipschitz(Scalar estimate) {
    return estimate * Scalar(kLipschitzSafety);
}

/// x ↦ offset + linear(x).
template <typename Scalar>
class AffineMap {
public:
    using Vec = VectorX<Scalar>;

    AffineMap(LinearMap<Scalar> linear, Vec offset) : linear_(std::move(linear)), offset_(std::move(offset)) {
        if (linear_.rows() != linear_.cols()) throw DimensionError("AffineMap: linear part must be square");
        require_dims(offset_.size(), linear_.rows(), "AffineMap offset");
    }

    Vec operator()(const Vec& x) const { return offset_ + linear_.apply(x); }
    const LinearMap<Scalar>& linear() const { return linear_; }
    const Vec& offset() const { return offset_; }
    Index dim() const { return linear_.rows(); }

private:
    LinearMap<Scalar> linear_;
    Vec offset_;
};

/// Componentwise max with 0: projection onto the nonnegative orthant.
template <typename Derived>
auto project_orthant(const Eigen::MatrixBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    return x.cwiseMax(Scalar(0)).eval();
}

}  // namespace apgkit
