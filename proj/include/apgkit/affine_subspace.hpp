#pragma once

#include <Eigen/Dense>

#include <variant>

#include "apgkit/operators.hpp"

namespace apgkit {

/// Closed affine subspace U of R^n in one of three representations.
///
///  - orthonormal rows: U = {x : Cx = d} with C Cᵀ = Id,
///  - hyperplane:       U = {x : <normal, x> = offset},
///  - basis:            U = anchor + ran(B) with BᵀB = Id.
///
/// The basis form is what the solution-set oracle works with; `to_basis()`
/// converts any representation into it, normalizing the anchor to P_U 0.
template <typename Scalar>
class AffineSubspace {
public:
    using Vec = VectorX<Scalar>;
    using Mat = MatrixX<Scalar>;

    struct OrthonormalRows {
        LinearMap<Scalar> C;
        Vec d;
    };
    struct Hyperplane {
        Vec normal;
        Scalar offset;
    };
    struct Basis {
        Vec anchor;
        Mat basis;
    };
    using Representation = std::variant<OrthonormalRows, Hyperplane, Basis>;

    static AffineSubspace orthonormal_rows(LinearMap<Scalar> C, Vec d) {
        require_dims(d.size(), C.rows(), "AffineSubspace::orthonormal_rows d");
        if (!detail::rows_orthonormal(C, Scalar(1e-10)))
            throw ConstructionError("AffineSubspace: rows of C are not orthonormal");
        return AffineSubspace(OrthonormalRows{std::move(C), std::move(d)});
    }

    static AffineSubspace hyperplane(Vec normal, Scalar offset) {
        if (!(normal.norm() > 0)) throw ConstructionError("AffineSubspace: hyperplane normal must be nonzero");
        return AffineSubspace(Hyperplane{std::move(normal), offset});
    }

    static AffineSubspace from_basis(Vec anchor, Mat basis) {
        require_dims(basis.rows(), anchor.size(), "AffineSubspace::from_basis basis rows");
        const Index r = basis.cols();
        if (r > 0 && (basis.transpose() * basis - Mat::Identity(r, r)).norm() > Scalar(1e-10) * std::sqrt(Scalar(r)))
            throw ConstructionError("AffineSubspace: basis columns are not orthonormal");
        return AffineSubspace(Basis{std::move(anchor), std::move(basis)});
    }

    static AffineSubspace whole_space(Index dim) {
        return AffineSubspace(Basis{Vec::Zero(dim), Mat::Identity(dim, dim)});
    }

    const Representation& representation() const { return rep_; }

    Index dim() const {
        return std::visit(
            [](const auto& r) -> Index {
                using T = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<T, OrthonormalRows>) return r.C.cols();
                else if constexpr (std::is_same_v<T, Hyperplane>) return r.normal.size();
                else return r.anchor.size();
            },
            rep_);
    }

    /// P_U x.
    Vec project(const Vec& x) const {
        require_dims(x.size(), dim(), "project_affine");
        return std::visit(
            [&](const auto& r) -> Vec {
                using T = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<T, OrthonormalRows>) {
                    return x - r.C.adjoint_apply(r.C.apply(x) - r.d);
                } else if constexpr (std::is_same_v<T, Hyperplane>) {
                    return x - ((r.normal.dot(x) - r.offset) / r.normal.squaredNorm()) * r.normal;
                } else {
                    return r.anchor + r.basis * (r.basis.transpose() * (x - r.anchor));
                }
            },
            rep_);
    }

    /// P_{par U} v, the linear part of P_U.
    Vec project_parallel(const Vec& v) const {
        require_dims(v.size(), dim(), "project_parallel");
        return std::visit(
            [&](const auto& r) -> Vec {
                using T = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<T, OrthonormalRows>) {
                    return v - r.C.adjoint_apply(r.C.apply(v));
                } else if constexpr (std::is_same_v<T, Hyperplane>) {
                    return v - (r.normal.dot(v) / r.normal.squaredNorm()) * r.normal;
                } else {
                    return r.basis * (r.basis.transpose() * v);
                }
            },
            rep_);
    }

    LinearMap<Scalar> parallel_projector() const {
        AffineSubspace self = *this;
        return LinearMap<Scalar>(
            dim(), dim(), MapKind::Composition, [self](const Vec& v) { return self.project_parallel(v); },
            [self](const Vec& v) { return self.project_parallel(v); });
    }

    /// Norm of the residual of the defining equations.
    Scalar residual(const Vec& x) const {
        require_dims(x.size(), dim(), "AffineSubspace::residual");
        return std::visit(
            [&](const auto& r) -> Scalar {
                using T = std::decay_t<decltype(r)>;
                using std::abs;
                if constexpr (std::is_same_v<T, OrthonormalRows>) return (r.C.apply(x) - r.d).norm();
                else if constexpr (std::is_same_v<T, Hyperplane>)
                    return abs(r.normal.dot(x) - r.offset) / r.normal.norm();
                else return (x - project(x)).norm();
            },
            rep_);
    }

    bool contains(const Vec& x, Scalar tol = Scalar(1e-10)) const {
        return residual(x) <= tol * (Scalar(1) + x.norm());
    }

    /// u_0 = P_U 0.
    Vec origin_projection() const { return project(Vec::Zero(dim())); }

    /// Basis form with anchor u_0 = P_U 0 and an orthonormal basis of par U.
    Basis to_basis() const {
        return std::visit(
            [&](const auto& r) -> Basis {
                using T = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<T, Basis>) {
                    return Basis{r.anchor - r.basis * (r.basis.transpose() * r.anchor), r.basis};
                } else if constexpr (std::is_same_v<T, Hyperplane>) {
                    const Vec unit = r.normal / r.normal.norm();
                    return Basis{(r.offset / r.normal.squaredNorm()) * r.normal, orthogonal_complement(unit)};
                } else {
                    Vec u0 = r.C.adjoint_apply(r.d);
                    if (auto rest = r.C.row_complement()) return Basis{std::move(u0), rest->adjoint().to_dense()};
                    return Basis{std::move(u0), orthogonal_complement(r.C.adjoint().to_dense())};
                }
            },
            rep_);
    }

    /// Orthonormal basis of ran(M)^⊥ for M with orthonormal columns.
    static Mat orthogonal_complement(const Mat& M) {
        const Index n = M.rows();
        const Index k = M.cols();
        if (k == 0) return Mat::Identity(n, n);
        Eigen::HouseholderQR<Mat> qr(M);
        Mat Q = qr.householderQ() * Mat::Identity(n, n);
        return Q.rightCols(n - k);
    }

private:
    explicit AffineSubspace(Representation rep) : rep_(std::move(rep)) {}
    Representation rep_;
};

template <typename Scalar>
VectorX<Scalar> project_affine(const AffineSubspace<Scalar>& U, const VectorX<Scalar>& x) {
    return U.project(x);
}

using AffineSubspaced = AffineSubspace<double>;

}  // namespace apgkit
