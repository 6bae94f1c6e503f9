#pragma once

#include <Eigen/Dense>

#include <cstdlib>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <utility>

#include "apgkit/affine_subspace.hpp"
#include "apgkit/operators.hpp"

namespace apgkit {

inline constexpr Index kDefaultOracleCap = 4096;

/// Largest ambient dimension the dense oracle accepts. APGKIT_ORACLE_CAP
/// overrides the default of 4096.
inline Index oracle_cap() {
    if (const char* env = std::getenv("APGKIT_ORACLE_CAP")) {
        char* end = nullptr;
        const long long v = std::strtoll(env, &end, 10);
        if (end != env && v > 0) return static_cast<Index>(v);
    }
    return kDefaultOracleCap;
}

/// Singular values at or below this fraction of σ_max count as zero.
inline constexpr double kRankTolerance = 1e-10;

/// S = argmin over U of ½‖Ax − b‖², stored as anchor + par S with
/// par S = ker A ∩ par U.
///
/// par S is kept implicitly as B·(Id − W Wᵀ) where B is an orthonormal basis
/// of par U and W an orthonormal basis of the row space of AB; this avoids a
/// full SVD when dim par U is large. `basis()` produces an explicit
/// orthonormal basis on request.
template <typename Scalar>
class SolutionSet {
public:
    using Vec = VectorX<Scalar>;
    using Mat = MatrixX<Scalar>;

    SolutionSet(Vec anchor, Scalar mu, Mat par_u_basis, Mat row_space, Scalar sigma_max, Scalar sigma_min_pos)
        : anchor_(std::move(anchor)),
          mu_(mu),
          par_u_(std::move(par_u_basis)),
          row_space_(std::move(row_space)),
          sigma_max_(sigma_max),
          sigma_min_pos_(sigma_min_pos) {}

    const Vec& anchor() const { return anchor_; }
    Scalar mu() const { return mu_; }
    Index dim() const { return anchor_.size(); }
    Index dim_par_U() const { return par_u_.cols(); }
    Index rank_AB() const { return row_space_.cols(); }
    Index dim_par_S() const { return dim_par_U() - rank_AB(); }
    Scalar sigma_max() const { return sigma_max_; }
    /// Smallest singular value of A restricted to par U above the rank cut (0 when rank is 0).
    Scalar sigma_min_positive() const { return sigma_min_pos_; }
    const Mat& par_u_basis() const { return par_u_; }
    const Mat& row_space() const { return row_space_; }

    /// P_{par S} v.
    Vec project_par(const Vec& v) const {
        require_dims(v.size(), dim(), "SolutionSet::project_par");
        Vec c = par_u_.transpose() * v;
        if (row_space_.cols() > 0) c -= row_space_ * (row_space_.transpose() * c);
        return par_u_ * c;
    }

    /// P_S x0 = anchor + P_{par S}(x0 − anchor).
    Vec best_approximation(const Vec& x0) const { return anchor_ + project_par(x0 - anchor_); }

    Scalar distance(const Vec& x) const { return (x - best_approximation(x)).norm(); }

    /// Explicit orthonormal basis of par S (columns).
    Mat basis() const {
        const Index r = dim_par_U();
        const Index k = rank_AB();
        if (k == 0) return par_u_;
        if (k == r) return Mat(dim(), 0);
        Eigen::HouseholderQR<Mat> qr(row_space_);
        Mat Q = qr.householderQ() * Mat::Identity(r, r);
        return par_u_ * Q.rightCols(r - k);
    }

private:
    Vec anchor_;
    Scalar mu_;
    Mat par_u_;
    Mat row_space_;
    Scalar sigma_max_;
    Scalar sigma_min_pos_;
};

template <typename Scalar>
class AffineQuadraticProblem;

template <typename Scalar>
SolutionSet<Scalar> solve_solution_set(const AffineQuadraticProblem<Scalar>& p);

/// minimize ½‖Ax − b‖² subject to x ∈ U.
///
/// `lip` must dominate ‖A*A‖. When it is supplied it is certified against a
/// power-iteration estimate; otherwise the estimate inflated by
/// `kLipschitzSafety` is used. The solution set (and μ) is computed lazily by
/// the dense oracle and cached; copies share the cache.
template <typename Scalar>
class AffineQuadraticProblem {
public:
    using Vec = VectorX<Scalar>;

    AffineQuadraticProblem(LinearMap<Scalar> A, Vec b, AffineSubspace<Scalar> U, std::optional<Scalar> lip = {},
                           std::uint64_t power_seed = kDefaultPowerSeed)
        : A_(std::move(A)), b_(std::move(b)), U_(std::move(U)), cache_(std::make_shared<Cache>()) {
        require_dims(b_.size(), A_.rows(), "AffineQuadraticProblem b");
        require_dims(U_.dim(), A_.cols(), "AffineQuadraticProblem U");
        const auto est = power_iteration_normal<Scalar>(A_, Scalar(1e-12), 100000, power_seed);
        lip_estimate_ = est.value;
        power_seed_ = power_seed;
        if (lip) {
            if (!(*lip > 0)) throw ConstructionError("AffineQuadraticProblem: lip must be positive");
            if (*lip < est.value - Scalar(1e-8))
                throw ConstructionError("AffineQuadraticProblem: lip " + std::to_string(double(*lip)) +
                                        " is below the estimated ‖A*A‖ = " + std::to_string(double(est.value)));
            lip_ = *lip;
        } else {
            lip_ = est.value > 0 ? safe_lipschitz(est.value) : Scalar(1);
        }
    }

    const LinearMap<Scalar>& A() const { return A_; }
    const Vec& b() const { return b_; }
    const AffineSubspace<Scalar>& U() const { return U_; }
    Scalar lip() const { return lip_; }
    Scalar lip_estimate() const { return lip_estimate_; }
    std::uint64_t power_seed() const { return power_seed_; }
    Index dim() const { return A_.cols(); }

    Vec residual(const Vec& x) const { return A_.apply(x) - b_; }
    Scalar f(const Vec& x) const { return Scalar(0.5) * residual(x).squaredNorm(); }
    Vec gradient(const Vec& x) const { return A_.adjoint_apply(residual(x)); }

    /// f + ι_U, with membership judged at relative tolerance `tol`.
    Scalar F(const Vec& x, Scalar tol = Scalar(1e-8)) const {
        if (!U_.contains(x, tol)) return std::numeric_limits<Scalar>::infinity();
        return f(x);
    }

    /// P_U(x − ∇f(x)/lip).
    Vec prox_grad_step(const Vec& x) const { return U_.project(x - gradient(x) / lip_); }

    bool oracle_available() const { return dim() <= oracle_cap(); }

    /// Dense oracle for S; throws OracleUnavailable above the cap.
    const SolutionSet<Scalar>& solution_set() const {
        std::call_once(cache_->once, [this] {
            try {
                cache_->set = std::make_shared<const SolutionSet<Scalar>>(solve_solution_set(*this));
            } catch (...) {
                cache_->error = std::current_exception();
            }
        });
        if (cache_->error) std::rethrow_exception(cache_->error);
        return *cache_->set;
    }

    Scalar mu() const { return solution_set().mu(); }

private:
    struct Cache {
        std::once_flag once;
        std::shared_ptr<const SolutionSet<Scalar>> set;
        std::exception_ptr error;
    };

    LinearMap<Scalar> A_;
    Vec b_;
    AffineSubspace<Scalar> U_;
    Scalar lip_ = 1;
    Scalar lip_estimate_ = 0;
    std::uint64_t power_seed_ = 0;
    std::shared_ptr<Cache> cache_;
};

using Problemd = AffineQuadraticProblem<double>;

/// Reduces over U = u_0 + ran B and solves min_z ‖A(u_0 + Bz) − b‖ by SVD.
/// The anchor is u_0 + B z_min-norm, which is P_S 0.
template <typename Scalar>
SolutionSet<Scalar> solve_solution_set(const AffineQuadraticProblem<Scalar>& p) {
    using Vec = VectorX<Scalar>;
    using Mat = MatrixX<Scalar>;
    const Index n = p.dim();
    const Index cap = oracle_cap();
    if (n > cap)
        throw OracleUnavailable("solution-set oracle: dimension " + std::to_string(n) + " exceeds cap " +
                                std::to_string(cap));

    auto basis = p.U().to_basis();
    const Vec& u0 = basis.anchor;
    Mat& B = basis.basis;
    const Index r = B.cols();
    const Vec rhs = p.b() - p.A().apply(u0);

    Vec z = Vec::Zero(r);
    Mat W(r, 0);
    Scalar smax = 0;
    Scalar smin = 0;
    if (r > 0 && p.A().rows() > 0) {
        const Mat AB = p.A().apply_columns(B);
        Eigen::BDCSVD<Mat> svd(AB, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        smax = sv.size() > 0 ? sv[0] : Scalar(0);
        Index rank = 0;
        const Scalar cut = Scalar(kRankTolerance) * smax;
        while (rank < sv.size() && sv[rank] > cut && sv[rank] > Scalar(0)) ++rank;
        if (rank > 0) {
            smin = sv[rank - 1];
            const Mat& Uu = svd.matrixU();
            const Mat& V = svd.matrixV();
            const Vec coeff = (Uu.leftCols(rank).transpose() * rhs).cwiseQuotient(sv.head(rank));
            z = V.leftCols(rank) * coeff;
            W = V.leftCols(rank);
        }
    }
    Vec anchor = u0 + B * z;
    const Scalar mu = p.f(anchor);
    return SolutionSet<Scalar>(std::move(anchor), mu, std::move(B), std::move(W), smax, smin);
}

template <typename Scalar>
VectorX<Scalar> best_approximation(const SolutionSet<Scalar>& s, const detail::Vec_t<Scalar>& x0) {
    return s.best_approximation(x0);
}

template <typename Scalar>
Scalar dist_to_S(const SolutionSet<Scalar>& s, const detail::Vec_t<Scalar>& x) {
    return s.distance(x);
}

/// T = q + L with q = u_0 + (1/lip) P_{par U} A*b and
/// L = P_{par U}(Id − (1/lip) A*A).
template <typename Scalar>
AffineMap<Scalar> prox_grad_operator(const AffineQuadraticProblem<Scalar>& p) {
    const auto& U = p.U();
    const Scalar step = Scalar(1) / p.lip();
    VectorX<Scalar> q = U.origin_projection() + step * U.project_parallel(p.A().adjoint_apply(p.b()));
    const auto AtA = compose(adjoint(p.A()), p.A());
    const auto inner = scaled_sum(Scalar(1), identity_map<Scalar>(p.dim()), -step, AtA);
    return AffineMap<Scalar>(compose(U.parallel_projector(), inner), std::move(q));
}

/// (‖A(x − x̄)‖², 2(f(x) − μ)) for x ∈ U.
template <typename Scalar>
std::pair<Scalar, Scalar> energy_identity_check(const AffineQuadraticProblem<Scalar>& p, const SolutionSet<Scalar>& s,
                                                const detail::Vec_t<Scalar>& x) {
    if (!p.U().contains(x, Scalar(1e-8)))
        throw PreconditionError("energy_identity_check: x is not in U (residual " +
                                std::to_string(double(p.U().residual(x))) + ")");
    const Scalar lhs = p.A().apply(x - s.anchor()).squaredNorm();
    const Scalar rhs = Scalar(2) * (p.f(x) - s.mu());
    return {lhs, rhs};
}

/// f(x) − f(ref) evaluated without cancellation against f(ref):
/// ½‖A(x − ref)‖² + <A ref − b, A(x − ref)>.
template <typename Scalar>
Scalar objective_gap(const AffineQuadraticProblem<Scalar>& p, const detail::Vec_t<Scalar>& x,
                    const detail::Vec_t<Scalar>& ref) {
    const VectorX<Scalar> Ad = p.A().apply(x - ref);
    return Scalar(0.5) * Ad.squaredNorm() + p.residual(ref).dot(Ad);
}

template <typename Scalar>
struct Diagnostics {
    Scalar friedrichs_cos = 0;
    Scalar error_bound_C = 0;
    Index dim_par_U = 0;
    Index dim_ker_A = 0;
    Index dim_par_S = 0;
};

/// Cosine of the Friedrichs angle between par U and ker A, and the constant
/// C in dist(x, ker A ∩ par U) ≤ C‖Ax‖ for x ∈ par U.
template <typename Scalar>
Diagnostics<Scalar> closedness_diagnostics(const AffineQuadraticProblem<Scalar>& p) {
    using Mat = MatrixX<Scalar>;
    const SolutionSet<Scalar>& s = p.solution_set();
    Diagnostics<Scalar> out;
    out.dim_par_U = s.dim_par_U();
    out.dim_par_S = s.dim_par_S();
    out.error_bound_C = s.rank_AB() > 0 ? Scalar(1) / s.sigma_min_positive() : Scalar(0);

    const Index n = p.dim();
    Mat ker;
    if (p.A().rows() == 0) {
        ker = Mat::Identity(n, n);
    } else {
        const Mat Ad = p.A().to_dense();
        Eigen::BDCSVD<Mat> svd(Ad, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        const Scalar smax = sv.size() > 0 ? sv[0] : Scalar(0);
        Index rank = 0;
        while (rank < sv.size() && sv[rank] > Scalar(kRankTolerance) * smax && sv[rank] > Scalar(0)) ++rank;
        ker = svd.matrixV().rightCols(n - rank);
    }
    out.dim_ker_A = ker.cols();

    // Principal cosines between the subspaces; the leading dim(par S) of
    // them equal 1 and span the intersection, which the Friedrichs angle
    // excludes.
    if (s.dim_par_U() > 0 && ker.cols() > 0) {
        const Mat M = s.par_u_basis().transpose() * ker;
        Eigen::JacobiSVD<Mat> svd(M);
        const auto& sv = svd.singularValues();
        const Index skip = out.dim_par_S;
        out.friedrichs_cos = skip < sv.size() ? std::min(Scalar(1), sv[skip]) : Scalar(0);
    }
    return out;
}

/// f = ½dist²(·, V) for an affine subspace V, written in the A(·) − b form as
/// A = Id − P_{par V} and b = (Id − P_{par V}) v_0 with v_0 ∈ V. Then
/// ∇f = Id − P_V and lip = 1.
template <typename Scalar>
AffineQuadraticProblem<Scalar> distance_problem(const AffineSubspace<Scalar>& V, AffineSubspace<Scalar> U) {
    using Vec = VectorX<Scalar>;
    const Index n = V.dim();
    const auto A = scaled_sum(Scalar(1), identity_map<Scalar>(n), Scalar(-1), V.parallel_projector());
    const Vec v0 = V.origin_projection();
    Vec b = v0 - V.project_parallel(v0);
    return AffineQuadraticProblem<Scalar>(A, std::move(b), std::move(U), Scalar(1));
}

/// Parameters of the seeded random test instances: A is dim-wide with
/// `rows` rows and rank `rank`; U = {Cx = d} with `constraints` orthonormal
/// rows.
struct RandomInstanceSpec {
    Index dim = 80;
    Index rows = 50;
    Index rank = 40;
    Index constraints = 20;
    std::uint64_t seed = 1;
};

/// Default rank/constraint counts for a given size: rank ≈ 4/5 of
/// min(rows, dim) and dim/4 constraints, so that ker A ∩ par U is nontrivial.
inline RandomInstanceSpec random_spec(Index dim, Index rows, std::uint64_t seed) {
    RandomInstanceSpec spec;
    spec.dim = dim;
    spec.rows = rows;
    spec.rank = std::max<Index>(1, (4 * std::min(dim, rows)) / 5);
    spec.constraints = std::max<Index>(1, dim / 4);
    spec.seed = seed;
    return spec;
}

template <typename Scalar>
AffineQuadraticProblem<Scalar> random_instance(const RandomInstanceSpec& spec) {
    using Mat = MatrixX<Scalar>;
    if (spec.rank > std::min(spec.rows, spec.dim) || spec.constraints >= spec.dim || spec.rank < 0 ||
        spec.constraints < 0)
        throw ConstructionError("random_instance: inconsistent sizes");
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto gaussian = [&](Index r, Index c) {
        Mat M(r, c);
        for (Index j = 0; j < c; ++j)
            for (Index i = 0; i < r; ++i) M(i, j) = Scalar(normal(rng));
        return M;
    };
    const Mat left = gaussian(spec.rows, spec.rank);
    const Mat right = gaussian(spec.rank, spec.dim);
    Mat A = (left * right) / std::sqrt(Scalar(spec.dim));
    VectorX<Scalar> b = gaussian(spec.rows, 1);

    Eigen::HouseholderQR<Mat> qr(gaussian(spec.dim, spec.constraints));
    const Mat Q = qr.householderQ() * Mat::Identity(spec.dim, spec.constraints);
    Mat C = Q.transpose();
    VectorX<Scalar> d = gaussian(spec.constraints, 1);

    auto U = AffineSubspace<Scalar>::orthonormal_rows(orthonormal_rows<Scalar>(std::move(C)), std::move(d));
    return AffineQuadraticProblem<Scalar>(dense_map<Scalar>(std::move(A)), std::move(b), std::move(U));
}

}  // namespace apgkit
