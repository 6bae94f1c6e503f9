#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "apgkit/problem.hpp"
#include "apgkit/schedules.hpp"

namespace apgkit {

/// Termination: any satisfied tolerance stops the run; `max_iter` is always
/// attached as a guard.
struct StopRule {
    std::optional<double> gradmap_tol;
    std::optional<double> gap_tol;
    Index max_iter = 1'000'000;

    static StopRule gradmap(double tol, Index max_iter = 1'000'000) { return {tol, std::nullopt, max_iter}; }
    static StopRule gap(double tol, Index max_iter = 1'000'000) { return {std::nullopt, tol, max_iter}; }
    static StopRule iterations(Index k) { return {std::nullopt, std::nullopt, k}; }
    bool has_tolerance() const { return gradmap_tol.has_value() || gap_tol.has_value(); }
};

enum class StopReason { GradMap, Gap, MaxIter, ScheduleExhausted };

inline const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::GradMap: return "gradmap";
        case StopReason::Gap: return "gap";
        case StopReason::MaxIter: return "max-iter";
        case StopReason::ScheduleExhausted: return "schedule-exhausted";
    }
    return "unknown";
}

/// Which inequalities to certify along an APG run.
struct Certify {
    bool xi = false;      ///< Lyapunov ξ_k nonincreasing, ξ_1 ≤ (lip/2)‖x_0 − x*‖²
    bool ball = false;    ///< ‖x_k − x*‖, ‖z_k − x*‖ ≤ ‖x_0 − x*‖
    bool rate = false;    ///< F(x_k) − μ ≤ 2 lip dist²(x_0, S)/(k+1)²
    bool shadow = false;  ///< s_k = x_k − T^k x_0 decomposition identities

    static Certify all() { return {true, true, true, true}; }
    static Certify none() { return {}; }
    bool any() const { return xi || ball || rate || shadow; }
};

struct TraceOptions {
    bool store_vectors = true;
    Index full_until = 1000;  ///< store every vector up to this k ...
    Index stride = 100;       ///< ... then every stride-th
    bool track_distance = true;
    bool use_oracle = true;
    bool override_admissibility = false;
};

enum class Flag : std::int8_t { NotChecked, Holds, Violated };

inline Flag flag_of(bool holds) { return holds ? Flag::Holds : Flag::Violated; }

inline Flag combine(Flag a, Flag b) {
    if (a == Flag::Violated || b == Flag::Violated) return Flag::Violated;
    if (a == Flag::Holds || b == Flag::Holds) return Flag::Holds;
    return Flag::NotChecked;
}

/// Scalars recorded at every iteration. NaN marks "not available".
template <typename Scalar>
struct IterationRecord {
    Index k = 0;
    Scalar F = 0;
    Scalar gap = std::numeric_limits<Scalar>::quiet_NaN();
    Scalar xi = std::numeric_limits<Scalar>::quiet_NaN();
    Scalar dist_S = std::numeric_limits<Scalar>::quiet_NaN();
    Scalar gradmap = 0;
    Scalar rate_bound = std::numeric_limits<Scalar>::quiet_NaN();
    Scalar s_norm = std::numeric_limits<Scalar>::quiet_NaN();
    Scalar s_par_norm = std::numeric_limits<Scalar>::quiet_NaN();
    Scalar projection_gap = std::numeric_limits<Scalar>::quiet_NaN();
    Scalar triangle_rhs = std::numeric_limits<Scalar>::quiet_NaN();
    Flag bound_rate = Flag::NotChecked;
    Flag bound_xi = Flag::NotChecked;
    Flag bound_ball = Flag::NotChecked;
    Flag shadow = Flag::NotChecked;
};

template <typename Scalar>
struct Snapshot {
    Index k = 0;
    VectorX<Scalar> x;
    VectorX<Scalar> y;  ///< y_k = x_k + r_k (equal to x_k for PGM)
    VectorX<Scalar> z;  ///< t_k y_k + (1 − t_k) x_k, empty for k = 0 and PGM
    VectorX<Scalar> pgm_ref;
    VectorX<Scalar> s;
};

struct Violations {
    Index count = 0;
    std::optional<Index> first;
    void record(Index k) {
        if (!first) first = k;
        ++count;
    }
};

struct CertificationSummary {
    /// Whether the schedule satisfies the classical conditions under which the
    /// ξ, ball and rate inequalities are theorems. Violations are recorded
    /// either way but only count as failures when binding.
    bool binding = false;
    Violations rate;
    Violations xi_monotone;
    Violations xi_initial;
    Violations ball_x;
    Violations ball_z;
    Violations shadow_par;
    Violations shadow_projection;
    Violations shadow_triangle;

    Index total() const {
        return rate.count + xi_monotone.count + xi_initial.count + ball_x.count + ball_z.count + shadow_par.count +
               shadow_projection.count + shadow_triangle.count;
    }
};

template <typename Scalar>
struct SolverTrace {
    std::string method;
    std::string schedule;
    Scalar lip = 0;
    std::vector<IterationRecord<Scalar>> records;
    std::vector<Snapshot<Scalar>> snapshots;
    VectorX<Scalar> x_final;
    Index iterations = 0;
    bool converged = false;
    StopReason reason = StopReason::MaxIter;
    std::optional<VectorX<Scalar>> x_star;  ///< P_S x_0 when the oracle ran
    std::optional<Scalar> mu;
    CertificationSummary certification;
    std::vector<std::string> warnings;
};

/// Slack on the theoretical inequalities (exact in real arithmetic).
inline constexpr double kCertSlack = 1e-9;
/// Tolerance of the decomposition identities.
inline constexpr double kShadowTol = 1e-8;

/// G(x) = x − P_U(x − ∇f(x)/lip); reduces to x − P_U(x − ∇f(x)) for lip = 1.
template <typename Scalar>
VectorX<Scalar> gradient_mapping(const AffineQuadraticProblem<Scalar>& p, const detail::Vec_t<Scalar>& x) {
    return x - p.prox_grad_step(x);
}

/// One inertial step x_{k+1} = T(x_k + r_k), r_{k+1} = α_k(x_{k+1} − x_k),
/// for an arbitrary (not necessarily affine) operator T.
template <typename Scalar>
class InertialIteration {
public:
    using Vec = VectorX<Scalar>;

    InertialIteration(Vec x0, Schedule schedule)
        : x_(std::move(x0)), r_(Vec::Zero(x_.size())), schedule_(std::move(schedule)) {}

    template <typename Operator>
    void step(Operator&& T) {
        const Scalar a = Scalar(schedule_.alpha(k_));
        Vec next = T(Vec(x_ + r_));
        r_ = a * (next - x_);
        x_ = std::move(next);
        ++k_;
    }

    Index k() const { return k_; }
    const Vec& x() const { return x_; }
    const Vec& r() const { return r_; }
    Vec y() const { return x_ + r_; }
    const Schedule& schedule() const { return schedule_; }

private:
    Vec x_;
    Vec r_;
    Schedule schedule_;
    Index k_ = 0;
};

/// (x_k, y_k) for k = 0..K of the inertial scheme driven by any operator.
template <typename Scalar, typename Operator>
std::vector<std::pair<VectorX<Scalar>, VectorX<Scalar>>> inertial_trajectory(Operator&& T, const VectorX<Scalar>& x0,
                                                                            const Schedule& schedule, Index K) {
    std::vector<std::pair<VectorX<Scalar>, VectorX<Scalar>>> out;
    InertialIteration<Scalar> it(x0, schedule);
    out.emplace_back(it.x(), it.y());
    for (Index k = 0; k < K; ++k) {
        it.step(T);
        out.emplace_back(it.x(), it.y());
    }
    return out;
}

/// p_k = T^k p_0 for k = 0..K.
template <typename Scalar, typename Operator>
std::vector<VectorX<Scalar>> fixed_point_trajectory(Operator&& T, const VectorX<Scalar>& p0, Index K) {
    std::vector<VectorX<Scalar>> out{p0};
    for (Index k = 0; k < K; ++k) out.push_back(T(out.back()));
    return out;
}

namespace detail {

template <typename Scalar>
bool keep_snapshot(const TraceOptions& o, Index k) {
    return o.store_vectors && (k <= o.full_until || (o.stride > 0 && k % o.stride == 0));
}

template <typename Scalar>
const SolutionSet<Scalar>* try_oracle(const AffineQuadraticProblem<Scalar>& p, bool wanted,
                                      std::vector<std::string>& warnings) {
    if (!wanted) return nullptr;
    try {
        return &p.solution_set();
    } catch (const OracleUnavailable& e) {
        warnings.emplace_back(e.what());
        return nullptr;
    }
}

template <typename Scalar>
bool stop_now(const StopRule& stop, const IterationRecord<Scalar>& rec, StopReason& reason) {
    if (stop.gradmap_tol && rec.gradmap <= *stop.gradmap_tol) {
        reason = StopReason::GradMap;
        return true;
    }
    if (stop.gap_tol && !std::isnan(rec.gap) && rec.gap <= *stop.gap_tol) {
        reason = StopReason::Gap;
        return true;
    }
    return false;
}

}  // namespace detail

/// Proximal gradient iteration p_{k+1} = T p_k.
template <typename Scalar>
SolverTrace<Scalar> run_pgm(const AffineQuadraticProblem<Scalar>& p, const detail::Vec_t<Scalar>& x0, const StopRule& stop,
                            const TraceOptions& options = {}) {
    using Vec = VectorX<Scalar>;
    require_dims(x0.size(), p.dim(), "run_pgm x0");
    SolverTrace<Scalar> trace;
    trace.method = "pgm";
    trace.lip = p.lip();
    const SolutionSet<Scalar>* oracle =
        detail::try_oracle(p, options.use_oracle && (options.track_distance || stop.gap_tol), trace.warnings);
    if (stop.gap_tol && !oracle) throw CertificationUnavailable("gap stop rule needs the solution-set oracle");
    if (oracle) {
        trace.x_star = oracle->best_approximation(x0);
        trace.mu = oracle->mu();
    }

    Vec x = x0;
    for (Index k = 0;; ++k) {
        Vec next = p.prox_grad_step(x);
        IterationRecord<Scalar> rec;
        rec.k = k;
        rec.F = p.F(x);
        rec.gradmap = (x - next).norm();
        if (oracle) {
            rec.gap = std::isinf(rec.F) ? rec.F : objective_gap(p, x, *trace.x_star);
            if (options.track_distance) rec.dist_S = oracle->distance(x);
        }
        trace.records.push_back(rec);
        if (detail::keep_snapshot<Scalar>(options, k)) trace.snapshots.push_back({k, x, x, Vec(), Vec(), Vec()});

        StopReason reason = StopReason::MaxIter;
        if (detail::stop_now(stop, rec, reason) || k >= stop.max_iter) {
            trace.reason = reason;
            trace.converged = reason != StopReason::MaxIter || !stop.has_tolerance();
            trace.iterations = k;
            if (options.store_vectors && (trace.snapshots.empty() || trace.snapshots.back().k != k))
                trace.snapshots.push_back({k, x, x, Vec(), Vec(), Vec()});
            trace.x_final = std::move(x);
            return trace;
        }
        x = std::move(next);
    }
}

/// Accelerated proximal gradient in the two-sequence form
/// x_{k+1} = T(x_k + r_k), r_{k+1} = α_k(x_{k+1} − x_k), r_0 = 0,
/// with optional per-iteration certification against the oracle.
template <typename Scalar>
SolverTrace<Scalar> run_apg(const AffineQuadraticProblem<Scalar>& p, const detail::Vec_t<Scalar>& x0,
                            const Schedule& schedule, const StopRule& stop, Certify certify = Certify::none(),
                            const TraceOptions& options = {}) {
    using Vec = VectorX<Scalar>;
    using std::max;
    require_dims(x0.size(), p.dim(), "run_apg x0");

    SolverTrace<Scalar> trace;
    trace.method = "apg";
    trace.schedule = schedule.name();
    trace.lip = p.lip();
    const Scalar lip = p.lip();

    Index horizon = std::min<Index>(stop.max_iter, 1'000'000);
    const auto report = validate(schedule, horizon);
    if (!report.admissible() && !options.override_admissibility) {
        std::string where;
        if (!report.t0_is_one) where = " (t_0 != 1)";
        else if (report.first_increment_violation)
            where = " (first violation at k = " + std::to_string(*report.first_increment_violation) + ")";
        throw ScheduleError("schedule " + schedule.name() + " is not admissible" + where);
    }
    trace.certification.binding = report.fista_conditions;

    const SolutionSet<Scalar>* oracle = detail::try_oracle(
        p, options.use_oracle && (options.track_distance || certify.any() || stop.gap_tol), trace.warnings);
    if (stop.gap_tol && !oracle) throw CertificationUnavailable("gap stop rule needs the solution-set oracle");
    if (certify.any() && !oracle) {
        trace.warnings.emplace_back("certification-unavailable: no solution-set oracle, running uncertified");
        certify = Certify::none();
    }

    Vec x_star;
    Scalar r0 = 0;
    if (oracle) {
        x_star = oracle->best_approximation(x0);
        trace.x_star = x_star;
        trace.mu = oracle->mu();
        r0 = (x0 - x_star).norm();
    }
    const Scalar slack = Scalar(kCertSlack);
    const Scalar ball = r0 * (Scalar(1) + slack) + Scalar(1e-12);
    const Scalar xi_cap = Scalar(0.5) * lip * r0 * r0 * (Scalar(1) + slack);
    Scalar xi_first = std::numeric_limits<Scalar>::quiet_NaN();
    Scalar xi_prev = std::numeric_limits<Scalar>::quiet_NaN();
    const Scalar dist0_sq = oracle ? r0 * r0 : Scalar(0);

    Schedule sched = schedule;  // run-local memo
    InertialIteration<Scalar> it(x0, sched);
    Vec shadow = x0;
    auto& cert = trace.certification;

    for (Index k = 0;; ++k) {
        const Vec& x = it.x();
        const Vec y = it.y();
        IterationRecord<Scalar> rec;
        rec.k = k;
        rec.F = p.F(x);
        rec.gradmap = gradient_mapping(p, x).norm();

        Vec z;
        if (k >= 1) z = x + Scalar(sched.t(k)) * it.r();

        if (oracle) {
            rec.gap = std::isinf(rec.F) ? rec.F : objective_gap(p, x, x_star);
            if (options.track_distance || certify.shadow) rec.dist_S = oracle->distance(x);

            if (certify.rate && k >= 1) {
                rec.rate_bound = Scalar(2) * lip * dist0_sq / Scalar((k + 1) * (k + 1));
                const bool ok = rec.gap <= rec.rate_bound * (Scalar(1) + slack);
                rec.bound_rate = flag_of(ok);
                if (!ok) cert.rate.record(k);
            }
            if (k >= 1 && (certify.xi || certify.ball)) {
                const Scalar tprev = Scalar(sched.t(k - 1));
                const Scalar zdist = (z - x_star).norm();
                rec.xi = tprev * tprev * rec.gap + Scalar(0.5) * lip * zdist * zdist;
                if (certify.xi) {
                    bool ok = true;
                    if (k == 1) {
                        xi_first = rec.xi;
                        if (!(rec.xi <= xi_cap)) {
                            ok = false;
                            cert.xi_initial.record(k);
                        }
                    } else if (!(rec.xi <= xi_prev + slack * (Scalar(1) + xi_first))) {
                        ok = false;
                        cert.xi_monotone.record(k);
                    }
                    rec.bound_xi = flag_of(ok);
                }
                if (certify.ball) {
                    const bool okz = zdist <= ball;
                    if (!okz) cert.ball_z.record(k);
                    rec.bound_ball = flag_of(okz);
                }
                xi_prev = rec.xi;
            }
            if (certify.ball) {
                const bool okx = (x - x_star).norm() <= ball;
                if (!okx) cert.ball_x.record(k);
                rec.bound_ball = combine(rec.bound_ball, flag_of(okx));
            }
            if (certify.shadow) {
                const Vec s = x - shadow;
                rec.s_norm = s.norm();
                rec.s_par_norm = oracle->project_par(s).norm();
                rec.projection_gap = (oracle->best_approximation(x) - oracle->best_approximation(shadow)).norm();
                rec.triangle_rhs = rec.dist_S + oracle->distance(shadow);
                const bool par_ok = rec.s_par_norm <= Scalar(kShadowTol) * (Scalar(1) + rec.s_norm);
                const bool proj_ok = rec.projection_gap <= Scalar(kShadowTol);
                const bool tri_ok = rec.s_norm <= rec.triangle_rhs + Scalar(kShadowTol);
                if (!par_ok) cert.shadow_par.record(k);
                if (!proj_ok) cert.shadow_projection.record(k);
                if (!tri_ok) cert.shadow_triangle.record(k);
                rec.shadow = flag_of(par_ok && proj_ok && tri_ok);
            }
        }
        trace.records.push_back(rec);
        if (detail::keep_snapshot<Scalar>(options, k)) {
            Snapshot<Scalar> snap{k, x, y, z, Vec(), Vec()};
            if (certify.shadow) {
                snap.pgm_ref = shadow;
                snap.s = x - shadow;
            }
            trace.snapshots.push_back(std::move(snap));
        }

        StopReason reason = StopReason::MaxIter;
        bool done = detail::stop_now(stop, rec, reason) || k >= stop.max_iter;
        if (!done) {
            if (auto len = sched.length(); len && k + 1 >= *len) {
                reason = StopReason::ScheduleExhausted;
                done = true;
            }
        }
        if (done) {
            trace.reason = reason;
            trace.converged = reason == StopReason::GradMap || reason == StopReason::Gap || !stop.has_tolerance();
            trace.iterations = k;
            if (options.store_vectors && (trace.snapshots.empty() || trace.snapshots.back().k != k))
                trace.snapshots.push_back({k, x, y, z, Vec(), Vec()});
            trace.x_final = x;
            return trace;
        }
        it.step([&p](const Vec& v) { return p.prox_grad_step(v); });
        if (certify.shadow) shadow = p.prox_grad_step(shadow);
    }
}

/// Per-k decomposition report x_k = T^k x_0 + s_k from a shadowed APG run.
template <typename Scalar>
struct ShadowReport {
    std::vector<IterationRecord<Scalar>> rows;
    Index violations_par = 0;
    Index violations_projection = 0;
    Index violations_triangle = 0;
    bool all_hold() const { return violations_par + violations_projection + violations_triangle == 0; }
};

template <typename Scalar>
ShadowReport<Scalar> shadow_decomposition(const AffineQuadraticProblem<Scalar>& p, const detail::Vec_t<Scalar>& x0,
                                          const Schedule& schedule, Index K) {
    if (!p.oracle_available())
        throw OracleUnavailable("shadow_decomposition: dimension " + std::to_string(p.dim()) +
                                " exceeds the oracle cap");
    Certify c;
    c.shadow = true;
    TraceOptions o;
    o.store_vectors = false;
    const auto trace = run_apg(p, x0, schedule, StopRule::iterations(K), c, o);
    ShadowReport<Scalar> out;
    out.rows = trace.records;
    out.violations_par = trace.certification.shadow_par.count;
    out.violations_projection = trace.certification.shadow_projection.count;
    out.violations_triangle = trace.certification.shadow_triangle.count;
    return out;
}

}  // namespace apgkit
