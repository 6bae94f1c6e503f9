#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "apgkit/solvers.hpp"
#include "support.hpp"

using namespace apgkit;
using testing::gaussian;

namespace {

Problemd instance(Index dim, Index rows, std::uint64_t seed) {
    return random_instance<double>(random_spec(dim, rows, seed));
}

// f = ½dist²(·, {x2 = 0}), U = {x1 + x2 = 1}: PGM is MAP.
Problemd map_problem() {
    return distance_problem(AffineSubspaced::hyperplane(Vector{{0, 1}}, 0.0),
                            AffineSubspaced::hyperplane(Vector::Ones(2), 1.0));
}

}  // namespace

TEST_CASE("run_pgm reproduces the MAP closed form") {
    const auto p = map_problem();
    const auto tr = run_pgm(p, Vector{{5, 0}}, StopRule::iterations(40));
    REQUIRE(tr.snapshots.size() == 41);
    for (const auto& s : tr.snapshots) {
        if (s.k == 0) continue;
        const double e = 4.0 / std::pow(2.0, static_cast<double>(s.k));
        CHECK(std::abs(s.x[0] - (1 + e)) <= 1e-12);
        CHECK(std::abs(s.x[1] + e) <= 1e-12);
    }
    CHECK((tr.x_final - Vector{{1, 0}}).norm() < 1e-11);
    CHECK((*tr.x_star - Vector{{1, 0}}).norm() < 1e-12);
}

TEST_CASE("run_pgm from a solution stays put") {
    const auto p = instance(12, 8, 3);
    const Vector xs = p.solution_set().best_approximation(gaussian(12, 4));
    const auto tr = run_pgm(p, xs, StopRule::iterations(20));
    for (const auto& s : tr.snapshots) CHECK((s.x - xs).norm() <= 1e-12);
}

TEST_CASE("run_pgm converges to P_S x0 on an 8x12 instance") {
    const auto p = instance(12, 8, 5);
    const Vector x0 = gaussian(12, 6);
    const auto tr = run_pgm(p, x0, StopRule::gradmap(1e-13));
    CHECK(tr.converged);
    CHECK(tr.reason == StopReason::GradMap);
    CHECK(tr.records.back().gradmap <= 1e-13);
    CHECK((tr.x_final - p.solution_set().best_approximation(x0)).norm() <= 1e-8);
    // monotone objective along PGM once inside U
    for (std::size_t k = 2; k < tr.records.size(); ++k) CHECK(tr.records[k].F <= tr.records[k - 1].F + 1e-12);
}

TEST_CASE("run_pgm flags budget exhaustion") {
    const auto p = instance(12, 8, 7);
    const auto tr = run_pgm(p, gaussian(12, 8), StopRule::gradmap(1e-14, 5));
    CHECK_FALSE(tr.converged);
    CHECK(tr.reason == StopReason::MaxIter);
    CHECK(tr.iterations == 5);
}

TEST_CASE("rate bound on a 10x20 instance with linear-half") {
    const auto p = instance(20, 10, 9);
    TraceOptions o;
    o.store_vectors = false;
    Certify c;
    c.rate = true;
    const auto tr = run_apg(p, gaussian(20, 10), Schedule::linear_half(), StopRule::iterations(3000), c, o);
    CHECK(tr.certification.rate.count == 0);
    const double dist0sq = (gaussian(20, 10) - *tr.x_star).squaredNorm();
    for (const auto& r : tr.records) {
        if (r.k == 0) continue;
        CHECK(r.bound_rate == Flag::Holds);
        // additive form of the same bound
        CHECK(r.gap <= 2 * p.lip() * dist0sq / double((r.k + 1) * (r.k + 1)) * (1 + 1e-9));
    }
}

TEST_CASE("run_apg from a solution: constant iterates, zero momentum") {
    const auto p = instance(12, 8, 11);
    const Vector xs = p.solution_set().best_approximation(gaussian(12, 12));
    const auto tr = run_apg(p, xs, Schedule::classical_fista(), StopRule::iterations(30), Certify::all());
    for (const auto& s : tr.snapshots) {
        CHECK((s.x - xs).norm() <= 1e-12);
        CHECK((s.y - s.x).norm() <= 1e-12);
    }
    CHECK(tr.certification.total() == 0);
    InertialIteration<double> it(xs, Schedule::classical_fista());
    for (int k = 0; k < 30; ++k) {
        it.step([&p](const Vector& v) { return p.prox_grad_step(v); });
        CHECK(it.r().norm() <= 1e-12);
    }
}

TEST_CASE("APG and PGM limits coincide with P_S x0") {
    for (std::uint64_t seed : {13, 14, 15}) {
        const auto p = instance(30, 20, seed);
        const Vector x0 = 2 * gaussian(30, seed + 100);
        const auto a = run_apg(p, x0, Schedule::classical_fista(), StopRule::gradmap(1e-12));
        const auto g = run_pgm(p, x0, StopRule::gradmap(1e-12));
        REQUIRE(a.converged);
        REQUIRE(g.converged);
        const Vector ps = p.solution_set().best_approximation(x0);
        CHECK((a.x_final - ps).norm() <= 1e-6);
        CHECK((g.x_final - ps).norm() <= 1e-6);
        CHECK((a.x_final - g.x_final).norm() <= 1e-6);
    }
}

TEST_CASE("gradient_mapping") {
    const auto p = instance(12, 8, 17);
    CHECK(gradient_mapping(p, p.solution_set().anchor()).norm() <= 1e-9);

    SUBCASE("closed form for orthonormal rows and lip = 1") {
        Matrix A = gaussian(6, 10, 18);
        A /= 1.01 * A.jacobiSvd().singularValues()[0];
        const Matrix Q = testing::range_basis(gaussian(10, 3, 19));
        const Matrix C = Q.transpose();
        const Vector d = gaussian(3, 20);
        const Vector b = gaussian(6, 21);
        const Problemd q(dense_map<double>(A), b,
                         AffineSubspaced::orthonormal_rows(orthonormal_rows<double>(C), d), 1.0);
        for (int t = 0; t < 10; ++t) {
            const Vector x = gaussian(10, 30 + t);
            const Vector formula = (Matrix::Identity(10, 10) - C.transpose() * C) * A.transpose() * (A * x - b) +
                                   C.transpose() * (C * x - d);
            CHECK((gradient_mapping(q, x) - formula).norm() <= 1e-12 * (1 + formula.norm()));
        }
    }
    SUBCASE("decreases along PGM") {
        const Vector x0 = 5 * gaussian(12, 22);
        const auto tr = run_pgm(p, x0, StopRule::iterations(100));
        CHECK(tr.records.back().gradmap < tr.records.front().gradmap);
        CHECK(tr.records.front().gradmap > 0);
    }
}

TEST_CASE("shadow decomposition") {
    const auto p = instance(10, 6, 23);
    const Vector x0 = 3 * gaussian(10, 24);
    const auto rep = shadow_decomposition(p, x0, Schedule::classical_fista(), 200);
    CHECK(rep.rows.size() == 201);
    CHECK(rep.all_hold());
    CHECK(rep.rows[0].s_norm == 0.0);
    CHECK(rep.rows[1].s_norm <= 1e-15);
    for (const auto& r : rep.rows) {
        CHECK(r.s_par_norm <= 1e-8 * (1 + r.s_norm));
        CHECK(r.projection_gap <= 1e-8);
        CHECK(r.s_norm <= r.triangle_rhs + 1e-8);
    }
    // the snapshot form carries s_k = x_k − T^k x0 explicitly
    Certify c;
    c.shadow = true;
    const auto tr = run_apg(p, x0, Schedule::classical_fista(), StopRule::iterations(5), c);
    const auto pk = fixed_point_trajectory<double>([&p](const Vector& v) { return p.prox_grad_step(v); }, x0, 5);
    for (const auto& s : tr.snapshots) {
        CHECK((s.pgm_ref - pk[static_cast<std::size_t>(s.k)]).norm() <= 1e-12);
        CHECK((s.s - (s.x - s.pgm_ref)).norm() == 0.0);
    }
}

TEST_CASE("recorded xi and z agree with stored vectors") {
    const auto p = instance(16, 10, 25);
    const Vector x0 = 2 * gaussian(16, 26);
    const auto sched = Schedule::classical_fista();
    const auto tr = run_apg(p, x0, sched, StopRule::iterations(200), Certify::all());
    const Vector& xs = *tr.x_star;
    const double mu = *tr.mu;
    CHECK(tr.certification.total() == 0);
    for (const auto& s : tr.snapshots) {
        if (s.k == 0) continue;
        const double tk = sched.t(s.k);
        const Vector z = tk * s.y + (1 - tk) * s.x;
        CHECK((z - s.z).norm() <= 1e-12 * (1 + z.norm()));
        const double tp = sched.t(s.k - 1);
        const double xi = tp * tp * (p.f(s.x) - mu) + 0.5 * p.lip() * (s.z - xs).squaredNorm();
        const double rec = tr.records[static_cast<std::size_t>(s.k)].xi;
        CHECK(std::abs(xi - rec) <= 1e-10 * std::abs(rec) + 1e-12);
        // iterates after the first lie in U
        CHECK(p.U().contains(s.x, 1e-10));
    }
}

TEST_CASE("Lyapunov and ball certificates for schedules with the classical conditions") {
    for (std::uint64_t seed : {27, 28}) {
        const auto p = instance(20, 12, seed);
        const Vector x0 = 3 * gaussian(20, seed + 50);
        for (const auto& sched : {Schedule::classical_fista(), Schedule::linear_half()}) {
            TraceOptions o;
            o.store_vectors = false;
            const auto tr = run_apg(p, x0, sched, StopRule::iterations(2000), Certify::all(), o);
            CHECK(tr.certification.binding);
            CHECK(tr.certification.xi_monotone.count == 0);
            CHECK(tr.certification.xi_initial.count == 0);
            CHECK(tr.certification.ball_x.count == 0);
            CHECK(tr.certification.ball_z.count == 0);
            CHECK(tr.certification.rate.count == 0);
        }
    }
}

TEST_CASE("schedules outside the classical conditions are recorded, not fatal") {
    const auto p = instance(20, 12, 29);
    const auto tr = run_apg(p, gaussian(20, 30), Schedule::chambolle_dossal(3.5), StopRule::gradmap(1e-10),
                            Certify::all());
    CHECK_FALSE(tr.certification.binding);
    CHECK(tr.converged);
    CHECK((tr.x_final - *tr.x_star).norm() <= 1e-6);
}

TEST_CASE("admissibility is enforced unless overridden") {
    const auto p = instance(12, 8, 31);
    const auto bad = Schedule::custom({1, 3, 1, 1, 1});
    CHECK_THROWS_AS(run_apg(p, Vector::Zero(12), bad, StopRule::iterations(3)), ScheduleError);
    TraceOptions o;
    o.override_admissibility = true;
    const auto tr = run_apg(p, Vector::Zero(12), bad, StopRule::iterations(3), Certify::none(), o);
    CHECK(tr.iterations == 3);
    CHECK_THROWS_AS(run_apg(p, Vector::Zero(11), Schedule::linear_half(), StopRule::iterations(3)), DimensionError);
}

TEST_CASE("custom schedules end the run when exhausted") {
    const auto p = instance(12, 8, 33);
    std::vector<double> t;
    for (int k = 0; k < 10; ++k) t.push_back((k + 2) / 2.0);
    t[0] = 1.0;
    const auto tr = run_apg(p, Vector::Zero(12), Schedule::custom(t), StopRule::gradmap(1e-14));
    CHECK(tr.reason == StopReason::ScheduleExhausted);
    CHECK_FALSE(tr.converged);
    CHECK(tr.iterations == 9);
}

TEST_CASE("certification without the oracle degrades to a warning") {
    const auto p = instance(12, 8, 35);
    ::setenv("APGKIT_ORACLE_CAP", "4", 1);
    const auto tr = run_apg(p, Vector::Zero(12), Schedule::classical_fista(), StopRule::gradmap(1e-10),
                            Certify::all());
    CHECK(tr.converged);
    CHECK_FALSE(tr.warnings.empty());
    CHECK_FALSE(tr.x_star.has_value());
    CHECK(std::isnan(tr.records.back().gap));
    CHECK_THROWS_AS(run_apg(p, Vector::Zero(12), Schedule::classical_fista(), StopRule::gap(1e-10)),
                    CertificationUnavailable);
    CHECK_THROWS_AS(shadow_decomposition(p, Vector::Zero(12), Schedule::classical_fista(), 5), OracleUnavailable);
    ::unsetenv("APGKIT_ORACLE_CAP");
}

TEST_CASE("gap stop rule") {
    const auto p = instance(12, 8, 37);
    const auto tr = run_apg(p, Vector::Zero(12), Schedule::classical_fista(), StopRule::gap(1e-9));
    CHECK(tr.reason == StopReason::Gap);
    CHECK(tr.records.back().gap <= 1e-9);
}

TEST_CASE("snapshot subsampling") {
    const auto p = instance(6, 4, 39);
    TraceOptions o;
    o.full_until = 10;
    o.stride = 7;
    const auto tr = run_apg(p, Vector::Zero(6), Schedule::linear_half(), StopRule::iterations(40), Certify::none(), o);
    std::vector<Index> ks;
    for (const auto& s : tr.snapshots) ks.push_back(s.k);
    const std::vector<Index> expect{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 14, 21, 28, 35, 40};
    CHECK(ks == expect);
    CHECK(tr.records.size() == 41);
}
