#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "apgkit/errors.hpp"
#include "apgkit/inpaint.hpp"

using namespace apgkit;
using namespace apgkit::inpaint;

TEST_CASE("synthetic image and flattening") {
    const Matrix img = synthetic_image(16);
    CHECK(img.rows() == 16);
    CHECK(img.minCoeff() >= 0.0);
    CHECK(img.maxCoeff() <= 1.0);
    CHECK(img.maxCoeff() - img.minCoeff() > 0.3);
    CHECK(synthetic_image(16) == img);
    const Vector v = flatten(img);
    CHECK(v[2 * 16 + 5] == img(2, 5));
    CHECK(unflatten(v, 16) == img);
    CHECK_THROWS_AS(synthetic_image(0), ConstructionError);
    CHECK_THROWS_AS(unflatten(v, 15), DimensionError);
}

TEST_CASE("make_instance counts and index sets") {
    const auto inst = make_instance(synthetic_image(64), 0.4, 2000, 512, 7);
    CHECK(inst.p() == 2000);
    CHECK(inst.m() == 512);
    CHECK(inst.corrupted.size() == 1638);
    CHECK(std::is_sorted(inst.known.begin(), inst.known.end()));
    CHECK(std::is_sorted(inst.freq.begin(), inst.freq.end()));
    CHECK(std::adjacent_find(inst.freq.begin(), inst.freq.end()) == inst.freq.end());
    std::set<Index> bad(inst.corrupted.begin(), inst.corrupted.end());
    CHECK(std::none_of(inst.known.begin(), inst.known.end(), [&](Index i) { return bad.count(i) > 0; }));
    CHECK(inst.problem->lip() == 1.0);
    // consistent data: the truth is feasible with zero residual
    CHECK(inst.problem->U().residual(inst.truth) <= 1e-12);
    CHECK(inst.problem->f(inst.truth) == 0.0);
}

TEST_CASE("selected DCT rows are orthonormal") {
    const auto inst = make_instance(synthetic_image(8), 0.2, 20, 17, 3);
    const auto& C = std::get<AffineSubspaced::OrthonormalRows>(inst.problem->U().representation()).C;
    Matrix CCt(inst.m(), inst.m());
    for (Index j = 0; j < inst.m(); ++j) {
        Vector e = Vector::Zero(inst.m());
        e[j] = 1;
        CCt.col(j) = C.apply(C.adjoint_apply(e));
    }
    CHECK((CCt - Matrix::Identity(inst.m(), inst.m())).norm() <= 1e-12);
}

TEST_CASE("make_instance is seeded and policy aware") {
    const Matrix img = synthetic_image(16);
    const auto a = make_instance(img, 0.3, 50, 40, 11);
    const auto b = make_instance(img, 0.3, 50, 40, 11);
    const auto c = make_instance(img, 0.3, 50, 40, 12);
    CHECK(a.known == b.known);
    CHECK(a.freq == b.freq);
    CHECK(a.corrupted == b.corrupted);
    CHECK(a.known != c.known);

    const auto low = make_instance(img, 0.3, 50, 3, 11, FreqPolicy::Low);
    CHECK(low.freq == std::vector<Index>{0, 1, 16});
    const auto high = make_instance(img, 0.3, 50, 1, 11, FreqPolicy::High);
    CHECK(high.freq == std::vector<Index>{255});
    CHECK(parse_freq_policy("high") == FreqPolicy::High);
    CHECK(std::string(to_string(FreqPolicy::Low)) == "low");
    CHECK_THROWS_AS(parse_freq_policy("mid"), ConstructionError);
}

TEST_CASE("make_instance rejects infeasible sizes") {
    const Matrix img = synthetic_image(8);
    CHECK_THROWS_AS(make_instance(img, 0.5, 33, 4, 1), ConstructionError);
    CHECK_THROWS_AS(make_instance(img, 0.0, 10, 65, 1), ConstructionError);
    CHECK_THROWS_AS(make_instance(img, 1.5, 10, 4, 1), ConstructionError);
    CHECK_THROWS_AS(make_instance(Matrix::Constant(4, 5, 0.5), 0.0, 1, 1, 1), ConstructionError);
    CHECK_THROWS_AS(make_instance(Matrix::Constant(4, 4, 2.0), 0.0, 1, 1, 1), ConstructionError);
    CHECK_NOTHROW(make_instance(img, 0.5, 32, 64, 1));
}

TEST_CASE("init tags") {
    CHECK(parse_init("ones", 3).kind == InitTag::Kind::Ones);
    CHECK(parse_init("random", 3).seed == 3);
    CHECK(parse_init("random:42", 3).seed == 42);
    CHECK(parse_init("random:42", 3).str() == "random(42)");
    CHECK_THROWS_AS(parse_init("random:x", 3), ConstructionError);
    CHECK_THROWS_AS(parse_init("twos", 3), ConstructionError);
    const auto inst = make_instance(synthetic_image(8), 0.2, 10, 8, 1);
    const Vector r = initial_point(inst, parse_init("random:5", 0));
    CHECK(r.minCoeff() >= 0.0);
    CHECK(r.maxCoeff() < 1.0);
    CHECK(r == initial_point(inst, parse_init("random:5", 0)));
}

TEST_CASE("psnr") {
    const Vector t = Vector::Constant(4, 0.5);
    CHECK(std::isinf(psnr(t, t)));
    CHECK(psnr(t + Vector::Constant(4, 0.1), t) == doctest::Approx(20.0));
}

TEST_CASE("reconstruct on a small underdetermined instance") {
    const auto inst = make_instance(synthetic_image(16), 0.4, 60, 32, 7);
    const auto z = reconstruct(inst, parse_init("zeros", 0), 1e-10);
    const auto o = reconstruct(inst, parse_init("ones", 0), 1e-10);
    for (const auto* r : {&z, &o}) {
        CHECK(r->converged);
        CHECK(r->gradmap_final <= 1e-10);
        CHECK(r->feasibility <= 1e-8);
        CHECK(r->objective <= 1e-12);
        REQUIRE(r->dist_to_PSx0.has_value());
        CHECK(*r->dist_to_PSx0 <= 1e-5);
    }
    CHECK((z.x_final - o.x_final).norm() > 1e-3);
    // deterministic given instance, init and tolerance
    const auto z2 = reconstruct(inst, parse_init("zeros", 0), 1e-10);
    CHECK(z2.x_final == z.x_final);
    CHECK(z2.iters == z.iters);
    CHECK_THROWS_AS(reconstruct(inst, parse_init("zeros", 0), 0.0), PreconditionError);
}

TEST_CASE("iterates after the first lie in U") {
    const auto inst = make_instance(synthetic_image(16), 0.4, 60, 32, 9);
    const auto& prob = *inst.problem;
    const Vector x0 = initial_point(inst, parse_init("random:4", 0));
    TraceOptions o;
    o.use_oracle = false;
    o.track_distance = false;
    const auto tr = run_apg(prob, x0, Schedule::classical_fista(), StopRule::iterations(50), Certify::none(), o);
    for (const auto& s : tr.snapshots)
        if (s.k >= 1) CHECK(prob.U().residual(s.x) <= 1e-10);
}

TEST_CASE("full DCT knowledge pins the truth") {
    const auto inst = make_instance(synthetic_image(16), 0.4, 30, 256, 5);
    const auto r = reconstruct(inst, parse_init("ones", 0), 1e-10);
    CHECK(r.converged);
    CHECK(r.iters <= 1);
    CHECK((r.x_final - inst.truth).norm() <= 1e-12);
}

TEST_CASE("starting from the truth stops immediately") {
    const auto inst = make_instance(synthetic_image(16), 0.0, 100, 40, 5);
    const auto r = reconstruct(inst, parse_init("truth", 0), 1e-10);
    CHECK(r.converged);
    CHECK(r.iters == 0);
    CHECK(std::isinf(r.psnr_vs_truth));
}

TEST_CASE("oracle distance is skipped above the cap") {
    const auto inst = make_instance(synthetic_image(8), 0.2, 20, 8, 5);
    ::setenv("APGKIT_ORACLE_CAP", "16", 1);
    const auto r = reconstruct(inst, parse_init("zeros", 0), 1e-8);
    ::unsetenv("APGKIT_ORACLE_CAP");
    CHECK(r.converged);
    CHECK_FALSE(r.dist_to_PSx0.has_value());
}
