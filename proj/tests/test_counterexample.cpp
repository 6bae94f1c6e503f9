#include <doctest.h>

#include "apgkit/counterexample.hpp"
#include "apgkit/errors.hpp"

using namespace apgkit;
using namespace apgkit::cone;

namespace {

RatPair pair(const char* a, const char* b) { return {parse_rat(a), parse_rat(b)}; }

// u_k = 13/32 − 75/(8k(k+1)) and d_k = 75/(4(k−1)k(k+1)) for the w = 5 run.
Rat u_formula(Index k) { return Rat(13, 32) - Rat(75, 8 * k * (k + 1)); }
Rat d_formula(Index k) { return Rat(75, 4 * (k - 1) * k * (k + 1)); }

}  // namespace

TEST_CASE("parse_rat and format_rat") {
    CHECK(parse_rat("13/32") == Rat(13, 32));
    CHECK(parse_rat("5") == Rat(5));
    CHECK(parse_rat("-6/4") == Rat(-3, 2));
    CHECK(parse_rat("+2/3") == Rat(2, 3));
    CHECK(format_rat(Rat(-6, 4)) == "-3/2");
    CHECK(format_rat(Rat(5)) == "5/1");
    CHECK(format_rat(parse_rat("0/7")) == "0/1");
    for (const char* bad : {"", "/", "1/", "a/2", "1/0", "1.5", "1/2/3", "--1"})
        CHECK_THROWS_AS(parse_rat(bad), IoError);
    CHECK(to_double(Rat(13, 32)) == 0.40625);
}

TEST_CASE("projections") {
    CHECK(project_V(pair("3", "-2")) == pair("3", "0"));
    CHECK(project_U(pair("3", "0")) == pair("2", "-1"));
    CHECK(project_U(pair("1/2", "1/2")) == pair("1/2", "1/2"));
    CHECK(map_step(pair("5", "0")) == pair("3", "-2"));
}

TEST_CASE("map_closed_form") {
    CHECK(map_closed_form(5, 1) == pair("3", "-2"));
    CHECK(map_closed_form(5, 3) == pair("3/2", "-1/2"));
    for (Index k : {1, 2, 10, 500}) CHECK(map_closed_form(1, k) == pair("1", "0"));
    RatPair p = pair("5", "0");
    for (int i = 0; i < 3; ++i) p = map_step(p);
    CHECK(p == map_closed_form(5, 3));
    CHECK_THROWS_AS(map_closed_form(Rat(1, 2), 3), PreconditionError);
    CHECK_THROWS_AS(map_closed_form(5, 0), PreconditionError);
}

TEST_CASE("apg_cone_iterate: golden w = 5 trajectory") {
    const auto s = apg_cone_iterate(5, 12);
    REQUIRE(s.size() == 13);
    CHECK(s[0].x == pair("5", "0"));
    CHECK(s[1].x == pair("3", "-2"));
    CHECK(s[2].x == pair("2", "-1"));
    CHECK(s[3].x == pair("11/8", "-3/8"));
    CHECK(s[4].x == pair("17/16", "-1/16"));
    CHECK(s[4].y == pair("29/32", "3/32"));
    CHECK(*s[4].d == Rat(5, 16));
    CHECK(s[10].u == Rat(113, 352));
    CHECK(s[10].u == u_formula(10));
    CHECK_FALSE(s[1].d.has_value());
    CHECK_FALSE(s[3].M.has_value());
    CHECK(*s[4].M == 4);
    CHECK(*s[12].u_star == Rat(13, 32));
}

TEST_CASE("apg_cone_iterate: w = 1 is stationary") {
    const auto s = apg_cone_iterate(1, 20);
    for (const auto& st : s) {
        CHECK(st.x == pair("1", "0"));
        CHECK(st.y == pair("1", "0"));
        CHECK(st.p == pair("1", "0"));
    }
    CHECK_THROWS_AS(apg_cone_iterate(Rat(1, 3), 5), PreconditionError);
    CHECK_THROWS_AS(apg_cone_iterate(5, kMaxHorizon + 1), PreconditionError);
}

TEST_CASE("exact agreement with closed forms up to the horizon cap") {
    const auto s = apg_cone_iterate(5, kMaxHorizon);
    REQUIRE(s.size() == static_cast<std::size_t>(kMaxHorizon) + 1);
    const Index M = 4;
    const Rat bound = s[M].u + Rat(M - 1, 2) * *s[M].d;
    for (Index k = 1; k <= kMaxHorizon; ++k) {
        const auto& st = s[static_cast<std::size_t>(k)];
        CHECK(st.x[0] + st.x[1] == 1);
        CHECK(st.p == map_closed_form(5, k));
        if (k < M) continue;
        CHECK(st.u == u_formula(k));
        CHECK(*st.d == d_formula(k));
        CHECK(st.u + *st.d <= bound);
        if (k > M) CHECK(st.u >= s[static_cast<std::size_t>(k - 1)].u);
        if (k < kMaxHorizon) CHECK(*s[static_cast<std::size_t>(k + 1)].d == Rat(k - 1, k + 2) * *st.d);
    }
}

TEST_CASE("other starting points follow the MAP closed form too") {
    const Rat w(7, 3);
    const auto s = apg_cone_iterate(w, 60);
    for (Index k = 1; k <= 60; ++k) CHECK(s[static_cast<std::size_t>(k)].p == map_closed_form(w, k));
}

TEST_CASE("detect_M_and_limit") {
    const auto lim = detect_M_and_limit(apg_cone_iterate(5, 10));
    REQUIRE(lim);
    CHECK(*lim->M == 4);
    CHECK(lim->d_M == Rat(5, 16));
    CHECK(lim->u_star == Rat(13, 32));
    CHECK(lim->x_star == pair("19/32", "13/32"));
    CHECK_FALSE(lim->stationary);

    CHECK_FALSE(detect_M_and_limit(apg_cone_iterate(5, 3)).has_value());

    const auto one = detect_M_and_limit(apg_cone_iterate(1, 5));
    REQUIRE(one);
    CHECK(one->stationary);
    CHECK_FALSE(one->M.has_value());
    CHECK(one->x_star == pair("1", "0"));
}

TEST_CASE("aux_sequence") {
    const Rat a(5, 16);
    const auto t = aux_sequence(a, 4, 4);
    CHECK(t.a_k == a);
    CHECK(t.tail_sum == Rat(15, 32));
    CHECK(aux_total(a, 4) == Rat(15, 32));
    // recurrence and partial sums against direct accumulation
    Rat ak = a;
    Rat partial = 0;
    for (Index k = 4; k <= 300; ++k) {
        const auto tk = aux_sequence(a, 4, k);
        CHECK(tk.a_k == ak);
        const Rat next = Rat(k - 1, k + 2) * ak;
        partial += next;
        CHECK(tk.partial_sum == partial);
        CHECK(tk.partial_sum + aux_sequence(a, 4, k + 1).tail_sum == aux_total(a, 4));
        // a_{k+1} is dominated by the tail that starts at k + 1
        CHECK(next <= aux_sequence(a, 4, k + 1).tail_sum);
        ak = next;
    }
    CHECK_THROWS_AS(aux_sequence(a, 1, 4), PreconditionError);
    CHECK_THROWS_AS(aux_sequence(Rat(1), 4, 4), PreconditionError);
    CHECK_THROWS_AS(aux_sequence(Rat(0), 4, 4), PreconditionError);
    CHECK_THROWS_AS(aux_sequence(a, 4, 3), PreconditionError);
}

TEST_CASE("separation_certificate") {
    const auto r = separation_certificate(5, 40);
    CHECK(r.p_star == pair("1", "0"));
    CHECK(r.limit.x_star == pair("19/32", "13/32"));
    CHECK(r.separation_sq == Rat(169, 512));
    CHECK(r.separation_sq == 2 * Rat(13, 32) * Rat(13, 32));

    const auto one = separation_certificate(1, 10);
    CHECK(one.limit.x_star == one.p_star);
    CHECK(one.separation_sq == 0);

    CHECK_THROWS_AS(separation_certificate(5, 3), DetectionFailure);
}

TEST_CASE("floating replay tracks the exact trajectory") {
    for (const Rat& w : {Rat(5), Rat(1), Rat(7, 3)}) {
        const auto s = apg_cone_iterate(w, 100);
        const auto f = float_replay(s);
        REQUIRE(f.x.size() == 101);
        CHECK(f.max_deviation <= 1e-12);
    }
}
