#include "apgkit/counterexample.hpp"

#include <algorithm>
#include <cctype>

#include "apgkit/errors.hpp"
#include "apgkit/schedules.hpp"
#include "apgkit/solvers.hpp"

namespace apgkit::cone {

using boost::multiprecision::cpp_int;

namespace {

bool is_integer_text(const std::string& s) {
    std::size_t i = (!s.empty() && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
    if (i >= s.size()) return false;
    return std::all_of(s.begin() + static_cast<std::ptrdiff_t>(i), s.end(),
                       [](unsigned char c) { return std::isdigit(c) != 0; });
}

cpp_int to_int(const std::string& s) { return cpp_int(s[0] == '+' ? s.substr(1) : s); }

void check_horizon(Index K) {
    if (K < 0 || K > kMaxHorizon)
        throw PreconditionError("horizon must lie in [0, " + std::to_string(kMaxHorizon) + "], got " +
                                std::to_string(K));
}

void check_w(const Rat& w) {
    if (w < 1) throw PreconditionError("w must be >= 1, got " + format_rat(w));
}

bool in_V(const RatPair& x) { return x[0] >= 0 && x[1] >= 0; }
bool in_U(const RatPair& x) { return x[0] + x[1] == 1; }

}  // namespace

Rat parse_rat(const std::string& text) {
    const auto slash = text.find('/');
    const std::string num = text.substr(0, slash);
    const std::string den = slash == std::string::npos ? "1" : text.substr(slash + 1);
    if (!is_integer_text(num) || !is_integer_text(den)) throw IoError("not a rational 'a/b': '" + text + "'");
    const cpp_int d = to_int(den);
    if (d == 0) throw IoError("zero denominator in '" + text + "'");
    return Rat(to_int(num), d);
}

std::string format_rat(const Rat& r) { return numerator(r).str() + "/" + denominator(r).str(); }

double to_double(const Rat& r) { return r.convert_to<double>(); }

RatPair project_U(const RatPair& x) {
    const Rat half(1, 2);
    return {half * (x[0] - x[1] + 1), half * (x[1] - x[0] + 1)};
}

RatPair project_V(const RatPair& x) { return {std::max(x[0], Rat(0)), std::max(x[1], Rat(0))}; }

RatPair map_closed_form(const Rat& w, Index k) {
    check_w(w);
    if (k < 1) throw PreconditionError("map_closed_form needs k >= 1");
    const Rat e = (w - 1) / Rat(cpp_int(1) << static_cast<unsigned>(k));
    return {1 + e, -e};
}

std::vector<ConeAffineState> apg_cone_iterate(const Rat& w, Index K) {
    check_w(w);
    check_horizon(K);
    std::vector<ConeAffineState> out;
    out.reserve(static_cast<std::size_t>(K) + 1);
    ConeAffineState s;
    s.w = w;
    s.p = {w, 0};
    s.x = {w, 0};
    s.y = s.x;
    s.u = 0;
    out.push_back(s);
    for (Index k = 0; k < K; ++k) {
        const ConeAffineState& prev = out.back();
        ConeAffineState next;
        next.w = w;
        next.k = k + 1;
        next.p = map_step(prev.p);
        next.x = map_step(prev.y);
        const Rat alpha(k, k + 3);
        next.y = {next.x[0] + alpha * (next.x[0] - prev.x[0]), next.x[1] + alpha * (next.x[1] - prev.x[1])};
        next.u = next.x[1];
        if (next.k >= 2) next.d = next.u - prev.u;
        out.push_back(std::move(next));
    }
    if (auto lim = detect_M_and_limit(out); lim && lim->M) {
        for (auto& st : out) {
            if (st.k >= *lim->M) {
                st.M = lim->M;
                st.u_star = lim->u_star;
            }
        }
    }
    return out;
}

std::optional<ConeLimit> detect_M_and_limit(const std::vector<ConeAffineState>& states) {
    for (const auto& s : states) {
        if (s.k < 3 || !s.d) continue;
        if (!(in_U(s.y) && in_V(s.y) && *s.d > 0)) continue;
        const Rat u_star = s.u + Rat(s.k - 1, 2) * *s.d;
        if (!(u_star > 0 && u_star <= 1)) continue;
        ConeLimit lim;
        lim.M = s.k;
        lim.d_M = *s.d;
        lim.u_star = u_star;
        lim.x_star = {1 - u_star, u_star};
        return lim;
    }
    // Start already in U∩V: zero momentum, the trajectory never moves.
    if (states.size() >= 2 && in_U(states.front().x) && in_V(states.front().x) &&
        std::all_of(states.begin(), states.end(), [&](const auto& s) { return s.x == states.front().x; })) {
        ConeLimit lim;
        lim.stationary = true;
        lim.d_M = 0;
        lim.x_star = states.front().x;
        lim.u_star = lim.x_star[1];
        return lim;
    }
    return std::nullopt;
}

AuxTerms aux_sequence(const Rat& a, Index M, Index k) {
    if (M < 2) throw PreconditionError("aux_sequence: M must be >= 2");
    if (!(a > 0 && a < 1)) throw PreconditionError("aux_sequence: a must lie in (0, 1)");
    if (k < M) throw PreconditionError("aux_sequence: k must be >= M");
    const Rat m3 = Rat((M - 1) * M * (M + 1));
    AuxTerms t;
    t.a_k = a * m3 / Rat((k - 1) * k * (k + 1));
    t.partial_sum = aux_total(a, M) * (1 - Rat(M * (M + 1), (k + 1) * (k + 2)));
    t.tail_sum = a * m3 / Rat(2 * k * (k + 1));
    return t;
}

Rat aux_total(const Rat& a, Index M) { return a * Rat(M - 1, 2); }

SeparationReport separation_certificate(const Rat& w, Index K) {
    SeparationReport r;
    r.w = w;
    r.horizon = K;
    r.states = apg_cone_iterate(w, K);
    auto lim = detect_M_and_limit(r.states);
    if (!lim)
        throw DetectionFailure("no index M <= " + std::to_string(K) + " satisfies the detection hypotheses for w = " +
                               format_rat(w) + "; try a longer horizon (max " + std::to_string(kMaxHorizon) + ")");
    r.limit = *lim;
    r.p_star = {1, 0};
    const Rat dx = r.limit.x_star[0] - r.p_star[0];
    const Rat dy = r.limit.x_star[1] - r.p_star[1];
    r.separation_sq = dx * dx + dy * dy;
    return r;
}

FloatReplay float_replay(const std::vector<ConeAffineState>& states) {
    FloatReplay out;
    if (states.empty()) return out;
    const Index K = static_cast<Index>(states.size()) - 1;
    const Eigen::Vector2d x0(to_double(states.front().x[0]), to_double(states.front().x[1]));
    auto T = [](const Eigen::Vector2d& v) {
        const Eigen::Vector2d q = project_orthant(v);
        return Eigen::Vector2d(0.5 * (q[0] - q[1] + 1.0), 0.5 * (q[1] - q[0] + 1.0));
    };
    const auto xy = inertial_trajectory<double>(T, Eigen::VectorXd(x0), Schedule::linear_half(), K);
    const auto ps = fixed_point_trajectory<double>(T, Eigen::VectorXd(x0), K);
    auto dev = [](const Eigen::VectorXd& v, const RatPair& e) {
        return std::max(std::abs(v[0] - to_double(e[0])), std::abs(v[1] - to_double(e[1])));
    };
    for (Index k = 0; k <= K; ++k) {
        const auto& s = states[static_cast<std::size_t>(k)];
        const auto& [xk, yk] = xy[static_cast<std::size_t>(k)];
        const auto& pk = ps[static_cast<std::size_t>(k)];
        out.x.emplace_back(xk);
        out.y.emplace_back(yk);
        out.p.emplace_back(pk);
        out.max_deviation = std::max({out.max_deviation, dev(xk, s.x), dev(yk, s.y), dev(pk, s.p)});
    }
    return out;
}

}  // namespace apgkit::cone
