#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "apgkit/operators.hpp"

/// Exact study of MAP versus the inertial scheme on the line
/// U = {x1 + x2 = 1} and the cone V = R²₊. The operator P_U∘P_V is not
/// affine, so nothing here goes through the affine-quadratic machinery.
namespace apgkit::cone {

using Rat = boost::multiprecision::cpp_rational;
using RatPair = std::array<Rat, 2>;

/// Accepts "a", "a/b" with integer a, b (b ≠ 0). Throws IoError otherwise.
Rat parse_rat(const std::string& text);
/// Always "num/den" with den > 0 and the fraction reduced.
std::string format_rat(const Rat& r);
double to_double(const Rat& r);

/// Largest horizon the exact routines accept; numerators grow with k.
inline constexpr Index kMaxHorizon = 1000;

RatPair project_U(const RatPair& x);
RatPair project_V(const RatPair& x);
/// One MAP step P_U(P_V x).
inline RatPair map_step(const RatPair& x) { return project_U(project_V(x)); }

/// k-th MAP iterate from (w, 0), from its closed form.
RatPair map_closed_form(const Rat& w, Index k);

struct ConeAffineState {
    Rat w;
    Index k = 0;
    RatPair p;  ///< MAP iterate
    RatPair x;
    RatPair y;
    Rat u;                   ///< second coordinate of x
    std::optional<Rat> d;    ///< u_k − u_{k−1}, defined for k ≥ 2
    std::optional<Index> M;  ///< filled in once detection has fired at or before k
    std::optional<Rat> u_star;
};

/// Exact trajectory k = 0..K with α_k = k/(k+3); detection results are
/// copied into every state from M on.
std::vector<ConeAffineState> apg_cone_iterate(const Rat& w, Index K);

struct ConeLimit {
    /// First index ≥ 3 with y_M ∈ U∩V, d_M > 0, u* ∈ (0, 1]. Empty in the
    /// stationary case (x_k = x_0 ∈ U∩V throughout).
    std::optional<Index> M;
    Rat d_M;
    Rat u_star;
    RatPair x_star;
    bool stationary = false;
};

/// Empty when the hypotheses are never met within the trajectory.
std::optional<ConeLimit> detect_M_and_limit(const std::vector<ConeAffineState>& states);

struct AuxTerms {
    Rat a_k;
    Rat partial_sum;  ///< Σ_{j=M}^{k} a_{j+1}
    Rat tail_sum;     ///< Σ_{j=k}^{∞} a_{j+1}
};

/// a_M = a, a_{k+1} = ((k−1)/(k+2)) a_k. Requires M ≥ 2, 0 < a < 1, k ≥ M.
AuxTerms aux_sequence(const Rat& a, Index M, Index k);
/// Σ_{j=M}^{∞} a_{j+1}.
Rat aux_total(const Rat& a, Index M);

struct SeparationReport {
    Rat w;
    Index horizon = 0;
    ConeLimit limit;
    RatPair p_star;
    Rat separation_sq;  ///< ‖x* − p*‖²
    std::vector<ConeAffineState> states;
};

/// Throws DetectionFailure when detection does not fire within K.
SeparationReport separation_certificate(const Rat& w, Index K);

/// Same experiment in double precision through the generic inertial and
/// fixed-point drivers.
struct FloatReplay {
    std::vector<Eigen::Vector2d> x;
    std::vector<Eigen::Vector2d> y;
    std::vector<Eigen::Vector2d> p;
    double max_deviation = 0;  ///< sup-norm distance to the exact x, y, p
};

FloatReplay float_replay(const std::vector<ConeAffineState>& states);

}  // namespace apgkit::cone
