#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "apgkit/operators.hpp"
#include "apgkit/problem.hpp"
#include "apgkit/solvers.hpp"

namespace apgkit::inpaint {

/// Deterministic n×n test image in [0, 1]: smooth gradient, two
/// rectangles and a sinusoidal texture band.
Matrix synthetic_image(Index n);

/// Row-major flattening, matching the 2-D DCT map.
Vector flatten(const Matrix& image);
Matrix unflatten(const Vector& v, Index n);

enum class FreqPolicy { Random, High, Low };
const char* to_string(FreqPolicy p);
FreqPolicy parse_freq_policy(const std::string& s);

struct InpaintInstance {
    Index n = 0;
    std::vector<Index> corrupted;  ///< sorted
    std::vector<Index> known;      ///< sorted, disjoint from corrupted
    std::vector<Index> freq;       ///< sorted DCT row indices
    double corruption_fraction = 0;
    FreqPolicy policy = FreqPolicy::Random;
    std::uint64_t seed = 0;
    Vector truth;
    Vector b;
    Vector d;
    /// Sampling objective with U = {x : C x = d}; lip fixed to 1.
    std::shared_ptr<const Problemd> problem;

    Index p() const { return static_cast<Index>(known.size()); }
    Index m() const { return static_cast<Index>(freq.size()); }
    /// Truth with the corrupted pixels zeroed.
    Matrix corrupted_image() const;
};

/// `image` square with values in [0, 1]; p ≤ number of uncorrupted pixels;
/// 0 ≤ m ≤ n². Throws ConstructionError on infeasible sizes.
InpaintInstance make_instance(const Matrix& image, double corruption_fraction, Index p, Index m, std::uint64_t seed,
                              FreqPolicy policy = FreqPolicy::Random);

/// Sorted-list descriptor; the ground-truth image is not embedded.
nlohmann::json instance_descriptor(const InpaintInstance& inst);

struct InitTag {
    enum class Kind { Ones, Zeros, Random, Truth } kind = Kind::Zeros;
    std::uint64_t seed = 0;
    std::string str() const;
};
/// "ones", "zeros", "truth", "random" (uses `default_seed`) or "random:<seed>".
InitTag parse_init(const std::string& s, std::uint64_t default_seed);
Vector initial_point(const InpaintInstance& inst, const InitTag& tag);

struct Reconstruction {
    Vector x0;
    Vector x_final;
    InitTag init;
    double gradmap_final = 0;
    Index iters = 0;
    bool converged = false;
    double psnr_vs_truth = 0;
    double objective = 0;
    double feasibility = 0;  ///< ‖C x − d‖
    std::optional<double> dist_to_PSx0;
    std::optional<Vector> PSx0;
};

/// PSNR with peak 1; +inf for identical inputs.
double psnr(const Vector& x, const Vector& truth);

/// Classical FISTA with lip = 1, stopped on ‖G(x_k)‖ ≤ tol. The oracle
/// distance is filled in when n² is within the oracle cap.
Reconstruction reconstruct(const InpaintInstance& inst, const InitTag& init, double tol, Index max_iter = 1'000'000,
                           bool with_oracle = true);

}  // namespace apgkit::inpaint
