#include "apgkit/inpaint.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "apgkit/errors.hpp"

namespace apgkit::inpaint {

Matrix synthetic_image(Index n) {
    if (n <= 0) throw ConstructionError("synthetic_image: n must be positive");
    Matrix img(n, n);
    const double pi = std::acos(-1.0);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
            const double v = (static_cast<double>(j) + 0.5) / static_cast<double>(n);
            double val = 0.2 + 0.35 * u + 0.15 * v;
            if (u > 0.15 && u < 0.45 && v > 0.2 && v < 0.6) val += 0.3;
            if (u > 0.55 && u < 0.85 && v > 0.5 && v < 0.8) val -= 0.15;
            if (v > 0.05 && v < 0.3) val += 0.08 * std::sin(2.0 * pi * 6.0 * u) * std::cos(2.0 * pi * 3.0 * v);
            img(i, j) = std::clamp(val, 0.0, 1.0);
        }
    }
    return img;
}

Vector flatten(const Matrix& image) {
    Vector v(image.size());
    for (Index i = 0; i < image.rows(); ++i)
        for (Index j = 0; j < image.cols(); ++j) v[i * image.cols() + j] = image(i, j);
    return v;
}

Matrix unflatten(const Vector& v, Index n) {
    require_dims(v.size(), n * n, "unflatten");
    Matrix img(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) img(i, j) = v[i * n + j];
    return img;
}

const char* to_string(FreqPolicy p) {
    switch (p) {
        case FreqPolicy::Random: return "random";
        case FreqPolicy::High: return "high";
        case FreqPolicy::Low: return "low";
    }
    return "random";
}

FreqPolicy parse_freq_policy(const std::string& s) {
    if (s == "random") return FreqPolicy::Random;
    if (s == "high") return FreqPolicy::High;
    if (s == "low") return FreqPolicy::Low;
    throw ConstructionError("unknown frequency policy '" + s + "' (random|high|low)");
}

Matrix InpaintInstance::corrupted_image() const {
    Vector v = truth;
    for (Index i : corrupted) v[i] = 0.0;
    return unflatten(v, n);
}

namespace {

std::vector<Index> iota_indices(Index count) {
    std::vector<Index> v(static_cast<std::size_t>(count));
    std::iota(v.begin(), v.end(), Index{0});
    return v;
}

std::vector<Index> frequency_set(Index n, Index m, FreqPolicy policy, std::mt19937_64& rng) {
    auto all = iota_indices(n * n);
    if (policy == FreqPolicy::Random) {
        std::shuffle(all.begin(), all.end(), rng);
    } else {
        // rank by k1 + k2, ties by flat index
        std::stable_sort(all.begin(), all.end(), [n](Index a, Index b) { return a / n + a % n < b / n + b % n; });
        if (policy == FreqPolicy::High) std::reverse(all.begin(), all.end());
    }
    all.resize(static_cast<std::size_t>(m));
    std::sort(all.begin(), all.end());
    return all;
}

}  // namespace

InpaintInstance make_instance(const Matrix& image, double corruption_fraction, Index p, Index m, std::uint64_t seed,
                              FreqPolicy policy) {
    if (image.rows() != image.cols() || image.rows() == 0)
        throw ConstructionError("make_instance: image must be square and nonempty");
    if (image.minCoeff() < 0.0 || image.maxCoeff() > 1.0)
        throw ConstructionError("make_instance: image values must lie in [0, 1]");
    if (!(corruption_fraction >= 0.0 && corruption_fraction <= 1.0))
        throw ConstructionError("make_instance: corruption fraction must lie in [0, 1]");
    const Index n = image.rows();
    const Index N = n * n;
    const auto n_corrupt = static_cast<Index>(std::llround(corruption_fraction * static_cast<double>(N)));
    if (p < 0 || p > N - n_corrupt)
        throw ConstructionError("make_instance: p = " + std::to_string(p) + " exceeds the " +
                                std::to_string(N - n_corrupt) + " uncorrupted pixels");
    if (m < 0 || m > N) throw ConstructionError("make_instance: m must lie in [0, n^2]");

    std::mt19937_64 rng(seed);
    InpaintInstance inst;
    inst.n = n;
    inst.corruption_fraction = corruption_fraction;
    inst.policy = policy;
    inst.seed = seed;
    inst.truth = flatten(image);

    auto pixels = iota_indices(N);
    std::shuffle(pixels.begin(), pixels.end(), rng);
    inst.corrupted.assign(pixels.begin(), pixels.begin() + n_corrupt);
    std::vector<Index> clean(pixels.begin() + n_corrupt, pixels.end());
    std::shuffle(clean.begin(), clean.end(), rng);
    inst.known.assign(clean.begin(), clean.begin() + p);
    std::sort(inst.corrupted.begin(), inst.corrupted.end());
    std::sort(inst.known.begin(), inst.known.end());
    inst.freq = frequency_set(n, m, policy, rng);

    auto A = row_sampling_map<double>(N, inst.known);
    auto C = orthonormal_rows(dct2d_map<double>(n), inst.freq);
    inst.b = A.apply(inst.truth);
    inst.d = C.apply(inst.truth);
    inst.problem = std::make_shared<const Problemd>(std::move(A), inst.b,
                                                    AffineSubspaced::orthonormal_rows(std::move(C), inst.d), 1.0);
    return inst;
}

nlohmann::json instance_descriptor(const InpaintInstance& inst) {
    return {{"n", inst.n},
            {"corruption_fraction", inst.corruption_fraction},
            {"p", inst.p()},
            {"m", inst.m()},
            {"seed", inst.seed},
            {"freq_policy", to_string(inst.policy)},
            {"corrupted", inst.corrupted},
            {"known_pixels", inst.known},
            {"freq_indices", inst.freq}};
}

std::string InitTag::str() const {
    switch (kind) {
        case Kind::Ones: return "ones";
        case Kind::Zeros: return "zeros";
        case Kind::Truth: return "truth";
        case Kind::Random: return "random(" + std::to_string(seed) + ")";
    }
    return "zeros";
}

InitTag parse_init(const std::string& s, std::uint64_t default_seed) {
    if (s == "ones") return {InitTag::Kind::Ones, 0};
    if (s == "zeros") return {InitTag::Kind::Zeros, 0};
    if (s == "truth") return {InitTag::Kind::Truth, 0};
    if (s == "random") return {InitTag::Kind::Random, default_seed};
    if (s.rfind("random:", 0) == 0) {
        try {
            return {InitTag::Kind::Random, std::stoull(s.substr(7))};
        } catch (const std::exception&) {
        }
    }
    throw ConstructionError("unknown init '" + s + "' (ones|zeros|truth|random[:seed])");
}

Vector initial_point(const InpaintInstance& inst, const InitTag& tag) {
    const Index N = inst.n * inst.n;
    switch (tag.kind) {
        case InitTag::Kind::Ones: return Vector::Ones(N);
        case InitTag::Kind::Zeros: return Vector::Zero(N);
        case InitTag::Kind::Truth: return inst.truth;
        case InitTag::Kind::Random: {
            std::mt19937_64 rng(tag.seed);
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            Vector v(N);
            for (Index i = 0; i < N; ++i) v[i] = unif(rng);
            return v;
        }
    }
    return Vector::Zero(N);
}

double psnr(const Vector& x, const Vector& truth) {
    require_dims(x.size(), truth.size(), "psnr");
    const double mse = (x - truth).squaredNorm() / static_cast<double>(std::max<Index>(x.size(), 1));
    if (mse == 0.0) return INFINITY;
    return 10.0 * std::log10(1.0 / mse);
}

Reconstruction reconstruct(const InpaintInstance& inst, const InitTag& init, double tol, Index max_iter,
                           bool with_oracle) {
    if (!(tol > 0.0)) throw PreconditionError("reconstruct: tol must be positive");
    const Problemd& prob = *inst.problem;
    Reconstruction r;
    r.init = init;
    r.x0 = initial_point(inst, init);

    TraceOptions opts;
    opts.store_vectors = false;
    opts.track_distance = false;
    opts.use_oracle = false;
    const auto trace = run_apg(prob, r.x0, Schedule::classical_fista(), StopRule::gradmap(tol, max_iter),
                               Certify::none(), opts);
    r.x_final = trace.x_final;
    r.iters = trace.iterations;
    r.converged = trace.converged;
    r.gradmap_final = trace.records.back().gradmap;
    r.psnr_vs_truth = psnr(r.x_final, inst.truth);
    r.objective = prob.f(r.x_final);
    r.feasibility = prob.U().residual(r.x_final);
    if (with_oracle && prob.oracle_available()) {
        r.PSx0 = prob.solution_set().best_approximation(r.x0);
        r.dist_to_PSx0 = (r.x_final - *r.PSx0).norm();
    }
    return r;
}

}  // namespace apgkit::inpaint
