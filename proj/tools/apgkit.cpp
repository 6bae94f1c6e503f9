// apgkit command-line driver: solve, counterexample, inpaint, diagnose.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "apgkit/apgkit.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace apgkit;

namespace {

enum Exit : int { kOk = 0, kConfig = 2, kDetection = 3, kOracleCap = 4, kNonConvergence = 5 };

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Resolved configuration; its canonical dump (without output paths) is
/// hashed into every output header.
struct Run {
    json config;
    std::uint64_t seed = 0;
    fs::path out = ".";

    io::FileHeader header() const {
        io::FileHeader h;
        h.version = kVersion;
        h.config_hash = hex64(fnv1a(config.dump()));
        h.seed = seed;
        return h;
    }

    json header_json() const {
        const auto h = header();
        return json{{"tool", h.tool}, {"version", h.version}, {"config_hash", h.config_hash}, {"seed", h.seed}};
    }

    void write_json(const std::string& name, json body) const {
        json doc;
        doc["header"] = header_json();
        for (auto& [k, v] : body.items()) doc[k] = v;
        fs::create_directories(out);
        std::ofstream f(out / name);
        if (!f) throw IoError("cannot write " + (out / name).string());
        f << doc.dump(2) << '\n';
    }
};

json num(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

json vec_json(const Vector& v) {
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
    return a;
}

// ---------------------------------------------------------------- solve

Schedule parse_schedule(const std::string& spec, const fs::path& base) {
    if (spec == "fista" || spec == "classical" || spec == "classical-fista") return Schedule::classical_fista();
    if (spec == "linear-half") return Schedule::linear_half();
    auto arg = [&](std::size_t pos) { return spec.substr(pos); };
    try {
        if (spec.rfind("cd:", 0) == 0) return Schedule::chambolle_dossal(std::stod(arg(3)));
        if (spec.rfind("theta:", 0) == 0) return Schedule::theta_family(std::stod(arg(6)));
    } catch (const std::invalid_argument&) {
        throw ScheduleError("bad schedule parameter in '" + spec + "'");
    }
    if (spec.rfind("custom:", 0) == 0) {
        fs::path p = arg(7);
        if (p.is_relative() && !fs::exists(p)) p = base / p;
        return io::read_schedule(p);
    }
    throw ScheduleError("unknown schedule '" + spec + "' (fista|linear-half|cd:ALPHA|theta:THETA|custom:FILE)");
}

Certify parse_certify(const std::string& spec) {
    if (spec == "all") return Certify::all();
    Certify c = Certify::none();
    if (spec == "none" || spec.empty()) return c;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "xi") c.xi = true;
        else if (item == "ball") c.ball = true;
        else if (item == "rate") c.rate = true;
        else if (item == "shadow") c.shadow = true;
        else throw ConstructionError("unknown certificate '" + item + "' (xi,ball,rate,shadow|all|none)");
    }
    return c;
}

struct ProblemSource {
    std::string problem_file;
    std::vector<std::uint64_t> random;  // n m [seed]
    std::uint64_t seed = 1;

    void add_options(CLI::App* cmd) {
        cmd->add_option("--problem", problem_file, "Problem JSON descriptor");
        cmd->add_option("--random", random, "Random instance: N M [SEED] (ambient dimension, rows of A)")
            ->expected(2, 3);
        cmd->add_option("--seed", seed, "Seed for generated data")->capture_default_str();
    }

    std::uint64_t instance_seed() const { return random.size() == 3 ? random[2] : seed; }

    json describe() const {
        if (!problem_file.empty()) return json{{"problem", fs::absolute(problem_file).lexically_normal().string()}};
        return json{{"random", {{"n", random.at(0)}, {"m", random.at(1)}, {"seed", instance_seed()}}}};
    }

    Problemd load() const {
        if (!problem_file.empty() && !random.empty())
            throw ConstructionError("give either --problem or --random, not both");
        if (!problem_file.empty()) return io::load_problem(problem_file);
        if (random.empty()) throw ConstructionError("a problem is required: --problem FILE or --random N M [SEED]");
        return random_instance<double>(
            random_spec(static_cast<Index>(random[0]), static_cast<Index>(random[1]), instance_seed()));
    }
};

struct SolveOptions {
    ProblemSource src;
    std::string schedule = "fista";
    bool pgm = false;
    std::optional<double> tol;
    std::optional<double> gap_tol;
    Index max_iter = 1'000'000;
    std::string certify = "all";
    std::string x0 = "zeros";
    bool override_admissibility = false;
    std::string out = ".";
};

Vector make_x0(const std::string& spec, Index n, std::uint64_t seed) {
    if (spec == "zeros") return Vector::Zero(n);
    if (spec == "ones") return Vector::Ones(n);
    if (spec == "random") {
        std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
        return detail::gaussian_vector<double>(n, rng);
    }
    Vector v = io::read_vector(spec);
    require_dims(v.size(), n, "x0 file");
    return v;
}

int cmd_solve(const SolveOptions& o) {
    Run run;
    run.seed = o.src.instance_seed();
    run.out = o.out;
    const double tol = o.tol.value_or(o.gap_tol ? 0.0 : 1e-10);
    run.config = json{{"command", "solve"},
                      {"source", o.src.describe()},
                      {"method", o.pgm ? "pgm" : "apg"},
                      {"schedule", o.pgm ? json(nullptr) : json(o.schedule)},
                      {"tol", o.tol || !o.gap_tol ? json(tol) : json(nullptr)},
                      {"gap_tol", o.gap_tol ? json(*o.gap_tol) : json(nullptr)},
                      {"max_iter", o.max_iter},
                      {"certify", o.pgm ? "none" : o.certify},
                      {"x0", o.x0},
                      {"override_admissibility", o.override_admissibility}};

    const Problemd prob = o.src.load();
    const Vector x0 = make_x0(o.x0, prob.dim(), run.seed);
    StopRule stop;
    if (o.tol || !o.gap_tol) stop.gradmap_tol = tol;
    stop.gap_tol = o.gap_tol;
    stop.max_iter = o.max_iter;

    TraceOptions topts;
    topts.store_vectors = false;
    topts.override_admissibility = o.override_admissibility;

    SolverTrace<double> trace;
    if (o.pgm) {
        trace = run_pgm(prob, x0, stop, topts);
    } else {
        const Schedule sched = parse_schedule(o.schedule, fs::current_path());
        trace = run_apg(prob, x0, sched, stop, parse_certify(o.certify), topts);
    }

    const auto header = run.header();
    fs::create_directories(run.out);
    io::write_trace_csv(run.out / "trace.csv", trace, &header);
    io::write_binary(run.out / "x_final.bin", Matrix(trace.x_final));

    const auto& c = trace.certification;
    auto viol = [](const Violations& v) {
        return json{{"count", v.count}, {"first", v.first ? json(*v.first) : json(nullptr)}};
    };
    json body;
    body["method"] = trace.method;
    body["schedule"] = trace.schedule;
    body["lip"] = trace.lip;
    body["iterations"] = trace.iterations;
    body["converged"] = trace.converged;
    body["stop_reason"] = to_string(trace.reason);
    body["gradmap_final"] = num(trace.records.back().gradmap);
    body["F_final"] = num(trace.records.back().F);
    body["mu"] = trace.mu ? num(*trace.mu) : json(nullptr);
    body["dist_to_PSx0"] = trace.x_star ? num((trace.x_final - *trace.x_star).norm()) : json(nullptr);
    body["schedule_satisfies_fista_conditions"] = c.binding;
    body["certification"] = json{{"rate", viol(c.rate)},
                                 {"xi_monotone", viol(c.xi_monotone)},
                                 {"xi_initial", viol(c.xi_initial)},
                                 {"ball_x", viol(c.ball_x)},
                                 {"ball_z", viol(c.ball_z)},
                                 {"shadow_par", viol(c.shadow_par)},
                                 {"shadow_projection", viol(c.shadow_projection)},
                                 {"shadow_triangle", viol(c.shadow_triangle)},
                                 {"total", c.total()}};
    body["warnings"] = trace.warnings;
    run.write_json("certification.json", body);

    json summary;
    summary["header"] = run.header_json();
    for (auto& [k, v] : body.items()) summary[k] = v;
    std::cout << summary.dump(2) << '\n';
    return trace.converged ? kOk : kNonConvergence;
}

// --------------------------------------------------------- counterexample

struct ConeOptions {
    std::string w = "5";
    Index horizon = 40;
    std::string out = ".";
};

json pair_json(const cone::RatPair& p) { return json::array({cone::format_rat(p[0]), cone::format_rat(p[1])}); }

int cmd_counterexample(const ConeOptions& o) {
    using cone::Rat;
    using cone::RatPair;
    Run run;
    run.out = o.out;
    const Rat w = cone::parse_rat(o.w);
    run.config = json{{"command", "counterexample"}, {"w", cone::format_rat(w)}, {"horizon", o.horizon}};

    const auto states = cone::apg_cone_iterate(w, o.horizon);
    const auto header = run.header();
    fs::create_directories(run.out);
    {
        std::ofstream f(run.out / "cone_exact.csv");
        f << header.line() << '\n' << "k,p1,p2,x1,x2,y1,y2,u,d\n";
        for (const auto& s : states) {
            f << s.k << ',' << cone::format_rat(s.p[0]) << ',' << cone::format_rat(s.p[1]) << ','
              << cone::format_rat(s.x[0]) << ',' << cone::format_rat(s.x[1]) << ',' << cone::format_rat(s.y[0]) << ','
              << cone::format_rat(s.y[1]) << ',' << cone::format_rat(s.u) << ','
              << (s.d ? cone::format_rat(*s.d) : std::string()) << '\n';
        }
    }
    const auto replay = cone::float_replay(states);
    {
        std::ofstream f(run.out / "cone_float.csv");
        f << header.line() << '\n' << "k,p1,p2,x1,x2,y1,y2\n";
        for (std::size_t k = 0; k < states.size(); ++k) {
            f << k << ',' << io::format_double(replay.p[k][0]) << ',' << io::format_double(replay.p[k][1]) << ','
              << io::format_double(replay.x[k][0]) << ',' << io::format_double(replay.x[k][1]) << ','
              << io::format_double(replay.y[k][0]) << ',' << io::format_double(replay.y[k][1]) << '\n';
        }
    }

    const auto lim = cone::detect_M_and_limit(states);
    if (!lim) {
        json err{{"error", "detection"},
                 {"message", "no index M <= " + std::to_string(o.horizon) +
                                 " satisfies y_M in U∩V, d_M > 0, u* in (0,1]; rerun with a larger --horizon (max " +
                                 std::to_string(cone::kMaxHorizon) + ")"}};
        std::cerr << err.dump() << '\n';
        return kDetection;
    }
    const RatPair p_star{1, 0};
    const Rat dx = lim->x_star[0] - p_star[0];
    const Rat dy = lim->x_star[1] - p_star[1];
    const Rat sep = dx * dx + dy * dy;
    {
        std::ofstream f(run.out / "cone_limits.csv");
        f << header.line() << '\n' << "name,c1,c2,c1_exact,c2_exact\n";
        f << "p_star," << io::format_double(1.0) << ',' << io::format_double(0.0) << ",1/1,0/1\n";
        f << "x_star," << io::format_double(cone::to_double(lim->x_star[0])) << ','
          << io::format_double(cone::to_double(lim->x_star[1])) << ',' << cone::format_rat(lim->x_star[0]) << ','
          << cone::format_rat(lim->x_star[1]) << '\n';
    }

    json body;
    body["w"] = cone::format_rat(w);
    body["horizon"] = o.horizon;
    body["stationary"] = lim->stationary;
    body["M"] = lim->M ? json(*lim->M) : json(nullptr);
    body["d_M"] = cone::format_rat(lim->d_M);
    body["u_star"] = cone::format_rat(lim->u_star);
    body["x_star"] = pair_json(lim->x_star);
    body["p_star"] = pair_json(p_star);
    body["separation_sq"] = cone::format_rat(sep);
    body["float_replay_max_deviation"] = replay.max_deviation;

    bool ok = true;
    if (w == 5) {
        json checks = json::array();
        auto check = [&](const std::string& name, bool pass) {
            checks.push_back(json{{"check", name}, {"pass", pass}});
            ok = ok && pass;
        };
        auto at = [&](Index k) -> const cone::ConeAffineState* {
            return k < static_cast<Index>(states.size()) ? &states[static_cast<std::size_t>(k)] : nullptr;
        };
        auto x_is = [&](Index k, RatPair v) { return at(k) && at(k)->x == v; };
        check("x1 = (3,-2)", x_is(1, {3, -2}));
        check("x2 = (2,-1)", x_is(2, {2, -1}));
        check("x3 = (11/8,-3/8)", x_is(3, {Rat(11, 8), Rat(-3, 8)}));
        check("x4 = (17/16,-1/16)", x_is(4, {Rat(17, 16), Rat(-1, 16)}));
        check("y4 = (29/32,3/32)", at(4) && at(4)->y == RatPair{Rat(29, 32), Rat(3, 32)});
        check("M = 4", lim->M == Index{4});
        check("d4 = 5/16", lim->d_M == Rat(5, 16));
        check("u* = 13/32", lim->u_star == Rat(13, 32));
        check("x* = (19/32,13/32)", lim->x_star == RatPair{Rat(19, 32), Rat(13, 32)});
        check("p* = (1,0)", p_star == RatPair{1, 0} && cone::map_closed_form(w, 1) == RatPair{3, -2});
        check("separation^2 = 169/512", sep == Rat(169, 512));
        if (at(10)) check("u10 = 113/352", at(10)->u == Rat(113, 352));
        body["golden_checks"] = checks;
    }
    body["ok"] = ok;
    run.write_json("cone_summary.json", body);
    json summary;
    summary["header"] = run.header_json();
    for (auto& [k, v] : body.items()) summary[k] = v;
    std::cout << summary.dump(2) << '\n';
    return ok ? kOk : kDetection;
}

// ---------------------------------------------------------------- inpaint

struct InpaintOptions {
    std::optional<Index> synthetic;
    std::string image;
    double corrupt = 0.4;
    std::optional<Index> p;
    std::optional<Index> m;
    std::uint64_t seed = 7;
    std::string freq_policy = "random";
    std::string inits = "ones,zeros,random";
    double tol = 1e-10;
    Index max_iter = 1'000'000;
    bool no_oracle = false;
    std::string out = ".";
};

std::string file_tag(const inpaint::InitTag& t) {
    std::string s = t.str();
    for (char& c : s)
        if (c == '(' || c == ')') c = '_';
    while (!s.empty() && s.back() == '_') s.pop_back();
    return s;
}

int cmd_inpaint(const InpaintOptions& o) {
    Run run;
    run.seed = o.seed;
    run.out = o.out;
    if (o.synthetic.has_value() == !o.image.empty())
        throw ConstructionError("give exactly one of --synthetic N or --image FILE");
    Matrix image;
    if (o.synthetic) {
        image = inpaint::synthetic_image(*o.synthetic);
    } else {
        const fs::path ip(o.image);
        image = ip.extension() == ".pgm" ? io::read_pgm(ip) : io::read_matrix(ip);
    }
    const Index n = image.rows();
    const Index N = n * n;
    const Index clean = N - static_cast<Index>(std::llround(o.corrupt * static_cast<double>(N)));
    const Index p = o.p.value_or(std::min<Index>(clean, N / 2));
    const Index m = o.m.value_or(N / 8);
    std::vector<std::string> init_specs;
    {
        std::stringstream ss(o.inits);
        std::string item;
        while (std::getline(ss, item, ',')) init_specs.push_back(item);
    }
    run.config = json{{"command", "inpaint"},
                      {"image", o.synthetic ? json{{"synthetic", *o.synthetic}}
                                            : json{{"file", fs::absolute(o.image).lexically_normal().string()}}},
                      {"corrupt", o.corrupt},
                      {"p", p},
                      {"m", m},
                      {"seed", o.seed},
                      {"freq_policy", o.freq_policy},
                      {"inits", init_specs},
                      {"tol", o.tol},
                      {"max_iter", o.max_iter},
                      {"oracle", !o.no_oracle}};

    const auto inst =
        inpaint::make_instance(image, o.corrupt, p, m, o.seed, inpaint::parse_freq_policy(o.freq_policy));
    const auto header = run.header();
    fs::create_directories(run.out);
    io::write_pgm(run.out / "truth.pgm", image, &header);
    io::write_pgm(run.out / "corrupted.pgm", inst.corrupted_image(), &header);
    run.write_json("instance.json", json::parse(inpaint::instance_descriptor(inst).dump()));

    std::vector<inpaint::Reconstruction> recs;
    for (const auto& spec : init_specs) {
        auto r = inpaint::reconstruct(inst, inpaint::parse_init(spec, o.seed), o.tol, o.max_iter, !o.no_oracle);
        const std::string tag = file_tag(r.init);
        io::write_pgm(run.out / ("recon_" + tag + ".pgm"), inpaint::unflatten(r.x_final, n), &header);
        io::write_csv(run.out / ("recon_" + tag + ".csv"), inpaint::unflatten(r.x_final, n), &header);
        recs.push_back(std::move(r));
    }

    json body;
    body["n"] = n;
    body["p"] = inst.p();
    body["m"] = inst.m();
    json per = json::array();
    bool all_converged = true;
    for (const auto& r : recs) {
        all_converged = all_converged && r.converged;
        per.push_back(json{{"init", r.init.str()},
                           {"converged", r.converged},
                           {"iterations", r.iters},
                           {"gradmap_final", num(r.gradmap_final)},
                           {"psnr", num(r.psnr_vs_truth)},
                           {"objective", num(r.objective)},
                           {"constraint_residual", num(r.feasibility)},
                           {"dist_to_PSx0", r.dist_to_PSx0 ? num(*r.dist_to_PSx0) : json(nullptr)}});
    }
    body["reconstructions"] = per;
    json pairs = json::array();
    for (std::size_t i = 0; i < recs.size(); ++i)
        for (std::size_t j = i + 1; j < recs.size(); ++j)
            pairs.push_back(json{{"a", recs[i].init.str()},
                                 {"b", recs[j].init.str()},
                                 {"distance", num((recs[i].x_final - recs[j].x_final).norm())}});
    body["pairwise_distances"] = pairs;
    body["oracle_available"] = inst.problem->oracle_available() && !o.no_oracle;
    run.write_json("metrics.json", body);
    json summary;
    summary["header"] = run.header_json();
    for (auto& [k, v] : body.items()) summary[k] = v;
    std::cout << summary.dump(2) << '\n';
    return all_converged ? kOk : kNonConvergence;
}

// --------------------------------------------------------------- diagnose

struct DiagnoseOptions {
    ProblemSource src;
    std::string out;
};

int cmd_diagnose(const DiagnoseOptions& o) {
    Run run;
    run.seed = o.src.instance_seed();
    run.config = json{{"command", "diagnose"}, {"source", o.src.describe()}};
    const Problemd prob = o.src.load();
    if (!prob.oracle_available())
        throw OracleUnavailable("dimension " + std::to_string(prob.dim()) + " exceeds the oracle cap " +
                                std::to_string(oracle_cap()));
    const auto diag = closedness_diagnostics(prob);
    const auto& S = prob.solution_set();
    const Vector grad = prob.gradient(S.anchor());
    json body;
    body["dim"] = prob.dim();
    body["lip"] = prob.lip();
    body["friedrichs_cos"] = num(diag.friedrichs_cos);
    body["error_bound_C"] = num(diag.error_bound_C);
    body["dim_par_U"] = diag.dim_par_U;
    body["dim_ker_A"] = diag.dim_ker_A;
    body["dim_par_S"] = diag.dim_par_S;
    body["mu"] = num(S.mu());
    body["anchor"] = vec_json(S.anchor());
    body["anchor_U_residual"] = num(prob.U().residual(S.anchor()));
    body["anchor_stationarity"] = num(prob.U().project_parallel(grad).norm());
    body["anchor_gradmap"] = num(gradient_mapping(prob, S.anchor()).norm());
    json summary;
    summary["header"] = run.header_json();
    for (auto& [k, v] : body.items()) summary[k] = v;
    if (!o.out.empty()) {
        run.out = fs::path(o.out).parent_path().empty() ? fs::path(".") : fs::path(o.out).parent_path();
        run.write_json(fs::path(o.out).filename().string(), body);
    }
    std::cout << summary.dump(2) << '\n';
    return kOk;
}

int report(const std::string& kind, const std::string& message, int code) {
    std::cerr << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"apgkit: proximal-gradient and accelerated iterations for affine-constrained least squares"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    SolveOptions so;
    auto* solve = app.add_subcommand("solve", "Run PGM or APG on a problem and certify the iterates");
    so.src.add_options(solve);
    solve->add_option("--schedule", so.schedule, "fista | linear-half | cd:ALPHA | theta:THETA | custom:FILE")
        ->capture_default_str();
    solve->add_flag("--pgm", so.pgm, "Run the plain proximal gradient method");
    solve->add_option("--tol", so.tol, "Stop when the gradient mapping norm is <= tol (default 1e-10)");
    solve->add_option("--gap-tol", so.gap_tol, "Stop when F(x_k) - mu <= tol (needs the oracle)");
    solve->add_option("--max-iter", so.max_iter, "Iteration guard")->capture_default_str();
    solve->add_option("--certify", so.certify, "all | none | comma list of xi,ball,rate,shadow")
        ->capture_default_str();
    solve->add_option("--x0", so.x0, "zeros | ones | random | vector file")->capture_default_str();
    solve->add_flag("--override-admissibility", so.override_admissibility, "Run inadmissible schedules anyway");
    solve->add_option("--out", so.out, "Output directory")->capture_default_str();

    ConeOptions co;
    auto* cone_cmd = app.add_subcommand("counterexample", "Exact MAP vs APG run on the cone/line example");
    cone_cmd->add_option("--w", co.w, "Start abscissa as NUM or NUM/DEN, x0 = (w, 0)")->capture_default_str();
    cone_cmd->add_option("--horizon", co.horizon, "Number of iterations (<= 1000)")->capture_default_str();
    cone_cmd->add_option("--out", co.out, "Output directory")->capture_default_str();

    InpaintOptions io_;
    auto* inp = app.add_subcommand("inpaint", "Image inpainting with sampling and DCT constraints");
    inp->add_option("--synthetic", io_.synthetic, "Use the built-in N x N test image");
    inp->add_option("--image", io_.image, "Ground-truth image (.pgm or matrix CSV/.bin)");
    inp->add_option("--corrupt", io_.corrupt, "Fraction of corrupted pixels")->capture_default_str();
    inp->add_option("--p", io_.p, "Number of known pixels");
    inp->add_option("--m", io_.m, "Number of known DCT coefficients");
    inp->add_option("--seed", io_.seed, "Instance seed")->capture_default_str();
    inp->add_option("--freq-policy", io_.freq_policy, "random | high | low")->capture_default_str();
    inp->add_option("--inits", io_.inits, "Comma list of ones, zeros, truth, random[:SEED]")->capture_default_str();
    inp->add_option("--tol", io_.tol, "Gradient mapping tolerance")->capture_default_str();
    inp->add_option("--max-iter", io_.max_iter, "Iteration guard")->capture_default_str();
    inp->add_flag("--no-oracle", io_.no_oracle, "Skip the exact P_S x0 comparison");
    inp->add_option("--out", io_.out, "Output directory")->capture_default_str();

    DiagnoseOptions dopt;
    auto* diag = app.add_subcommand("diagnose", "Friedrichs cosine, error-bound constant and solution set");
    dopt.src.add_options(diag);
    diag->add_option("--out", dopt.out, "Also write the report to this JSON file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report("config", e.what(), kConfig);
    }

    try {
        if (*solve) return cmd_solve(so);
        if (*cone_cmd) return cmd_counterexample(co);
        if (*inp) return cmd_inpaint(io_);
        if (*diag) return cmd_diagnose(dopt);
    } catch (const DetectionFailure& e) {
        return report(e.kind(), e.what(), kDetection);
    } catch (const OracleUnavailable& e) {
        return report(e.kind(), e.what(), kOracleCap);
    } catch (const CertificationUnavailable& e) {
        return report(e.kind(), e.what(), kOracleCap);
    } catch (const NonConvergence& e) {
        return report(e.kind(), e.what(), kNonConvergence);
    } catch (const Error& e) {
        return report(e.kind(), e.what(), kConfig);
    } catch (const nlohmann::json::exception& e) {
        return report("config", e.what(), kConfig);
    } catch (const std::filesystem::filesystem_error& e) {
        return report("io", e.what(), kConfig);
    }
    return kConfig;
}
