#pragma once

// Config-driven front end. Every artifact is a pure function of the config file
// and the subcommand, so reruns are byte-identical.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "continuation.hpp"
#include "errors.hpp"
#include "fem_solver.hpp"
#include "mesh.hpp"
#include "radial_flow.hpp"

namespace spiralflow::cli {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

enum ExitCode { Ok = 0, RunFailure = 1, ConfigInvalid = 2, NoConvergence = 3, IoFailure = 4 };

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& path, const std::string& what)
        : std::runtime_error("config error at " + path + ": " + what), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    double gamma = 2;
    BodyCurve body = BodyCurve::circle(1);
    double kappa1 = 0.3;
    double kappa2 = 0.2;
    SweepAxis axis = SweepAxis::Kappa2;
    std::vector<double> grid;
    int ladder_n_seq = 6;
    double ladder_spread = 0.1;
    std::optional<std::pair<double, double>> bracket;
    double h = 0.1;
    double R_out = 0; ///< 0 means 16 x body scale
    std::vector<double> eps_schedule = default_eps_schedule();
    FarFieldCondition far_field = FarFieldCondition::Floating;
    double newton_tol = 1e-9;
    int max_iter = 50;
    double critical_tol = 0.02;
    double r_max = 100;
    int n_tests = 12;
    std::string output_dir = ".";
};

namespace detail {

using spiralflow::detail::fmt17;

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "/" : path_, "expected an object");
    }

    void allow(std::initializer_list<const char*> keys) {
        std::set<std::string> ok(keys.begin(), keys.end());
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!ok.count(it.key())) throw ConfigError(path_ + "/" + it.key(), "unknown key");
    }

    bool has(const char* key) const { return j_.contains(key); }
    std::string at(const char* key) const { return path_ + "/" + key; }
    const json& raw(const char* key) const { return j_.at(key); }

    double number(const char* key, double fallback) const {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number()) throw ConfigError(at(key), "expected a number");
        return v.get<double>();
    }

    int integer(const char* key, int fallback) const {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
        return v.get<int>();
    }

    std::string string(const char* key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_string()) throw ConfigError(at(key), "expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const char* key) const {
        const json& v = j_.at(key);
        if (!v.is_array() || v.empty()) throw ConfigError(at(key), "expected a non-empty array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) throw ConfigError(at(key) + "/" + std::to_string(i), "expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

private:
    const json& j_;
    std::string path_;
};

inline void require(bool ok, const std::string& path, const std::string& what) {
    if (!ok) throw ConfigError(path, what);
}

} // namespace detail

/// Schema validation happens here, before any computation.
inline RunConfig parse_config(const json& j) {
    using detail::require;
    detail::Reader r(j, "");
    r.allow({"spec_version", "gamma", "body", "kappa1", "kappa2", "axis", "grid", "ladder", "bracket", "mesh",
             "eps_schedule", "far_field", "tolerances", "radial", "n_tests", "output_dir"});

    require(r.has("spec_version"), "/spec_version", "missing");
    require(r.integer("spec_version", 0) == kSchemaVersion, "/spec_version",
            "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");

    RunConfig c;
    c.gamma = r.number("gamma", c.gamma);
    require(c.gamma > 1 && std::isfinite(c.gamma), "/gamma", "gamma must be > 1");

    if (r.has("body")) {
        detail::Reader b(r.raw("body"), "/body");
        b.allow({"kind", "a", "b", "k"});
        std::string kind = b.string("kind", "circle");
        double a = b.number("a", 1);
        require(a >= 1, "/body/a", "must be >= 1");
        if (kind == "circle") {
            require(!b.has("b") && !b.has("k"), "/body", "circle takes only 'a'");
            c.body = BodyCurve::circle(a);
        } else if (kind == "perturbed_circle") {
            double amp = b.number("b", 0);
            int k = b.integer("k", 1);
            require(k >= 1, "/body/k", "must be >= 1");
            require(amp == 0 || a - std::abs(amp) > 1, "/body/b", "a - |b| must exceed 1");
            c.body = BodyCurve::perturbed(a, amp, k);
        } else {
            throw ConfigError("/body/kind", "expected 'circle' or 'perturbed_circle'");
        }
    }

    c.kappa1 = r.number("kappa1", c.kappa1);
    require(c.kappa1 > 0 && c.kappa1 < 1, "/kappa1", "must lie in (0, 1)");
    c.kappa2 = r.number("kappa2", c.kappa2);
    require(std::abs(c.kappa2) < 1, "/kappa2", "|kappa2| must be < 1");

    std::string axis = r.string("axis", "kappa2");
    if (axis == "kappa2") c.axis = SweepAxis::Kappa2;
    else if (axis == "kappa1") c.axis = SweepAxis::Kappa1;
    else throw ConfigError("/axis", "expected 'kappa2' or 'kappa1'");

    if (r.has("grid")) {
        c.grid = r.numbers("grid");
        for (std::size_t i = 0; i < c.grid.size(); ++i) {
            double v = c.grid[i];
            bool ok = c.axis == SweepAxis::Kappa2 ? (v >= 0 && v <= 1) : (v > 0 && v <= 1);
            require(ok, "/grid/" + std::to_string(i), "value outside the admissible range of " + axis);
            require(i == 0 || v > c.grid[i - 1], "/grid/" + std::to_string(i), "grid must be increasing");
        }
    }

    if (r.has("ladder")) {
        detail::Reader l(r.raw("ladder"), "/ladder");
        l.allow({"n_seq", "spread"});
        c.ladder_n_seq = l.integer("n_seq", c.ladder_n_seq);
        require(c.ladder_n_seq >= 2, "/ladder/n_seq", "must be >= 2");
        c.ladder_spread = l.number("spread", c.ladder_spread);
        require(c.ladder_spread > 0, "/ladder/spread", "must be > 0");
    }

    if (r.has("bracket")) {
        auto b = r.numbers("bracket");
        require(b.size() == 2 && b[0] < b[1], "/bracket", "expected [lo, hi] with lo < hi");
        c.bracket = std::pair{b[0], b[1]};
    }

    if (r.has("mesh")) {
        detail::Reader m(r.raw("mesh"), "/mesh");
        m.allow({"h", "R_out"});
        c.h = m.number("h", c.h);
        require(c.h > 0, "/mesh/h", "must be > 0");
        c.R_out = m.number("R_out", 0);
        require(!m.has("R_out") || c.R_out >= 4 * c.body.scale(), "/mesh/R_out", "must be >= 4 x body scale");
    }
    if (c.R_out == 0) c.R_out = 16 * c.body.scale();

    if (r.has("eps_schedule")) {
        c.eps_schedule = r.numbers("eps_schedule");
        for (std::size_t i = 0; i < c.eps_schedule.size(); ++i) {
            double e = c.eps_schedule[i];
            std::string p = "/eps_schedule/" + std::to_string(i);
            require(e > 0 && e < 0.25, p, "must lie in (0, 1/4)");
            require(i == 0 || e < c.eps_schedule[i - 1], p, "schedule must be decreasing");
        }
    }

    std::string ff = r.string("far_field", "floating");
    if (ff == "floating") c.far_field = FarFieldCondition::Floating;
    else if (ff == "zero") c.far_field = FarFieldCondition::Zero;
    else throw ConfigError("/far_field", "expected 'floating' or 'zero'");

    if (r.has("tolerances")) {
        detail::Reader t(r.raw("tolerances"), "/tolerances");
        t.allow({"newton_tol", "critical_tol", "max_iter"});
        c.newton_tol = t.number("newton_tol", c.newton_tol);
        require(c.newton_tol > 0, "/tolerances/newton_tol", "must be > 0");
        c.critical_tol = t.number("critical_tol", c.critical_tol);
        require(c.critical_tol >= 1e-3, "/tolerances/critical_tol", "must be >= 1e-3");
        c.max_iter = t.integer("max_iter", c.max_iter);
        require(c.max_iter >= 1, "/tolerances/max_iter", "must be >= 1");
    }

    if (r.has("radial")) {
        detail::Reader rr(r.raw("radial"), "/radial");
        rr.allow({"r_max"});
        c.r_max = rr.number("r_max", c.r_max);
        require(c.r_max > 1, "/radial/r_max", "must be > 1");
    }

    c.n_tests = r.integer("n_tests", c.n_tests);
    require(c.n_tests >= 1, "/n_tests", "must be >= 1");
    c.output_dir = r.string("output_dir", c.output_dir);
    return c;
}

/// SHA-1 of "blob <size>\0<content>", the hash git assigns to the file.
inline std::string git_blob_hash(const std::string& content) {
    std::string header = "blob " + std::to_string(content.size());
    header.push_back('\0');
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
    EVP_DigestUpdate(ctx, header.data(), header.size());
    EVP_DigestUpdate(ctx, content.data(), content.size());
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream hex;
    for (unsigned i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return hex.str();
}

namespace detail {

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Output {
public:
    explicit Output(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec || !std::filesystem::is_directory(dir_)) throw IoError("cannot create output directory " + dir_.string());
    }

    template <class Fn>
    void write(const std::string& name, Fn&& fn) {
        std::filesystem::path p = dir_ / name;
        std::ofstream os(p, std::ios::binary);
        if (!os) throw IoError("cannot write " + p.string());
        fn(os);
        os.flush();
        if (!os) throw IoError("write failed for " + p.string());
        written_.push_back(name);
    }

    void json_file(const std::string& name, const json& j) {
        write(name, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
    }

    const std::vector<std::string>& written() const { return written_; }

private:
    std::filesystem::path dir_;
    std::vector<std::string> written_;
};

inline json record_json(const ContinuationRecord& r) {
    json j = {{"kappa1", r.kappa1}, {"kappa2", r.kappa2}, {"eps", r.eps_used}, {"q_max", r.q_max},
              {"s_max", r.s_max}, {"energy", r.energy}, {"removed", r.removed}, {"converged", r.converged},
              {"solved", r.solved}};
    if (std::isfinite(r.next_eps_difference)) j["next_eps_difference"] = r.next_eps_difference;
    return j;
}

inline json body_json(const BodyCurve& b) {
    if (b.kind == BodyKind::Circle) return {{"kind", "circle"}, {"a", b.a}};
    return {{"kind", "perturbed_circle"}, {"a", b.a}, {"b", b.b}, {"k", b.k}};
}

inline json nan_to_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct Context {
    RunConfig cfg;
    std::string config_hash;
    int threads;
    bool quiet;
    std::ostream& out;

    ContinuationOptions continuation() const {
        ContinuationOptions o;
        o.gamma = cfg.gamma;
        o.eps_schedule = cfg.eps_schedule;
        o.solver.newton_tol = cfg.newton_tol;
        o.solver.max_iter = cfg.max_iter;
        o.solver.threads = threads;
        o.solver.far_field = cfg.far_field;
        return o;
    }

    std::shared_ptr<const Mesh> mesh() const {
        return std::make_shared<const Mesh>(generate_mesh(cfg.body, cfg.R_out, cfg.h));
    }

    json header(const char* command) const {
        return {{"command", command}, {"config_sha1", config_hash}, {"spec_version", kSchemaVersion},
                {"gamma", cfg.gamma}, {"body", body_json(cfg.body)}};
    }

    json mesh_json(const Mesh& m) const {
        MeshQuality q = mesh_quality_report(m);
        return {{"h", m.h}, {"R_out", m.R_out}, {"nodes", q.vertices}, {"triangles", q.faces},
                {"min_angle_deg", q.min_angle_deg}, {"max_aspect", q.max_aspect},
                {"far_field", to_string(cfg.far_field)}};
    }

    void say(const std::string& line) const {
        if (!quiet) out << line << '\n';
    }
};

inline void cmd_radial(const Context& ctx, Output& o) {
    const RunConfig& c = ctx.cfg;
    GasModel gas(c.gamma, c.eps_schedule.front());
    RadialReport rep;
    json j = ctx.header("radial");
    j["kappa1"] = c.kappa1;
    j["kappa2"] = c.kappa2;
    try {
        rep = classify_radial(RadialBackground(gas, c.kappa1, c.kappa2), c.r_max);
    } catch (const RegimeError& e) {
        rep.regime = RadialRegime::OutsideScope;
        rep.kappa_sq = c.kappa1 * c.kappa1 + c.kappa2 * c.kappa2;
        rep.note = e.what();
    }
    j["regime"] = to_string(rep.regime);
    j["kappa_sq"] = rep.kappa_sq;
    j["M1sq_boundary"] = rep.M1sq_boundary;
    j["max_Msq"] = rep.max_Msq;
    j["argmax_r"] = rep.argmax_r;
    j["max_rel_error"] = rep.max_rel_error;
    j["r_max"] = c.r_max;
    j["samples"] = rep.samples.size();
    if (!rep.note.empty()) j["note"] = rep.note;
    o.json_file("radial.json", j);
    o.write("radial.csv", [&](std::ostream& os) {
        os << "r,Msq_ode,Msq_algebraic\n";
        for (const auto& s : rep.samples)
            os << fmt17(s.r) << ',' << fmt17(s.Msq_ode) << ',' << fmt17(s.Msq_algebraic) << '\n';
    });
    ctx.say(std::string("regime ") + to_string(rep.regime));
}

inline void cmd_solve(const Context& ctx, Output& o) {
    const RunConfig& c = ctx.cfg;
    auto mesh = ctx.mesh();
    auto res = solve_with_truncation_removal(c.kappa1, c.kappa2, mesh, ctx.continuation());
    json j = ctx.header("solve");
    j["mesh"] = ctx.mesh_json(*mesh);
    j["record"] = record_json(res.record);
    if (!res.solution) {
        j["note"] = "boundary speed >= 1: no uniformly subsonic background";
        o.json_file("report.json", j);
        ctx.say("not solved: boundary speed >= 1");
        return;
    }
    const StreamSolution& sol = *res.solution;
    const RadialBackground& bg = sol.setup->background();
    DecayFit fit = decay_slope(sol);
    DecayFit bfit = background_decay_slope(sol.setup->field());
    RecoveredFields rf = recover_fields(sol);

    j["iterations"] = sol.iterations;
    j["argmax"] = {sol.argmax.x(), sol.argmax.y()};
    j["rho0"] = bg.rho0();
    j["boundary_flux"] = boundary_flux(sol);
    j["boundary_flux_expected"] = 2 * std::numbers::pi * bg.rho0() * bg.kappa1();
    j["weak_residual"] = weak_residual(sol, c.n_tests);
    j["sonic_triangles"] = rf.sonic_or_above.size();
    j["decay"] = {{"exact_match", fit.exact_match}, {"slope", fit.exact_match ? json(nullptr) : json(fit.slope)},
                  {"background_slope", bfit.slope}};
    j["energy_norm_sq"] = dirichlet_energy(sol.setup->field(), sol.u);

    o.write("solution.vtk", [&](std::ostream& os) { write_solution_vtk(os, sol); });
    o.write("rings.csv", [&](std::ostream& os) { write_rings_csv(os, fit); });
    o.json_file("report.json", j);
    ctx.say("q_max " + fmt17(sol.q_max) + " eps " + fmt17(res.record.eps_used) +
            (res.record.removed ? " (truncation removed)" : " (truncation active)"));
}

inline void cmd_sweep(const Context& ctx, Output& o) {
    const RunConfig& c = ctx.cfg;
    std::vector<double> grid = c.grid;
    if (grid.empty()) {
        for (double v : default_critical_grid(c.axis))
            if (v < 1) grid.push_back(v);
    }
    double fixed = c.axis == SweepAxis::Kappa2 ? c.kappa1 : c.kappa2;
    auto mesh = ctx.mesh();
    SweepResult s = parameter_sweep(c.axis, fixed, grid, mesh, ctx.continuation());
    o.write("sweep.csv", [&](std::ostream& os) { write_records_csv(os, s.records); });
    json j = ctx.header("sweep");
    j["axis"] = to_string(c.axis);
    j["fixed"] = fixed;
    j["mesh"] = ctx.mesh_json(*mesh);
    j["modulus"] = s.modulus;
    j["max_jump"] = s.max_jump;
    j["records"] = json::array();
    for (const auto& r : s.records) j["records"].push_back(record_json(r));
    o.json_file("sweep.json", j);
    ctx.say("sweep of " + std::to_string(s.records.size()) + " points, modulus " + fmt17(s.modulus));
}

inline CriticalResult run_critical(const Context& ctx, const std::shared_ptr<const Mesh>& mesh) {
    const RunConfig& c = ctx.cfg;
    double fixed = c.axis == SweepAxis::Kappa2 ? c.kappa1 : c.kappa2;
    return find_critical_parameter(c.axis, fixed, c.critical_tol, mesh, ctx.continuation(), c.grid);
}

inline json critical_json(const CriticalResult& cr) {
    json j = {{"axis", to_string(cr.axis)}, {"fixed", cr.fixed}, {"bracket", {cr.lo, cr.hi}},
              {"width", cr.hi - cr.lo}, {"lower_record", record_json(cr.lo_record)}};
    j["steps"] = json::array();
    for (const auto& s : cr.steps)
        j["steps"].push_back({{"lo", s.lo}, {"hi", s.hi}, {"mid", s.mid}, {"removed", s.removed}});
    return j;
}

inline void cmd_critical(const Context& ctx, Output& o) {
    auto mesh = ctx.mesh();
    CriticalResult cr = run_critical(ctx, mesh);
    json j = ctx.header("critical");
    j["mesh"] = ctx.mesh_json(*mesh);
    j.update(critical_json(cr));
    o.json_file("critical.json", j);
    o.write("critical.csv", [&](std::ostream& os) { write_records_csv(os, cr.grid_records); });
    ctx.say("critical bracket [" + fmt17(cr.lo) + ", " + fmt17(cr.hi) + "]");
}

inline void cmd_limit(const Context& ctx, Output& o) {
    const RunConfig& c = ctx.cfg;
    auto mesh = ctx.mesh();
    json j = ctx.header("limit");
    j["mesh"] = ctx.mesh_json(*mesh);
    double fixed = c.axis == SweepAxis::Kappa2 ? c.kappa1 : c.kappa2;
    double lo, hi;
    if (c.bracket) {
        std::tie(lo, hi) = *c.bracket;
    } else {
        CriticalResult cr = run_critical(ctx, mesh);
        lo = cr.lo;
        hi = cr.hi;
        j["critical"] = critical_json(cr);
    }
    LimitStudy st = sonic_limit_study(c.axis, fixed, lo, hi, c.ladder_n_seq, mesh, ctx.continuation(),
                                      c.ladder_spread, c.n_tests);
    std::vector<ContinuationRecord> recs;
    j["axis"] = to_string(c.axis);
    j["fixed"] = fixed;
    j["bracket"] = {lo, hi};
    j["annulus"] = {st.annulus_inner, st.annulus_outer};
    j["points"] = json::array();
    for (const auto& p : st.points) {
        recs.push_back(p.record);
        json pj = record_json(p.record);
        pj["kappa"] = p.kappa;
        pj["cauchy_difference"] = nan_to_null(p.cauchy_difference);
        pj["mass_residual"] = p.mass_residual;
        pj["irrotational_residual"] = p.irrotational_residual;
        pj["delta_h"] = p.delta_h;
        j["points"].push_back(pj);
    }
    j["weak_residual_final"] = st.weak_residual_final;
    o.write("limit.csv", [&](std::ostream& os) { write_records_csv(os, recs); });
    o.json_file("limit.json", j);
    ctx.say("ladder of " + std::to_string(st.points.size()) + " points, final q_max " +
            fmt17(st.points.back().record.q_max));
}

} // namespace detail

inline int resolve_threads(int flag) {
    if (flag > 0) return flag;
    if (const char* env = std::getenv("SPIRALFLOW_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return int(v);
    }
    return 1;
}

/// Entry point shared by the executable and the tests.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Subsonic spiral flow past a porous body"};
    app.require_subcommand(1);
    std::string config_path, output_dir;
    int threads = 0;
    bool quiet = false;
    const char* names[] = {"radial", "solve", "sweep", "critical", "limit"};
    const char* help[] = {"classify the radial background and integrate the Mach system",
                          "single solve with truncation removal; VTK, ring maxima, report",
                          "parameter sweep along the configured axis",
                          "bracket the critical parameter by bisection on removability",
                          "ladder of solutions approaching the sonic limit"};
    for (int i = 0; i < 5; ++i) {
        CLI::App* sub = app.add_subcommand(names[i], help[i]);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--output", output_dir, "output directory (overrides output_dir)");
        sub->add_option("--threads", threads, "worker threads (default: SPIRALFLOW_THREADS or 1)");
        sub->add_flag("--quiet", quiet, "suppress progress output");
    }

    std::vector<std::string> storage(args.begin(), args.end());
    storage.insert(storage.begin(), "spiralflow");
    std::vector<char*> argv;
    for (auto& s : storage) argv.push_back(s.data());
    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return Ok;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return ConfigInvalid;
    }

    std::string command;
    for (const char* n : names)
        if (app.got_subcommand(n)) command = n;

    try {
        std::string text = detail::read_file(config_path);
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError("/", std::string("invalid JSON: ") + e.what());
        }
        detail::Context ctx{parse_config(j), git_blob_hash(text), resolve_threads(threads), quiet, out};
        if (!output_dir.empty()) ctx.cfg.output_dir = output_dir;
        detail::Output o(ctx.cfg.output_dir);

        if (command == "radial") detail::cmd_radial(ctx, o);
        else if (command == "solve") detail::cmd_solve(ctx, o);
        else if (command == "sweep") detail::cmd_sweep(ctx, o);
        else if (command == "critical") detail::cmd_critical(ctx, o);
        else detail::cmd_limit(ctx, o);
        return Ok;
    } catch (const ConfigError& e) {
        err << e.what() << '\n';
        return ConfigInvalid;
    } catch (const MeshQualityError& e) {
        err << e.what() << '\n';
        return ConfigInvalid;
    } catch (const ConvergenceError& e) {
        err << e.what() << '\n';
        return NoConvergence;
    } catch (const IoError& e) {
        err << e.what() << '\n';
        return IoFailure;
    } catch (const std::exception& e) {
        err << command << ": " << e.what() << '\n';
        return RunFailure;
    }
}

} // namespace spiralflow::cli
