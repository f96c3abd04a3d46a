// cli.hpp
//
// eib <command> --config <file.json> [--out <dir>] [--strict] [--threads N] [--set key=value]...
//
// Exit codes: 0 ok, 1 unexpected failure, 2 malformed input or invalid
// configuration, 3 non-convergence under --strict, 4 hypothesis enumeration
// budget exceeded.
#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "eib/bounds.hpp"
#include "eib/error.hpp"
#include "eib/experiments.hpp"
#include "eib/gauss.hpp"
#include "eib/io.hpp"
#include "eib/parallel.hpp"
#include "eib/solver.hpp"
#include "eib/svg.hpp"
#include "eib/toy.hpp"
#include "eib/version.hpp"

namespace eib::cli {

namespace fs = std::filesystem;
using io::json;

enum ExitCode : int { kOk = 0, kFailure = 1, kMalformed = 2, kNotConverged = 3, kBudget = 4 };

inline const std::vector<std::string> kCommands = {"solve",        "sweep",      "bounds-sim", "toy-transfer",
                                                   "rd-compare",   "gauss",      "decompose"};

inline std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

struct Options {
    std::string command;
    std::string config_path;
    std::string out_dir = ".";
    bool strict = false;
    std::optional<std::size_t> threads;
    std::vector<std::string> sets;
};

/// Files written by one run, in write order.
class OutputSet {
public:
    explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

    void write(const std::string& name, const std::string& content) {
        std::ofstream f(dir_ / name, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
        f << content;
        files_.push_back({name, sha256_hex(content), content.size()});
    }

    struct Entry {
        std::string name;
        std::string sha256;
        std::size_t bytes;
    };
    [[nodiscard]] const std::vector<Entry>& files() const noexcept { return files_; }
    [[nodiscard]] const fs::path& dir() const noexcept { return dir_; }

private:
    fs::path dir_;
    std::vector<Entry> files_;
};

struct RunContext {
    json config;
    fs::path config_dir;
    std::size_t threads = 1;
    OutputSet out;
    std::ostream& log;
    bool not_converged = false;
};

// ---------------------------------------------------------------------------
// Config helpers

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return io::guarded(key, [&] { return j.at(key).get<T>(); });
}

inline json section(const json& j, const char* key) {
    if (!j.contains(key)) return json::object();
    if (!j.at(key).is_object()) fail(ErrorKind::MalformedInput, std::string(key) + " must be an object");
    return j.at(key);
}

/// `key` inline, or `key_file` relative to the config file.
inline std::optional<json> object_or_file(const RunContext& ctx, const std::string& key) {
    if (ctx.config.contains(key)) return ctx.config.at(key);
    const std::string fkey = key + "_file";
    if (ctx.config.contains(fkey)) {
        fs::path p = io::guarded(fkey, [&] { return ctx.config.at(fkey).get<std::string>(); });
        if (p.is_relative()) p = ctx.config_dir / p;
        return io::read_json_file(p.string());
    }
    return std::nullopt;
}

/// Joint from `key`/`key_file`, else an empirical toy joint from "toy", else the default joint.
inline JointDistribution load_joint(const RunContext& ctx, const std::string& key) {
    if (auto j = object_or_file(ctx, key)) return io::joint_from_json(*j);
    if (ctx.config.contains("toy")) {
        const auto tc = io::toy_config_from_json(section(ctx.config, "toy"));
        return toy::to_empirical_joint(toy::generate(tc));
    }
    return exp::default_joint();
}

inline JointDistribution require_joint(const RunContext& ctx, const std::string& key) {
    if (auto j = object_or_file(ctx, key)) return io::joint_from_json(*j);
    fail(ErrorKind::MalformedInput, "config needs \"" + key + "\" or \"" + key + "_file\"");
}

inline std::vector<double> grid_from(const json& cfg, const char* key, std::vector<double> fallback) {
    if (!cfg.contains(key)) return fallback;
    const json& g = cfg.at(key);
    std::vector<double> out;
    if (g.is_object()) {
        out = exp::linspace(get_or<double>(g, "lo", 0.0), get_or<double>(g, "hi", 1.0), get_or<std::size_t>(g, "n", 0));
    } else {
        out = io::guarded(key, [&] { return g.get<std::vector<double>>(); });
    }
    if (out.empty()) fail(ErrorKind::InvalidConfig, std::string(key) + " must be non-empty");
    return out;
}

inline void warn_beta(const RunContext& ctx, double beta) {
    if (beta <= 1.0) ctx.log << "warning: beta <= 1; the single-cluster encoder is optimal for IB\n";
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

template <class Fn>
std::string csv(Fn&& fn) {
    std::ostringstream s;
    fn(s);
    return s.str();
}

// ---------------------------------------------------------------------------
// Commands

inline void cmd_solve(RunContext& ctx) {
    const JointDistribution joint = load_joint(ctx, "joint");
    const EibConfig c = io::eib_config_from_json(section(ctx.config, "solver"));
    warn_beta(ctx, c.beta);
    const SolveResult r = solve_eib(joint, c);
    ctx.not_converged = !r.trace.converged;

    json summary = io::to_json(r.summary);
    summary["converged"] = r.trace.converged;
    summary["iterations"] = r.trace.entries.size();
    summary["restart_index"] = r.trace.restart_index;
    ctx.out.write("state.json", dump(io::to_json(r.state)));
    ctx.out.write("trace.csv", csv([&](std::ostream& o) { io::write_trace_csv(o, r.trace); }));
    ctx.out.write("trace.json", dump(io::to_json(r.trace)));
    ctx.out.write("summary.json", dump(summary));
    std::cout << "h_t=" << io::fmt_double(r.summary.h_t) << " i_xt=" << io::fmt_double(r.summary.i_xt)
              << " i_yt=" << io::fmt_double(r.summary.i_yt) << " converged=" << r.trace.converged << "\n";
}

inline void cmd_sweep(RunContext& ctx) {
    const std::string axis_name = get_or<std::string>(ctx.config, "axis", "beta");
    if (axis_name != "beta" && axis_name != "alpha") fail(ErrorKind::InvalidConfig, "axis must be beta or alpha");
    const exp::Axis axis = axis_name == "beta" ? exp::Axis::Beta : exp::Axis::Alpha;
    exp::SweepConfig sc = exp::SweepConfig::defaults(axis);
    sc.solver = io::eib_config_from_json(section(ctx.config, "solver"), sc.solver);
    sc.grid = grid_from(ctx.config, "grid", sc.effective_grid());
    sc.threads = ctx.threads;
    if (axis == exp::Axis::Alpha) warn_beta(ctx, sc.solver.beta);
    const JointDistribution joint = load_joint(ctx, "joint");
    const auto rows = exp::sweep(joint, sc);

    svg::Series iyt{"I(Y;T)", {}, {}}, htx{"H(T|X)", {}, {}};
    std::string table = csv([&](std::ostream& o) {
        io::CsvWriter w(o);
        w.header({axis_name, "h_t", "h_t_given_x", "i_xt", "i_yt", "f_eib", "converged"});
        for (const auto& r : rows) {
            w.row(r.value, r.summary.h_t, r.summary.h_t_given_x, r.summary.i_xt, r.summary.i_yt, r.summary.f_eib,
                  r.converged);
            iyt.x.push_back(r.value);
            iyt.y.push_back(r.summary.i_yt);
            htx.x.push_back(r.value);
            htx.y.push_back(r.summary.h_t_given_x);
            if (!r.converged) ctx.not_converged = true;
        }
    });
    ctx.out.write("sweep.csv", table);
    ctx.out.write("sweep.svg", svg::render({"Information quantities vs " + axis_name, axis_name, "nats", false,
                                            {iyt, htx}}));
    std::cout << rows.size() << " grid points\n";
}

inline void cmd_bounds_sim(RunContext& ctx) {
    const json& cfg = ctx.config;
    BoundSimConfig base;
    if (cfg.contains("m_grid")) base.m_grid = io::guarded("m_grid", [&] { return cfg.at("m_grid").get<std::vector<std::uint64_t>>(); });
    base.trials = get_or<std::size_t>(cfg, "trials", base.trials);
    base.seed = get_or<std::uint64_t>(cfg, "seed", base.seed);
    base.x_card = get_or<std::size_t>(cfg, "x_card", base.x_card);
    base.t_card = get_or<std::size_t>(cfg, "t_card", base.t_card);
    base.y_card = get_or<std::size_t>(cfg, "y_card", base.y_card);
    base.delta = get_or<double>(cfg, "delta", base.delta);
    base.threads = ctx.threads;
    if (base.m_grid.empty()) fail(ErrorKind::InvalidConfig, "m_grid must be non-empty");
    if (!(base.delta > 0.0 && base.delta < 1.0)) fail(ErrorKind::InvalidConfig, "delta must lie in (0,1)");
    const auto gens = get_or<std::vector<std::string>>(cfg, "generators", {"uniform", "normal"});

    svg::Chart err{"Constraint error rate vs m", "m", "error rate", true, {}};
    svg::Chart mean{"Mean bound vs m", "m", "bound", true, {}};
    for (const auto& g : gens) {
        if (g != "uniform" && g != "normal") fail(ErrorKind::InvalidConfig, "unknown generator " + g);
        BoundSimConfig c = base;
        c.generator = g == "uniform" ? Generator::Uniform : Generator::Normal;
        const BoundSimResult r = bound_simulation(c);
        ctx.out.write("bounds_trials_" + g + ".csv", csv([&](std::ostream& o) { io::write_bound_trials_csv(o, r); }));
        ctx.out.write("bounds_summary_" + g + ".csv", csv([&](std::ostream& o) { io::write_bound_summary_csv(o, r); }));
        for (const char* name : {"ours", "previous"}) {
            svg::Series e{std::string(name) + " (" + g + ")", {}, {}}, v = e;
            for (const auto& s : r.summary) {
                if (s.bound != name) continue;
                e.x.push_back(static_cast<double>(s.m));
                e.y.push_back(s.error_rate);
                v.x.push_back(static_cast<double>(s.m));
                v.y.push_back(s.mean_value);
            }
            err.series.push_back(std::move(e));
            mean.series.push_back(std::move(v));
        }
    }
    ctx.out.write("bounds_error_rate.svg", svg::render(err));
    ctx.out.write("bounds_mean.svg", svg::render(mean));
    std::cout << gens.size() << " generator(s), " << base.m_grid.size() << " sample sizes, " << base.trials
              << " trials\n";
}

inline void cmd_toy_transfer(RunContext& ctx) {
    const json& cfg = ctx.config;
    exp::ToyTransferConfig tc;
    tc.alpha_grid = grid_from(cfg, "alpha_grid", tc.alpha_grid);
    tc.source_r = grid_from(cfg, "source_r", tc.source_r);
    tc.target_r = get_or<double>(cfg, "target_r", tc.target_r);
    tc.m = get_or<std::size_t>(cfg, "m", tc.m);
    tc.n_bits = get_or<std::size_t>(cfg, "n_bits", tc.n_bits);
    if (cfg.contains("beta")) tc.beta = get_or<double>(cfg, "beta", 0.0);
    tc.solver = io::eib_config_from_json(section(cfg, "solver"), tc.solver);
    tc.seed = get_or<std::uint64_t>(cfg, "seed", tc.seed);
    tc.threads = ctx.threads;
    if (tc.beta) warn_beta(ctx, *tc.beta);
    const auto r = exp::toy_transfer(tc);

    const std::size_t n_r = tc.source_r.size();
    ctx.out.write("toy_transfer.csv", csv([&](std::ostream& o) {
        o << "# qualitative analog of the toy transfer table: discrete EIB solver, not a neural model\n";
        io::CsvWriter w(o);
        std::vector<std::string> head{"alpha"};
        for (double rr : tc.source_r) head.push_back("R=" + io::fmt_double(rr));
        w.header(head);
        for (std::size_t ai = 0; ai < tc.alpha_grid.size(); ++ai) {
            w.cell(tc.alpha_grid[ai]);
            for (std::size_t ri = 0; ri < n_r; ++ri) {
                w.cell(r.at(ai, ri, n_r).accuracy);
                if (!r.at(ai, ri, n_r).converged) ctx.not_converged = true;
            }
            w.end_row();
        }
    }));
    ctx.out.write("toy_transfer_best.csv", csv([&](std::ostream& o) {
        io::CsvWriter w(o);
        w.header({"r", "beta", "best_alpha", "best_accuracy"});
        for (std::size_t ri = 0; ri < n_r; ++ri)
            w.row(tc.source_r[ri], r.at(0, ri, n_r).beta, r.best_alpha[ri], r.best_accuracy[ri]);
    }));
    for (std::size_t ri = 0; ri < n_r; ++ri)
        std::cout << "R=" << tc.source_r[ri] << " best alpha=" << r.best_alpha[ri]
                  << " accuracy=" << r.best_accuracy[ri] << "\n";
}

inline void cmd_rd_compare(RunContext& ctx) {
    const json& cfg = ctx.config;
    exp::RdResult r;
    if (object_or_file(ctx, "source_joint")) {
        EibConfig c = io::eib_config_from_json(section(cfg, "solver"));
        warn_beta(ctx, c.beta);
        r = exp::rd_compare(require_joint(ctx, "source_joint"), require_joint(ctx, "target_joint"), c);
    } else {
        exp::ToyRdConfig tc;
        const json t = section(cfg, "toy");
        tc.source_r = get_or<double>(t, "source_r", tc.source_r);
        tc.target_r = get_or<double>(t, "target_r", tc.target_r);
        tc.m = get_or<std::size_t>(t, "m", tc.m);
        tc.n_bits = get_or<std::size_t>(t, "n_bits", tc.n_bits);
        tc.seed = get_or<std::uint64_t>(t, "seed", tc.seed);
        tc.solver = io::eib_config_from_json(section(cfg, "solver"), tc.solver);
        warn_beta(ctx, tc.solver.beta);
        r = exp::rd_compare_toy(tc);
    }
    json rows = json::array();
    for (const auto& row : r.rows) {
        rows.push_back(json{{"method", row.alpha == 0.0 ? "DIB" : "IB"},
                            {"alpha", row.alpha},
                            {"l1_half", row.l1_half},
                            {"hdh", row.hdh},
                            {"p_t", row.p_t},
                            {"q_t", row.q_t},
                            {"h_star", row.h_star}});
    }
    ctx.out.write("rd_compare.csv", csv([&](std::ostream& o) {
        io::CsvWriter w(o);
        w.header({"method", "alpha", "l1_half", "hdh"});
        for (const auto& row : r.rows) w.row(row.alpha == 0.0 ? "DIB" : "IB", row.alpha, row.l1_half, row.hdh);
    }));
    ctx.out.write("rd_compare.json", dump(json{{"rows", rows},
                                               {"l1_half_ib_minus_dib", r.l1_difference()},
                                               {"hdh_ib_minus_dib", r.hdh_difference()}}));
    std::cout << "l1_half IB-DIB=" << io::fmt_double(r.l1_difference())
              << " hdh IB-DIB=" << io::fmt_double(r.hdh_difference()) << "\n";
}

inline json check_json(const exp::FormulaCheck& c) {
    return json{{"name", c.name},
                {"formula", c.formula},
                {"mc_estimate", c.mc.estimate},
                {"mc_std_error", c.mc.std_error},
                {"gap", c.gap()},
                {"gap_in_std_errors", c.mc.std_error > 0 ? std::abs(c.gap()) / c.mc.std_error : 0.0}};
}

inline void cmd_gauss(RunContext& ctx) {
    const json& cfg = ctx.config;
    const auto n = get_or<std::uint64_t>(cfg, "n_samples", 1'000'000);
    const auto seed = get_or<std::uint64_t>(cfg, "seed", 0);
    json report = json::object();
    std::uint64_t stream = 0;

    json l1 = json::array();
    if (cfg.contains("l1")) {
        for (const auto& item : cfg.at("l1")) {
            if (!item.is_object() || !item.contains("g1") || !item.contains("g2"))
                fail(ErrorKind::MalformedInput, "l1 items need g1 and g2");
            const auto c = exp::check_l1(io::gaussian_from_json(item.at("g1")), io::gaussian_from_json(item.at("g2")), n,
                                         derive_seed(seed, stream++));
            l1.push_back(check_json(c));
            std::cout << "l1: formula=" << io::fmt_double(c.formula) << " mc=" << io::fmt_double(c.mc.estimate)
                      << " +- " << io::fmt_double(c.mc.std_error) << " gap=" << io::fmt_double(c.gap()) << "\n";
        }
    }
    report["l1"] = l1;

    json reg = json::array();
    if (cfg.contains("regularizer")) {
        for (const auto& item : cfg.at("regularizer")) {
            if (!item.is_object() || !item.contains("p") || !item.contains("b"))
                fail(ErrorKind::MalformedInput, "regularizer items need p and b");
            const double alpha = get_or<double>(item, "alpha", 1.0);
            const auto c = exp::check_regularizer(io::gaussian_from_json(item.at("p")),
                                                  io::gaussian_from_json(item.at("b")), alpha, n,
                                                  derive_seed(seed, stream++));
            json j = check_json(c);
            j["alpha"] = alpha;
            reg.push_back(j);
            std::cout << "regularizer(alpha=" << alpha << "): formula=" << io::fmt_double(c.formula)
                      << " mc=" << io::fmt_double(c.mc.estimate) << " +- " << io::fmt_double(c.mc.std_error) << "\n";
        }
    }
    report["regularizer"] = reg;

    if (cfg.contains("pairing")) {
        const json& p = cfg.at("pairing");
        const auto src = io::gaussians_from_json(p.value("source", json::array()));
        const auto tgt = io::gaussians_from_json(p.value("target", json::array()));
        const double delta = get_or<double>(p, "delta", 0.1);
        const auto t_card = get_or<std::size_t>(p, "t_card", 2);
        const PairingResult pr = prop1_pairing(src, tgt, delta, t_card);
        ctx.out.write("pairing.csv", csv([&](std::ostream& o) { io::write_pairing_csv(o, pr); }));
        const double bound = pr.total_l1 / static_cast<double>(src.size()) + pr.epsilon;
        report["pairing"] = json{{"total_l1", pr.total_l1}, {"epsilon", pr.epsilon}, {"prop1_bound", bound}};
        std::cout << "prop1 bound=" << io::fmt_double(bound) << "\n";
    }
    ctx.out.write("gauss_report.json", dump(report));
}

inline void cmd_decompose(RunContext& ctx) {
    const json& cfg = ctx.config;
    const JointDistribution source = require_joint(ctx, "source_joint");
    const JointDistribution target = require_joint(ctx, "target_joint");
    const auto enc_json = object_or_file(ctx, "encoder");
    if (!enc_json) fail(ErrorKind::MalformedInput, "config needs \"encoder\"");
    const Encoder enc = io::encoder_from_json(*enc_json);

    EmpiricalDraw draw;
    const json emp = section(cfg, "empirical");
    if (emp.contains("counts")) {
        const auto rows =
            io::guarded("empirical.counts", [&] { return emp.at("counts").get<std::vector<std::vector<std::uint64_t>>>(); });
        std::vector<std::uint64_t> flat;
        for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
        draw = EmpiricalDraw::from_counts(std::move(flat), rows.size(), rows.empty() ? 0 : rows.front().size());
    } else {
        draw = sample_empirical(source, get_or<std::uint64_t>(emp, "m", 1000), get_or<std::uint64_t>(emp, "seed", 0));
    }

    const Decomposition d(source, target, enc, draw);
    std::vector<Hypothesis> hs;
    if (cfg.contains("hypotheses") && cfg.at("hypotheses").is_array()) {
        hs = io::guarded("hypotheses", [&] { return cfg.at("hypotheses").get<std::vector<Hypothesis>>(); });
    }
    constexpr std::size_t kListedReports = 4096;
    json reports = json::array();
    std::size_t count = 0;
    bool all_hold = true;
    std::optional<std::pair<Hypothesis, DecompositionReport>> worst;
    auto visit = [&](const Hypothesis& h) {
        const DecompositionReport r = d.report(h);
        ++count;
        all_hold = all_hold && r.holds;
        if (!worst || r.rhs - r.eps_target < worst->second.rhs - worst->second.eps_target) worst.emplace(h, r);
        if (reports.size() < kListedReports) {
            json j = io::to_json(r);
            j["h"] = h;
            reports.push_back(j);
        }
    };
    if (hs.empty()) for_each_hypothesis(d.t_card(), d.y_card(), visit);
    else
        for (const auto& h : hs) visit(h);

    json out{{"labeling", d.labeling()},
             {"h_star", d.h_star()},
             {"n_hypotheses", count},
             {"all_hold", all_hold},
             {"worst", json{{"h", worst->first}, {"slack", worst->second.rhs - worst->second.eps_target},
                            {"report", io::to_json(worst->second)}}},
             {"reports_truncated", count > reports.size()},
             {"reports", reports}};
    ctx.out.write("decomposition.json", dump(out));
    std::cout << count << " hypotheses, all_hold=" << all_hold << "\n";
}

// ---------------------------------------------------------------------------
// Driver

/// Applies "a.b.c=value"; value is parsed as JSON, falling back to a string.
inline void apply_override(json& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) fail(ErrorKind::MalformedInput, "--set expects key=value");
    std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception&) {
        value = raw;
    }
    std::string pointer = "/";
    for (char ch : key) pointer += ch == '.' ? '/' : ch;
    cfg[json::json_pointer(pointer)] = value;
}

inline std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

inline int execute(const Options& opt, std::ostream& log = std::cerr) {
    const auto t0 = std::chrono::steady_clock::now();
    json config = io::read_json_file(opt.config_path);
    if (!config.is_object()) fail(ErrorKind::MalformedInput, "config must be a JSON object");
    for (const auto& s : opt.sets) apply_override(config, s);
    if (config.contains("command") && config.at("command") != opt.command) {
        fail(ErrorKind::MalformedInput, "config is for command " + config.at("command").dump());
    }

    fs::create_directories(opt.out_dir);
    RunContext ctx{config, fs::path(opt.config_path).parent_path(), resolve_threads(opt.threads), OutputSet(opt.out_dir),
                   log};
    if (opt.command == "solve") cmd_solve(ctx);
    else if (opt.command == "sweep") cmd_sweep(ctx);
    else if (opt.command == "bounds-sim") cmd_bounds_sim(ctx);
    else if (opt.command == "toy-transfer") cmd_toy_transfer(ctx);
    else if (opt.command == "rd-compare") cmd_rd_compare(ctx);
    else if (opt.command == "gauss") cmd_gauss(ctx);
    else if (opt.command == "decompose") cmd_decompose(ctx);
    else fail(ErrorKind::MalformedInput, "unknown command " + opt.command);

    json outputs = json::array();
    for (const auto& f : ctx.out.files())
        outputs.push_back(json{{"file", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json manifest{{"command", opt.command}, {"version", kVersion},         {"config", config},
                  {"threads", ctx.threads}, {"started_utc", utc_timestamp()}, {"duration_seconds", secs},
                  {"outputs", outputs}};
    std::ofstream(fs::path(opt.out_dir) / "manifest.json", std::ios::binary | std::ios::trunc) << dump(manifest);

    if (ctx.not_converged) {
        log << (opt.strict ? "error" : "warning") << ": solver hit max_iter before converging\n";
        if (opt.strict) return kNotConverged;
    }
    return kOk;
}

inline int exit_code_for(const Error& e) {
    return e.kind() == ErrorKind::EnumerationBudgetExceeded ? kBudget : kMalformed;
}

inline int run(int argc, const char* const* argv, std::ostream& log = std::cerr) {
    CLI::App app{"Elastic information bottleneck toolkit", "eib"};
    Options opt;
    app.add_option("command", opt.command, "Command to run")->required()->check(CLI::IsMember(kCommands));
    app.add_option("--config", opt.config_path, "JSON config file")->required();
    app.add_option("--out", opt.out_dir, "Output directory");
    app.add_flag("--strict", opt.strict, "Exit with code 3 when a solve does not converge");
    app.add_option("--threads", opt.threads, "Worker threads (default: EIB_THREADS or 1)")->check(CLI::PositiveNumber);
    app.add_option("--set", opt.sets, "Override a config field, e.g. --set solver.beta=10");
    app.set_version_flag("--version", kVersion);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kMalformed;
    }
    try {
        return execute(opt, log);
    } catch (const Error& e) {
        log << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kFailure;
    }
}

}  // namespace eib::cli
