// io.hpp
//
// JSON (nlohmann) and CSV serialization. Every parse failure surfaces as
// ErrorKind::MalformedInput so the CLI can map it to a single exit code.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "eib/bounds.hpp"
#include "eib/error.hpp"
#include "eib/gauss.hpp"
#include "eib/matrix.hpp"
#include "eib/prob.hpp"
#include "eib/solver.hpp"
#include "eib/toy.hpp"

namespace eib::io {

using json = nlohmann::ordered_json;

/// 17 significant digits; non-finite values as nan/inf/-inf.
inline std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    CsvWriter& cell(std::string_view s) {
        sep();
        out_ << s;
        return *this;
    }
    CsvWriter& cell(double v) { return cell(fmt_double(v)); }
    CsvWriter& cell(bool v) { return cell(std::string_view(v ? "1" : "0")); }
    template <class I>
        requires std::is_integral_v<I>
    CsvWriter& cell(I v) {
        return cell(std::string_view(std::to_string(v)));
    }
    CsvWriter& cell(const char* s) { return cell(std::string_view(s)); }
    CsvWriter& cell(const std::string& s) { return cell(std::string_view(s)); }

    void end_row() {
        out_ << '\n';
        first_ = true;
    }

    template <class... Ts>
    void row(const Ts&... vs) {
        (cell(vs), ...);
        end_row();
    }

    void header(const std::vector<std::string>& names) {
        for (const auto& n : names) cell(n);
        end_row();
    }

private:
    void sep() {
        if (!first_) out_ << ',';
        first_ = false;
    }
    std::ostream& out_;
    bool first_ = true;
};

// ---------------------------------------------------------------------------
// Parsing helpers

inline json parse_json(std::string_view text, std::string_view what) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::exception& e) {
        fail(ErrorKind::MalformedInput, std::string(what) + ": " + e.what());
    }
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::MalformedInput, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json(ss.str(), path);
}

/// Runs `fn` and converts nlohmann type/range errors into MalformedInput.
template <class Fn>
auto guarded(std::string_view what, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const json::exception& e) {
        fail(ErrorKind::MalformedInput, std::string(what) + ": " + e.what());
    }
}

inline Matrix matrix_from_json(const json& j, std::string_view what) {
    return guarded(what, [&] {
        if (!j.is_array() || j.empty()) fail(ErrorKind::MalformedInput, std::string(what) + ": expected non-empty 2-D array");
        std::vector<std::vector<double>> rows;
        for (const auto& r : j) {
            if (!r.is_array()) fail(ErrorKind::MalformedInput, std::string(what) + ": rows must be arrays");
            rows.push_back(r.get<std::vector<double>>());
        }
        for (const auto& r : rows)
            if (r.size() != rows.front().size() || r.empty())
                fail(ErrorKind::MalformedInput, std::string(what) + ": ragged rows");
        return Matrix::from_rows(rows);
    });
}

inline json matrix_to_json(const Matrix& m) {
    json out = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto r = m.row(i);
        out.push_back(std::vector<double>(r.begin(), r.end()));
    }
    return out;
}

inline std::vector<std::string> labels_from_json(const json& j, const char* key) {
    if (!j.contains(key)) return {};
    return guarded(key, [&] { return j.at(key).get<std::vector<std::string>>(); });
}

// ---------------------------------------------------------------------------
// Domain types

inline json to_json(const JointDistribution& d) {
    return json{{"x_labels", d.x_labels()}, {"y_labels", d.y_labels()}, {"probs", matrix_to_json(d.probs())}};
}

inline JointDistribution joint_from_json(const json& j) {
    if (!j.is_object() || !j.contains("probs")) fail(ErrorKind::MalformedInput, "joint: missing \"probs\"");
    return JointDistribution(matrix_from_json(j.at("probs"), "joint.probs"), labels_from_json(j, "x_labels"),
                             labels_from_json(j, "y_labels"));
}

/// Encoders use the same object shape; columns are the T symbols.
inline json to_json(const Encoder& e) {
    std::vector<std::string> t_labels;
    for (std::size_t t = 0; t < e.t_card(); ++t) t_labels.push_back("t" + std::to_string(t));
    std::vector<std::string> x_labels;
    for (std::size_t x = 0; x < e.x_card(); ++x) x_labels.push_back(std::to_string(x));
    return json{{"x_labels", x_labels}, {"y_labels", t_labels}, {"probs", matrix_to_json(e.probs())}};
}

inline Encoder encoder_from_json(const json& j) {
    if (!j.is_object() || !j.contains("probs")) fail(ErrorKind::MalformedInput, "encoder: missing \"probs\"");
    return Encoder(matrix_from_json(j.at("probs"), "encoder.probs"));
}

inline json to_json(const SolveState& s) {
    json dead = json::array();
    for (bool d : s.decoder.dead) dead.push_back(d);
    return json{{"encoder", to_json(s.encoder)},
                {"marginal_t", s.marginal_t},
                {"decoder", json{{"probs", matrix_to_json(s.decoder.probs)}, {"dead", dead}}}};
}

inline json to_json(const InfoSummary& s) {
    return json{{"h_t", s.h_t},   {"h_t_given_x", s.h_t_given_x}, {"h_t_given_y", s.h_t_given_y}, {"i_xt", s.i_xt},
                {"i_yt", s.i_yt}, {"f_eib", s.f_eib},             {"l_eib", s.l_eib}};
}

inline json to_json(const SolveTrace& t) {
    json entries = json::array();
    for (const auto& e : t.entries)
        entries.push_back(json{{"iter", e.iteration}, {"f_eib", e.f_eib}, {"max_delta", e.max_delta}});
    return json{{"initial_f_eib", t.initial_f_eib},
                {"converged", t.converged},
                {"restart_index", t.restart_index},
                {"entries", entries}};
}

inline json to_json(const EibConfig& c) {
    return json{{"alpha", c.alpha},     {"beta", c.beta},           {"t_cardinality", c.t_cardinality},
                {"tol", c.tol},         {"max_iter", c.max_iter},   {"n_restarts", c.n_restarts},
                {"seed", c.seed},       {"alpha_floor", c.alpha_floor}};
}

/// Reads whichever solver fields are present on top of `base`.
inline EibConfig eib_config_from_json(const json& j, EibConfig base = {}) {
    guarded("solver config", [&] {
        if (j.contains("alpha")) base.alpha = j.at("alpha").get<double>();
        if (j.contains("beta")) base.beta = j.at("beta").get<double>();
        if (j.contains("t_cardinality")) base.t_cardinality = j.at("t_cardinality").get<std::size_t>();
        if (j.contains("tol")) base.tol = j.at("tol").get<double>();
        if (j.contains("max_iter")) base.max_iter = j.at("max_iter").get<std::size_t>();
        if (j.contains("n_restarts")) base.n_restarts = j.at("n_restarts").get<std::size_t>();
        if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("alpha_floor")) base.alpha_floor = j.at("alpha_floor").get<double>();
        return 0;
    });
    return base;
}

inline json to_json(const DiagGaussian& g) { return json{{"mean", g.mean}, {"var", g.var}}; }

inline DiagGaussian gaussian_from_json(const json& j) {
    return guarded("gaussian", [&] {
        if (!j.is_object() || !j.contains("mean") || !j.contains("var"))
            fail(ErrorKind::MalformedInput, "gaussian needs \"mean\" and \"var\"");
        return DiagGaussian(j.at("mean").get<std::vector<double>>(), j.at("var").get<std::vector<double>>());
    });
}

inline std::vector<DiagGaussian> gaussians_from_json(const json& j) {
    if (!j.is_array()) fail(ErrorKind::MalformedInput, "expected an array of gaussians");
    std::vector<DiagGaussian> out;
    for (const auto& g : j) out.push_back(gaussian_from_json(g));
    return out;
}

inline json to_json(const DecompositionReport& r) {
    return json{{"eps_target", r.eps_target}, {"eps_source_emp", r.eps_source_emp}, {"eps_source", r.eps_source},
                {"delta_s", r.delta_s},       {"d_hdh", r.d_hdh},                   {"lambda", r.lambda},
                {"rhs", r.rhs},               {"holds", r.holds}};
}

inline json to_json(const toy::ToyConfig& c) {
    return json{{"r", c.r}, {"m", c.m}, {"seed", c.seed}, {"n_bits", c.n_bits}};
}

inline toy::ToyConfig toy_config_from_json(const json& j, toy::ToyConfig base = {}) {
    guarded("toy config", [&] {
        if (j.contains("r")) base.r = j.at("r").get<double>();
        if (j.contains("m")) base.m = j.at("m").get<std::size_t>();
        if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("n_bits")) base.n_bits = j.at("n_bits").get<std::size_t>();
        return 0;
    });
    return base;
}

// ---------------------------------------------------------------------------
// CSV

inline void write_trace_csv(std::ostream& out, const SolveTrace& trace) {
    CsvWriter w(out);
    w.header({"iter", "f_eib", "max_delta"});
    for (const auto& e : trace.entries) w.row(e.iteration, e.f_eib, e.max_delta);
}

inline void write_bound_trials_csv(std::ostream& out, const BoundSimResult& r) {
    CsvWriter w(out);
    w.header({"m", "trial", "bound", "constraints_ok", "value", "gap"});
    for (const auto& t : r.trials) w.row(t.m, t.trial, t.bound, t.constraints_ok, t.value, t.gap);
}

inline void write_bound_summary_csv(std::ostream& out, const BoundSimResult& r) {
    CsvWriter w(out);
    w.header({"m", "bound", "error_rate", "mean_value"});
    for (const auto& s : r.summary) w.row(s.m, s.bound, s.error_rate, s.mean_value);
}

inline void write_pairing_csv(std::ostream& out, const PairingResult& p) {
    CsvWriter w(out);
    w.header({"src_idx", "tgt_idx", "l1"});
    for (std::size_t k = 0; k < p.pairs.size(); ++k) w.row(p.pairs[k].first, p.pairs[k].second, p.l1[k]);
}

inline void write_toy_csv(std::ostream& out, const toy::ToyDataset& d) {
    CsvWriter w(out);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < d.n_bits; ++i) names.push_back("b" + std::to_string(i));
    names.emplace_back("label");
    w.header(names);
    for (std::size_t k = 0; k < d.size(); ++k) {
        for (std::size_t i = 0; i < d.n_bits; ++i) w.cell(toy::bit(d.instances[k], i, d.n_bits) ? 1 : 0);
        w.cell(d.labels[k]);
        w.end_row();
    }
}

inline toy::ToyDataset read_toy_csv(std::istream& in) {
    toy::ToyDataset d;
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::MalformedInput, "toy csv: missing header");
    const auto cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    if (cols < 3) fail(ErrorKind::MalformedInput, "toy csv: need at least two bits and a label");
    d.n_bits = cols - 1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f;
        std::uint64_t code = 0;
        std::size_t n = 0;
        std::size_t label = 0;
        while (std::getline(ss, f, ',')) {
            if (f != "0" && f != "1") fail(ErrorKind::MalformedInput, "toy csv: fields must be 0 or 1");
            if (n < d.n_bits) code = (code << 1) | (f == "1" ? 1ULL : 0ULL);
            else label = f == "1" ? 1 : 0;
            ++n;
        }
        if (n != cols) fail(ErrorKind::MalformedInput, "toy csv: ragged row");
        d.instances.push_back(code);
        d.labels.push_back(label);
    }
    return d;
}

}  // namespace eib::io
