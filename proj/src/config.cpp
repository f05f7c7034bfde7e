#include "delaybounds/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "delaybounds/errors.hpp"

namespace dbounds {

using nlohmann::json;

namespace {

// JSON pointer -> (line, column) of the key or array element that introduces it.
// Runs over text that nlohmann has already accepted.
class PositionIndex {
public:
    explicit PositionIndex(const std::string& text) {
        struct Frame {
            bool object;
            std::string path;
            std::size_t index = 0;
            bool expect_key = true;
            std::string key;
        };
        std::vector<Frame> stack;
        int line = 1;
        int col = 1;
        auto record_value_start = [&](int l, int c) -> std::string {
            if (stack.empty()) return "";
            Frame& f = stack.back();
            if (f.object) return f.path + "/" + f.key;
            std::string p = f.path + "/" + std::to_string(f.index);
            pos_.emplace(p, std::make_pair(l, c));
            return p;
        };
        for (std::size_t i = 0; i < text.size(); ++i) {
            const char ch = text[i];
            if (ch == '\n') {
                ++line;
                col = 1;
                continue;
            }
            if (ch == '"') {
                const int l = line;
                const int c = col;
                std::string s;
                ++i;
                ++col;
                for (; i < text.size() && text[i] != '"'; ++i, ++col) {
                    if (text[i] == '\\' && i + 1 < text.size()) {
                        s += text[++i];
                        ++col;
                    } else {
                        s += text[i];
                    }
                }
                ++col;
                if (!stack.empty() && stack.back().object && stack.back().expect_key) {
                    Frame& f = stack.back();
                    f.key = s;
                    f.expect_key = false;
                    pos_.emplace(f.path + "/" + s, std::make_pair(l, c));
                } else {
                    record_value_start(l, c);
                }
                continue;
            }
            if (ch == '{' || ch == '[') {
                const std::string p = record_value_start(line, col);
                stack.push_back(Frame{ch == '{', p, 0, true, {}});
            } else if (ch == '}' || ch == ']') {
                if (!stack.empty()) stack.pop_back();
            } else if (ch == ',') {
                if (!stack.empty()) {
                    if (stack.back().object) {
                        stack.back().expect_key = true;
                    } else {
                        ++stack.back().index;
                    }
                }
            } else if (ch != ':' && ch != ' ' && ch != '\t' && ch != '\r') {
                // Scalar token: note its start once.
                if (i == 0 || std::string(" \t\r\n:,[").find(text[i - 1]) != std::string::npos) {
                    record_value_start(line, col);
                }
            }
            ++col;
        }
    }

    // Location of the pointer or its nearest recorded ancestor.
    std::string where(std::string pointer) const {
        for (;;) {
            const auto it = pos_.find(pointer);
            if (it != pos_.end()) {
                return "line " + std::to_string(it->second.first) + ", column " +
                       std::to_string(it->second.second);
            }
            const auto cut = pointer.rfind('/');
            if (cut == std::string::npos || pointer.empty()) return "line 1, column 1";
            pointer.resize(cut);
        }
    }

private:
    std::map<std::string, std::pair<int, int>> pos_;
};

std::string line_col_of(const std::string& text, std::size_t byte) {
    int line = 1;
    int col = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

class Reader {
public:
    Reader(const json& j, std::string path, const PositionIndex& pos, const std::string& source)
        : j_(j), path_(std::move(path)), pos_(pos), source_(source) {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    [[noreturn]] void fail(const std::string& pointer, const std::string& msg) const {
        throw ConfigError(source_ + ": " + pos_.where(pointer) + ": " +
                          (pointer.empty() ? std::string("/") : pointer) + ": " + msg);
    }

    bool has(const std::string& key) const { return j_.contains(key); }
    std::string ptr(const std::string& key) const { return path_ + "/" + key; }

    const json& at(const std::string& key) const {
        seen_.insert(key);
        if (!j_.contains(key)) fail(path_, "missing required key '" + key + "'");
        return j_.at(key);
    }

    double number(const std::string& key) const {
        const json& v = at(key);
        if (!v.is_number()) fail(ptr(key), "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) fail(ptr(key), "expected a finite number");
        return x;
    }
    double number_or(const std::string& key, double fallback) const {
        return has(key) ? number(key) : fallback;
    }
    std::string string(const std::string& key) const {
        const json& v = at(key);
        if (!v.is_string()) fail(ptr(key), "expected a string");
        return v.get<std::string>();
    }
    std::string string_or(const std::string& key, const std::string& fallback) const {
        return has(key) ? string(key) : fallback;
    }
    std::size_t count(const std::string& key) const {
        const json& v = at(key);
        if (!v.is_number_integer() || v.get<long long>() < 0) {
            fail(ptr(key), "expected a non-negative integer");
        }
        return v.get<std::size_t>();
    }
    template <std::size_t N>
    std::array<double, N> numbers(const std::string& key) const {
        const json& v = at(key);
        if (!v.is_array() || v.size() != N) {
            fail(ptr(key), "expected an array of " + std::to_string(N) + " numbers");
        }
        std::array<double, N> out{};
        for (std::size_t i = 0; i < N; ++i) {
            if (!v[i].is_number()) fail(ptr(key) + "/" + std::to_string(i), "expected a number");
            out[i] = v[i].get<double>();
        }
        return out;
    }
    Reader child(const std::string& key) const {
        return Reader(at(key), ptr(key), pos_, source_);
    }

    void reject_unknown() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.contains(it.key())) fail(ptr(it.key()), "unknown key");
        }
    }

private:
    const json& j_;
    std::string path_;
    const PositionIndex& pos_;
    const std::string& source_;
    mutable std::set<std::string> seen_;
};

std::string shortest(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

bool is_gauss(ModelKind k) {
    return k == ModelKind::vdp_gauss || k == ModelKind::duffing_gauss;
}
bool is_tanh(ModelKind k) {
    return k == ModelKind::vdp_tanh || k == ModelKind::duffing_tanh;
}

OscillatorParams read_params(const Reader& r, ModelKind kind) {
    OscillatorParams p;
    p.c1 = r.number("c1");
    p.c2 = r.number("c2");
    p.omega1_sq = r.number("omega1_sq");
    p.omega2_sq = r.number("omega2_sq");
    p.d = r.number("d");
    p.a1 = r.number("a1");
    p.a2 = r.number("a2");
    p.b1 = r.number("b1");
    p.b2 = r.number("b2");
    p.r1 = r.number("r1");
    p.r2 = r.number("r2");
    p.s1 = r.number("s1");
    p.s2 = r.number("s2");
    p.mu1 = r.number("mu1");
    p.mu2 = r.number("mu2");
    p.F0 = r.number("F0");
    p.omega0 = r.number("omega0");
    p.h0 = r.number("h0");
    p.h1 = r.number("h1");
    const bool variant = is_gauss(kind) || is_tanh(kind);
    p.mu3 = variant ? r.number("mu3") : r.number_or("mu3", 0.0);
    p.mu4 = variant ? r.number("mu4") : r.number_or("mu4", 0.0);
    if (is_gauss(kind)) {
        p.q = r.number("q");
        p.x0 = r.numbers<4>("x0");
    } else {
        p.q = r.number_or("q", p.q);
        if (r.has("x0")) p.x0 = r.numbers<4>("x0");
    }
    if (is_tanh(kind)) {
        p.k1 = r.number("k1");
        p.k2 = r.number("k2");
    } else {
        p.k1 = r.number_or("k1", p.k1);
        p.k2 = r.number_or("k2", p.k2);
    }
    r.reject_unknown();
    return p;
}

json params_to_json(const OscillatorParams& p) {
    return json{{"c1", p.c1},       {"c2", p.c2},     {"omega1_sq", p.omega1_sq},
                {"omega2_sq", p.omega2_sq},            {"d", p.d},
                {"a1", p.a1},       {"a2", p.a2},     {"b1", p.b1},
                {"b2", p.b2},       {"r1", p.r1},     {"r2", p.r2},
                {"s1", p.s1},       {"s2", p.s2},     {"mu1", p.mu1},
                {"mu2", p.mu2},     {"mu3", p.mu3},   {"mu4", p.mu4},
                {"F0", p.F0},       {"omega0", p.omega0}, {"h0", p.h0},
                {"h1", p.h1},       {"q", p.q},       {"x0", p.x0},
                {"k1", p.k1},       {"k2", p.k2}};
}

}  // namespace

double SweepConfig::theta_step_value() const {
    const std::string& s = theta_step;
    if (s.rfind("pi/", 0) == 0) {
        double denom = 0.0;
        const auto res = std::from_chars(s.data() + 3, s.data() + s.size(), denom);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !(denom > 0.0)) {
            throw ConfigError("sweep.theta_step: cannot read '" + s + "'");
        }
        return std::numbers::pi / denom;
    }
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError("sweep.theta_step: expected a number or 'pi/N', got '" + s + "'");
    }
    return v;
}

StepperConfig RunConfig::stepper() const {
    StepperConfig c;
    c.step = dt;
    return c;
}

SweepGrid RunConfig::grid() const {
    SweepGrid g;
    g.theta_step = sweep.theta_step_value();
    g.mode = sweep.projection_mode;
    g.theta2 = sweep.theta2;
    g.w1 = sweep.ray_weights[0];
    g.w2 = sweep.ray_weights[1];
    return g;
}

RadialOptions RunConfig::radial() const {
    RadialOptions r;
    r.seed = sweep.rho_seed;
    r.rho_max = sweep.rho_max;
    r.tol_rho = sweep.tol_rho;
    return r;
}

ProbeSettings RunConfig::probe_settings() const {
    ProbeSettings s;
    s.span = span();
    s.varpi = varpi;
    s.cfg = stepper();
    return s;
}

MajorantOptions RunConfig::majorant_options() const {
    MajorantOptions o;
    o.convention = convention;
    return o;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        std::string msg = e.what();
        // Drop nlohmann's "[json.exception.parse_error.101] " prefix.
        if (const auto p = msg.find("] "); p != std::string::npos) msg = msg.substr(p + 2);
        throw ConfigError(source + ": " + line_col_of(text, e.byte) + ": " + msg);
    }
    const PositionIndex pos(text);
    const Reader r(j, "", pos, source);
    RunConfig cfg;
    const std::string model = r.string("model");
    try {
        cfg.model = model_kind_from_string(model);
    } catch (const ConfigError& e) {
        r.fail("/model", e.what());
    }
    cfg.params = read_params(r.child("params"), cfg.model);
    if (r.has("phi_s")) cfg.phi_s = r.numbers<4>("phi_s");
    cfg.K = r.count("K");
    cfg.t0 = r.number_or("t0", 0.0);
    cfg.T = r.number("T");
    cfg.dt = r.number("dt");
    cfg.varpi = r.number("varpi");
    if (r.has("convention")) {
        try {
            cfg.convention = majorant_convention_from_string(r.string("convention"));
        } catch (const ConfigError& e) {
            r.fail("/convention", e.what());
        }
    }
    cfg.method = r.string_or("method", cfg.method);
    if (r.has("sweep")) {
        const Reader s = r.child("sweep");
        if (s.has("theta_step")) {
            const json& v = s.at("theta_step");
            if (v.is_number()) {
                cfg.sweep.theta_step = shortest(v.get<double>());
            } else if (v.is_string()) {
                cfg.sweep.theta_step = v.get<std::string>();
            } else {
                s.fail("/sweep/theta_step", "expected a number or 'pi/N'");
            }
            try {
                (void)cfg.sweep.theta_step_value();
            } catch (const ConfigError& e) {
                s.fail("/sweep/theta_step", e.what());
            }
        }
        if (s.has("ray_weights")) cfg.sweep.ray_weights = s.numbers<2>("ray_weights");
        cfg.sweep.rho_seed = s.number_or("rho_seed", cfg.sweep.rho_seed);
        cfg.sweep.rho_max = s.number_or("rho_max", cfg.sweep.rho_max);
        cfg.sweep.tol_rho = s.number_or("tol_rho", cfg.sweep.tol_rho);
        if (s.has("projection_mode")) {
            try {
                cfg.sweep.projection_mode = projection_mode_from_string(s.string("projection_mode"));
            } catch (const ConfigError& e) {
                s.fail("/sweep/projection_mode", e.what());
            }
        }
        cfg.sweep.theta2 = s.number_or("theta2", cfg.sweep.theta2);
        s.reject_unknown();
    }
    if (r.has("decay")) {
        const Reader d = r.child("decay");
        cfg.tail_fraction = d.number_or("tail_fraction", cfg.tail_fraction);
        cfg.decay_tol = d.number_or("tol", cfg.decay_tol);
        if (d.has("C")) cfg.decay_C = d.number("C");
        d.reject_unknown();
    }
    cfg.output_dir = r.string_or("output_dir", cfg.output_dir);
    r.reject_unknown();

    try {
        validate_config(cfg);
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::string emit_config(const RunConfig& cfg) {
    json j;
    j["model"] = to_string(cfg.model);
    j["params"] = params_to_json(cfg.params);
    j["phi_s"] = cfg.phi_s;
    j["K"] = cfg.K;
    j["t0"] = cfg.t0;
    j["T"] = cfg.T;
    j["dt"] = cfg.dt;
    j["varpi"] = cfg.varpi;
    j["convention"] = to_string(cfg.convention);
    j["method"] = cfg.method;
    json sweep;
    if (cfg.sweep.theta_step.rfind("pi/", 0) == 0) {
        sweep["theta_step"] = cfg.sweep.theta_step;
    } else {
        sweep["theta_step"] = cfg.sweep.theta_step_value();
    }
    sweep["ray_weights"] = cfg.sweep.ray_weights;
    sweep["rho_seed"] = cfg.sweep.rho_seed;
    sweep["rho_max"] = cfg.sweep.rho_max;
    sweep["tol_rho"] = cfg.sweep.tol_rho;
    sweep["projection_mode"] = to_string(cfg.sweep.projection_mode);
    sweep["theta2"] = cfg.sweep.theta2;
    j["sweep"] = sweep;
    json decay{{"tail_fraction", cfg.tail_fraction}, {"tol", cfg.decay_tol}};
    if (cfg.decay_C) decay["C"] = *cfg.decay_C;
    j["decay"] = decay;
    j["output_dir"] = cfg.output_dir;
    return j.dump(2) + "\n";
}

void validate_config(const RunConfig& cfg) {
    validate_params(cfg.params, cfg.model);
    if (cfg.K < 1) throw ConfigError("K must be >= 1");
    if (!(cfg.T > cfg.t0)) throw ConfigError("T must exceed t0");
    if (!(cfg.dt > 0.0)) throw ConfigError("dt must be > 0");
    const double hmin = std::min(cfg.params.h0, cfg.params.h1);
    if (cfg.dt > hmin) {
        throw ConfigError("dt = " + shortest(cfg.dt) + " exceeds the smallest delay " +
                          shortest(hmin));
    }
    if (!(cfg.varpi > 0.0)) throw ConfigError("varpi must be > 0");
    if (cfg.method != "all") (void)probe_method_from_string(cfg.method);
    const SweepConfig& s = cfg.sweep;
    const double step = s.theta_step_value();
    if (!(step > 0.0) || step > 2.0 * std::numbers::pi) {
        throw ConfigError("sweep.theta_step must lie in (0, 2 pi]");
    }
    if (!(s.rho_seed > 0.0) || !(s.rho_max >= s.rho_seed) || !(s.tol_rho > 0.0)) {
        throw ConfigError("sweep needs 0 < rho_seed <= rho_max and tol_rho > 0");
    }
    if (s.ray_weights[0] < 0.0 || s.ray_weights[1] < 0.0) {
        throw ConfigError("sweep.ray_weights must be >= 0");
    }
    if (!(cfg.tail_fraction > 0.0 && cfg.tail_fraction <= 1.0)) {
        throw ConfigError("decay.tail_fraction must lie in (0, 1]");
    }
    if (!(cfg.decay_tol > 0.0)) throw ConfigError("decay.tol must be > 0");
    if (cfg.output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

std::string config_hash(const RunConfig& cfg) {
    // where the files go does not change what is in them
    RunConfig canonical = cfg;
    canonical.output_dir = "out";
    const std::string text = emit_config(canonical);
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<double> parse_phi_list(const std::string& text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(',', start), text.size());
        std::string item = text.substr(start, end - start);
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        item = b == std::string::npos ? "" : item.substr(b, e - b + 1);
        double v = 0.0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size()) {
            throw ConfigError("--phi-s: cannot read '" + item + "' as a number");
        }
        out.push_back(v);
        start = end + 1;
    }
    return out;
}

}  // namespace dbounds
