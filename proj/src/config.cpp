#include "jkoflow/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace jkoflow {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

// strip a trailing comment that is not inside a quoted string
std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') quoted = !quoted;
        if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
}

double parse_number(const std::string& raw, const std::string& key, int line,
                    const std::string& origin) {
    char* end = nullptr;
    const double v = std::strtod(raw.c_str(), &end);
    if (end == raw.c_str() || *end != '\0')
        throw ConfigError(origin + ":" + std::to_string(line) + ": field '" + key +
                          "' expects a number, got '" + raw + "'");
    return v;
}

} // namespace

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& origin) {
    ConfigFile cf;
    cf.origin_ = origin;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": malformed section header '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key or value");
        Entry e;
        e.line = lineno;
        if (value.front() == '"') {
            if (value.size() < 2 || value.back() != '"')
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": unterminated string for '" + key + "'");
            e.raw = value.substr(1, value.size() - 2);
            e.is_string = true;
        } else if (value.front() == '[') {
            if (value.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": unterminated array for '" + key + "'");
            std::string inner = value.substr(1, value.size() - 2);
            std::istringstream items(inner);
            std::string item;
            while (std::getline(items, item, ',')) {
                item = trim(item);
                if (!item.empty()) e.array.push_back(item);
            }
            e.raw = value;
        } else {
            e.raw = value;
        }
        const std::string full = section.empty() ? key : section + "." + key;
        if (cf.entries_.count(full))
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + full +
                              "'");
        cf.entries_.emplace(full, std::move(e));
    }
    return cf;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_string(buf.str(), path);
}

const ConfigFile::Entry* ConfigFile::find(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

ConfigFile::Entry* ConfigFile::find(const std::string& key) {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

bool ConfigFile::has(const std::string& key) const { return find(key) != nullptr; }

double ConfigFile::get_double(const std::string& key, double fallback) {
    Entry* e = find(key);
    if (!e) return fallback;
    e->consumed = true;
    return parse_number(e->raw, key, e->line, origin_);
}

double ConfigFile::require_double(const std::string& key) {
    if (!has(key)) throw ConfigError(origin_ + ": missing required field '" + key + "'");
    return get_double(key, 0.0);
}

std::int64_t ConfigFile::get_int(const std::string& key, std::int64_t fallback) {
    Entry* e = find(key);
    if (!e) return fallback;
    e->consumed = true;
    const double v = parse_number(e->raw, key, e->line, origin_);
    const auto r = static_cast<std::int64_t>(v);
    if (static_cast<double>(r) != v)
        throw ConfigError(origin_ + ":" + std::to_string(e->line) + ": field '" + key +
                          "' expects an integer");
    return r;
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) {
    Entry* e = find(key);
    if (!e) return fallback;
    e->consumed = true;
    if (e->raw == "true") return true;
    if (e->raw == "false") return false;
    throw ConfigError(origin_ + ":" + std::to_string(e->line) + ": field '" + key +
                      "' expects true or false");
}

std::string ConfigFile::get_string(const std::string& key, const std::string& fallback) {
    Entry* e = find(key);
    if (!e) return fallback;
    e->consumed = true;
    return e->raw;
}

std::vector<double> ConfigFile::get_array(const std::string& key, std::vector<double> fallback) {
    Entry* e = find(key);
    if (!e) return fallback;
    e->consumed = true;
    std::vector<double> out;
    for (const auto& item : e->array) out.push_back(parse_number(item, key, e->line, origin_));
    return out;
}

void ConfigFile::reject_unknown_keys() const {
    for (const auto& [key, e] : entries_)
        if (!e.consumed)
            throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": unknown field '" + key +
                              "'");
}

void ConfigFile::fail(const std::string& key, const std::string& message) const {
    const Entry* e = find(key);
    const std::string loc = e ? origin_ + ":" + std::to_string(e->line) : origin_;
    throw ConfigError(loc + ": field '" + key + "': " + message);
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << is.rdbuf();
    return from_string(buf.str(), path);
}

ExperimentConfig ExperimentConfig::from_string(const std::string& text,
                                               const std::string& origin) {
    ConfigFile cf = ConfigFile::parse_string(text, origin);
    ExperimentConfig c;

    c.problem.m = cf.get_double("problem.m", c.problem.m);
    c.problem.b_preset = cf.get_string("problem.b_preset", c.problem.b_preset);
    c.problem.b_amplitude = cf.get_double("problem.b_amplitude", c.problem.b_amplitude);
    c.problem.alpha0 = cf.get_double("problem.alpha0", c.problem.alpha0);
    auto xw = cf.get_array("problem.x_window", {c.problem.x_lo, c.problem.x_hi});
    if (xw.size() != 2) cf.fail("problem.x_window", "expects [lo, hi]");
    c.problem.x_lo = xw[0];
    c.problem.x_hi = xw[1];
    c.problem.tab_step = cf.get_double("problem.tab_step", c.problem.tab_step);

    c.initial.preset = cf.get_string("initial.preset", c.initial.preset);
    c.initial.t0 = cf.get_double("initial.t0", c.initial.t0);
    c.initial.lo = cf.get_double("initial.lo", c.initial.lo);
    c.initial.hi = cf.get_double("initial.hi", c.initial.hi);
    c.initial.c1 = cf.get_double("initial.c1", c.initial.c1);
    c.initial.w1 = cf.get_double("initial.w1", c.initial.w1);
    c.initial.c2 = cf.get_double("initial.c2", c.initial.c2);
    c.initial.w2 = cf.get_double("initial.w2", c.initial.w2);
    c.initial.weight2 = cf.get_double("initial.weight2", c.initial.weight2);
    c.initial.h_left = cf.get_double("initial.h_left", c.initial.h_left);
    c.initial.h_right = cf.get_double("initial.h_right", c.initial.h_right);
    c.initial.step_width = cf.get_double("initial.step_width", c.initial.step_width);
    c.initial.support = cf.get_double("initial.support", c.initial.support);

    c.jko.tau = cf.get_double("jko.tau", c.jko.tau);
    c.jko.n_quantiles = static_cast<std::size_t>(cf.get_int("jko.n_quantiles",
                                                            static_cast<std::int64_t>(c.jko.n_quantiles)));
    c.jko.t_end = cf.get_double("jko.t_end", c.jko.t_end);
    c.jko.inner_tol = cf.get_double("jko.inner_tol", c.jko.inner_tol);
    c.jko.inner_max_iter = static_cast<int>(cf.get_int("jko.inner_max_iter", c.jko.inner_max_iter));

    auto yw = cf.get_array("fv.y_window", {c.fv.y_lo, c.fv.y_hi});
    if (yw.size() != 2) cf.fail("fv.y_window", "expects [lo, hi]");
    c.fv.y_lo = yw[0];
    c.fv.y_hi = yw[1];
    c.fv.cells = static_cast<std::size_t>(cf.get_int("fv.cells",
                                                     static_cast<std::int64_t>(c.fv.cells)));
    c.fv.dt = cf.get_double("fv.dt", c.fv.dt);
    c.fv.nu = cf.get_double("fv.nu", c.fv.nu);
    c.fv.cfl_safety = cf.get_double("fv.cfl_safety", c.fv.cfl_safety);

    c.checks.k_levels = static_cast<std::size_t>(cf.get_int("checks.k_levels",
                                                            static_cast<std::int64_t>(c.checks.k_levels)));
    c.checks.test_functions = static_cast<std::size_t>(
        cf.get_int("checks.test_functions", static_cast<std::int64_t>(c.checks.test_functions)));
    c.checks.entropy_tol_scale =
        cf.get_double("checks.entropy_tol_scale", c.checks.entropy_tol_scale);
    c.checks.compare_times = cf.get_array("checks.compare_times", c.checks.compare_times);

    c.output_dir = cf.get_string("output.dir", c.output_dir);
    c.seed = static_cast<std::uint64_t>(cf.get_int("output.seed",
                                                   static_cast<std::int64_t>(c.seed)));
    c.run_jko_stage = cf.get_bool("output.run_jko", c.run_jko_stage);
    c.run_fv_stage = cf.get_bool("output.run_fv", c.run_fv_stage);

    cf.reject_unknown_keys();
    c.validate();
    return c;
}

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& field, const std::string& msg) {
        throw ConfigError("config: field '" + field + "': " + msg);
    };
    if (!(problem.m > 1.0)) fail("problem.m", "must be > 1");
    if (!(problem.alpha0 > 0.0)) fail("problem.alpha0", "must be > 0");
    if (!(problem.x_lo < 0.0 && problem.x_hi > 0.0))
        fail("problem.x_window", "must contain 0 in its interior");
    if (!(problem.tab_step > 0.0)) fail("problem.tab_step", "must be > 0");
    if (problem.b_preset == "constant_nonzero")
        fail("problem.b_preset",
             "'constant_nonzero' is rejected: a nonzero constant drift is not integrable and the "
             "coordinate change T' = alpha(T) blows up at finite x, so no admissible weight a "
             "exists; choose a drift with integrable tails");
    if (problem.b_preset != "zero" && problem.b_preset != "gaussian" &&
        problem.b_preset != "smoothed_indicator")
        fail("problem.b_preset", "unknown preset '" + problem.b_preset + "'");
    if (initial.preset != "barenblatt" && initial.preset != "uniform" &&
        initial.preset != "double_bump" && initial.preset != "riemann_smoothed")
        fail("initial.preset", "unknown preset '" + initial.preset + "'");
    if (initial.preset == "barenblatt" && !(initial.t0 > 0.0))
        fail("initial.t0", "must be > 0");
    if (!(jko.tau > 0.0)) fail("jko.tau", "must be > 0");
    if (jko.n_quantiles < 8) fail("jko.n_quantiles", "must be >= 8");
    if (!(jko.t_end > 0.0)) fail("jko.t_end", "must be > 0");
    if (!(jko.inner_tol > 0.0)) fail("jko.inner_tol", "must be > 0");
    if (!(fv.y_hi > fv.y_lo)) fail("fv.y_window", "must be a nonempty interval");
    if (fv.cells < 8) fail("fv.cells", "must be >= 8");
    if (!(fv.dt > 0.0)) fail("fv.dt", "must be > 0");
    if (!(fv.nu >= 0.0)) fail("fv.nu", "must be >= 0");
    if (!(fv.cfl_safety > 0.0 && fv.cfl_safety < 1.0))
        fail("fv.cfl_safety", "must lie in (0, 1)");
    if (checks.k_levels == 0) fail("checks.k_levels", "must be >= 1");
    if (checks.test_functions == 0) fail("checks.test_functions", "must be >= 1");
    for (double t : checks.compare_times)
        if (!(t > 0.0) || t > jko.t_end + 1e-12)
            fail("checks.compare_times", "times must lie in (0, jko.t_end]");
}

} // namespace jkoflow
