#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "jkoflow/common.hpp"
#include "jkoflow/jko.hpp"

namespace jkoflow {

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Minimal TOML-style reader: `[section]` headers, `key = value` lines with
/// numbers, booleans, quoted strings and flat arrays, `#` comments. Keys are
/// exposed as "section.key"; unknown keys are rejected so typos surface.
class ConfigFile {
public:
    static ConfigFile parse_string(const std::string& text, const std::string& origin = "config");
    static ConfigFile parse_file(const std::string& path);

    bool has(const std::string& key) const;
    double get_double(const std::string& key, double fallback);
    double require_double(const std::string& key);
    std::int64_t get_int(const std::string& key, std::int64_t fallback);
    bool get_bool(const std::string& key, bool fallback);
    std::string get_string(const std::string& key, const std::string& fallback);
    std::vector<double> get_array(const std::string& key, std::vector<double> fallback);

    /// Throws ConfigError listing any key that was never read.
    void reject_unknown_keys() const;

    [[noreturn]] void fail(const std::string& key, const std::string& message) const;

private:
    struct Entry {
        std::string raw;
        int line = 0;
        bool consumed = false;
        bool is_string = false;
        std::vector<std::string> array;  // non-empty for arrays
    };
    std::string origin_;
    std::map<std::string, Entry> entries_;

    const Entry* find(const std::string& key) const;
    Entry* find(const std::string& key);
};

struct ProblemConfig {
    double m = 2.0;
    std::string b_preset = "zero";  // zero | gaussian | smoothed_indicator | constant_nonzero
    double b_amplitude = 0.5;
    double alpha0 = 1.0;
    double x_lo = -4.5, x_hi = 4.5;  // transform window
    double tab_step = 1e-3;
};

struct InitialConfig {
    std::string preset = "barenblatt";  // barenblatt | uniform | double_bump | riemann_smoothed
    double t0 = 0.1;                    // barenblatt start time
    double lo = -1.0, hi = 1.0;         // uniform
    double c1 = -1.0, w1 = 0.5, c2 = 1.0, w2 = 0.5, weight2 = 1.0;  // double_bump
    double h_left = 1.0, h_right = 0.3, step_width = 0.15, support = 2.5;  // riemann_smoothed
};

struct FvFileConfig {
    double y_lo = -4.0, y_hi = 4.0;
    std::size_t cells = 1600;
    double dt = 1e-4;
    double nu = 0.0;
    double cfl_safety = 0.45;
};

struct ChecksConfig {
    std::size_t k_levels = 16;
    std::size_t test_functions = 8;
    double entropy_tol_scale = 5e-3;
    std::vector<double> compare_times = {0.1, 0.3, 0.5};
};

struct ExperimentConfig {
    ProblemConfig problem;
    InitialConfig initial;
    JkoConfig jko;
    FvFileConfig fv;
    ChecksConfig checks;
    std::string output_dir = "out";
    std::uint64_t seed = 12345;
    bool run_jko_stage = true;
    bool run_fv_stage = true;

    static ExperimentConfig from_file(const std::string& path);
    static ExperimentConfig from_string(const std::string& text,
                                        const std::string& origin = "config");
    /// Field-level validation; throws ConfigError naming the offending field.
    void validate() const;
};

} // namespace jkoflow
