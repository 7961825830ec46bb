#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "composa/baselines.hpp"
#include "composa/problems.hpp"
#include "composa/solver.hpp"

namespace composa {

/// Flat key-value configuration. Accepts `key = value` lines, `[section]`
/// headers that prefix following keys with `section.`, `#` and `;` comments
/// and double-quoted strings. Unknown keys are rejected.
class Config {
public:
    static Config parse_file(const std::filesystem::path& path);
    static Config parse_string(const std::string& text, const std::string& origin = "<string>");

    /// `key=value` from the command line; replaces any file value.
    void apply_override(const std::string& assignment);
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const;
    std::optional<std::string> find(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::size_t get_size(const std::string& key, std::size_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

    /// Resolves a path value relative to the directory of the config file.
    std::filesystem::path get_path(const std::string& key) const;

    const std::filesystem::path& base_dir() const { return base_dir_; }
    std::vector<std::string> keys() const;

    static const std::vector<std::string>& known_keys();

private:
    struct Entry {
        std::string value;
        std::string where;  // "file:line" or "--set"
    };
    [[noreturn]] void fail(const std::string& key, const std::string& msg) const;

    std::map<std::string, Entry> entries_;
    std::filesystem::path base_dir_;
};

struct ProblemInstance {
    std::shared_ptr<const ProblemSpec> spec;
    Vector x0;
    std::string kind;
    Index grid_n = 0;  // image and grid problems
};

/// Builds the problem named by `problem.kind`. Data files are used when given,
/// seeded synthetic data otherwise.
ProblemInstance problem_from_config(const Config& cfg);

SolverConfig solver_config_from(const Config& cfg);
AdmmConfig admm_config_from(const Config& cfg);

}  // namespace composa
