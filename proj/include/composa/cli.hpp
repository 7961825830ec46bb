#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace composa {

struct SolveOptions {
    std::filesystem::path config;
    std::optional<std::filesystem::path> out;
    std::vector<std::string> overrides;
};

struct CompareOptions {
    std::filesystem::path config;
    std::optional<std::filesystem::path> out;
    std::vector<std::string> overrides;
    std::size_t iters = 50;
};

struct BenchOptions {
    std::string suite;
    std::filesystem::path config;
    std::optional<std::filesystem::path> out;
    std::vector<std::string> overrides;
    std::size_t repeats = 5;
};

/// Exit codes: 0 clean termination, 2 solver stalled, 1 any error.
int cmd_solve(const SolveOptions& opt, std::ostream& out, std::ostream& err);
int cmd_compare(const CompareOptions& opt, std::ostream& out, std::ostream& err);
int cmd_bench(const BenchOptions& opt, std::ostream& out, std::ostream& err);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace composa
