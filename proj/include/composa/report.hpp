#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "composa/solver.hpp"

namespace composa {

inline constexpr const char* kTraceCsvHeader =
    "iter,cost,residual,step,n_active,n_signchange,n_frozen,qp_iters,lin_residual,wall_ms";

nlohmann::json to_json(const IterationRecord& r);
nlohmann::json to_json(const SolveReport& r, bool include_trace = true);

void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace);
void write_trace_csv(const std::filesystem::path& path, const std::vector<IterationRecord>& trace);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// Writes report.json, trace.csv and x_final.csv into `dir` (created if needed).
/// `extra` is merged into the top level of report.json.
void write_solve_outputs(const std::filesystem::path& dir, const SolveReport& r,
                         const nlohmann::json& extra = nlohmann::json::object());

}  // namespace composa
