#include "composa/report.hpp"

#include <fstream>

#include "composa/error.hpp"
#include "composa/io.hpp"

namespace composa {

using nlohmann::json;

json to_json(const IterationRecord& r) {
    return json{{"iter", r.iter},
                {"cost", r.cost},
                {"residual", r.residual},
                {"step", r.step},
                {"n_active", r.n_active},
                {"n_signchange", r.n_signchange},
                {"n_frozen", r.n_frozen},
                {"qp_iters", r.qp_iters},
                {"lin_residual", r.lin_residual},
                {"gamma", r.gamma},
                {"stalled", r.stalled},
                {"wall_ms", r.wall_ms},
                {"direction_ms", r.direction_ms},
                {"full_direction_ms", r.full_direction_ms}};
}

json to_json(const SolveReport& r, bool include_trace) {
    json j{{"method", r.method},
           {"termination", to_string(r.termination)},
           {"iterations", r.iterations},
           {"cost_initial", r.cost_initial},
           {"cost_final", r.cost_final},
           {"residual_final", r.residual_final},
           {"dim", r.x_final.size()},
           {"wall_ms", r.wall_ms}};
    if (include_trace) {
        json t = json::array();
        for (const auto& rec : r.trace) t.push_back(to_json(rec));
        j["trace"] = std::move(t);
    }
    return j;
}

void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace) {
    using io::format_double;
    out << kTraceCsvHeader << '\n';
    for (const auto& r : trace) {
        out << r.iter << ',' << format_double(r.cost) << ',' << format_double(r.residual) << ','
            << format_double(r.step) << ',' << r.n_active << ',' << r.n_signchange << ',' << r.n_frozen << ','
            << r.qp_iters << ',' << format_double(r.lin_residual) << ',' << format_double(r.wall_ms) << '\n';
    }
}

namespace {
std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    return out;
}
}  // namespace

void write_trace_csv(const std::filesystem::path& path, const std::vector<IterationRecord>& trace) {
    auto out = open_out(path);
    write_trace_csv(out, trace);
}

void write_json(const std::filesystem::path& path, const json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

void write_solve_outputs(const std::filesystem::path& dir, const SolveReport& r, const json& extra) {
    std::filesystem::create_directories(dir);
    json j = to_json(r);
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    write_json(dir / "report.json", j);
    write_trace_csv(dir / "trace.csv", r.trace);
    io::write_vector_csv(dir / "x_final.csv", r.x_final, "x");
}

}  // namespace composa
