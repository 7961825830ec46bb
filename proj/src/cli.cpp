#include "composa/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "CLI11.hpp"

#include "composa/baselines.hpp"
#include "composa/bench.hpp"
#include "composa/config.hpp"
#include "composa/error.hpp"
#include "composa/io.hpp"
#include "composa/report.hpp"

namespace composa {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

Config load_config(const fs::path& path, const std::vector<std::string>& overrides) {
    Config cfg = Config::parse_file(path);
    for (const auto& o : overrides) cfg.apply_override(o);
    return cfg;
}

fs::path output_dir(const std::optional<fs::path>& flag, const Config& cfg) {
    fs::path dir = flag ? *flag : fs::path(cfg.get_string("output.dir", "composa_out"));
    fs::create_directories(dir);
    return dir;
}

std::ofstream open_csv(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    return out;
}

// Cost after `k` iterations; runs that stopped early keep their final cost.
double cost_at(const SolveReport& r, std::size_t k) {
    if (r.trace.empty()) return r.cost_initial;
    return r.trace[std::min(k, r.trace.size()) - 1].cost;
}

std::string mean_pm_variance(const SampleStats& s) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g±%.2g", s.mean, s.variance);
    return buf;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

int bench_gamma_sweep_cmd(const Config& cfg, const fs::path& dir, std::size_t repeats, std::ostream& out) {
    const GammaSweepResult r = bench_gamma_sweep(cfg, repeats);
    auto csv = open_csv(dir / "gamma_sweep.csv");
    csv << "gamma";
    for (double b : r.betas) csv << ",beta=" << io::format_double(b);
    csv << '\n';
    json j{{"suite", "gamma_sweep"}, {"iters", r.iters}, {"repeats", repeats}, {"rows", json::array()}};
    for (std::size_t g = 0; g < r.gammas.size(); ++g) {
        csv << io::format_double(r.gammas[g]);
        for (std::size_t b = 0; b < r.betas.size(); ++b) {
            csv << ',' << io::format_double(r.cost[g][b]);
            j["rows"].push_back({{"gamma", r.gammas[g]},
                                 {"beta", r.betas[b]},
                                 {"cost", r.cost[g][b]},
                                 {"wall_ms", to_json(r.wall_ms[g][b])}});
        }
        csv << '\n';
    }
    write_json(dir / "gamma_sweep.json", j);
    out << "wrote " << (dir / "gamma_sweep.csv").string() << '\n';
    return 0;
}

int bench_active_set_cmd(const Config& cfg, const fs::path& dir, std::size_t repeats, std::ostream& out) {
    const ActiveSetResult r = bench_active_set(cfg, repeats);
    const SampleStats red = sample_stats(r.reduced_ms);
    const SampleStats full = sample_stats(r.full_ms);
    auto csv = open_csv(dir / "active_set.csv");
    csv << "mode,mean_ms,variance_ms2,median_ms,samples\n";
    for (const auto& [name, s] : {std::pair{"reduced", red}, std::pair{"full", full}}) {
        csv << name << ',' << io::format_double(s.mean) << ',' << io::format_double(s.variance) << ','
            << io::format_double(s.median) << ',' << s.count << '\n';
    }
    json j{{"suite", "active_set"},
           {"dim", r.dim},
           {"iterations", r.iterations},
           {"eligible_iterations", r.eligible},
           {"betas", cfg.get_list("bench.betas", {0.5, 0.9})},
           {"repeats", repeats},
           {"reduced_ms", to_json(red)},
           {"full_ms", to_json(full)},
           {"median_ratio", full.median > 0.0 ? json(red.median / full.median) : json(nullptr)}};
    write_json(dir / "active_set.json", j);
    out << "wrote " << (dir / "active_set.csv").string() << '\n';
    return 0;
}

int bench_linsolve_cmd(const Config& cfg, const fs::path& dir, std::size_t repeats, std::ostream& out) {
    const LinsolveResult r = bench_linsolve(cfg, repeats);
    auto csv = open_csv(dir / "linsolve.csv");
    csv << "solver";
    for (Index m : r.dims) csv << ",m=" << m;
    csv << '\n';
    json j{{"suite", "linsolve"}, {"repeats", repeats}, {"unit", "s"}, {"dims", r.dims}, {"rows", json::array()}};
    for (std::size_t k = 0; k < kLinsolveMethods.size(); ++k) {
        csv << kLinsolveMethods[k];
        for (std::size_t g = 0; g < r.dims.size(); ++g) {
            std::vector<double> sec;
            for (double ms : r.ms[k][g]) sec.push_back(ms / 1000.0);
            const SampleStats s = sample_stats(sec);
            csv << ',' << mean_pm_variance(s);
            j["rows"].push_back({{"solver", kLinsolveMethods[k]},
                                 {"dim", r.dims[g]},
                                 {"time_s", to_json(s)},
                                 {"rel_diff_vs_direct_sparse", r.rel_diff[k][g]}});
        }
        csv << '\n';
    }
    write_json(dir / "linsolve.json", j);
    out << "wrote " << (dir / "linsolve.csv").string() << '\n';
    return 0;
}

int bench_block_jacobi_cmd(const Config& cfg, const fs::path& dir, std::ostream& out) {
    const BlockJacobiResult r = bench_block_jacobi(cfg);
    const SampleStats fs_ = sample_stats(r.full_ms);
    const SampleStats bs = sample_stats(r.block_ms);
    auto csv = open_csv(dir / "block_jacobi.csv");
    csv << "method,dim,max_block_dim,factor_nnz,partitions,overlap,final_cost,median_direction_ms\n";
    csv << "full," << r.dim << ',' << r.dim << ',' << r.factor_nnz_full << ",1,0," << io::format_double(r.cost_full)
        << ',' << io::format_double(fs_.median) << '\n';
    csv << "block_jacobi," << r.dim << ',' << r.max_block_dim << ',' << r.factor_nnz_blocks << ',' << r.partitions << ','
        << io::format_double(r.overlap) << ',' << io::format_double(r.cost_block) << ','
        << io::format_double(bs.median) << '\n';
    auto iters = open_csv(dir / "block_jacobi_iterations.csv");
    iters << "iter,full_ms,block_jacobi_ms\n";
    const std::size_t n = std::max(r.full_ms.size(), r.block_ms.size());
    for (std::size_t i = 0; i < n; ++i) {
        iters << i + 1 << ',' << (i < r.full_ms.size() ? io::format_double(r.full_ms[i]) : "") << ','
              << (i < r.block_ms.size() ? io::format_double(r.block_ms[i]) : "") << '\n';
    }
    json j{{"suite", "block_jacobi"},
           {"dim", r.dim},
           {"partitions", r.partitions},
           {"overlap", r.overlap},
           {"max_block_dim", r.max_block_dim},
           {"factor_nnz_full", r.factor_nnz_full},
           {"factor_nnz_blocks", r.factor_nnz_blocks},
           {"direction_rel_diff", r.direction_rel_diff},
           {"cost_full", r.cost_full},
           {"cost_block", r.cost_block},
           {"termination_full", to_string(r.termination_full)},
           {"termination_block", to_string(r.termination_block)},
           {"full_direction_ms", to_json(fs_)},
           {"block_direction_ms", to_json(bs)}};
    write_json(dir / "block_jacobi.json", j);
    out << "wrote " << (dir / "block_jacobi.csv").string() << '\n';
    return 0;
}

}  // namespace

int cmd_solve(const SolveOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Config cfg = load_config(opt.config, opt.overrides);
        const ProblemInstance inst = problem_from_config(cfg);
        const SolverConfig s = solver_config_from(cfg);
        const SolveReport rep = gsom_solve(*inst.spec, inst.x0, s);
        const fs::path dir = output_dir(opt.out, cfg);
        write_solve_outputs(dir, rep,
                            json{{"problem", inst.kind}, {"beta", inst.spec->beta()}, {"gamma", s.gamma},
                                 {"seed", s.seed}});
        out << "termination=" << to_string(rep.termination) << " iterations=" << rep.iterations
            << " cost=" << io::format_double(rep.cost_final) << '\n';
        return rep.termination == Termination::Stalled ? 2 : 0;
    });
}

int cmd_compare(const CompareOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (opt.iters == 0) throw ConfigError("--iters must be positive");
        const Config cfg = load_config(opt.config, opt.overrides);
        const ProblemInstance inst = problem_from_config(cfg);
        if (!inst.spec->smooth().quadratic()) {
            throw NonQuadraticSmoothPart("compare: problem '" + inst.kind +
                                         "' has a non-quadratic smooth part; no convex baseline");
        }
        SolverConfig s = solver_config_from(cfg);
        s.max_iter = opt.iters;
        AdmmConfig a = admm_config_from(cfg);
        a.maxit = opt.iters;
        const SolveReport g = gsom_solve(*inst.spec, inst.x0, s);
        const AdmmResult ad = admm_solve(*inst.spec, a);

        const fs::path dir = output_dir(opt.out, cfg);
        auto csv = open_csv(dir / "compare.csv");
        csv << "iter,cost_gsom,cost_admm\n";
        for (std::size_t k = 1; k <= opt.iters; ++k) {
            csv << k << ',' << io::format_double(cost_at(g, k)) << ',' << io::format_double(cost_at(ad.report, k))
                << '\n';
        }
        json j{{"problem", inst.kind},
               {"iters", opt.iters},
               {"baseline", "plain scaled ADMM with residual balancing"},
               {"gsom", to_json(g, false)},
               {"admm", to_json(ad.report, false)},
               {"admm_primal_residual", ad.primal_residual},
               {"admm_dual_residual", ad.dual_residual},
               {"admm_rho", ad.rho}};
        write_json(dir / "compare.json", j);
        out << "cost_gsom=" << io::format_double(g.cost_final)
            << " cost_admm=" << io::format_double(ad.report.cost_final) << '\n';
        return 0;
    });
}

int cmd_bench(const BenchOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        static const std::vector<std::string> suites = {"gamma_sweep", "active_set", "linsolve", "block_jacobi"};
        if (std::find(suites.begin(), suites.end(), opt.suite) == suites.end()) {
            throw ConfigError("unknown bench suite '" + opt.suite +
                              "' (expected gamma_sweep, active_set, linsolve or block_jacobi)");
        }
        const Config cfg = load_config(opt.config, opt.overrides);
        const std::size_t repeats = std::max<std::size_t>(opt.repeats, 1);
        const fs::path dir = output_dir(opt.out, cfg);
        if (opt.suite == "gamma_sweep") return bench_gamma_sweep_cmd(cfg, dir, repeats, out);
        if (opt.suite == "active_set") return bench_active_set_cmd(cfg, dir, repeats, out);
        if (opt.suite == "linsolve") return bench_linsolve_cmd(cfg, dir, repeats, out);
        return bench_block_jacobi_cmd(cfg, dir, out);
    });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"GSOM solver for f(x) + beta ||Cx||_1", "composa"};
    app.require_subcommand(1);

    SolveOptions so;
    auto* solve = app.add_subcommand("solve", "Run the solver on a config file");
    solve->add_option("config", so.config, "Config file")->required()->check(CLI::ExistingFile);
    solve->add_option("--out", so.out, "Output directory");
    solve->add_option("--set", so.overrides, "Override a config key (key=value)");

    CompareOptions co;
    auto* compare = app.add_subcommand("compare", "Compare the solver against ADMM");
    compare->add_option("config", co.config, "Config file")->required()->check(CLI::ExistingFile);
    compare->add_option("--iters", co.iters, "Iteration budget for both methods");
    compare->add_option("--out", co.out, "Output directory");
    compare->add_option("--set", co.overrides, "Override a config key (key=value)");

    BenchOptions bo;
    auto* bench = app.add_subcommand("bench", "Run a benchmark suite");
    bench->add_option("suite", bo.suite, "gamma_sweep, active_set, linsolve or block_jacobi")->required();
    bench->add_option("config", bo.config, "Config file")->required()->check(CLI::ExistingFile);
    bench->add_option("--repeats", bo.repeats, "Repetitions per measurement");
    bench->add_option("--out", bo.out, "Output directory");
    bench->add_option("--set", bo.overrides, "Override a config key (key=value)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }
    if (*solve) return cmd_solve(so, out, err);
    if (*compare) return cmd_compare(co, out, err);
    return cmd_bench(bo, out, err);
}

}  // namespace composa
