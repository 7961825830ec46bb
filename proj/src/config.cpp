#include "composa/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "composa/error.hpp"
#include "composa/io.hpp"

namespace composa {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& k) {
    if (k.empty() || k.front() == '.' || k.back() == '.') return false;
    return std::all_of(k.begin(), k.end(), [](unsigned char c) { return std::isalnum(c) || c == '_' || c == '.'; });
}

// Removes a trailing comment that is not inside double quotes.
std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (!quoted && (line[i] == '#' || line[i] == ';')) return line.substr(0, i);
    }
    return line;
}

std::string unquote(const std::string& v, const std::string& where) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
    if (v.find('"') != std::string::npos) throw ConfigError(where + ": unbalanced quote in value");
    return v;
}

std::optional<double> parse_number(const std::string& s) {
    const std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) return std::nullopt;
    return v;
}

}  // namespace

const std::vector<std::string>& Config::known_keys() {
    static const std::vector<std::string> keys = {
        "seed",
        "problem.kind", "problem.grid_n", "problem.beta", "problem.alpha", "problem.a", "problem.forcing",
        "problem.forcing_value", "problem.noise", "problem.blur_radius", "problem.blur_center",
        "problem.graph_rows", "problem.graph_cols", "problem.beta1", "problem.beta2", "problem.xhat",
        "problem.penalty", "problem.a_path", "problem.c_path", "problem.y_path", "problem.f_obs_path",
        "problem.xhat_path", "problem.edges_path", "problem.x0_path",
        "solver.gamma", "solver.gamma_warmup", "solver.gamma0", "solver.gamma_ratio", "solver.tol_x",
        "solver.tol_f", "solver.tol_residual", "solver.max_iter", "solver.tol_act", "solver.eps_act",
        "solver.kappa_min", "solver.active_set_reduction", "solver.time_full_direction", "solver.tol_qp",
        "solver.maxit_qp",
        "linsolve.kind", "linsolve.tol", "linsolve.maxit", "linsolve.partitions", "linsolve.overlap",
        "linsolve.block_maxit", "linsolve.direct_max_dim",
        "linesearch.sigma", "linesearch.s_min", "linesearch.max_backtracks", "linesearch.slope",
        "linesearch.pinning", "linesearch.interior_margin", "linesearch.eps_reg",
        "admm.rho", "admm.tol", "admm.maxit", "admm.residual_balancing",
        "output.dir",
        "bench.gammas", "bench.betas", "bench.iters", "bench.repeats", "bench.sizes", "bench.grid_n", "bench.warm_iters",
        "bench.frozen_fraction",
    };
    return keys;
}

Config Config::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    Config cfg = parse_string(ss.str(), path.string());
    cfg.base_dir_ = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    return cfg;
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
    static const std::set<std::string> known(known_keys().begin(), known_keys().end());
    Config cfg;
    cfg.base_dir_ = ".";
    std::istringstream in(text);
    std::string raw, section;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string where = origin + ":" + std::to_string(line_no);
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!valid_key(section)) throw ConfigError(where + ": invalid section name '" + section + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
        const std::string key_part = trim(line.substr(0, eq));
        if (!valid_key(key_part)) throw ConfigError(where + ": invalid key '" + key_part + "'");
        const std::string key = section.empty() ? key_part : section + "." + key_part;
        if (!known.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
        if (cfg.entries_.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
        const std::string value = unquote(trim(line.substr(eq + 1)), where);
        if (value.empty()) throw ConfigError(where + ": empty value for '" + key + "'");
        cfg.entries_[key] = Entry{value, where};
    }
    return cfg;
}

void Config::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("--set: expected key=value, got '" + assignment + "'");
    set(trim(assignment.substr(0, eq)), unquote(trim(assignment.substr(eq + 1)), "--set"));
}

void Config::set(const std::string& key, const std::string& value) {
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError("unknown key '" + key + "'");
    if (value.empty()) throw ConfigError("empty value for '" + key + "'");
    entries_[key] = Entry{value, "--set"};
}

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

std::optional<std::string> Config::find(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second.value;
}

void Config::fail(const std::string& key, const std::string& msg) const {
    auto it = entries_.find(key);
    const std::string where = it == entries_.end() ? std::string("config") : it->second.where;
    throw ConfigError(where + ": " + key + ": " + msg);
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    return find(key).value_or(fallback);
}

double Config::get_double(const std::string& key, double fallback) const {
    auto v = find(key);
    if (!v) return fallback;
    auto num = parse_number(*v);
    if (!num || !std::isfinite(*num)) fail(key, "expected a number, got '" + *v + "'");
    return *num;
}

std::size_t Config::get_size(const std::string& key, std::size_t fallback) const {
    auto v = find(key);
    if (!v) return fallback;
    auto num = parse_number(*v);
    if (!num || *num < 0.0 || std::floor(*num) != *num) fail(key, "expected a non-negative integer, got '" + *v + "'");
    return static_cast<std::size_t>(*num);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    auto v = find(key);
    if (!v) return fallback;
    std::string s = *v;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
    if (s == "false" || s == "no" || s == "off" || s == "0") return false;
    fail(key, "expected a boolean, got '" + *v + "'");
}

std::vector<double> Config::get_list(const std::string& key, const std::vector<double>& fallback) const {
    auto v = find(key);
    if (!v) return fallback;
    std::string s = trim(*v);
    if (!s.empty() && s.front() == '[') {
        if (s.back() != ']') fail(key, "unterminated list");
        s = s.substr(1, s.size() - 2);
    }
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto num = parse_number(item);
        if (!num) fail(key, "bad list element '" + trim(item) + "'");
        out.push_back(*num);
    }
    if (out.empty()) fail(key, "empty list");
    return out;
}

std::filesystem::path Config::get_path(const std::string& key) const {
    auto v = find(key);
    if (!v) fail(key, "missing path");
    std::filesystem::path p(*v);
    if (p.is_relative()) p = base_dir_ / p;
    if (!std::filesystem::exists(p)) fail(key, "file not found: " + p.string());
    return p;
}

std::vector<std::string> Config::keys() const {
    std::vector<std::string> out;
    for (const auto& [k, e] : entries_) out.push_back(k);
    return out;
}

// ---------------------------------------------------------------------------

namespace {

SparseMatrix forward_differences(Index m) {
    std::vector<Triplet> t;
    for (Index i = 0; i + 1 < m; ++i) {
        t.push_back({i, i, -1.0});
        t.push_back({i, i + 1, 1.0});
    }
    return SparseMatrix::from_triplets(t, m == 0 ? 0 : m - 1, m);
}

Index grid_side(Index len, const std::string& what) {
    const auto n = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(len))));
    if (n * n != len) throw ConfigError(what + " has " + std::to_string(len) + " entries, not a square image");
    return n;
}

}  // namespace

ProblemInstance problem_from_config(const Config& cfg) {
    const std::string kind = cfg.get_string("problem.kind", "");
    if (kind.empty()) throw ConfigError("config: problem.kind is required");
    const auto seed = static_cast<std::uint64_t>(cfg.get_size("seed", 0));
    ProblemInstance inst;
    inst.kind = kind;

    if (kind == "quadratic_tv") {
        const Index n = cfg.get_size("problem.grid_n", 32);
        const double z = cfg.get_double("problem.forcing_value", 380.0);
        const std::string forcing = cfg.get_string("problem.forcing", "constant");
        ScalarField field;
        if (forcing == "constant") {
            field = [z](double, double) { return z; };
        } else if (forcing == "sine") {
            field = [z](double x, double y) { return z * std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * y); };
        } else {
            throw ConfigError("config: problem.forcing must be 'constant' or 'sine'");
        }
        inst.spec = std::make_shared<ProblemSpec>(build_quadratic_tv(n, field, cfg.get_double("problem.beta", 0.5)));
        inst.grid_n = n;
    } else if (kind == "deconvolution") {
        const double alpha = cfg.get_double("problem.alpha", 0.001);
        const double beta = cfg.get_double("problem.beta", 0.02);
        SparseMatrix a;
        Vector y;
        std::vector<io::Edge> edges;
        if (cfg.has("problem.a_path")) {
            a = io::read_matrix_market(cfg.get_path("problem.a_path"));
            y = io::read_vector_csv(cfg.get_path("problem.y_path"));
            if (cfg.has("problem.edges_path")) {
                edges = io::read_edge_list(cfg.get_path("problem.edges_path"));
            } else {
                inst.grid_n = grid_side(a.cols(), "A");
                edges = image_neighbor_edges(inst.grid_n);
            }
        } else {
            const Index n = cfg.get_size("problem.grid_n", 32);
            a = blur_operator(n, cfg.get_size("problem.blur_radius", 1), cfg.get_double("problem.blur_center", 0.6));
            y = gaussian_noise(a.matvec(phantom_image(n)), cfg.get_double("problem.noise", 0.01), seed);
            edges = image_neighbor_edges(n);
            inst.grid_n = n;
        }
        inst.spec = std::make_shared<ProblemSpec>(build_deconvolution(std::move(a), std::move(y), alpha, beta, edges));
    } else if (kind == "cauchy") {
        Vector f;
        Index n = 0;
        if (cfg.has("problem.f_obs_path")) {
            f = io::read_vector_csv(cfg.get_path("problem.f_obs_path"));
            n = grid_side(f.size(), "f_obs");
        } else {
            n = cfg.get_size("problem.grid_n", 32);
            f = cauchy_noise(phantom_image(n), cfg.get_double("problem.noise", 0.02), seed);
        }
        inst.spec = std::make_shared<ProblemSpec>(
            build_cauchy_denoise(f, cfg.get_double("problem.a", 0.3), cfg.get_double("problem.beta", 0.1), n));
        inst.x0 = f;
        inst.grid_n = n;
    } else if (kind == "graph_trend") {
        std::vector<io::Edge> edges;
        Vector y;
        if (cfg.has("problem.edges_path")) {
            edges = io::read_edge_list(cfg.get_path("problem.edges_path"));
            y = io::read_vector_csv(cfg.get_path("problem.y_path"));
        } else {
            const Index rows = cfg.get_size("problem.graph_rows", 20);
            const Index cols = cfg.get_size("problem.graph_cols", 20);
            edges = grid_graph_edges(rows, cols);
            y = gaussian_noise(blocky_grid_signal(rows, cols), cfg.get_double("problem.noise", 0.1), seed);
        }
        inst.spec = std::make_shared<ProblemSpec>(build_graph_trend(
            edges, std::move(y), cfg.get_double("problem.beta1", 1.0), cfg.get_double("problem.beta2", 0.1)));
    } else if (kind == "prox") {
        Vector xhat;
        if (cfg.has("problem.xhat_path")) {
            xhat = io::read_vector_csv(cfg.get_path("problem.xhat_path"));
        } else if (cfg.has("problem.xhat")) {
            xhat = cfg.get_list("problem.xhat", {});
        } else {
            throw ConfigError("config: prox problems need problem.xhat or problem.xhat_path");
        }
        SparseMatrix c;
        if (cfg.has("problem.c_path")) {
            c = io::read_matrix_market(cfg.get_path("problem.c_path"));
        } else {
            const std::string pen = cfg.get_string("problem.penalty", "identity");
            if (pen == "identity") {
                c = SparseMatrix::identity(xhat.size(), 1.0);
            } else if (pen == "difference") {
                c = forward_differences(xhat.size());
            } else {
                throw ConfigError("config: problem.penalty must be 'identity' or 'difference'");
            }
        }
        inst.spec = std::make_shared<ProblemSpec>(build_prox_instance(xhat, std::move(c), cfg.get_double("problem.alpha", 1.0)));
    } else {
        throw ConfigError("config: unknown problem.kind '" + kind +
                          "' (expected quadratic_tv, deconvolution, cauchy, graph_trend or prox)");
    }

    if (cfg.has("problem.x0_path")) {
        inst.x0 = io::read_vector_csv(cfg.get_path("problem.x0_path"));
    }
    if (inst.x0.empty()) inst.x0.assign(inst.spec->dim(), 0.0);
    if (inst.x0.size() != inst.spec->dim()) throw DimensionError("config: x0 has the wrong length");
    return inst;
}

SolverConfig solver_config_from(const Config& cfg) {
    SolverConfig s;
    s.gamma = cfg.get_double("solver.gamma", s.gamma);
    s.warmup.enabled = cfg.get_bool("solver.gamma_warmup", s.warmup.enabled);
    s.warmup.gamma0 = cfg.get_double("solver.gamma0", s.warmup.gamma0);
    s.warmup.ratio = cfg.get_double("solver.gamma_ratio", s.warmup.ratio);
    s.tol_x = cfg.get_double("solver.tol_x", s.tol_x);
    s.tol_f = cfg.get_double("solver.tol_f", s.tol_f);
    s.tol_residual = cfg.get_double("solver.tol_residual", s.tol_residual);
    s.max_iter = cfg.get_size("solver.max_iter", s.max_iter);
    if (cfg.has("solver.tol_act")) s.tol_act = cfg.get_double("solver.tol_act", 0.0);
    if (cfg.has("solver.eps_act")) s.eps_act = cfg.get_double("solver.eps_act", 0.0);
    if (cfg.has("solver.kappa_min")) s.kappa_min = cfg.get_double("solver.kappa_min", 0.0);
    s.active_set_reduction = cfg.get_bool("solver.active_set_reduction", s.active_set_reduction);
    s.time_full_direction = cfg.get_bool("solver.time_full_direction", s.time_full_direction);
    s.qp.tol_qp = cfg.get_double("solver.tol_qp", s.qp.tol_qp);
    s.qp.maxit_qp = cfg.get_size("solver.maxit_qp", s.qp.maxit_qp);
    s.seed = cfg.get_size("seed", 0);

    if (auto k = cfg.find("linsolve.kind")) s.linsolve.kind = parse_linear_solver_kind(*k);
    s.linsolve.tol = cfg.get_double("linsolve.tol", s.linsolve.tol);
    s.linsolve.maxit = cfg.get_size("linsolve.maxit", s.linsolve.maxit);
    s.linsolve.partitions = cfg.get_size("linsolve.partitions", s.linsolve.partitions);
    s.linsolve.overlap = cfg.get_double("linsolve.overlap", s.linsolve.overlap);
    s.linsolve.block_maxit = cfg.get_size("linsolve.block_maxit", s.linsolve.block_maxit);
    s.linsolve.direct_max_dim = cfg.get_size("linsolve.direct_max_dim", s.linsolve.direct_max_dim);

    s.linesearch.sigma = cfg.get_double("linesearch.sigma", s.linesearch.sigma);
    s.linesearch.s_min = cfg.get_double("linesearch.s_min", s.linesearch.s_min);
    s.linesearch.max_backtracks = cfg.get_size("linesearch.max_backtracks", s.linesearch.max_backtracks);
    if (auto k = cfg.find("linesearch.slope")) s.linesearch.slope = parse_slope_kind(*k);
    if (auto k = cfg.find("linesearch.pinning")) s.linesearch.pinning = parse_interior_pinning(*k);
    s.linesearch.interior_margin = cfg.get_double("linesearch.interior_margin", s.linesearch.interior_margin);
    s.linesearch.eps_reg = cfg.get_double("linesearch.eps_reg", s.linesearch.eps_reg);
    s.validate();
    return s;
}

AdmmConfig admm_config_from(const Config& cfg) {
    AdmmConfig a;
    a.rho = cfg.get_double("admm.rho", a.rho);
    a.tol = cfg.get_double("admm.tol", a.tol);
    a.maxit = cfg.get_size("admm.maxit", a.maxit);
    a.residual_balancing = cfg.get_bool("admm.residual_balancing", a.residual_balancing);
    return a;
}

}  // namespace composa
