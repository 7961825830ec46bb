#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "composa/baselines.hpp"
#include "composa/config.hpp"
#include "composa/error.hpp"
#include "composa/report.hpp"
#include "composa/solver.hpp"
#include "composa/subgradient.hpp"

namespace py = pybind11;
using namespace composa;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Vector to_vector(const DoubleArray& a) {
    if (a.ndim() != 1) throw DimensionError("expected a 1-D array");
    const auto r = a.unchecked<1>();
    Vector v(static_cast<Index>(r.shape(0)));
    for (py::ssize_t i = 0; i < r.shape(0); ++i) v[static_cast<Index>(i)] = r(i);
    return v;
}

py::array_t<double> to_array(const Vector& v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    auto w = out.mutable_unchecked<1>();
    for (py::ssize_t i = 0; i < w.shape(0); ++i) w(i) = v[static_cast<Index>(i)];
    return out;
}

SparseMatrix to_sparse(const DoubleArray& a) {
    if (a.ndim() != 2) throw DimensionError("expected a 2-D array");
    const auto r = a.unchecked<2>();
    std::vector<Triplet> t;
    for (py::ssize_t i = 0; i < r.shape(0); ++i) {
        for (py::ssize_t j = 0; j < r.shape(1); ++j) {
            if (r(i, j) != 0.0) t.push_back({static_cast<Index>(i), static_cast<Index>(j), r(i, j)});
        }
    }
    return SparseMatrix::from_triplets(t, static_cast<Index>(r.shape(0)), static_cast<Index>(r.shape(1)));
}

py::dict report_to_dict(const SolveReport& r) {
    py::module_ json = py::module_::import("json");
    py::dict d = json.attr("loads")(to_json(r).dump());
    d["x_final"] = to_array(r.x_final);
    return d;
}

using ProblemPtr = std::shared_ptr<ProblemSpec>;

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "GSOM solver for min f(x) + beta ||Cx||_1";

    // Translators run newest first, so the base class goes first.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<NonQuadraticSmoothPart>(m, "NonQuadraticSmoothPart", PyExc_TypeError);

    py::class_<ProblemSpec, ProblemPtr>(m, "Problem")
        .def_property_readonly("dim", &ProblemSpec::dim)
        .def_property_readonly("beta", &ProblemSpec::beta)
        .def_property_readonly("kind", &ProblemSpec::kind)
        .def_property_readonly("rows", [](const ProblemSpec& p) { return p.penalty().rows(); })
        .def("cost", [](const ProblemSpec& p, const DoubleArray& x) { return eval_cost(p, to_vector(x)); })
        .def("gradient", [](const ProblemSpec& p, const DoubleArray& x) { return to_array(p.gradient(to_vector(x))); });

    m.def(
        "prox_problem",
        [](const DoubleArray& xhat, double alpha, std::optional<DoubleArray> c) -> ProblemPtr {
            Vector xh = to_vector(xhat);
            SparseMatrix cm = c ? to_sparse(*c) : SparseMatrix::identity(xh.size());
            return std::make_shared<ProblemSpec>(build_prox_instance(std::move(xh), std::move(cm), alpha));
        },
        py::arg("xhat"), py::arg("alpha"), py::arg("C") = py::none(),
        "0.5 ||x - xhat||^2 + alpha ||C x||_1; C defaults to the identity.");
    m.def(
        "quadratic_tv_problem",
        [](std::size_t grid_n, double beta, double forcing) -> ProblemPtr {
            return std::make_shared<ProblemSpec>(
                build_quadratic_tv(grid_n, [forcing](double, double) { return forcing; }, beta));
        },
        py::arg("grid_n"), py::arg("beta"), py::arg("forcing") = 380.0);
    m.def(
        "graph_trend_problem",
        [](const std::vector<std::pair<Index, Index>>& edges, const DoubleArray& y, double beta1, double beta2)
            -> ProblemPtr {
            return std::make_shared<ProblemSpec>(build_graph_trend(edges, to_vector(y), beta1, beta2));
        },
        py::arg("edges"), py::arg("y"), py::arg("beta1") = 1.0, py::arg("beta2") = 0.1);
    m.def(
        "cauchy_problem",
        [](const DoubleArray& f_obs, double a, double beta, std::size_t grid_n) -> ProblemPtr {
            return std::make_shared<ProblemSpec>(build_cauchy_denoise(to_vector(f_obs), a, beta, grid_n));
        },
        py::arg("f_obs"), py::arg("a"), py::arg("beta"), py::arg("grid_n"));
    m.def(
        "problem_from_config",
        [](const std::string& path, const std::vector<std::string>& overrides) {
            Config cfg = Config::parse_file(path);
            for (const auto& o : overrides) cfg.apply_override(o);
            ProblemInstance inst = problem_from_config(cfg);
            return py::make_tuple(std::const_pointer_cast<ProblemSpec>(inst.spec), to_array(inst.x0));
        },
        py::arg("path"), py::arg("overrides") = std::vector<std::string>{},
        "Returns (problem, x0) built from a config file.");

    m.def(
        "solve",
        [](const ProblemPtr& p, std::optional<DoubleArray> x0, double gamma, std::size_t max_iter, double tol_residual,
           const std::string& linsolve, const std::string& pinning) {
            SolverConfig cfg;
            cfg.gamma = gamma;
            cfg.max_iter = max_iter;
            cfg.tol_residual = tol_residual;
            cfg.linsolve.kind = parse_linear_solver_kind(linsolve);
            cfg.linesearch.pinning = parse_interior_pinning(pinning);
            cfg.validate();
            const Vector x = x0 ? to_vector(*x0) : Vector(p->dim(), 0.0);
            SolveReport r;
            {
                py::gil_scoped_release release;
                r = gsom_solve(*p, x, cfg);
            }
            return report_to_dict(r);
        },
        py::arg("problem"), py::arg("x0") = py::none(), py::arg("gamma") = 1000.0, py::arg("max_iter") = 500,
        py::arg("tol_residual") = 1e-6, py::arg("linsolve") = "auto", py::arg("pinning") = "fallback",
        "Runs the GSOM solver and returns the report as a dict (x_final as an array).");
    m.def(
        "admm",
        [](const ProblemPtr& p, double rho, double tol, std::size_t maxit) {
            AdmmConfig cfg;
            cfg.rho = rho;
            cfg.tol = tol;
            cfg.maxit = maxit;
            AdmmResult r;
            {
                py::gil_scoped_release release;
                r = admm_solve(*p, cfg);
            }
            return report_to_dict(r.report);
        },
        py::arg("problem"), py::arg("rho") = 1.0, py::arg("tol") = 1e-8, py::arg("maxit") = 10000);
    m.def(
        "soft_threshold", [](const DoubleArray& v, double t) { return to_array(soft_threshold(to_vector(v), t)); },
        py::arg("v"), py::arg("t"));
    m.def(
        "min_norm_subgradient",
        [](const ProblemPtr& p, const DoubleArray& x) {
            const Vector xv = to_vector(x);
            const SubgradientState s =
                min_norm_subgradient(*p, xv, classify_indices(p->penalty(), xv, default_tol_act(xv)));
            return py::make_tuple(to_array(s.residual), to_array(s.xi));
        },
        py::arg("problem"), py::arg("x"), "Returns (residual, xi).");
}
