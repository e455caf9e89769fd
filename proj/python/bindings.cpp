#include "lipkernel/attacks.hpp"
#include "lipkernel/certify.hpp"
#include "lipkernel/cli.hpp"
#include "lipkernel/dataset.hpp"
#include "lipkernel/lipbound.hpp"
#include "lipkernel/parallel.hpp"
#include "lipkernel/spectrum.hpp"
#include "lipkernel/trainer.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace lipkernel;

namespace {

py::dict report_dict(const TrainReport& r) {
    py::list hist;
    for (const auto& h : r.history) {
        py::dict d;
        d["lip_estimate"] = h.lip_estimate;
        d["constraint_value"] = h.constraint_value;
        d["objective"] = h.objective;
        d["witnesses"] = h.n_witness;
        d["penalty"] = h.penalty;
        d["inner_iters"] = h.inner_iters;
        d["penalty_capped"] = h.penalty_capped;
        d["rescaled"] = h.rescaled;
        hist.append(d);
    }
    py::dict d;
    d["converged"] = r.converged;
    d["outer_iterations"] = r.outer_iterations;
    d["train_accuracy"] = r.train_accuracy;
    d["mean_loss"] = r.mean_loss;
    d["final_constraint"] = r.final_constraint;
    d["constraint_budget"] = r.constraint_budget;
    d["history"] = hist;
    return d;
}

py::tuple train(const Points& X, const std::vector<int>& labels, const KernelSpec& k, double L,
                const std::string& constraint_mode, const std::string& witness_mode, int outer_iters,
                double reg_weight, const std::string& lip_norm, std::uint64_t seed) {
    TrainConfig cfg;
    cfg.L = L;
    cfg.constraint_mode = constraint_mode_from_string(constraint_mode);
    cfg.witness_mode = witness_mode_from_string(witness_mode);
    cfg.outer_iters = outer_iters;
    cfg.reg_weight = reg_weight;
    cfg.lip_norm = norm_from_string(lip_norm);
    cfg.seed = seed;
    cfg.domain = input_domain(k);
    const bool binary = std::all_of(labels.begin(), labels.end(), [](int y) { return y == 1 || y == -1; });
    if (binary) {
        py::gil_scoped_release release;
        auto r = train_binary(X, labels, k, cfg);
        py::gil_scoped_acquire acquire;
        return py::make_tuple(MultiModel{r.model}, report_dict(r.report));
    }
    cfg.loss = LossKind::CrammerSinger;
    py::gil_scoped_release release;
    auto r = train_multiclass(X, labels, k, cfg);
    py::gil_scoped_acquire acquire;
    return py::make_tuple(r.models, report_dict(r.report));
}

py::dict robust(const MultiModel& models, const Points& X, const std::vector<int>& labels,
                const std::vector<double>& deltas, const std::string& norm, int steps, std::uint64_t seed) {
    if (models.empty()) throw ConfigError("robust_accuracy needs at least one model");
    std::unique_ptr<Scorer> s = models.size() == 1 ? std::make_unique<KernelScorer>(models[0])
                                                   : std::make_unique<KernelScorer>(models);
    AttackConfig cfg;
    cfg.norm = norm_from_string(norm);
    cfg.steps = steps;
    cfg.seed = seed;
    cfg.input_box = input_domain(models[0].kernel);
    AttackReport r;
    {
        py::gil_scoped_release release;
        r = robust_accuracy(*s, X, labels, cfg, deltas);
    }
    py::dict d;
    d["deltas"] = r.deltas;
    d["robust_accuracy"] = r.robust_accuracy;
    d["clean_accuracy"] = r.clean_accuracy;
    return d;
}

py::dict lipschitz_bounds(const Model& f, int n_witnesses, int restarts, std::uint64_t seed) {
    const Box domain = input_domain(f.kernel);
    const WitnessSet wit = WitnessSet::random(domain, n_witnesses, derive_seed(seed, 1));
    py::dict d;
    if (f.kernel.is_product()) {
        d["exact_diag"] = gtg_bound(f, nullptr, GtgMode::ExactDiag).lipschitz();
        d["coord_nystrom"] = gtg_bound(f, &wit, GtgMode::CoordNystrom).lipschitz();
    } else {
        d["exact_diag"] = py::none();
        d["coord_nystrom"] = py::none();
    }
    d["holistic_nystrom"] = holistic_bound(f, wit).lipschitz();
    d["rkhs_norm"] = rkhs_norm_bound(f).lipschitz();
    d["empirical_search"] = empirical_lipschitz(f, domain, restarts, derive_seed(seed, 2)).lipschitz();
    return d;
}

}  // namespace

PYBIND11_MODULE(_lipkernel, m) {
    m.doc() = "Lipschitz-constrained kernel machines";
    m.attr("__version__") = LIPKERNEL_VERSION;

    py::class_<KernelSpec>(m, "KernelSpec")
        .def_static("gaussian", &KernelSpec::gaussian, py::arg("sigma"), py::arg("dim"))
        .def_static("periodic", &KernelSpec::periodic, py::arg("period"), py::arg("sigma"), py::arg("dim"))
        .def_static("inverse", &KernelSpec::inverse, py::arg("dim"))
        .def_readonly("dim", &KernelSpec::dim)
        .def("is_product", &KernelSpec::is_product)
        .def("__call__", [](const KernelSpec& k, const Vector& x, const Vector& y) { return eval_kernel(k, x, y); })
        .def("gram", [](const KernelSpec& k, const Points& A, const Points& B) { return gram(k, A, B); });

    py::class_<Model>(m, "Model")
        .def(py::init([](const KernelSpec& k, const Points& anchors, const Vector& coeffs, bool mean_scale) {
                 Model f{k, anchors, coeffs, mean_scale};
                 f.validate();
                 return f;
             }),
             py::arg("kernel"), py::arg("anchors"), py::arg("coeffs"), py::arg("mean_scale") = true)
        .def_readonly("kernel", &Model::kernel)
        .def_readonly("anchors", &Model::anchors)
        .def_readonly("coeffs", &Model::coeffs)
        .def_readonly("mean_scale", &Model::mean_scale)
        .def("value", [](const Model& f, const Vector& x) { return f.value(x); })
        .def("gradient", [](const Model& f, const Vector& x) { return f.gradient(x); });

    m.def("median_bandwidth", &median_bandwidth, py::arg("X"));
    m.def("set_thread_cap", &set_thread_cap, py::arg("threads"));
    m.def(
        "make_dataset",
        [](const std::string& kind, int n_per_class, int classes, int dim, std::uint64_t seed, double spread) {
            const Dataset ds = gen_synthetic(synthetic_kind_from_string(kind), n_per_class, classes, dim, seed, spread);
            return py::make_tuple(ds.X, ds.labels);
        },
        py::arg("kind") = "blobs", py::arg("n_per_class") = 50, py::arg("classes") = 2, py::arg("dim") = 2,
        py::arg("seed") = 0, py::arg("spread") = 0.1);
    m.def("train", &train, py::arg("X"), py::arg("labels"), py::arg("kernel"), py::arg("L") = 1.0,
          py::arg("constraint_mode") = "holistic", py::arg("witness_mode") = "greedy", py::arg("outer_iters") = 50,
          py::arg("reg_weight") = 1e-4, py::arg("lip_norm") = "l2", py::arg("seed") = 0,
          "Train on labels in {-1,+1} (hinge) or 0..C-1 (Crammer-Singer). Returns (models, report).");
    m.def("robust_accuracy", &robust, py::arg("models"), py::arg("X"), py::arg("labels"), py::arg("deltas"),
          py::arg("norm") = "l2", py::arg("steps") = 100, py::arg("seed") = 0);
    m.def("lipschitz_bounds", &lipschitz_bounds, py::arg("model"), py::arg("n_witnesses") = 200,
          py::arg("restarts") = 10, py::arg("seed") = 0);
    m.def(
        "periodic_eigenvalues",
        [](double period, double sigma, int J, int quad) { return periodic_eigenvalues(BaseKernel::periodic(period, sigma), J, quad).eigenvalues; },
        py::arg("period"), py::arg("sigma"), py::arg("J"), py::arg("quad_points") = 1024);
    m.def(
        "decay_condition",
        [](double period, double sigma, double c4, double c6, int jmax) {
            const DecayCheck dc =
                decay_condition(periodic_eigenvalues(BaseKernel::periodic(period, sigma), jmax), c4, c6, jmax);
            py::dict d;
            d["holds"] = dc.holds;
            d["failing"] = dc.failing;
            d["resolved"] = dc.resolved;
            d["lhs"] = dc.lhs;
            d["rhs"] = dc.rhs;
            return d;
        },
        py::arg("period"), py::arg("sigma"), py::arg("c4"), py::arg("c6"), py::arg("jmax"));
    m.def("gaussian_eigenvalues", &gaussian_eigenvalues_closed_form, py::arg("sigma"), py::arg("J"));
    m.def(
        "run_suite",
        [](const std::string& kind, int instances, std::uint64_t seed) {
            SuiteKind k;
            if (kind == "convex")
                k = SuiteKind::Convex;
            else if (kind == "nonconvex")
                k = SuiteKind::Nonconvex;
            else if (kind == "dirac")
                k = SuiteKind::Dirac;
            else if (kind == "equivalence")
                k = SuiteKind::Equivalence;
            else
                throw ConfigError("unknown suite " + kind);
            const SuiteResult r = run_suite(k, instances, seed);
            py::dict d;
            d["instances"] = r.instances;
            d["failures"] = r.failures;
            d["worst"] = r.worst;
            d["tolerance"] = r.tolerance;
            d["passed"] = r.passed();
            return d;
        },
        py::arg("kind"), py::arg("instances") = 200, py::arg("seed") = 0);
    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = run_cli(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run the command-line driver in process. Returns (exit_code, stdout, stderr).");
}
