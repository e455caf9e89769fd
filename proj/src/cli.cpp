#include "lipkernel/cli.hpp"

#include "lipkernel/attacks.hpp"
#include "lipkernel/certify.hpp"
#include "lipkernel/dataset.hpp"
#include "lipkernel/model_io.hpp"
#include "lipkernel/parallel.hpp"
#include "lipkernel/scatter.hpp"
#include "lipkernel/spectrum.hpp"
#include "lipkernel/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>

namespace lipkernel {

namespace {

using json = nlohmann::ordered_json;

json to_json(const Vector& v) {
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path);
    f << text;
}

Norm attack_norm(const std::string& s) {
    const Norm n = norm_from_string(s);
    if (n == Norm::L1) throw ConfigError("attack norm must be l2 or linf, got " + s);
    return n;
}

struct Global {
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out;
};

struct GenOpts {
    std::string kind = "blobs";
    int n_per_class = 50;
    int classes = 2;
    int dim = 2;
    double spread = 0.1;
    std::string csv;
};

struct KernelOpts {
    std::string kernel = "gaussian";
    double sigma = 0.0;  // 0 selects the median bandwidth
    double period = 1.0;
};

KernelSpec make_kernel(const KernelOpts& o, const Points& X, json& res) {
    const int d = int(X.cols());
    if (o.kernel == "inverse") {
        res["kernel"] = {{"name", "inverse"}};
        return KernelSpec::inverse(d);
    }
    double sigma = o.sigma;
    if (sigma <= 0.0) sigma = median_bandwidth(X);
    if (!(sigma > 0.0)) throw ConfigError("cannot choose a bandwidth: data points coincide");
    res["kernel"] = {{"name", o.kernel}, {"sigma", sigma}, {"period", o.period}};
    if (o.kernel == "gaussian") return KernelSpec::gaussian(sigma, d);
    if (o.kernel == "periodic") return KernelSpec::periodic(o.period, sigma, d);
    throw ConfigError("unknown kernel " + o.kernel);
}

struct TrainOpts {
    std::string data, model_out;
    KernelOpts kernel;
    double L = 1.0;
    double reg_weight = 1e-4;
    std::string loss = "auto";
    std::string constraint_mode = "holistic";
    std::string witness_mode = "greedy";
    int outer_iters = 50;
    int initial_witnesses = 15;
    double penalty_init = 1.0, penalty_growth = 10.0, penalty_max = 1e6;
    int inner_max_iter = 300;
    double inner_tol = 1e-9;
    int n_landmarks = 0;
    std::string lip_norm = "l2";
    int search_restarts = 10;
};

struct AttackOpts {
    std::string data, model;
    std::string norm = "l2";
    std::vector<double> deltas{0.0};
    int steps = 100;
    double step_size = 0.0;
    std::string objective = "cw";
    int target = -1;
    bool random_init = false;
    bool per_example = false;
};

struct CertifyOpts {
    std::string suite = "all";
    int instances = 0;  // 0: 200 per gap suite, 500 for equivalence
};

struct ScatterOpts {
    std::string data;
    int n_per_class = 50;
    int models = 100;
    int anchors = 100;
    double delta = 0.1;
    std::string norm = "l2";
    int steps = 100;
    int lip_restarts = 10;
    std::string csv;
};

struct SpectrumOpts {
    std::string kernel = "periodic";
    double v = std::numbers::pi;
    double sigma2 = 0.5;
    int J = 50;
    int quad = 1024;
    double c4 = 2.0, c6 = 1.6, eps = 0.1;
    int jmax = 50;
    int n_mc = 1000;
    int top = 3;
    int dim = 2;
    int cap = 8;
    std::string csv;
};

struct LipOpts {
    std::string model;
    int witnesses = 200;
    int restarts = 10;
    std::string norm = "l2";
};

int cmd_gen(const GenOpts& o, const Global& g, json& res) {
    if (o.csv.empty()) throw ConfigError("gen-data needs --csv");
    const Dataset ds = gen_synthetic(synthetic_kind_from_string(o.kind), o.n_per_class, o.classes, o.dim, g.seed,
                                     o.spread);
    write_text(o.csv, to_csv(ds));
    res["rows"] = ds.size();
    res["dim"] = ds.dim();
    res["classes"] = ds.num_classes();
    res["csv"] = o.csv;
    return 0;
}

int cmd_train(const TrainOpts& o, const Global& g, json& res) {
    if (o.data.empty() || o.model_out.empty()) throw ConfigError("train needs --data and --model-out");
    Dataset ds = load_csv(o.data);
    const KernelSpec k = make_kernel(o.kernel, ds.X, res);
    to_input_domain(ds.X, k);
    TrainConfig cfg;
    cfg.L = o.L;
    cfg.reg_weight = o.reg_weight;
    const bool binary = ds.binary();
    cfg.loss = o.loss == "auto" ? (binary ? LossKind::Hinge : LossKind::CrammerSinger) : loss_kind_from_string(o.loss);
    cfg.constraint_mode = constraint_mode_from_string(o.constraint_mode);
    cfg.witness_mode = witness_mode_from_string(o.witness_mode);
    cfg.outer_iters = o.outer_iters;
    cfg.initial_witnesses = o.initial_witnesses;
    cfg.penalty_init = o.penalty_init;
    cfg.penalty_growth = o.penalty_growth;
    cfg.penalty_max = o.penalty_max;
    cfg.inner_max_iter = o.inner_max_iter;
    cfg.inner_tol = o.inner_tol;
    cfg.n_landmarks = o.n_landmarks;
    cfg.lip_norm = attack_norm(o.lip_norm);
    cfg.search_restarts = o.search_restarts;
    cfg.seed = g.seed;
    cfg.domain = input_domain(k);

    SavedModel saved;
    saved.binary = binary;
    saved.feature_min = ds.feature_min;
    saved.feature_max = ds.feature_max;
    TrainReport rep;
    if (binary) {
        auto r = train_binary(ds.X, ds.labels, k, cfg);
        saved.models = {r.model};
        rep = std::move(r.report);
    } else {
        auto r = train_multiclass(ds.X, ds.labels, k, cfg);
        saved.models = r.models;
        rep = std::move(r.report);
    }
    save_model(saved, o.model_out);

    res["model"] = o.model_out;
    res["loss"] = to_string(cfg.loss);
    res["landmarks"] = saved.models[0].size();
    res["clean_accuracy"] = rep.train_accuracy;
    res["mean_loss"] = rep.mean_loss;
    res["converged"] = rep.converged;
    res["outer_iterations"] = rep.outer_iterations;
    res["final_constraint"] = rep.final_constraint;
    res["constraint_budget"] = rep.constraint_budget;
    res["solver"] = rep.solver;
    json hist = json::array();
    for (const auto& h : rep.history)
        hist.push_back({{"lip_estimate", h.lip_estimate},
                        {"constraint_value", h.constraint_value},
                        {"objective", h.objective},
                        {"witnesses", h.n_witness},
                        {"penalty", h.penalty},
                        {"inner_iters", h.inner_iters},
                        {"penalty_capped", h.penalty_capped},
                        {"rescaled", h.rescaled}});
    res["history"] = hist;
    return rep.converged ? 0 : 1;
}

Dataset load_for_model(const std::string& path, const SavedModel& m) {
    const Dataset raw = load_csv(path);
    if (raw.dim() != m.feature_min.size()) throw ConfigError("data dimension does not match the model");
    // undo the file's own scaling, then apply the model's constants
    Points X = raw.X;
    for (Index j = 0; j < X.cols(); ++j)
        X.col(j) = X.col(j) * (raw.feature_max[j] - raw.feature_min[j]) + Vector::Constant(X.rows(), raw.feature_min[j]);
    Dataset ds = raw;
    ds.X = normalise(X, m.feature_min, m.feature_max);
    ds.feature_min = m.feature_min;
    ds.feature_max = m.feature_max;
    to_input_domain(ds.X, m.models[0].kernel);
    return ds;
}

std::unique_ptr<Scorer> make_scorer(const SavedModel& m) {
    if (m.binary) return std::make_unique<KernelScorer>(m.models[0]);
    return std::make_unique<KernelScorer>(m.models);
}

int cmd_attack(const AttackOpts& o, const Global& g, json& res) {
    if (o.data.empty() || o.model.empty()) throw ConfigError("attack needs --data and --model");
    const SavedModel m = load_model(o.model);
    const Dataset ds = load_for_model(o.data, m);
    const auto scorer = make_scorer(m);
    AttackConfig cfg;
    cfg.norm = attack_norm(o.norm);
    cfg.steps = o.steps;
    cfg.step_size = o.step_size;
    cfg.objective = attack_objective_from_string(o.objective);
    if (o.target >= 0) cfg.targeted = scorer->class_index(o.target);
    cfg.random_init = o.random_init;
    cfg.seed = g.seed;
    cfg.input_box = input_domain(m.models[0].kernel);
    const AttackReport rep = robust_accuracy(*scorer, ds.X, ds.labels, cfg, o.deltas);
    res["clean_accuracy"] = rep.clean_accuracy;
    res["deltas"] = rep.deltas;
    res["robust_accuracy"] = rep.robust_accuracy;
    res["step_rule"] = o.step_size > 0 ? "fixed" : "2*delta/steps";
    if (o.per_example) {
        json per = json::array();
        for (size_t k = 0; k < rep.deltas.size(); ++k) {
            json rows = json::array();
            for (const auto& e : rep.outcomes[k])
                rows.push_back({{"clean_margin", e.clean_margin},
                                {"objective", e.objective},
                                {"correct", e.correct},
                                {"adversarial", to_json(e.adversarial)}});
            per.push_back({{"delta", rep.deltas[k]}, {"examples", rows}});
        }
        res["per_example"] = per;
    }
    return 0;
}

int cmd_certify(const CertifyOpts& o, const Global& g, json& res) {
    std::vector<SuiteKind> kinds;
    if (o.suite == "all")
        kinds = {SuiteKind::Convex, SuiteKind::Nonconvex, SuiteKind::Dirac, SuiteKind::Equivalence};
    else if (o.suite == "convex")
        kinds = {SuiteKind::Convex};
    else if (o.suite == "nonconvex")
        kinds = {SuiteKind::Nonconvex};
    else if (o.suite == "dirac")
        kinds = {SuiteKind::Dirac};
    else if (o.suite == "equivalence")
        kinds = {SuiteKind::Equivalence};
    else
        throw ConfigError("unknown suite " + o.suite);
    bool ok = true;
    json suites = json::array();
    for (size_t i = 0; i < kinds.size(); ++i) {
        const int n = o.instances > 0 ? o.instances : (kinds[i] == SuiteKind::Equivalence ? 500 : 200);
        const SuiteResult r = run_suite(kinds[i], n, derive_seed(g.seed, i));
        ok = ok && r.passed();
        suites.push_back({{"suite", to_string(r.kind)},
                          {"instances", r.instances},
                          {"failures", r.failures},
                          {"worst", r.worst},
                          {"tolerance", r.tolerance},
                          {"passed", r.passed()}});
    }
    res["suites"] = suites;
    res["all_passed"] = ok;
    return ok ? 0 : 1;
}

int cmd_scatter(const ScatterOpts& o, const Global& g, json& res) {
    Dataset ds = o.data.empty() ? gen_synthetic(SyntheticKind::TwoMoons, o.n_per_class, 2, 2, derive_seed(g.seed, 1))
                                : load_csv(o.data);
    if (!ds.binary()) throw ConfigError("scatter needs binary -1/+1 labels");
    const auto models = random_scatter_models(ds.X, o.models, o.anchors, derive_seed(g.seed, 2));
    ScatterOptions so;
    so.pgd_steps = o.steps;
    so.lip_restarts = o.lip_restarts;
    const auto pts =
        adversarial_vs_regularised(models, ds.X, ds.labels, o.delta, attack_norm(o.norm), derive_seed(g.seed, 3), so);
    int below = 0;
    for (const auto& p : pts) below += p.adversarial_risk <= p.regularised_risk + 1e-6;
    if (!o.csv.empty()) write_text(o.csv, scatter_csv(pts));
    res["models"] = pts.size();
    res["bandwidth"] = models.empty() ? 0.0 : models[0].kernel.base.sigma;
    res["fraction_below_diagonal"] = pts.empty() ? 1.0 : double(below) / double(pts.size());
    res["pearson"] = pearson(pts);
    json rows = json::array();
    for (const auto& p : pts)
        rows.push_back({{"model_id", p.model_id},
                        {"adversarial_risk", p.adversarial_risk},
                        {"regularised_risk", p.regularised_risk}});
    res["points"] = rows;
    if (!o.csv.empty()) res["csv"] = o.csv;
    return 0;
}

int cmd_spectrum(const SpectrumOpts& o, const Global& g, json& res) {
    if (!(o.sigma2 > 0.0)) throw ConfigError("sigma2 must be positive");
    const double sigma = std::sqrt(o.sigma2);
    res["kernel"] = o.kernel;
    if (o.kernel == "periodic") {
        const BaseKernel b = BaseKernel::periodic(o.v, sigma);
        const SpectrumReport s = periodic_eigenvalues(b, std::max(o.J, o.jmax), o.quad);
        const DecayCheck dc = decay_condition(s, o.c4, o.c6, o.jmax);
        const AssumptionConstants a = assumption_constants(b, o.eps, o.c4, o.c6);
        res["eigenvalues"] = to_json(s.eigenvalues);
        res["trace_sum"] = s.trace_sum;
        res["quad_points"] = s.quad_points;
        res["decay_condition"] = {{"c4", o.c4},         {"c6", o.c6},
                                  {"jmax", o.jmax},     {"holds", dc.holds},
                                  {"failing", dc.failing}, {"resolved_up_to", dc.resolved},
                                  {"lhs", to_json(dc.lhs)}, {"rhs", to_json(dc.rhs)}};
        res["assumption_constants"] = {{"eps", a.eps}, {"n_eps", a.n_eps}, {"N_eps", a.N_eps},
                                       {"M_eps", a.M_eps}, {"Q_eps", a.Q_eps},
                                       {"sample_size_delta_0.05", theoretical_sample_size(a, 0.05)}};
        if (!o.csv.empty()) write_text(o.csv, spectrum_csv(s));
    } else if (o.kernel == "gaussian") {
        const Vector cf = gaussian_eigenvalues_closed_form(sigma, o.top - 1);
        const Vector mc = gaussian_empirical_eigenvalues(sigma, o.n_mc, o.top, g.seed);
        res["closed_form"] = to_json(cf);
        res["monte_carlo"] = to_json(mc);
        res["max_relative_error"] = ((mc - cf).cwiseAbs().array() / cf.array()).maxCoeff();
        if (!o.csv.empty()) write_text(o.csv, spectrum_csv(cf));
    } else if (o.kernel == "inverse") {
        const MultiIndexSpectrum s = inverse_kernel_spectrum(o.dim, o.cap);
        res["dim"] = o.dim;
        res["degree_cap"] = o.cap;
        res["eigenvalues"] = to_json(s.eigenvalues);
        if (!o.csv.empty()) write_text(o.csv, spectrum_csv(s.eigenvalues));
    } else {
        throw ConfigError("spectrum kernel must be periodic, gaussian or inverse");
    }
    if (!o.csv.empty()) res["csv"] = o.csv;
    return 0;
}

json estimate_json(const LipschitzEstimate& e) {
    return {{"method", to_string(e.method)}, {"lipschitz", e.lipschitz()}, {"value", e.value},
            {"squared", e.squared},          {"witnesses", e.n_witness}};
}

json single_model_bounds(const Model& f, const WitnessSet& wit, const LipOpts& o, std::uint64_t seed) {
    json a = json::array();
    if (f.kernel.is_product()) {
        a.push_back(estimate_json(gtg_bound(f, nullptr, GtgMode::ExactDiag)));
        a.push_back(estimate_json(gtg_bound(f, &wit, GtgMode::CoordNystrom)));
    } else {
        a.push_back({{"method", to_string(LipMethod::ExactDiag)}, {"skipped", "needs a product kernel"}});
        a.push_back({{"method", to_string(LipMethod::CoordNystrom)}, {"skipped", "needs a product kernel"}});
    }
    a.push_back(estimate_json(holistic_bound(f, wit)));
    a.push_back(estimate_json(rkhs_norm_bound(f)));
    const Norm dual = dual_norm(attack_norm(o.norm));
    a.push_back(estimate_json(empirical_lipschitz(f, input_domain(f.kernel), o.restarts, seed, dual)));
    return a;
}

int cmd_lipschitz(const LipOpts& o, const Global& g, json& res) {
    if (o.model.empty()) throw ConfigError("lipschitz needs --model");
    if (o.witnesses < 1) throw ConfigError("--witnesses must be >= 1");
    const SavedModel m = load_model(o.model);
    const Box domain = input_domain(m.models[0].kernel);
    const WitnessSet wit = WitnessSet::random(domain, o.witnesses, derive_seed(g.seed, 1));
    res["attack_norm"] = o.norm;
    json per = json::array();
    for (size_t c = 0; c < m.models.size(); ++c)
        per.push_back({{"model", c}, {"estimates", single_model_bounds(m.models[c], wit, o, derive_seed(g.seed, 2 + c))}});
    res["per_model"] = per;
    if (!m.binary) {
        AlternationOptions ao;
        ao.seed = derive_seed(g.seed, 99);
        const Norm dual = dual_norm(attack_norm(o.norm));
        json mc = json::array();
        mc.push_back(estimate_json(dual == Norm::L2 ? multiclass_l2_bound(m.models, wit, ao)
                                                    : multiclass_linf_bound(m.models, wit, ao)));
        mc.push_back(estimate_json(
            empirical_lipschitz_multiclass(m.models, domain, o.restarts, derive_seed(g.seed, 100), dual)));
        res["multiclass"] = mc;
    }
    return 0;
}

std::string exact(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CLI::Option* add_num(CLI::App* a, const std::string& name, double& v, const std::string& desc = "") {
    return a->add_option(name, v, desc)->default_str(exact(v));
}

std::string toml_quote(const std::string& s) {
    std::string q = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') q += '\\';
        q += c;
    }
    return q + "\"";
}

json config_echo(const CLI::App& app, const CLI::App* sub) {
    json cfg = json::object();
    auto add = [&](const CLI::App& a) {
        for (const CLI::Option* opt : a.get_options()) {
            const std::string name = opt->get_single_name();
            if (name.empty() || name == "help" || name == "config") continue;
            if (opt->count() > 0) {
                const auto& r = opt->results();
                if (r.empty())
                    cfg[name] = "true";
                else if (r.size() == 1)
                    cfg[name] = r[0];
                else
                    cfg[name] = r;
            } else {
                cfg[name] = opt->get_default_str();
            }
        }
    };
    add(app);
    if (sub) add(*sub);
    return cfg;
}

// TOML accepted back by --config: globals first, then a section for the subcommand.
std::string config_toml(const CLI::App& app, const CLI::App& sub) {
    std::string text;
    auto emit = [&](const CLI::App& a) {
        const json cfg = config_echo(a, nullptr);
        for (auto it = cfg.begin(); it != cfg.end(); ++it) {
            if (it.key() == "out") continue;
            std::string val;
            if (it->is_array()) {
                val = "[";
                for (size_t i = 0; i < it->size(); ++i) val += (i ? ", " : "") + toml_quote((*it)[i].get<std::string>());
                val += "]";
            } else {
                val = toml_quote(it->get<std::string>());
            }
            text += it.key() + " = " + val + "\n";
        }
    };
    emit(app);
    text += "\n[" + sub.get_name() + "]\n";
    emit(sub);
    return text;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Lipschitz-constrained kernel machines: training, attacks, certification and spectra", "lipkernel"};
    app.option_defaults()->always_capture_default();
    app.set_config("--config", "", "TOML config file; keys mirror the long flags");
    app.require_subcommand(1, 1);
    app.fallthrough();
    Global g;
    app.add_option("--seed", g.seed, "Base random seed");
    app.add_option("--threads", g.threads, "Worker thread cap (0 = hardware)")->check(CLI::NonNegativeNumber);
    app.add_option("--out", g.out, "Report path (default: stdout)");

    GenOpts gen;
    auto* s_gen = app.add_subcommand("gen-data", "Generate a synthetic dataset CSV");
    s_gen->add_option("--kind", gen.kind, "blobs or moons");
    s_gen->add_option("--n-per-class", gen.n_per_class);
    s_gen->add_option("--classes", gen.classes);
    s_gen->add_option("--dim", gen.dim);
    add_num(s_gen, "--spread", gen.spread);
    s_gen->add_option("--csv", gen.csv, "Output CSV path")->required();

    TrainOpts tr;
    auto* s_train = app.add_subcommand("train", "Train a Lipschitz-constrained kernel classifier");
    s_train->add_option("--data", tr.data, "Training CSV")->required();
    s_train->add_option("--model-out", tr.model_out, "Model output path")->required();
    s_train->add_option("--kernel", tr.kernel.kernel, "gaussian, periodic or inverse");
    add_num(s_train, "--sigma", tr.kernel.sigma, "Bandwidth (0 = median pairwise distance)");
    add_num(s_train, "--period", tr.kernel.period);
    add_num(s_train, "--L,--lipschitz", tr.L, "Lipschitz budget");
    add_num(s_train, "--reg-weight", tr.reg_weight);
    s_train->add_option("--loss", tr.loss, "auto, hinge or crammer-singer");
    s_train->add_option("--constraint-mode", tr.constraint_mode, "brute-force, holistic or coord");
    s_train->add_option("--witness-mode", tr.witness_mode, "greedy or random");
    s_train->add_option("--outer-iters", tr.outer_iters);
    s_train->add_option("--initial-witnesses", tr.initial_witnesses);
    add_num(s_train, "--penalty-init", tr.penalty_init);
    add_num(s_train, "--penalty-growth", tr.penalty_growth);
    add_num(s_train, "--penalty-max", tr.penalty_max);
    s_train->add_option("--inner-max-iter", tr.inner_max_iter);
    add_num(s_train, "--inner-tol", tr.inner_tol);
    s_train->add_option("--n-landmarks", tr.n_landmarks, "0 = min(l, 256)");
    s_train->add_option("--lip-norm", tr.lip_norm, "Attack norm the budget defends: l2 or linf");
    s_train->add_option("--search-restarts", tr.search_restarts);

    AttackOpts at;
    auto* s_attack = app.add_subcommand("attack", "PGD robust accuracy of a saved model");
    s_attack->add_option("--data", at.data, "Test CSV")->required();
    s_attack->add_option("--model", at.model, "Model file")->required();
    s_attack->add_option("--norm", at.norm, "l2 or linf");
    s_attack->add_option("--deltas,--delta", at.deltas, "Nondecreasing perturbation radii")->delimiter(',');
    s_attack->add_option("--steps", at.steps);
    add_num(s_attack, "--step-size", at.step_size, "0 = 2*delta/steps");
    s_attack->add_option("--objective", at.objective, "cw or ce");
    s_attack->add_option("--target", at.target, "Target label for targeted attacks (-1 = untargeted)");
    s_attack->add_flag("--random-init", at.random_init)->default_str("false");
    s_attack->add_flag("--per-example", at.per_example)->default_str("false");

    CertifyOpts ce;
    auto* s_cert = app.add_subcommand("certify", "Run the robust-risk oracle suites");
    s_cert->add_option("--suite", ce.suite, "all, convex, nonconvex, dirac or equivalence");
    s_cert->add_option("--instances", ce.instances, "0 = 200 per gap suite, 500 for equivalence");

    ScatterOpts sc;
    auto* s_scatter = app.add_subcommand("scatter", "Adversarial vs regularised risk of random kernel models");
    s_scatter->add_option("--data", sc.data, "Binary CSV (default: generated two moons)");
    s_scatter->add_option("--n-per-class", sc.n_per_class);
    s_scatter->add_option("--models", sc.models);
    s_scatter->add_option("--anchors", sc.anchors);
    add_num(s_scatter, "--delta", sc.delta);
    s_scatter->add_option("--norm", sc.norm);
    s_scatter->add_option("--steps", sc.steps);
    s_scatter->add_option("--lip-restarts", sc.lip_restarts);
    s_scatter->add_option("--csv", sc.csv, "Scatter CSV output");

    SpectrumOpts sp;
    auto* s_spec = app.add_subcommand("spectrum", "Mercer spectra and decay checks");
    s_spec->add_option("--kernel", sp.kernel, "periodic, gaussian or inverse");
    add_num(s_spec, "--v", sp.v, "Period");
    add_num(s_spec, "--sigma2", sp.sigma2);
    s_spec->add_option("--J", sp.J);
    s_spec->add_option("--quad", sp.quad);
    add_num(s_spec, "--c4", sp.c4);
    add_num(s_spec, "--c6", sp.c6);
    add_num(s_spec, "--eps", sp.eps);
    s_spec->add_option("--jmax", sp.jmax);
    s_spec->add_option("--n-mc", sp.n_mc);
    s_spec->add_option("--top", sp.top);
    s_spec->add_option("--dim", sp.dim);
    s_spec->add_option("--cap", sp.cap);
    s_spec->add_option("--csv", sp.csv);

    LipOpts lo;
    auto* s_lip = app.add_subcommand("lipschitz", "All Lipschitz estimates of a saved model");
    s_lip->add_option("--model", lo.model, "Model file")->required();
    s_lip->add_option("--witnesses", lo.witnesses);
    s_lip->add_option("--restarts", lo.restarts);
    s_lip->add_option("--norm", lo.norm, "Attack norm (l2 or linf); estimates use its dual");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    const CLI::App* sub = app.get_subcommands().front();
    json report;
    report["artifact"] = "lipkernel";
    report["version"] = LIPKERNEL_VERSION;
    report["command"] = sub->get_name();
    report["seed"] = g.seed;
    report["config"] = config_echo(app, sub);
    report["config_toml"] = config_toml(app, *sub);
    json res = json::object();
    int code = 0;
    try {
        set_thread_cap(g.threads);
        if (sub == s_gen)
            code = cmd_gen(gen, g, res);
        else if (sub == s_train)
            code = cmd_train(tr, g, res);
        else if (sub == s_attack)
            code = cmd_attack(at, g, res);
        else if (sub == s_cert)
            code = cmd_certify(ce, g, res);
        else if (sub == s_scatter)
            code = cmd_scatter(sc, g, res);
        else if (sub == s_spec)
            code = cmd_spectrum(sp, g, res);
        else
            code = cmd_lipschitz(lo, g, res);
        report["status"] = code == 0 ? "ok" : "not-converged";
    } catch (const std::invalid_argument& e) {  // ConfigError and argument checks
        err << "error: " << e.what() << "\n";
        report["status"] = "config-error";
        report["error"] = e.what();
        code = 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        report["status"] = "failed";
        report["error"] = e.what();
        code = 1;
    }
    report["exit_code"] = code;
    report["results"] = res;
    const std::string text = report.dump(2) + "\n";
    try {
        if (g.out.empty())
            out << text;
        else
            write_text(g.out, text);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return code;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"lipkernel"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(int(argv.size()), argv.data(), out, err);
}

}  // namespace lipkernel
