#include "lipkernel/scatter.hpp"

#include "lipkernel/attacks.hpp"
#include "lipkernel/lipbound.hpp"
#include "lipkernel/parallel.hpp"

#include <algorithm>

namespace lipkernel {

std::vector<ScatterPoint> adversarial_vs_regularised(const std::vector<Model>& models, const Points& X,
                                                     const std::vector<int>& labels, double delta, Norm norm,
                                                     std::uint64_t seed, const ScatterOptions& opts) {
    if (X.rows() == 0) throw ConfigError("scatter needs test data");
    if (Index(labels.size()) != X.rows()) throw ConfigError("label count mismatch");
    for (int v : labels)
        if (v != 1 && v != -1) throw ConfigError("scatter labels must be -1 or +1");
    const Box box = Box::unit(X.cols());
    for (Index i = 0; i < X.rows(); ++i)
        if (!box.contains(X.row(i).transpose(), 1e-12)) throw ConfigError("scatter data must lie in [0,1]^d");
    AttackConfig base;
    base.norm = norm;
    base.delta = delta;
    base.steps = opts.pgd_steps;
    base.random_init = opts.random_init;
    base.validate(X.cols());

    std::vector<ScatterPoint> pts(models.size());
    parallel_for(Index(models.size()), [&](Index id) {
        const Model& f = models[size_t(id)];
        if (f.dim() != X.cols()) throw ConfigError("model and data dimensions differ");
        const KernelScorer s(f);
        const std::uint64_t mseed = derive_seed(seed, std::uint64_t(id));
        double clean = 0.0, adv = 0.0;
        for (Index i = 0; i < X.rows(); ++i) {
            const Vector x = X.row(i).transpose();
            const int y = labels[size_t(i)];
            AttackConfig cfg = base;
            cfg.seed = derive_seed(mseed, std::uint64_t(i));
            const AttackResult r = pgd_attack(s, x, s.class_index(y), cfg);
            const double h0 = std::max(0.0, 1.0 - y * f.value(x));
            clean += h0;
            adv += std::max(h0, std::max(0.0, 1.0 - y * f.value(r.adversarial)));
        }
        const double n = double(X.rows());
        const double lip =
            delta > 0.0 ? empirical_lipschitz(f, box, opts.lip_restarts, derive_seed(mseed, ~0ull), dual_norm(norm)).value
                        : 0.0;
        pts[size_t(id)] = {int(id), adv / n, clean / n + delta * lip};
    });
    return pts;
}

std::vector<Model> random_scatter_models(const Points& X, int n_models, int n_anchors, std::uint64_t seed,
                                         double coeff_range) {
    if (X.rows() < 2) throw ConfigError("random models need at least two data points");
    if (n_models < 0 || n_anchors < 1) throw ConfigError("invalid model or anchor count");
    const KernelSpec k = KernelSpec::gaussian(median_bandwidth(X), int(X.cols()));
    std::vector<Model> out;
    for (int m = 0; m < n_models; ++m) {
        Rng rng(derive_seed(seed, std::uint64_t(m)));
        std::uniform_int_distribution<Index> pick(0, X.rows() - 1);
        std::uniform_real_distribution<double> coef(-coeff_range, coeff_range);
        Model f;
        f.kernel = k;
        f.anchors.resize(n_anchors, X.cols());
        f.coeffs.resize(n_anchors);
        for (int a = 0; a < n_anchors; ++a) {
            f.anchors.row(a) = X.row(pick(rng));
            f.coeffs[a] = coef(rng);
        }
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace lipkernel
