#pragma once

#include "lipkernel/certify.hpp"
#include "lipkernel/model.hpp"

#include <vector>

namespace lipkernel {

struct ScatterOptions {
    int pgd_steps = 100;
    int lip_restarts = 10;
    bool random_init = false;
};

// Per binary model (labels -1/+1, hinge loss, inputs in [0,1]^d):
//   adversarial_risk = mean hinge at the PGD (C&W objective) adversary,
//   regularised_risk = mean clean hinge + delta * empirical Lipschitz
//                      constant in the dual of the attack norm.
std::vector<ScatterPoint> adversarial_vs_regularised(const std::vector<Model>& models, const Points& X,
                                                     const std::vector<int>& labels, double delta, Norm norm,
                                                     std::uint64_t seed, const ScatterOptions& opts = {});

// Coefficients uniform in [-coeff_range, coeff_range], anchors drawn from the
// rows of X, Gaussian bandwidth set to the median pairwise distance of X,
// mean scaling.
std::vector<Model> random_scatter_models(const Points& X, int n_models, int n_anchors, std::uint64_t seed,
                                         double coeff_range = 2.0);

}  // namespace lipkernel
