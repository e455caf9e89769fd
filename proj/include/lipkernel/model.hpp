#pragma once

#include "lipkernel/kernels.hpp"

#include <vector>

namespace lipkernel {

// f(x) = s * sum_a coeffs[a] k(anchors_a, x), s = 1/l if mean_scale else 1.
struct Model {
    KernelSpec kernel;
    Points anchors;
    Vector coeffs;
    bool mean_scale = true;

    Index size() const { return anchors.rows(); }
    int dim() const { return kernel.dim; }
    double scale() const { return mean_scale && size() > 0 ? 1.0 / double(size()) : 1.0; }

    double value(const VecRef& x) const;
    Vector gradient(const VecRef& x) const;
    Matrix hessian(const VecRef& x) const;
    void validate() const;
};

// One model per class, all on the same kernel.
using MultiModel = std::vector<Model>;

}  // namespace lipkernel
