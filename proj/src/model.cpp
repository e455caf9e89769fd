#include "lipkernel/model.hpp"

namespace lipkernel {

void Model::validate() const {
    kernel.validate();
    if (anchors.cols() != kernel.dim) throw std::invalid_argument("model: anchor dimension mismatch");
    if (coeffs.size() != anchors.rows()) throw std::invalid_argument("model: coefficient count mismatch");
    if (anchors.rows() == 0) throw std::invalid_argument("model: no anchors");
    if (!coeffs.allFinite() || !anchors.allFinite()) throw std::invalid_argument("model: non-finite parameters");
}

double Model::value(const VecRef& x) const {
    double s = 0.0;
    for (Index a = 0; a < size(); ++a)
        if (coeffs[a] != 0.0) s += coeffs[a] * eval_kernel(kernel, anchors.row(a).transpose(), x);
    return scale() * s;
}

Vector Model::gradient(const VecRef& x) const {
    Vector g = Vector::Zero(dim());
    for (Index a = 0; a < size(); ++a)
        if (coeffs[a] != 0.0) g += coeffs[a] * grad_y_kernel(kernel, anchors.row(a).transpose(), x);
    return scale() * g;
}

Matrix Model::hessian(const VecRef& x) const {
    Matrix H = Matrix::Zero(dim(), dim());
    for (Index a = 0; a < size(); ++a)
        if (coeffs[a] != 0.0) H += coeffs[a] * hess_y_kernel(kernel, anchors.row(a).transpose(), x);
    return scale() * H;
}

}  // namespace lipkernel
