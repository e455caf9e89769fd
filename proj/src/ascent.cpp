#include <algorithm>
#include "lipkernel/ascent.hpp"

#include <cmath>
#include <limits>

namespace lipkernel {

AscentResult ascend_from(const Objective& obj, const Box& box, const Vector& x0, const AscentOptions& opts) {
    Vector x = box.clamp(x0);
    Vector g(x.size());
    double v = obj(x, &g);
    double t = 0.1 * std::max(box.diameter(), 1e-12) / std::max(g.norm(), 1e-300);
    Vector gn(x.size());
    for (int it = 0; it < opts.max_iter; ++it) {
        if (!(g.norm() > 0.0) || !std::isfinite(v)) break;
        bool accepted = false;
        Vector xn;
        double vn = v;
        for (int b = 0; b < opts.max_backtracks; ++b) {
            xn = box.clamp(x + t * g);
            vn = obj(xn, &gn);
            if (vn >= v + opts.armijo_c * g.dot(xn - x) && std::isfinite(vn)) {
                accepted = true;
                break;
            }
            t *= opts.shrink;
        }
        if (!accepted) break;
        const double moved = (xn - x).norm();
        const double gain = vn - v;
        x = xn;
        v = vn;
        g = gn;
        t *= 2.0;
        if (moved <= opts.step_tol * (1.0 + x.norm()) || gain <= 1e-15 * std::max(1.0, std::abs(v))) break;
    }
    return {v, x};
}

AscentResult maximize_in_box(const Objective& obj, const Box& box, std::uint64_t seed, const AscentOptions& opts,
                             const Points* candidates) {
    box.validate();
    Rng rng(seed);
    AscentResult best{-std::numeric_limits<double>::infinity(), box.clamp(0.5 * (box.lo + box.hi))};
    const int restarts = std::max(1, opts.restarts);
    for (int r = 0; r < restarts; ++r) {
        Vector x0 = box.sample(rng);
        AscentResult res = ascend_from(obj, box, x0, opts);
        if (res.value > best.value) best = res;
    }
    if (candidates && candidates->rows() > 0) {
        if (candidates->cols() != box.dim()) throw std::invalid_argument("candidate dimension does not match the box");
        std::vector<std::pair<double, Index>> screened;
        for (Index i = 0; i < candidates->rows(); ++i)
            screened.emplace_back(obj(box.clamp(candidates->row(i).transpose()), nullptr), i);
        const Index top = std::min<Index>(restarts, Index(screened.size()));
        std::partial_sort(screened.begin(), screened.begin() + top, screened.end(),
                          [](const auto& a, const auto& b) { return a.first > b.first; });
        for (Index k = 0; k < top; ++k) {
            AscentResult res = ascend_from(obj, box, box.clamp(candidates->row(screened[k].second).transpose()), opts);
            if (res.value > best.value) best = res;
        }
    }
    return best;
}

}  // namespace lipkernel
