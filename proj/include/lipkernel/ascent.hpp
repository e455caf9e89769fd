#pragma once

#include "lipkernel/types.hpp"

#include <functional>

namespace lipkernel {

// Value and (super)gradient of an objective to be maximised.
using Objective = std::function<double(const Vector& x, Vector* grad)>;

struct AscentOptions {
    int restarts = 10;
    int max_iter = 200;
    double armijo_c = 1e-4;
    double shrink = 0.5;
    int max_backtracks = 40;
    double step_tol = 1e-10;
};

struct AscentResult {
    double value = 0.0;
    Vector argmax;
};

// Projected gradient ascent with Armijo backtracking from `restarts` seeded
// uniform starting points in the box. With `candidates`, the `restarts` rows
// of highest objective (after clamping to the box) are used as additional
// starts. Returns the best local maximiser.
AscentResult maximize_in_box(const Objective& obj, const Box& box, std::uint64_t seed,
                             const AscentOptions& opts = {}, const Points* candidates = nullptr);

// Single local ascent from x0.
AscentResult ascend_from(const Objective& obj, const Box& box, const Vector& x0, const AscentOptions& opts = {});

}  // namespace lipkernel
