#pragma once

#include "lipkernel/types.hpp"

#include <string>
#include <vector>

namespace lipkernel {

// Loss values on a strictly increasing 1-D grid, a discrete distribution mu
// supported on grid points, a transport budget r and cost c(x,y) = cost_scale |x - y|.
struct DiscreteProblem {
    Vector grid;
    Vector f;
    std::vector<Index> support;  // grid indices
    Vector weights;              // same length as support, sums to 1
    double r = 0.0;
    double cost_scale = 1.0;

    void validate() const;
    double expected_loss() const;
};

struct GapReport {
    double robust = 0.0;
    double regularised = 0.0;
    double delta = 0.0;
    double delta_bound = 0.0;
    double lip = 0.0;
    double lip_envelope = 0.0;
    double envelope_gap_integral = 0.0;
    double rho = 0.0;
    double expected = 0.0;
};

struct DualSolution {
    double value = 0.0;
    double lambda = 0.0;
};

// Largest |f_i - f_j| / (cost_scale |x_i - x_j|) over grid pairs.
double lipschitz_on_grid(const Vector& grid, const Vector& f, double cost_scale = 1.0);
// Lower convex hull of (grid, f) evaluated at every grid point.
Vector convex_envelope_1d(const Vector& grid, const Vector& f);

// inf_{lambda >= 0} lambda r + sum_i mu_i max_y (f(y) - lambda c(x_i, y)).
DualSolution robust_risk_dual(const DiscreteProblem& p);
// sup over couplings with transport cost <= r of E f, solved exactly.
double robust_risk_primal(const DiscreteProblem& p, int max_support = 8, int max_grid = 64);

GapReport gap_delta(const DiscreteProblem& p);

// Random instance families.
DiscreteProblem random_problem(Rng& rng, int max_support = 5, int max_grid = 64);
// Convex f whose steepest linear piece reaches the grid boundary and holds
// enough mu-mass to spend the whole budget r.
DiscreteProblem random_convex_problem(Rng& rng, int max_support = 5, int max_grid = 64);
// Same tail structure with nonnegative bumps added in the interior.
DiscreteProblem random_nonconvex_problem(Rng& rng, int max_support = 5, int max_grid = 64);
// Nonnegative tents vanishing at both ends (convex envelope 0), mu a Dirac at the argmax.
DiscreteProblem dirac_tent_problem(Rng& rng, int max_grid = 64);

enum class SuiteKind { Convex, Nonconvex, Dirac, Equivalence };
std::string to_string(SuiteKind k);

// Randomised oracle suite. `worst` is the largest law violation seen:
//   Convex:      max |robust - (E f + r Lip)|
//   Nonconvex:   max(-delta, delta - delta_bound)
//   Dirac:       max |delta - r Lip|
//   Equivalence: max |dual - primal|
// Every suite also checks robust <= regularised + 1e-9.
struct SuiteResult {
    SuiteKind kind = SuiteKind::Convex;
    int instances = 0;
    int failures = 0;
    double worst = 0.0;
    double tolerance = 0.0;
    bool passed() const { return failures == 0; }
};

SuiteResult run_suite(SuiteKind kind, int instances, std::uint64_t seed);

struct ScatterPoint {
    int model_id = 0;
    double adversarial_risk = 0.0;
    double regularised_risk = 0.0;
};

// Header model_id,adversarial_risk,regularised_risk; LF endings; %.17g.
std::string scatter_csv(const std::vector<ScatterPoint>& pts);
double pearson(const std::vector<ScatterPoint>& pts);

}  // namespace lipkernel
