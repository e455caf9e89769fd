#pragma once

#include "lipkernel/ascent.hpp"
#include "lipkernel/model.hpp"

#include <string>
#include <vector>

namespace lipkernel {

enum class WitnessOrigin { Random, Greedy };

struct WitnessSet {
    Points points;
    std::vector<WitnessOrigin> origin;

    static WitnessSet random(const Box& box, Index n, std::uint64_t seed);
    Index size() const { return points.rows(); }
    void add(const Vector& x, WitnessOrigin o);
};

enum class LipMethod { ExactDiag, CoordNystrom, HolisticNystrom, RkhsNorm, EmpiricalSearch };
std::string to_string(LipMethod m);

struct LipschitzEstimate {
    double value = 0.0;    // bound on sup ||grad f|| or, if squared, on its square
    bool squared = false;
    LipMethod method = LipMethod::EmpiricalSearch;
    Index n_witness = 0;
    Vector argmax;         // EmpiricalSearch only

    double lipschitz() const;  // value on the unsquared scale
};

enum class GtgMode { ExactDiag, CoordNystrom };

// (G^T G)_{ij} = scale^2 * gamma^T Q_ij gamma for a product-kernel model.
struct GradientGramForms {
    int dim = 0;
    std::vector<Matrix> blocks;  // row-major d x d grid of l x l matrices

    const Matrix& block(int i, int j) const { return blocks[static_cast<size_t>(i * dim + j)]; }
    Matrix evaluate(const Vector& gamma, double scale) const;
    // Gradient of u^T (G^T G) u with respect to gamma.
    Vector danskin_gradient(const Vector& gamma, const Vector& u, double scale) const;
};

GradientGramForms gradient_gram_forms(const KernelSpec& k, const Points& anchors, GtgMode mode,
                                      const Points* witnesses = nullptr);

// G~ = scale * [B_0 gamma, ..., B_{d-1} gamma], B_j = (K_W^+)^{1/2} D_j with
// D_j[s,a] = d/dy_j k(x^a, w^s).
struct HolisticForms {
    std::vector<Matrix> blocks;  // d matrices, n x l

    Matrix evaluate(const Vector& gamma, double scale) const;
};

HolisticForms holistic_forms(const KernelSpec& k, const Points& anchors, const Points& witnesses);

Matrix build_gtg_product(const Model& model, const WitnessSet* witnesses, GtgMode mode);
Matrix build_gtilde_holistic(const Model& model, const WitnessSet& witnesses);

// Squared bounds lambda_max(P_G) and lambda_max(G~^T G~).
LipschitzEstimate gtg_bound(const Model& model, const WitnessSet* witnesses, GtgMode mode);
LipschitzEstimate holistic_bound(const Model& model, const WitnessSet& witnesses);

// Constant g with ||k(x,.) - k(y,.)||_H <= g ||x - y||.
double rkhs_slope(const KernelSpec& k);
double rkhs_norm(const Model& model);
LipschitzEstimate rkhs_norm_bound(const Model& model);

// Multi-start projected ascent of ||grad f||_dual over the box. Optional
// candidate points are screened and the best `restarts` of them added as starts.
LipschitzEstimate empirical_lipschitz(const Model& model, const Box& box, int restarts, std::uint64_t seed,
                                      Norm dual = Norm::L2, const Points* candidates = nullptr);
// Vector-valued version: L2 uses the spectral norm of the Jacobian, L1 the
// largest per-class L1 gradient norm.
LipschitzEstimate empirical_lipschitz_multiclass(const MultiModel& models, const Box& box, int restarts,
                                                 std::uint64_t seed, Norm dual = Norm::L2,
                                                 const Points* candidates = nullptr);

struct AlternationOptions {
    int max_rounds = 500;
    double tol = 1e-8;
    int restarts = 5;
    std::uint64_t seed = 0;
};

struct BilinearOptimum {
    double value = 0.0;
    Vector u;  // length d
    Vector v;  // length n
    int rounds = 0;
    bool converged = false;
};

// sup over unit u, v of sum_c (v^T G_c u)^2.
BilinearOptimum l2_alternation(const std::vector<Matrix>& G, const AlternationOptions& opts = {});
// sup over ||v||_2 <= 1, ||u||_inf <= 1 of u^T G^T v.
BilinearOptimum linf_alternation(const Matrix& G, const AlternationOptions& opts = {});

LipschitzEstimate multiclass_l2_bound(const MultiModel& models, const WitnessSet& witnesses,
                                      const AlternationOptions& opts = {});
LipschitzEstimate multiclass_linf_bound(const MultiModel& models, const WitnessSet& witnesses,
                                        const AlternationOptions& opts = {});

}  // namespace lipkernel
