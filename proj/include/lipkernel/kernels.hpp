#pragma once

#include "lipkernel/types.hpp"

#include <string>

namespace lipkernel {

enum class BaseKind { Gaussian, Periodic };

// One-dimensional translation-invariant base kernel k0(s, t).
//   Gaussian: exp(-(s-t)^2 / (2 sigma^2))
//   Periodic: exp(-sin^2(pi (s-t) / v) / (2 sigma^2))
struct BaseKernel {
    BaseKind kind = BaseKind::Gaussian;
    double sigma = 1.0;
    double period = 0.0;

    static BaseKernel gaussian(double sigma);
    static BaseKernel periodic(double period, double sigma);

    double value(double s, double t) const;
    double d_t(double s, double t) const;   // d/dt k0
    double d_tt(double s, double t) const;  // d^2/dt^2 k0
    double d_st(double s, double t) const;  // d^2/(ds dt) k0
    void validate() const;
    std::string name() const;
};

enum class KernelKind { Product, Inverse };

// Product kernel prod_j k0(x_j, y_j) on R^d, or the inverse kernel
// 1/(2 - x.y) on the closed unit ball.
struct KernelSpec {
    KernelKind kind = KernelKind::Product;
    BaseKernel base;
    int dim = 1;

    static KernelSpec product(const BaseKernel& base, int d);
    static KernelSpec gaussian(double sigma, int d);
    static KernelSpec periodic(double period, double sigma, int d);
    static KernelSpec inverse(int d);

    bool is_product() const { return kind == KernelKind::Product; }
    void validate() const;
    std::string name() const;
};

double eval_kernel(const KernelSpec& k, const VecRef& x, const VecRef& y);
// Gradient of k(x, .) at y.
Vector grad_y_kernel(const KernelSpec& k, const VecRef& x, const VecRef& y);
// Hessian of k(x, .) at y.
Matrix hess_y_kernel(const KernelSpec& k, const VecRef& x, const VecRef& y);
double mixed_second_base(const BaseKernel& base, double s, double t);

// Kernel matrix K[i,j] = k(A_i, B_j).
Matrix gram(const KernelSpec& k, const Points& A, const Points& B);
// Symmetric kernel matrix of A with itself; exactly symmetric.
Matrix gram(const KernelSpec& k, const Points& A);
Matrix base_gram(const BaseKernel& base, const Vector& s, const Vector& t);

// Lower median of pairwise Euclidean distances.
double median_bandwidth(const Points& X);

// Scales each row by 1/max(1, ||x||). Returns the number of rows changed and
// logs a warning if any were.
int project_to_unit_ball(Points& X);

// Region inputs live in after normalisation: the unit cube, or for the inverse
// kernel the cube [0, 1/sqrt(d)]^d, which lies inside the unit ball.
Box input_domain(const KernelSpec& k);
// Maps features normalised to [0, 1] into input_domain(k).
void to_input_domain(Points& X, const KernelSpec& k);

}  // namespace lipkernel
