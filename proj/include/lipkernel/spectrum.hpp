#pragma once

#include "lipkernel/kernels.hpp"

#include <string>
#include <vector>

namespace lipkernel {

struct SpectrumReport {
    std::string kernel;
    Vector eigenvalues;    // lambda_0 .. lambda_J
    Vector multiplicity;   // 1 for j = 0, 2 otherwise
    int quad_points = 0;
    double trace_sum = 0.0;  // sum of multiplicity * lambda
};

// lambda_j = (1/v) int_{-v/2}^{v/2} kappa(t) cos(j w0 t) dt, w0 = 2 pi / v,
// by composite Simpson with quad_points (even, >= 1024) intervals.
SpectrumReport periodic_eigenvalues(const BaseKernel& base, int J, int quad_points = 1024);
// Same eigenvalue from the sine eigenfunction evaluated at x = v/(4j).
double periodic_eigenvalue_sin(const BaseKernel& base, int j, int quad_points = 1024);

struct DecayCheck {
    bool holds = true;
    double c4 = 0.0, c6 = 0.0;
    Vector lhs;  // lambda_j (1+j)^2 max(1,j^2) (1 + [j>=1])
    Vector rhs;  // c6 c4^{-j}
    std::vector<int> failing;
    int resolved = -1;  // largest j above the quadrature noise floor
};

DecayCheck decay_condition(const SpectrumReport& s, double c4, double c6, int jmax);

struct AssumptionConstants {
    double eps = 0.0, c4 = 0.0, c6 = 0.0;
    double n_eps = 0.0;
    int N_eps = 0;
    double M_eps = 0.0;
    double Q_eps = 0.0;
};

AssumptionConstants assumption_constants(const BaseKernel& base, double eps, double c4, double c6);
// max(N, 5/(3 eps^2) N Q^2 log(2N/delta)).
double theoretical_sample_size(const AssumptionConstants& a, double delta);

// Mercer eigenvalues c0^{-j-1/2}, c0 = (3+sqrt5)/2, for the Gaussian kernel
// under N(0, sigma^2) with matching bandwidth.
Vector gaussian_eigenvalues_closed_form(double sigma, int J);
// Top-k eigenvalues of K/n for n samples from N(0, sigma^2).
Vector gaussian_empirical_eigenvalues(double sigma, int n, int k, std::uint64_t seed);

using MultiIndex = std::vector<int>;
// All multi-indices with |alpha| <= cap in graded lexicographic order.
std::vector<MultiIndex> graded_lex_indices(int d, int cap);
// Moment E[x^alpha] under the uniform distribution on the unit ball.
double ball_moment(const MultiIndex& alpha);

struct MultiIndexSpectrum {
    std::vector<MultiIndex> indices;
    Matrix M;
    Vector eigenvalues;  // descending
};

MultiIndexSpectrum inverse_kernel_spectrum(int d, int degree_cap);

struct NystromCurve {
    std::vector<int> n_list;
    Vector median_error;
    Vector median_rel_error;
    int inversions = 0;
    double theoretical_n = 0.0;  // periodic kernels only, 0 otherwise
};

// Median |lambda_max(coord Nystrom) - lambda_max(exact)| over random models
// with nested witness sets drawn uniformly from the domain.
NystromCurve nystrom_error_curve(const BaseKernel& base, int d, const std::vector<int>& n_list, int trials,
                                 std::uint64_t seed, const Box& domain, int anchors = 20);

std::string spectrum_csv(const SpectrumReport& s);
std::string spectrum_csv(const Vector& eigenvalues);
std::string nystrom_csv(const NystromCurve& c);

}  // namespace lipkernel
