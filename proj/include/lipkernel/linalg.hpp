#pragma once

#include "lipkernel/types.hpp"

namespace lipkernel {

struct EigenEstimate {
    double value = 0.0;
    Vector vector;
    int iterations = 0;
    bool converged = false;
};

// Largest eigenvalue of a symmetric PSD matrix by power iteration from the
// normalised all-ones vector. Falls back to a seeded random start if the
// iterate collapses. Non-convergence is reported through `converged`.
EigenEstimate lambda_max(const Matrix& M, double tol = 1e-12, int max_iter = 20000);

// Pseudo-inverse and its square root for symmetric PSD K. Eigenvalues below
// rel_threshold * lambda_max(K) are dropped.
Matrix psd_pinv(const Matrix& K, double rel_threshold = 1e-10);
Matrix psd_pinv_sqrt(const Matrix& K, double rel_threshold = 1e-10);

// k largest eigenvalues (descending) of a symmetric PSD matrix by subspace
// iteration with Rayleigh-Ritz.
Vector top_eigenvalues(const Matrix& M, int k, double tol = 1e-12, int max_iter = 1000);

}  // namespace lipkernel
