#include "lipkernel/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace lipkernel {

namespace {

void check_square_symmetric(const Matrix& M, const char* who) {
    if (M.rows() != M.cols()) throw std::invalid_argument(std::string(who) + ": matrix not square");
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
        throw std::invalid_argument(std::string(who) + ": matrix not symmetric");
}

Eigen::SelfAdjointEigenSolver<Matrix> eig(const Matrix& K) {
    Matrix S = 0.5 * (K + K.transpose());
    return Eigen::SelfAdjointEigenSolver<Matrix>(S);
}

Matrix pinv_power(const Matrix& K, double rel_threshold, double power) {
    if (K.rows() != K.cols()) throw std::invalid_argument("psd_pinv: matrix not square");
    if (K.rows() == 0) return Matrix(0, 0);
    auto es = eig(K);
    const Vector& ev = es.eigenvalues();
    const double top = ev.maxCoeff();
    Vector inv = Vector::Zero(ev.size());
    if (top > 0.0) {
        const double cut = rel_threshold * top;
        for (Index i = 0; i < ev.size(); ++i)
            if (ev[i] > cut) inv[i] = std::pow(ev[i], -power);
    }
    const Matrix& V = es.eigenvectors();
    Matrix R = V * inv.asDiagonal() * V.transpose();
    return 0.5 * (R + R.transpose());
}

}  // namespace

EigenEstimate lambda_max(const Matrix& M, double tol, int max_iter) {
    check_square_symmetric(M, "lambda_max");
    EigenEstimate out;
    const Index n = M.rows();
    if (n == 0) {
        out.converged = true;
        return out;
    }
    const double mnorm = M.cwiseAbs().maxCoeff();
    if (mnorm == 0.0) {
        out.vector = Vector::Constant(n, 1.0 / std::sqrt(double(n)));
        out.converged = true;
        return out;
    }

    Vector v = Vector::Constant(n, 1.0 / std::sqrt(double(n)));
    bool restarted = false;
    double lambda = 0.0, prev = 0.0, prev_delta = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        Vector w = M * v;
        double wn = w.norm();
        if (wn <= 1e-300 || wn <= 1e-14 * mnorm * (restarted ? 0.0 : 1.0)) {
            if (restarted) {
                out.value = 0.0;
                out.vector = v;
                out.iterations = it;
                out.converged = true;
                return out;
            }
            Rng rng(0x5eed);
            std::normal_distribution<double> g;
            for (Index i = 0; i < n; ++i) v[i] = g(rng);
            v.normalize();
            restarted = true;
            prev = prev_delta = 0.0;
            continue;
        }
        lambda = v.dot(w);
        v = w / wn;
        out.iterations = it;
        const double delta = std::abs(lambda - prev);
        if (it > 2) {
            // geometric tail estimate of the remaining error
            double q = prev_delta > 0.0 ? delta / prev_delta : 0.0;
            double est = (q < 1.0) ? delta * q / (1.0 - q) : delta;
            if (delta <= tol * std::abs(lambda) && est <= tol * std::abs(lambda)) {
                out.converged = true;
                break;
            }
        }
        prev_delta = delta;
        prev = lambda;
    }
    out.value = lambda;
    out.vector = v;
    return out;
}

Matrix psd_pinv(const Matrix& K, double rel_threshold) { return pinv_power(K, rel_threshold, 1.0); }

Matrix psd_pinv_sqrt(const Matrix& K, double rel_threshold) { return pinv_power(K, rel_threshold, 0.5); }

Vector top_eigenvalues(const Matrix& M, int k, double tol, int max_iter) {
    check_square_symmetric(M, "top_eigenvalues");
    const Index n = M.rows();
    if (k <= 0 || k > n) throw std::invalid_argument("top_eigenvalues: bad k");
    if (n <= 200) {
        auto es = eig(M);
        Vector ev = es.eigenvalues().reverse();
        return ev.head(k);
    }
    const Index p = std::min<Index>(n, k + 8);
    Rng rng(0x70b);
    std::normal_distribution<double> g;
    Matrix Q(n, p);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p; ++j) Q(i, j) = g(rng);
    Vector prev = Vector::Zero(k);
    Vector vals = Vector::Zero(k);
    for (int it = 0; it < max_iter; ++it) {
        Matrix Z = M * Q;
        Eigen::HouseholderQR<Matrix> qr(Z);
        Q = qr.householderQ() * Matrix::Identity(n, p);
        Matrix H = Q.transpose() * M * Q;
        auto es = eig(H);
        Vector ev = es.eigenvalues().reverse();
        vals = ev.head(k);
        Q = Q * es.eigenvectors().rowwise().reverse();
        if (it > 0 && ((vals - prev).cwiseAbs().array() <= tol * vals.cwiseAbs().array().max(1e-300)).all())
            break;
        prev = vals;
    }
    return vals;
}

}  // namespace lipkernel
