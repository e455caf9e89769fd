#include "lipkernel/kernels.hpp"

#include "lipkernel/log.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lipkernel {

namespace {

constexpr double kBallTol = 1e-12;

void check_dims(const KernelSpec& k, const VecRef& x, const VecRef& y) {
    if (x.size() != k.dim || y.size() != k.dim)
        throw std::invalid_argument("kernel: dimension mismatch (expected " + std::to_string(k.dim) + ")");
    if (k.kind == KernelKind::Inverse) {
        if (x.squaredNorm() > (1 + kBallTol) * (1 + kBallTol) || y.squaredNorm() > (1 + kBallTol) * (1 + kBallTol))
            throw std::invalid_argument("inverse kernel: input outside the unit ball");
    }
}

}  // namespace

BaseKernel BaseKernel::gaussian(double sigma) {
    BaseKernel b{BaseKind::Gaussian, sigma, 0.0};
    b.validate();
    return b;
}

BaseKernel BaseKernel::periodic(double period, double sigma) {
    BaseKernel b{BaseKind::Periodic, sigma, period};
    b.validate();
    return b;
}

void BaseKernel::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("base kernel: sigma must be positive");
    if (kind == BaseKind::Periodic && (!(period > 0.0) || !std::isfinite(period)))
        throw ConfigError("periodic kernel: period must be positive");
}

std::string BaseKernel::name() const { return kind == BaseKind::Gaussian ? "gaussian" : "periodic"; }

double BaseKernel::value(double s, double t) const {
    const double r = s - t;
    if (kind == BaseKind::Gaussian) return std::exp(-r * r / (2 * sigma * sigma));
    const double sn = std::sin(std::numbers::pi * r / period);
    return std::exp(-sn * sn / (2 * sigma * sigma));
}

double BaseKernel::d_t(double s, double t) const {
    const double r = s - t;
    const double s2 = sigma * sigma;
    if (kind == BaseKind::Gaussian) return (r / s2) * std::exp(-r * r / (2 * s2));
    const double a = std::numbers::pi / period;
    const double sn = std::sin(a * r);
    const double k0 = std::exp(-sn * sn / (2 * s2));
    return k0 * (a / (2 * s2)) * std::sin(2 * a * r);
}

double BaseKernel::d_tt(double s, double t) const {
    const double r = s - t;
    const double s2 = sigma * sigma;
    if (kind == BaseKind::Gaussian) return (r * r / (s2 * s2) - 1.0 / s2) * std::exp(-r * r / (2 * s2));
    const double a = std::numbers::pi / period;
    const double sn = std::sin(a * r);
    const double k0 = std::exp(-sn * sn / (2 * s2));
    const double c = a / (2 * s2);
    const double s2r = std::sin(2 * a * r);
    return k0 * (c * c * s2r * s2r - 2 * a * c * std::cos(2 * a * r));
}

double BaseKernel::d_st(double s, double t) const { return -d_tt(s, t); }

KernelSpec KernelSpec::product(const BaseKernel& base, int d) {
    KernelSpec k{KernelKind::Product, base, d};
    k.validate();
    return k;
}

KernelSpec KernelSpec::gaussian(double sigma, int d) { return product(BaseKernel::gaussian(sigma), d); }

KernelSpec KernelSpec::periodic(double period, double sigma, int d) {
    return product(BaseKernel::periodic(period, sigma), d);
}

KernelSpec KernelSpec::inverse(int d) {
    KernelSpec k{KernelKind::Inverse, BaseKernel{}, d};
    k.validate();
    return k;
}

void KernelSpec::validate() const {
    if (dim < 1) throw ConfigError("kernel: dimension must be >= 1");
    if (kind == KernelKind::Product) base.validate();
}

std::string KernelSpec::name() const { return kind == KernelKind::Inverse ? "inverse" : base.name(); }

double eval_kernel(const KernelSpec& k, const VecRef& x, const VecRef& y) {
    check_dims(k, x, y);
    if (k.kind == KernelKind::Inverse) return 1.0 / (2.0 - x.dot(y));
    double p = 1.0;
    for (Index j = 0; j < x.size(); ++j) p *= k.base.value(x[j], y[j]);
    return p;
}

Vector grad_y_kernel(const KernelSpec& k, const VecRef& x, const VecRef& y) {
    check_dims(k, x, y);
    const Index d = x.size();
    if (k.kind == KernelKind::Inverse) {
        const double den = 2.0 - x.dot(y);
        return x / (den * den);
    }
    Vector g(d);
    if (k.base.kind == BaseKind::Gaussian) {
        const double s2 = k.base.sigma * k.base.sigma;
        double p = 1.0;
        for (Index j = 0; j < d; ++j) p *= k.base.value(x[j], y[j]);
        for (Index j = 0; j < d; ++j) g[j] = (x[j] - y[j]) / s2 * p;
        return g;
    }
    // prefix/suffix products avoid dividing by a vanishing factor
    Vector v(d), pre(d + 1), suf(d + 1);
    for (Index j = 0; j < d; ++j) v[j] = k.base.value(x[j], y[j]);
    pre[0] = 1.0;
    for (Index j = 0; j < d; ++j) pre[j + 1] = pre[j] * v[j];
    suf[d] = 1.0;
    for (Index j = d; j-- > 0;) suf[j] = suf[j + 1] * v[j];
    for (Index j = 0; j < d; ++j) g[j] = k.base.d_t(x[j], y[j]) * pre[j] * suf[j + 1];
    return g;
}

Matrix hess_y_kernel(const KernelSpec& k, const VecRef& x, const VecRef& y) {
    check_dims(k, x, y);
    const Index d = x.size();
    if (k.kind == KernelKind::Inverse) {
        const double den = 2.0 - x.dot(y);
        return 2.0 * x * x.transpose() / (den * den * den);
    }
    Vector v(d), dt(d), dtt(d);
    for (Index j = 0; j < d; ++j) {
        v[j] = k.base.value(x[j], y[j]);
        dt[j] = k.base.d_t(x[j], y[j]);
        dtt[j] = k.base.d_tt(x[j], y[j]);
    }
    Matrix H(d, d);
    for (Index i = 0; i < d; ++i) {
        for (Index j = i; j < d; ++j) {
            double p = 1.0;
            for (Index m = 0; m < d; ++m)
                if (m != i && m != j) p *= v[m];
            H(i, j) = (i == j) ? dtt[i] * p : dt[i] * dt[j] * p;
            H(j, i) = H(i, j);
        }
    }
    return H;
}

double mixed_second_base(const BaseKernel& base, double s, double t) {
    base.validate();
    return base.d_st(s, t);
}

Matrix gram(const KernelSpec& k, const Points& A, const Points& B) {
    if (A.cols() != k.dim || B.cols() != k.dim) throw std::invalid_argument("gram: dimension mismatch");
    Matrix K(A.rows(), B.rows());
    for (Index i = 0; i < A.rows(); ++i)
        for (Index j = 0; j < B.rows(); ++j) K(i, j) = eval_kernel(k, A.row(i).transpose(), B.row(j).transpose());
    return K;
}

Matrix gram(const KernelSpec& k, const Points& A) {
    if (A.cols() != k.dim) throw std::invalid_argument("gram: dimension mismatch");
    const Index n = A.rows();
    Matrix K(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = i; j < n; ++j) {
            K(i, j) = eval_kernel(k, A.row(i).transpose(), A.row(j).transpose());
            K(j, i) = K(i, j);
        }
    }
    return K;
}

Matrix base_gram(const BaseKernel& base, const Vector& s, const Vector& t) {
    Matrix K(s.size(), t.size());
    for (Index i = 0; i < s.size(); ++i)
        for (Index j = 0; j < t.size(); ++j) K(i, j) = base.value(s[i], t[j]);
    return K;
}

double median_bandwidth(const Points& X) {
    const Index n = X.rows();
    if (n < 2) throw std::invalid_argument("median_bandwidth: need at least 2 points");
    std::vector<double> dist;
    dist.reserve(static_cast<size_t>(n * (n - 1) / 2));
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) dist.push_back((X.row(i) - X.row(j)).norm());
    auto mid = dist.begin() + static_cast<std::ptrdiff_t>((dist.size() - 1) / 2);
    std::nth_element(dist.begin(), mid, dist.end());
    return *mid;
}

int project_to_unit_ball(Points& X) {
    int changed = 0;
    for (Index i = 0; i < X.rows(); ++i) {
        const double n = X.row(i).norm();
        if (n > 1.0) {
            X.row(i) /= n;
            ++changed;
        }
    }
    if (changed > 0) log_warning("inverse kernel: projected " + std::to_string(changed) + " point(s) onto the unit ball");
    return changed;
}

Box input_domain(const KernelSpec& k) {
    if (k.kind == KernelKind::Inverse) return Box::cube(k.dim, 0.0, 1.0 / std::sqrt(double(k.dim)));
    return Box::unit(k.dim);
}

void to_input_domain(Points& X, const KernelSpec& k) {
    if (k.kind != KernelKind::Inverse) return;
    X /= std::sqrt(double(k.dim));
    project_to_unit_ball(X);
}

}  // namespace lipkernel
