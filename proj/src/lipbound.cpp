#include "lipkernel/lipbound.hpp"

#include "lipkernel/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace lipkernel {

WitnessSet WitnessSet::random(const Box& box, Index n, std::uint64_t seed) {
    box.validate();
    Rng rng(seed);
    WitnessSet w;
    w.points.resize(n, box.dim());
    for (Index i = 0; i < n; ++i) w.points.row(i) = box.sample(rng).transpose();
    w.origin.assign(static_cast<size_t>(n), WitnessOrigin::Random);
    return w;
}

void WitnessSet::add(const Vector& x, WitnessOrigin o) {
    if (points.rows() > 0 && x.size() != points.cols()) throw std::invalid_argument("witness: dimension mismatch");
    Points p(points.rows() + 1, x.size());
    if (points.rows() > 0) p.topRows(points.rows()) = points;
    p.row(points.rows()) = x.transpose();
    points = std::move(p);
    origin.push_back(o);
}

std::string to_string(LipMethod m) {
    switch (m) {
    case LipMethod::ExactDiag: return "exact_diag";
    case LipMethod::CoordNystrom: return "coord_nystrom";
    case LipMethod::HolisticNystrom: return "holistic_nystrom";
    case LipMethod::RkhsNorm: return "rkhs_norm";
    case LipMethod::EmpiricalSearch: return "empirical_search";
    }
    return "?";
}

double LipschitzEstimate::lipschitz() const { return squared ? std::sqrt(std::max(0.0, value)) : value; }

Matrix GradientGramForms::evaluate(const Vector& gamma, double scale) const {
    Matrix P(dim, dim);
    const double s2 = scale * scale;
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) {
            P(i, j) = s2 * gamma.dot(block(i, j) * gamma);
            P(j, i) = P(i, j);
        }
    return P;
}

Vector GradientGramForms::danskin_gradient(const Vector& gamma, const Vector& u, double scale) const {
    Vector g = Vector::Zero(gamma.size());
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            const double w = u[i] * u[j];
            if (w == 0.0) continue;
            const Matrix& Q = block(i, j);
            g += w * (Q * gamma + Q.transpose() * gamma);
        }
    return scale * scale * g;
}

GradientGramForms gradient_gram_forms(const KernelSpec& k, const Points& anchors, GtgMode mode,
                                      const Points* witnesses) {
    if (!k.is_product()) throw std::invalid_argument("gradient gram forms need a product kernel");
    if (anchors.cols() != k.dim) throw std::invalid_argument("gradient gram forms: dimension mismatch");
    if (mode == GtgMode::CoordNystrom) {
        if (!witnesses || witnesses->rows() == 0) throw std::invalid_argument("coordinate Nystrom needs witnesses");
        if (witnesses->cols() != k.dim) throw std::invalid_argument("witness dimension mismatch");
    }
    const int d = k.dim;
    const Index l = anchors.rows();
    const BaseKernel& b = k.base;
    std::vector<Matrix> val(d, Matrix(l, l)), dt(d, Matrix(l, l)), dst(d, Matrix(l, l));
    for (int m = 0; m < d; ++m)
        for (Index a = 0; a < l; ++a)
            for (Index c = 0; c < l; ++c) {
                const double s = anchors(a, m), t = anchors(c, m);
                val[m](a, c) = b.value(s, t);
                dt[m](a, c) = b.d_t(s, t);
                dst[m](a, c) = b.d_st(s, t);
            }
    if (mode == GtgMode::CoordNystrom) {
        const Index n = witnesses->rows();
        for (int j = 0; j < d; ++j) {
            Vector w = witnesses->col(j);
            Matrix Kj = base_gram(b, w, w);
            Matrix Uj(n, l);
            for (Index s = 0; s < n; ++s)
                for (Index a = 0; a < l; ++a) Uj(s, a) = b.d_t(anchors(a, j), w[s]);
            Matrix eta = Uj.transpose() * psd_pinv(Kj) * Uj;
            // The Schur complement H - U^T K^+ U is PSD; rounding in the small
            // eigenpairs of K can break that, so clip it back onto the cone.
            Matrix S = dst[j] - 0.5 * (eta + eta.transpose());
            Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (S + S.transpose()));
            Matrix Sp = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
                        es.eigenvectors().transpose();
            dst[j] -= 0.5 * (Sp + Sp.transpose());
        }
    }
    GradientGramForms F;
    F.dim = d;
    F.blocks.assign(static_cast<size_t>(d * d), Matrix());
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            Matrix Q(l, l);
            for (Index a = 0; a < l; ++a)
                for (Index c = 0; c < l; ++c) {
                    double p = 1.0;
                    for (int m = 0; m < d; ++m)
                        if (m != i && m != j) p *= val[m](a, c);
                    Q(a, c) = (i == j) ? dst[i](a, c) * p : dt[i](a, c) * dt[j](c, a) * p;
                }
            F.blocks[static_cast<size_t>(j * d + i)] = Q.transpose();
            F.blocks[static_cast<size_t>(i * d + j)] = std::move(Q);
        }
    return F;
}

Matrix HolisticForms::evaluate(const Vector& gamma, double scale) const {
    if (blocks.empty()) return Matrix(0, 0);
    Matrix G(blocks[0].rows(), static_cast<Index>(blocks.size()));
    for (size_t j = 0; j < blocks.size(); ++j) G.col(static_cast<Index>(j)) = scale * (blocks[j] * gamma);
    return G;
}

HolisticForms holistic_forms(const KernelSpec& k, const Points& anchors, const Points& witnesses) {
    if (anchors.cols() != k.dim || witnesses.cols() != k.dim)
        throw std::invalid_argument("holistic forms: dimension mismatch");
    if (witnesses.rows() == 0) throw std::invalid_argument("holistic Nystrom needs witnesses");
    const Index n = witnesses.rows(), l = anchors.rows();
    const int d = k.dim;
    std::vector<Matrix> D(d, Matrix(n, l));
    for (Index s = 0; s < n; ++s)
        for (Index a = 0; a < l; ++a) {
            Vector g = grad_y_kernel(k, anchors.row(a).transpose(), witnesses.row(s).transpose());
            for (int j = 0; j < d; ++j) D[j](s, a) = g[j];
        }
    Matrix R = psd_pinv_sqrt(gram(k, witnesses));
    HolisticForms H;
    for (int j = 0; j < d; ++j) H.blocks.push_back(R * D[j]);
    return H;
}

Matrix build_gtg_product(const Model& model, const WitnessSet* witnesses, GtgMode mode) {
    model.validate();
    auto F = gradient_gram_forms(model.kernel, model.anchors, mode, witnesses ? &witnesses->points : nullptr);
    return F.evaluate(model.coeffs, model.scale());
}

Matrix build_gtilde_holistic(const Model& model, const WitnessSet& witnesses) {
    model.validate();
    return holistic_forms(model.kernel, model.anchors, witnesses.points).evaluate(model.coeffs, model.scale());
}

LipschitzEstimate gtg_bound(const Model& model, const WitnessSet* witnesses, GtgMode mode) {
    Matrix P = build_gtg_product(model, witnesses, mode);
    LipschitzEstimate e;
    e.value = std::max(0.0, lambda_max(P).value);
    e.squared = true;
    e.method = mode == GtgMode::ExactDiag ? LipMethod::ExactDiag : LipMethod::CoordNystrom;
    e.n_witness = witnesses ? witnesses->size() : 0;
    return e;
}

LipschitzEstimate holistic_bound(const Model& model, const WitnessSet& witnesses) {
    Matrix G = build_gtilde_holistic(model, witnesses);
    LipschitzEstimate e;
    e.value = std::max(0.0, lambda_max(G.transpose() * G).value);
    e.squared = true;
    e.method = LipMethod::HolisticNystrom;
    e.n_witness = witnesses.size();
    return e;
}

double rkhs_slope(const KernelSpec& k) {
    k.validate();
    if (k.kind == KernelKind::Inverse) return 1.0;
    const BaseKernel& b = k.base;
    if (b.kind == BaseKind::Gaussian) return std::max(1.0 / b.sigma, 1.0);
    const int grid = 4096;
    const double half = b.period / 2.0;
    double best = (std::numbers::pi / b.period) / b.sigma;  // z -> 0 limit
    for (int i = 1; i <= grid; ++i) {
        const double z = half * i / grid;
        const double r = std::sqrt(std::max(0.0, 2.0 - 2.0 * b.value(z, 0.0))) / z;
        best = std::max(best, r);
    }
    return best;
}

double rkhs_norm(const Model& model) {
    model.validate();
    Matrix K = gram(model.kernel, model.anchors);
    return model.scale() * std::sqrt(std::max(0.0, model.coeffs.dot(K * model.coeffs)));
}

LipschitzEstimate rkhs_norm_bound(const Model& model) {
    LipschitzEstimate e;
    e.value = rkhs_norm(model) * rkhs_slope(model.kernel);
    e.method = LipMethod::RkhsNorm;
    return e;
}

namespace {

Vector sign_of(const Vector& g) {
    Vector s(g.size());
    for (Index i = 0; i < g.size(); ++i) s[i] = g[i] > 0 ? 1.0 : (g[i] < 0 ? -1.0 : 0.0);
    return s;
}

void check_box(const Box& box, int d) {
    box.validate();
    if (box.dim() != d) throw std::invalid_argument("domain box dimension mismatch");
}

}  // namespace

LipschitzEstimate empirical_lipschitz(const Model& model, const Box& box, int restarts, std::uint64_t seed,
                                      Norm dual, const Points* candidates) {
    model.validate();
    check_box(box, model.dim());
    if (dual == Norm::Linf) throw std::invalid_argument("empirical_lipschitz: dual norm must be L2 or L1");
    Objective obj = [&](const Vector& x, Vector* grad) {
        Vector g = model.gradient(x);
        if (grad) {
            Matrix H = model.hessian(x);
            *grad = dual == Norm::L2 ? Vector(H * g) : Vector(H * sign_of(g));
        }
        return dual == Norm::L2 ? 0.5 * g.squaredNorm() : g.lpNorm<1>();
    };
    AscentOptions opts;
    opts.restarts = restarts;
    AscentResult r = maximize_in_box(obj, box, seed, opts, candidates);
    LipschitzEstimate e;
    e.argmax = r.argmax;
    e.value = vector_norm(model.gradient(r.argmax), dual);
    e.method = LipMethod::EmpiricalSearch;
    return e;
}

LipschitzEstimate empirical_lipschitz_multiclass(const MultiModel& models, const Box& box, int restarts,
                                                 std::uint64_t seed, Norm dual, const Points* candidates) {
    LipschitzEstimate e;
    e.method = LipMethod::EmpiricalSearch;
    if (models.empty()) return e;
    const int d = models[0].dim();
    for (const auto& m : models) {
        m.validate();
        if (m.dim() != d) throw std::invalid_argument("multiclass models differ in dimension");
    }
    check_box(box, d);
    if (dual == Norm::Linf) throw std::invalid_argument("empirical_lipschitz: dual norm must be L2 or L1");
    const Index C = static_cast<Index>(models.size());
    auto jac = [&](const Vector& x) {
        Matrix J(d, C);
        for (Index c = 0; c < C; ++c) J.col(c) = models[static_cast<size_t>(c)].gradient(x);
        return J;
    };
    Objective obj = [&](const Vector& x, Vector* grad) {
        Matrix J = jac(x);
        if (dual == Norm::L2) {
            Eigen::SelfAdjointEigenSolver<Matrix> es(J * J.transpose());
            const double s2 = std::max(0.0, es.eigenvalues()[d - 1]);
            if (grad) {
                Vector u = es.eigenvectors().col(d - 1);
                const double s = std::sqrt(s2);
                Vector v = s > 0 ? Vector(J.transpose() * u / s) : Vector::Zero(C);
                grad->setZero(d);
                for (Index c = 0; c < C; ++c)
                    if (v[c] != 0.0) *grad += s * v[c] * (models[static_cast<size_t>(c)].hessian(x) * u);
            }
            return 0.5 * s2;
        }
        Index best = 0;
        double bv = -1.0;
        for (Index c = 0; c < C; ++c) {
            const double n1 = J.col(c).lpNorm<1>();
            if (n1 > bv) {
                bv = n1;
                best = c;
            }
        }
        if (grad) *grad = models[static_cast<size_t>(best)].hessian(x) * sign_of(J.col(best));
        return bv;
    };
    AscentOptions opts;
    opts.restarts = restarts;
    AscentResult r = maximize_in_box(obj, box, seed, opts, candidates);
    Matrix J = jac(r.argmax);
    if (dual == Norm::L2) {
        Eigen::JacobiSVD<Matrix> svd(J);
        e.value = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
    } else {
        e.value = 0.0;
        for (Index c = 0; c < C; ++c) e.value = std::max(e.value, J.col(c).lpNorm<1>());
    }
    e.argmax = r.argmax;
    return e;
}

namespace {

Vector random_unit(Rng& rng, Index n) {
    std::normal_distribution<double> g;
    Vector u(n);
    do {
        for (Index i = 0; i < n; ++i) u[i] = g(rng);
    } while (u.norm() == 0.0);
    return u.normalized();
}

Vector top_eigvec(const Matrix& S) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (S + S.transpose()));
    return es.eigenvectors().col(S.rows() - 1);
}

}  // namespace

BilinearOptimum l2_alternation(const std::vector<Matrix>& G, const AlternationOptions& opts) {
    BilinearOptimum best;
    if (G.empty()) return best;
    const Index n = G[0].rows(), d = G[0].cols();
    for (const auto& g : G)
        if (g.rows() != n || g.cols() != d) throw std::invalid_argument("l2_alternation: shape mismatch");
    best.u = Vector::Zero(d);
    best.v = Vector::Zero(n);
    best.converged = true;
    if (n == 0 || d == 0) return best;
    const Index C = static_cast<Index>(G.size());
    Rng rng(opts.seed);
    best.value = -1.0;
    for (int r = 0; r < std::max(1, opts.restarts); ++r) {
        Vector u = r == 0 ? Vector(Vector::Constant(d, 1.0 / std::sqrt(double(d)))) : random_unit(rng, d);
        Vector v = Vector::Zero(n);
        double obj = -1.0;
        bool conv = false;
        int rounds = 0;
        for (; rounds < opts.max_rounds; ++rounds) {
            Matrix A(n, C);
            for (Index c = 0; c < C; ++c) A.col(c) = G[static_cast<size_t>(c)] * u;
            Vector q = top_eigvec(A.transpose() * A);
            Vector av = A * q;
            if (av.norm() == 0.0) {
                v = Vector::Zero(n);
                v[0] = 1.0;
            } else {
                v = av.normalized();
            }
            Matrix B(d, C);
            for (Index c = 0; c < C; ++c) B.col(c) = G[static_cast<size_t>(c)].transpose() * v;
            u = top_eigvec(B * B.transpose());
            double next = 0.0;
            for (Index c = 0; c < C; ++c) {
                const double t = v.dot(G[static_cast<size_t>(c)] * u);
                next += t * t;
            }
            if (obj >= 0.0 && std::abs(next - obj) < opts.tol * std::max(1.0, next)) {
                obj = std::max(obj, next);
                conv = true;
                ++rounds;
                break;
            }
            obj = next;
        }
        if (obj > best.value) {
            best.value = obj;
            best.u = u;
            best.v = v;
            best.rounds = rounds;
            best.converged = conv;
        }
    }
    return best;
}

BilinearOptimum linf_alternation(const Matrix& G, const AlternationOptions& opts) {
    BilinearOptimum best;
    const Index n = G.rows(), d = G.cols();
    best.u = Vector::Zero(d);
    best.v = Vector::Zero(n);
    best.converged = true;
    if (n == 0 || d == 0) return best;
    Rng rng(opts.seed);
    std::bernoulli_distribution coin(0.5);
    best.value = -1.0;
    for (int r = 0; r < std::max(1, opts.restarts); ++r) {
        Vector u(d);
        for (Index i = 0; i < d; ++i) u[i] = (r == 0 || coin(rng)) ? 1.0 : -1.0;
        Vector v = Vector::Zero(n);
        double obj = -1.0;
        bool conv = false;
        int rounds = 0;
        for (; rounds < opts.max_rounds; ++rounds) {
            Vector gu = G * u;
            const double nrm = gu.norm();
            if (nrm == 0.0) {
                obj = std::max(obj, 0.0);
                conv = true;
                break;
            }
            v = gu / nrm;
            Vector w = G.transpose() * v;
            Vector un(d);
            for (Index i = 0; i < d; ++i) un[i] = w[i] >= 0 ? 1.0 : -1.0;
            const double next = w.lpNorm<1>();
            if (un == u || (obj >= 0.0 && next - obj < opts.tol * std::max(1.0, next))) {
                u = un;
                v = (G * u).normalized();
                obj = std::max(next, obj);
                conv = true;
                ++rounds;
                break;
            }
            u = un;
            obj = next;
        }
        if (obj > best.value) {
            best.value = obj;
            best.u = u;
            best.v = v;
            best.rounds = rounds;
            best.converged = conv;
        }
    }
    return best;
}

namespace {

std::vector<Matrix> holistic_all(const MultiModel& models, const WitnessSet& witnesses) {
    std::vector<Matrix> G;
    if (models.empty()) return G;
    for (const auto& m : models) m.validate();
    // share the witness factorisation when anchors coincide
    const Model& m0 = models[0];
    HolisticForms F = holistic_forms(m0.kernel, m0.anchors, witnesses.points);
    for (const auto& m : models) {
        if (m.anchors.rows() == m0.anchors.rows() && m.anchors == m0.anchors && m.kernel.kind == m0.kernel.kind &&
            m.kernel.dim == m0.kernel.dim && m.kernel.base.kind == m0.kernel.base.kind &&
            m.kernel.base.sigma == m0.kernel.base.sigma && m.kernel.base.period == m0.kernel.base.period)
            G.push_back(F.evaluate(m.coeffs, m.scale()));
        else
            G.push_back(build_gtilde_holistic(m, witnesses));
    }
    return G;
}

}  // namespace

LipschitzEstimate multiclass_l2_bound(const MultiModel& models, const WitnessSet& witnesses,
                                      const AlternationOptions& opts) {
    LipschitzEstimate e;
    e.method = LipMethod::HolisticNystrom;
    e.squared = true;
    e.n_witness = witnesses.size();
    if (models.empty()) return e;
    e.value = std::max(0.0, l2_alternation(holistic_all(models, witnesses), opts).value);
    return e;
}

LipschitzEstimate multiclass_linf_bound(const MultiModel& models, const WitnessSet& witnesses,
                                        const AlternationOptions& opts) {
    LipschitzEstimate e;
    e.method = LipMethod::HolisticNystrom;
    e.n_witness = witnesses.size();
    for (const auto& G : holistic_all(models, witnesses))
        e.value = std::max(e.value, linf_alternation(G, opts).value);
    return e;
}

}  // namespace lipkernel
