#include "lipkernel/trainer.hpp"

#include "lipkernel/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

namespace lipkernel {

std::string to_string(LossKind k) { return k == LossKind::Hinge ? "hinge" : "crammer-singer"; }

std::string to_string(ConstraintMode m) {
    switch (m) {
        case ConstraintMode::BruteForce: return "brute-force";
        case ConstraintMode::HolisticNystrom: return "holistic";
        case ConstraintMode::CoordNystrom: return "coord";
    }
    return "?";
}

std::string to_string(WitnessMode m) { return m == WitnessMode::Greedy ? "greedy" : "random"; }

LossKind loss_kind_from_string(const std::string& s) {
    if (s == "hinge") return LossKind::Hinge;
    if (s == "crammer-singer" || s == "cs") return LossKind::CrammerSinger;
    throw ConfigError("unknown loss: " + s);
}

ConstraintMode constraint_mode_from_string(const std::string& s) {
    if (s == "brute-force" || s == "brute") return ConstraintMode::BruteForce;
    if (s == "holistic") return ConstraintMode::HolisticNystrom;
    if (s == "coord") return ConstraintMode::CoordNystrom;
    throw ConfigError("unknown constraint mode: " + s);
}

WitnessMode witness_mode_from_string(const std::string& s) {
    if (s == "greedy") return WitnessMode::Greedy;
    if (s == "random") return WitnessMode::Random;
    throw ConfigError("unknown witness mode: " + s);
}

double loss_value(LossKind kind, const Vector& scores, int label) {
    if (!scores.allFinite()) throw ConfigError("loss_value: scores must be finite");
    if (kind == LossKind::Hinge) {
        if (scores.size() != 1) throw ConfigError("hinge loss takes a single score");
        if (label != 1 && label != -1) throw ConfigError("hinge label must be -1 or +1");
        return std::max(0.0, 1.0 - label * scores[0]);
    }
    if (label < 0 || label >= scores.size()) throw ConfigError("loss_value: unknown label class");
    double worst = 0.0;
    for (Index c = 0; c < scores.size(); ++c)
        if (c != label) worst = std::max(worst, 1.0 + scores[c] - scores[label]);
    return worst;
}

LandmarkMap LandmarkMap::build(const KernelSpec& k, const Points& landmarks) {
    k.validate();
    if (landmarks.rows() == 0) throw ConfigError("landmark set is empty");
    if (landmarks.cols() != k.dim) throw ConfigError("landmark dimension mismatch");
    LandmarkMap m;
    m.kernel = k;
    m.landmarks = landmarks;
    m.S = psd_pinv_sqrt(gram(k, landmarks));
    return m;
}

Vector LandmarkMap::features(const VecRef& x) const {
    Vector kz(landmarks.rows());
    for (Index a = 0; a < landmarks.rows(); ++a) kz[a] = eval_kernel(kernel, landmarks.row(a).transpose(), x);
    return S * kz;
}

Matrix LandmarkMap::features_rows(const Points& X) const { return gram(kernel, X, landmarks) * S; }

Vector landmark_features(const KernelSpec& k, const Points& landmarks, const VecRef& x) {
    return LandmarkMap::build(k, landmarks).features(x);
}

Box TrainConfig::resolved_domain(Index d) const { return domain ? *domain : Box::unit(d); }

void TrainConfig::validate(Index d) const {
    if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("infeasible configuration: L must be positive");
    if (!(reg_weight >= 0.0)) throw ConfigError("reg_weight must be >= 0");
    if (!(penalty_growth > 1.0)) throw ConfigError("penalty_growth must exceed 1");
    if (!(penalty_init > 0.0) || !(penalty_max >= penalty_init)) throw ConfigError("invalid penalty schedule");
    if (outer_iters < 1) throw ConfigError("outer_iters must be >= 1");
    if (initial_witnesses < 1) throw ConfigError("initial_witnesses must be >= 1");
    if (inner_max_iter < 1) throw ConfigError("inner_max_iter must be >= 1");
    if (search_restarts < 1) throw ConfigError("search_restarts must be >= 1");
    if (n_landmarks < 0) throw ConfigError("n_landmarks must be >= 0");
    if (!(constraint_tol >= 0.0) || !(stop_slack >= 0.0)) throw ConfigError("tolerances must be >= 0");
    if (lip_norm == Norm::L1) throw ConfigError("lip_norm must be L2 or Linf");
    Box b = resolved_domain(d);
    b.validate();
    if (b.dim() != d) throw ConfigError("domain dimension mismatch");
}

Vector greedy_witness(const Model& model, const Box& domain, std::uint64_t seed, Norm dual) {
    model.validate();
    if (model.coeffs.isZero(0.0)) {
        Rng rng(seed);
        return domain.sample(rng);
    }
    return empirical_lipschitz(model, domain, 10, seed, dual).argmax;
}

namespace {

Vector sign_of(const Vector& g) {
    return g.unaryExpr([](double v) { return double((v > 0) - (v < 0)); });
}

// h(W) with a subgradient with respect to W (m x C').
class Constraint {
public:
    virtual ~Constraint() = default;
    virtual double value(const Matrix& W, Matrix* grad) const = 0;
};

// Per-witness gradient maps A_s = D_s S, d x m.
class BruteConstraint : public Constraint {
public:
    BruteConstraint(const LandmarkMap& map, const Points& witnesses, Norm lip_norm) : l1_(lip_norm == Norm::Linf) {
        const Index m = map.landmarks.rows();
        const int d = map.kernel.dim;
        for (Index s = 0; s < witnesses.rows(); ++s) {
            Matrix D(d, m);
            for (Index a = 0; a < m; ++a)
                D.col(a) = grad_y_kernel(map.kernel, map.landmarks.row(a).transpose(), witnesses.row(s).transpose());
            A_.push_back(D * map.S);
        }
    }

    double value(const Matrix& W, Matrix* grad) const override {
        double best = -1.0;
        size_t bs = 0;
        Index bc = 0;
        Vector bu;
        for (size_t s = 0; s < A_.size(); ++s) {
            const Matrix J = A_[s] * W;  // d x C'
            if (l1_) {
                for (Index c = 0; c < J.cols(); ++c) {
                    const double v = J.col(c).lpNorm<1>();
                    if (v > best) {
                        best = v;
                        bs = s;
                        bc = c;
                    }
                }
            } else if (J.cols() == 1) {
                const double v = J.squaredNorm();
                if (v > best) {
                    best = v;
                    bs = s;
                }
            } else {
                Eigen::SelfAdjointEigenSolver<Matrix> es(J * J.transpose());
                const double v = std::max(0.0, es.eigenvalues()[J.rows() - 1]);
                if (v > best) {
                    best = v;
                    bs = s;
                    bu = es.eigenvectors().col(J.rows() - 1);
                }
            }
        }
        if (grad) {
            grad->setZero(W.rows(), W.cols());
            const Matrix& A = A_[bs];
            if (l1_)
                grad->col(bc) = A.transpose() * sign_of(A * W.col(bc));
            else if (W.cols() == 1)
                grad->col(0) = 2.0 * A.transpose() * (A * W.col(0));
            else
                *grad = 2.0 * A.transpose() * bu * (bu.transpose() * (A * W));
        }
        return std::max(best, 0.0);
    }

private:
    std::vector<Matrix> A_;
    bool l1_;
};

// G~_c = [H_j w_c], H_j = (K_W^+)^{1/2} D_j S, n x m.
class HolisticConstraint : public Constraint {
public:
    HolisticConstraint(const LandmarkMap& map, const Points& witnesses, Norm lip_norm, std::uint64_t seed)
        : l1_(lip_norm == Norm::Linf) {
        HolisticForms F = holistic_forms(map.kernel, map.landmarks, witnesses);
        for (auto& B : F.blocks) H_.push_back(B * map.S);
        opts_.seed = seed;
    }

    double value(const Matrix& W, Matrix* grad) const override {
        const Index C = W.cols();
        std::vector<Matrix> G;
        for (Index c = 0; c < C; ++c) G.push_back(tilde(W.col(c)));
        if (grad) grad->setZero(W.rows(), C);
        if (l1_) {
            double best = -1.0;
            Index bc = 0;
            BilinearOptimum bo;
            for (Index c = 0; c < C; ++c) {
                BilinearOptimum o = linf_alternation(G[c], opts_);
                if (o.value > best) {
                    best = o.value;
                    bc = c;
                    bo = o;
                }
            }
            if (grad) grad->col(bc) = combine(bo.u, bo.v);
            return std::max(best, 0.0);
        }
        if (C == 1) {
            Eigen::SelfAdjointEigenSolver<Matrix> es(G[0].transpose() * G[0]);
            const Index d = G[0].cols();
            const Vector u = es.eigenvectors().col(d - 1);
            if (grad) grad->col(0) = 2.0 * combine(u, G[0] * u);
            return std::max(0.0, es.eigenvalues()[d - 1]);
        }
        BilinearOptimum o = l2_alternation(G, opts_);
        if (grad) {
            const Vector base = combine(o.u, o.v);
            for (Index c = 0; c < C; ++c) grad->col(c) = 2.0 * o.v.dot(G[c] * o.u) * base;
        }
        return std::max(o.value, 0.0);
    }

private:
    Matrix tilde(const Vector& w) const {
        Matrix G(H_[0].rows(), Index(H_.size()));
        for (size_t j = 0; j < H_.size(); ++j) G.col(Index(j)) = H_[j] * w;
        return G;
    }
    // sum_j u_j H_j^T v
    Vector combine(const Vector& u, const Vector& v) const {
        Vector g = Vector::Zero(H_[0].cols());
        for (size_t j = 0; j < H_.size(); ++j)
            if (u[Index(j)] != 0.0) g += u[Index(j)] * (H_[j].transpose() * v);
        return g;
    }

    std::vector<Matrix> H_;
    bool l1_;
    AlternationOptions opts_;
};

// Product-kernel P_G with witness-based diagonal, blocks pulled back by S.
class CoordConstraint : public Constraint {
public:
    CoordConstraint(const LandmarkMap& map, const Points& witnesses) {
        forms_ = gradient_gram_forms(map.kernel, map.landmarks, GtgMode::CoordNystrom, &witnesses);
        for (auto& Q : forms_.blocks) Q = map.S * Q * map.S;
    }

    double value(const Matrix& W, Matrix* grad) const override {
        const Vector w = W.col(0);
        const Matrix P = forms_.evaluate(w, 1.0);
        Eigen::SelfAdjointEigenSolver<Matrix> es(P);
        const Index d = P.rows();
        if (grad) {
            grad->resize(W.rows(), 1);
            grad->col(0) = forms_.danskin_gradient(w, es.eigenvectors().col(d - 1), 1.0);
        }
        return std::max(0.0, es.eigenvalues()[d - 1]);
    }

private:
    GradientGramForms forms_;
};

std::unique_ptr<Constraint> make_constraint(const TrainConfig& cfg, const LandmarkMap& map, const WitnessSet& wit,
                                            std::uint64_t seed) {
    switch (cfg.constraint_mode) {
        case ConstraintMode::BruteForce: return std::make_unique<BruteConstraint>(map, wit.points, cfg.lip_norm);
        case ConstraintMode::HolisticNystrom:
            return std::make_unique<HolisticConstraint>(map, wit.points, cfg.lip_norm, seed);
        case ConstraintMode::CoordNystrom: return std::make_unique<CoordConstraint>(map, wit.points);
    }
    throw ConfigError("unknown constraint mode");
}

struct Problem {
    Matrix Phi;           // l x m features
    std::vector<int> y;   // +-1 (binary) or class index
    bool binary = true;
    double lambda = 0.0;
};

// Regularised empirical risk and a subgradient.
double risk(const Problem& p, const Matrix& W, Matrix* grad) {
    const Index l = p.Phi.rows();
    const Matrix F = p.Phi * W;
    Matrix dF = Matrix::Zero(l, W.cols());
    double loss = 0.0;
    for (Index i = 0; i < l; ++i) {
        if (p.binary) {
            const double h = 1.0 - p.y[i] * F(i, 0);
            if (h > 0) {
                loss += h;
                dF(i, 0) = -p.y[i];
            }
        } else {
            const int yi = p.y[i];
            double worst = 0.0;
            for (Index c = 0; c < F.cols(); ++c)
                if (c != yi) worst = std::max(worst, 1.0 + F(i, c) - F(i, yi));
            if (worst <= 0.0) continue;
            loss += worst;
            // average over tied maximisers: at W = 0 every wrong class ties, and
            // a single pick is not a descent direction
            const double tie = 1e-12 * std::max(1.0, worst);
            int ties = 0;
            for (Index c = 0; c < F.cols(); ++c)
                if (c != yi && 1.0 + F(i, c) - F(i, yi) >= worst - tie) ++ties;
            for (Index c = 0; c < F.cols(); ++c)
                if (c != yi && 1.0 + F(i, c) - F(i, yi) >= worst - tie) dF(i, c) = 1.0 / ties;
            dF(i, yi) = -1.0;
        }
    }
    if (grad) *grad = p.Phi.transpose() * dF / double(l) + p.lambda * W;
    return loss / double(l) + 0.5 * p.lambda * W.squaredNorm();
}

struct InnerResult {
    int iters = 0;
};

// Monotone subgradient descent on risk + rho * max(0, h / budget - 1). Near
// the constraint boundary the step uses the minimum-norm element of the
// subdifferential, which slides along the boundary instead of bouncing off it.
InnerResult inner_solve(const Problem& p, const Constraint& con, double budget, double rho, const TrainConfig& cfg,
                        Matrix& W) {
    const double active_band = 1e-3;
    auto total = [&](const Matrix& V) {
        return risk(p, V, nullptr) + rho * std::max(0.0, con.value(V, nullptr) / budget - 1.0);
    };
    auto direction = [&](const Matrix& V, double& value) {
        Matrix gr, gh;
        const double r = risk(p, V, &gr);
        const double viol = con.value(V, &gh) / budget - 1.0;
        value = r + rho * std::max(0.0, viol);
        if (viol < -active_band) return gr;
        const Matrix gc = (rho / budget) * gh;
        if (viol > active_band) return Matrix(gr + gc);
        const double gc2 = gc.squaredNorm();
        const double theta = gc2 > 0 ? std::clamp(-(gr.array() * gc.array()).sum() / gc2, 0.0, 1.0) : 0.0;
        return Matrix(gr + theta * gc);
    };
    InnerResult res;
    double cur;
    Matrix G = direction(W, cur);
    double t = 1.0;
    int small = 0;
    for (; res.iters < cfg.inner_max_iter; ++res.iters) {
        const double gn2 = G.squaredNorm();
        if (gn2 == 0.0) break;
        bool accepted = false;
        Matrix Wn;
        double val = cur;
        for (int bt = 0; bt < 60; ++bt) {
            Wn = W - t * G;
            val = total(Wn);
            if (val <= cur - 1e-4 * t * gn2) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;
        const double gain = cur - val;
        W = std::move(Wn);
        G = direction(W, cur);
        t = std::min(2.0 * t, 1e8);
        small = gain < cfg.inner_tol * std::max(1.0, std::abs(cur)) ? small + 1 : 0;
        if (small >= 5) break;
    }
    return res;
}

struct CoreResult {
    LandmarkMap map;
    Matrix W;
    TrainReport report;
};

MultiModel to_models(const LandmarkMap& map, const Matrix& W) {
    MultiModel ms;
    for (Index c = 0; c < W.cols(); ++c) {
        Model f;
        f.kernel = map.kernel;
        f.anchors = map.landmarks;
        f.coeffs = map.S * W.col(c);
        f.mean_scale = false;
        ms.push_back(std::move(f));
    }
    return ms;
}

CoreResult train_core(const Points& X, const std::vector<int>& y, const KernelSpec& k, const TrainConfig& cfg,
                      int C) {
    const Index l = X.rows(), d = X.cols();
    const bool binary = C == 0;
    const Index Cp = binary ? 1 : C;
    const Box domain = cfg.resolved_domain(d);
    const Norm dual = dual_norm(cfg.lip_norm);
    const int degree = cfg.lip_norm == Norm::L2 ? 2 : 1;
    const double budget = degree == 2 ? cfg.L * cfg.L : cfg.L;

    // landmarks: a seeded subset of the training points
    const Index m = cfg.n_landmarks > 0 ? std::min<Index>(cfg.n_landmarks, l) : std::min<Index>(l, 256);
    std::vector<Index> perm(l);
    std::iota(perm.begin(), perm.end(), Index(0));
    Rng prng(derive_seed(cfg.seed, 1));
    std::shuffle(perm.begin(), perm.end(), prng);
    perm.resize(m);
    std::sort(perm.begin(), perm.end());
    Points Z(m, d);
    for (Index a = 0; a < m; ++a) Z.row(a) = X.row(perm[a]);

    CoreResult out;
    out.map = LandmarkMap::build(k, Z);
    Problem p;
    p.Phi = out.map.features_rows(X);
    p.y = y;
    p.binary = binary;
    p.lambda = cfg.reg_weight;

    Matrix W = Matrix::Zero(m, Cp);
    WitnessSet wit = WitnessSet::random(domain, cfg.initial_witnesses, derive_seed(cfg.seed, 2));
    Rng wrng(derive_seed(cfg.seed, 3));
    double rho = cfg.penalty_init;
    TrainReport& rep = out.report;
    rep.constraint_budget = budget;

    for (int it = 0; it < cfg.outer_iters; ++it) {
        auto con = make_constraint(cfg, out.map, wit, derive_seed(cfg.seed, 4));
        OuterRecord rec;
        for (;;) {
            rec.inner_iters += inner_solve(p, *con, budget, rho, cfg, W).iters;
            if (con->value(W, nullptr) <= budget * (1.0 + cfg.constraint_tol)) break;
            if (rho * cfg.penalty_growth > cfg.penalty_max) {
                rec.penalty_capped = true;
                break;
            }
            rho *= cfg.penalty_growth;
        }
        // the constraint is homogeneous of degree `degree` in W
        const double h = con->value(W, nullptr);
        if (h > budget) {
            W *= std::pow(budget / h, 1.0 / degree);
            rec.rescaled = true;
        }
        rec.constraint_value = con->value(W, nullptr);
        rec.objective = risk(p, W, nullptr);
        rec.n_witness = wit.size();
        rec.penalty = rho;

        const MultiModel ms = to_models(out.map, W);
        const std::uint64_t sseed = derive_seed(cfg.seed, 100 + std::uint64_t(it));
        // training points and witnesses are screened as extra ascent starts
        Points cand(l + wit.size(), d);
        cand << X, wit.points;
        LipschitzEstimate est = binary
                                    ? empirical_lipschitz(ms[0], domain, cfg.search_restarts, sseed, dual, &cand)
                                    : empirical_lipschitz_multiclass(ms, domain, cfg.search_restarts, sseed, dual, &cand);
        rec.lip_estimate = est.value;
        rep.history.push_back(rec);
        rep.outer_iterations = it + 1;
        if (est.value <= cfg.L * (1.0 + cfg.stop_slack)) {
            rep.converged = true;
            break;
        }
        if (it + 1 == cfg.outer_iters) break;
        if (cfg.witness_mode == WitnessMode::Greedy)
            wit.add(est.argmax, WitnessOrigin::Greedy);
        else
            wit.add(domain.sample(wrng), WitnessOrigin::Random);
    }

    // scores through the returned models, as an attacker or the CLI sees them
    const MultiModel ms = to_models(out.map, W);
    Index ok = 0;
    double loss = 0.0;
    for (Index i = 0; i < l; ++i) {
        const Vector x = X.row(i).transpose();
        Vector f(Cp);
        for (Index c = 0; c < Cp; ++c) f[c] = ms[size_t(c)].value(x);
        if (binary) {
            ok += y[i] * f[0] > 0.0;
            loss += loss_value(LossKind::Hinge, f, y[i]);
        } else {
            double other = -std::numeric_limits<double>::infinity();
            for (Index c = 0; c < Cp; ++c)
                if (c != y[i]) other = std::max(other, f[c]);
            ok += f[y[i]] > other;
            loss += loss_value(LossKind::CrammerSinger, f, y[i]);
        }
    }
    rep.train_accuracy = double(ok) / double(l);
    rep.mean_loss = loss / double(l);
    rep.final_constraint = rep.history.back().constraint_value;
    rep.witnesses = wit;
    out.W = W;
    return out;
}

void check_data(const Points& X, const std::vector<int>& y, const KernelSpec& k, const TrainConfig& cfg) {
    if (X.rows() == 0) throw ConfigError("training data is empty");
    if (Index(y.size()) != X.rows()) throw ConfigError("label count mismatch");
    if (X.cols() != k.dim) throw ConfigError("data dimension does not match kernel");
    if (!X.allFinite()) throw ConfigError("training data must be finite");
    k.validate();
    cfg.validate(X.cols());
}

}  // namespace

BinaryResult train_binary(const Points& X, const std::vector<int>& y, const KernelSpec& k, const TrainConfig& cfg) {
    check_data(X, y, k, cfg);
    if (cfg.loss != LossKind::Hinge) throw ConfigError("binary training uses the hinge loss");
    for (int v : y)
        if (v != 1 && v != -1) throw ConfigError("binary labels must be -1 or +1");
    if (cfg.constraint_mode == ConstraintMode::CoordNystrom) {
        if (!k.is_product()) throw ConfigError("coordinate-wise Nystrom requires a product kernel");
        if (cfg.lip_norm != Norm::L2) throw ConfigError("coordinate-wise Nystrom supports the L2 constraint only");
    }
    CoreResult r = train_core(X, y, k, cfg, 0);
    return {to_models(r.map, r.W)[0], std::move(r.report)};
}

MulticlassResult train_multiclass(const Points& X, const std::vector<int>& y, const KernelSpec& k,
                                  const TrainConfig& cfg) {
    check_data(X, y, k, cfg);
    if (cfg.loss != LossKind::CrammerSinger) throw ConfigError("multiclass training uses the Crammer-Singer loss");
    if (cfg.constraint_mode == ConstraintMode::CoordNystrom)
        throw ConfigError("coordinate-wise Nystrom is not available for multiclass training");
    int C = 0;
    for (int v : y) {
        if (v < 0) throw ConfigError("multiclass labels must be 0..C-1");
        C = std::max(C, v + 1);
    }
    if (C < 2 || C > 10) throw ConfigError("multiclass training needs 2 to 10 classes");
    CoreResult r = train_core(X, y, k, cfg, C);
    return {to_models(r.map, r.W), std::move(r.report)};
}

}  // namespace lipkernel
