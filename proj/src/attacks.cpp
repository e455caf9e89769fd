#include "lipkernel/attacks.hpp"

#include "lipkernel/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lipkernel {

int Scorer::class_index(int label) const {
    if (binary()) {
        if (label == 1) return 1;
        if (label == -1) return 0;
        throw ConfigError("binary labels must be -1 or +1, got " + std::to_string(label));
    }
    if (label < 0 || label >= classes()) throw ConfigError("label out of range: " + std::to_string(label));
    return label;
}

int Scorer::label_of(int cls) const {
    if (binary()) return cls == 1 ? 1 : -1;
    return cls;
}

KernelScorer::KernelScorer(Model binary_model) : models_{std::move(binary_model)}, binary_(true) {
    models_[0].validate();
}

KernelScorer::KernelScorer(MultiModel per_class) : models_(std::move(per_class)), binary_(false) {
    if (models_.size() < 2) throw ConfigError("multiclass scorer needs at least two models");
    for (const auto& m : models_) {
        m.validate();
        if (m.dim() != models_[0].dim()) throw ConfigError("per-class models disagree on dimension");
    }
}

int KernelScorer::classes() const { return binary_ ? 2 : int(models_.size()); }
int KernelScorer::dim() const { return models_[0].dim(); }

Vector KernelScorer::scores(const VecRef& x) const {
    if (binary_) return Vector{{0.0, models_[0].value(x)}};
    Vector s(models_.size());
    for (size_t c = 0; c < models_.size(); ++c) s[c] = models_[c].value(x);
    return s;
}

Matrix KernelScorer::jacobian(const VecRef& x) const {
    Matrix J = Matrix::Zero(classes(), dim());
    if (binary_) {
        J.row(1) = models_[0].gradient(x).transpose();
        return J;
    }
    for (size_t c = 0; c < models_.size(); ++c) J.row(c) = models_[c].gradient(x).transpose();
    return J;
}

LinearScorer::LinearScorer(Vector w, double b) : W_(w.transpose()), b_(Vector::Constant(1, b)), binary_(true) {
    if (w.size() == 0) throw ConfigError("empty weight vector");
}

LinearScorer::LinearScorer(Matrix W, Vector b) : W_(std::move(W)), b_(std::move(b)), binary_(false) {
    if (W_.rows() < 2 || b_.size() != W_.rows()) throw ConfigError("linear scorer shape mismatch");
}

int LinearScorer::classes() const { return binary_ ? 2 : int(W_.rows()); }
int LinearScorer::dim() const { return int(W_.cols()); }

Vector LinearScorer::scores(const VecRef& x) const {
    Vector f = W_ * x + b_;
    if (binary_) return Vector{{0.0, f[0]}};
    return f;
}

Matrix LinearScorer::jacobian(const VecRef&) const {
    if (!binary_) return W_;
    Matrix J = Matrix::Zero(2, W_.cols());
    J.row(1) = W_.row(0);
    return J;
}

namespace {

// Index of the largest score other than y.
int runner_up(const Vector& scores, int y) {
    int best = -1;
    for (int c = 0; c < scores.size(); ++c)
        if (c != y && (best < 0 || scores[c] > scores[best])) best = c;
    return best;
}

void check_class(const Vector& scores, int y) {
    if (scores.size() < 2) throw ConfigError("cw_margin needs at least two classes");
    if (y < 0 || y >= scores.size()) throw ConfigError("class index out of range");
}

}  // namespace

double cw_margin(const Vector& scores, int y) {
    check_class(scores, y);
    return scores[runner_up(scores, y)] - scores[y];
}

bool correctly_classified(const Vector& scores, int y) { return cw_margin(scores, y) < 0.0; }

std::string to_string(AttackObjective o) { return o == AttackObjective::CWMargin ? "cw" : "ce"; }

AttackObjective attack_objective_from_string(const std::string& s) {
    if (s == "cw" || s == "CWMargin") return AttackObjective::CWMargin;
    if (s == "ce" || s == "CrossEntropy") return AttackObjective::CrossEntropy;
    throw ConfigError("unknown attack objective: " + s);
}

double AttackConfig::resolved_step() const { return step_size > 0.0 ? step_size : 2.0 * delta / steps; }

Box AttackConfig::resolved_box(Index d) const { return input_box ? *input_box : Box::unit(d); }

void AttackConfig::validate(Index d) const {
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw ConfigError("attack delta must be finite and >= 0");
    if (steps < 1) throw ConfigError("attack steps must be >= 1");
    if (!std::isfinite(step_size)) throw ConfigError("attack step size must be finite");
    if (norm == Norm::L1) throw ConfigError("attacks support L2 and Linf balls");
    Box b = resolved_box(d);
    b.validate();
    if (b.dim() != d) throw ConfigError("input box dimension mismatch");
}

Vector project_ball_box(const Vector& z, const Vector& x, double delta, Norm norm, const Box& box) {
    if (norm == Norm::Linf) {
        Vector lo = (x.array() - delta).max(box.lo.array());
        Vector hi = (x.array() + delta).min(box.hi.array());
        return z.cwiseMax(lo).cwiseMin(hi);
    }
    if (norm != Norm::L2) throw ConfigError("projection supports L2 and Linf");
    Vector y = box.clamp(z);
    if ((y - x).norm() <= delta) return y;
    // y(t) = clamp(x + t (z - x)) has ||y(t) - x|| nondecreasing in t; the
    // projection is the largest feasible t.
    const Vector dir = z - x;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if ((box.clamp(x + mid * dir) - x).norm() <= delta)
            lo = mid;
        else
            hi = mid;
    }
    return box.clamp(x + lo * dir);
}

double attack_objective(const Scorer& s, const AttackConfig& cfg, const Vector& x, int y, Vector* grad) {
    const Vector f = s.scores(x);
    check_class(f, y);
    const bool targeted = cfg.targeted.has_value();
    const int t = targeted ? *cfg.targeted : y;
    check_class(f, t);
    Vector w = Vector::Zero(f.size());  // objective = w . f locally
    double value;
    if (cfg.objective == AttackObjective::CWMargin) {
        const int c = runner_up(f, t);
        if (targeted) {
            value = f[t] - f[c];
            w[t] = 1.0;
            w[c] = -1.0;
        } else {
            value = f[c] - f[t];
            w[c] = 1.0;
            w[t] = -1.0;
        }
    } else {
        const double m = f.maxCoeff();
        const Vector e = (f.array() - m).exp();
        const double z = e.sum();
        const Vector p = e / z;
        const double loss = m + std::log(z) - f[t];
        w = p;
        w[t] -= 1.0;
        value = loss;
        if (targeted) {
            value = -loss;
            w = -w;
        }
    }
    if (grad) *grad = s.jacobian(x).transpose() * w;
    return value;
}

AttackResult pgd_attack(const Scorer& s, const Vector& x, int y, const AttackConfig& cfg, const Vector* start) {
    const Index d = s.dim();
    if (x.size() != d) throw ConfigError("attack point dimension mismatch");
    cfg.validate(d);
    const Box box = cfg.resolved_box(d);
    if (!box.contains(x, 1e-12)) throw ConfigError("attack point lies outside the input box");
    const double step = cfg.resolved_step();

    Vector cur = x;
    if (start) {
        if (start->size() != d) throw ConfigError("warm start dimension mismatch");
        cur = project_ball_box(*start, x, cfg.delta, cfg.norm, box);
    } else if (cfg.random_init && cfg.delta > 0.0) {
        Rng rng(cfg.seed);
        Vector u(d);
        if (cfg.norm == Norm::Linf) {
            std::uniform_real_distribution<double> U(-cfg.delta, cfg.delta);
            for (Index i = 0; i < d; ++i) u[i] = U(rng);
        } else {
            std::normal_distribution<double> g;
            for (Index i = 0; i < d; ++i) u[i] = g(rng);
            const double r = cfg.delta * std::pow(std::uniform_real_distribution<double>(0, 1)(rng), 1.0 / double(d));
            const double n = u.norm();
            u = n > 0 ? Vector(u * (r / n)) : Vector::Zero(d);
        }
        cur = project_ball_box(x + u, x, cfg.delta, cfg.norm, box);
    }

    AttackResult res;
    Vector g;
    double obj = attack_objective(s, cfg, cur, y, &g);
    res.initial_objective = obj;
    res.objective = obj;
    res.adversarial = cur;
    if (cfg.record_trace) {
        res.trace.push_back(cur);
        res.trace_objective.push_back(obj);
    }
    if (cfg.delta > 0.0) {
        for (int k = 0; k < cfg.steps; ++k) {
            Vector dir;
            if (cfg.norm == Norm::Linf) {
                dir = g.unaryExpr([](double v) { return double((v > 0) - (v < 0)); });
            } else {
                const double gn = g.norm();
                if (gn == 0.0) break;
                dir = g / gn;
            }
            if (dir.isZero(0.0)) break;
            cur = project_ball_box(cur + step * dir, x, cfg.delta, cfg.norm, box);
            obj = attack_objective(s, cfg, cur, y, &g);
            if (cfg.record_trace) {
                res.trace.push_back(cur);
                res.trace_objective.push_back(obj);
            }
            if (obj > res.objective) {
                res.objective = obj;
                res.adversarial = cur;
            }
        }
    }
    const Vector f = s.scores(res.adversarial);
    res.success = cfg.targeted ? correctly_classified(f, *cfg.targeted) : !correctly_classified(f, y);
    return res;
}

AttackReport robust_accuracy(const Scorer& s, const Points& X, const std::vector<int>& labels,
                             const AttackConfig& base, const std::vector<double>& deltas) {
    const Index n = X.rows();
    if (n == 0) throw ConfigError("robust_accuracy needs data");
    if (Index(labels.size()) != n) throw ConfigError("label count mismatch");
    if (X.cols() != s.dim()) throw ConfigError("data dimension mismatch");
    if (deltas.empty()) throw ConfigError("empty delta sweep");
    for (size_t k = 0; k < deltas.size(); ++k) {
        if (!(deltas[k] >= 0.0)) throw ConfigError("deltas must be >= 0");
        if (k > 0 && deltas[k] < deltas[k - 1]) throw ConfigError("deltas must be nondecreasing");
    }
    base.validate(s.dim());
    std::vector<int> cls(n);
    for (Index i = 0; i < n; ++i) cls[i] = s.class_index(labels[i]);

    AttackReport rep;
    rep.deltas = deltas;
    rep.outcomes.assign(deltas.size(), std::vector<ExampleOutcome>(n));
    std::vector<char> clean_ok(n);

    parallel_for(n, [&](Index i) {
        const Vector x = X.row(i).transpose();
        const int y = cls[i];
        const double clean_margin = cw_margin(s.scores(x), y);
        clean_ok[i] = clean_margin < 0.0;
        Vector prev = x;
        bool broken = false;
        const std::uint64_t ex_seed = derive_seed(base.seed, std::uint64_t(i));
        for (size_t k = 0; k < deltas.size(); ++k) {
            AttackConfig cfg = base;
            cfg.delta = deltas[k];
            cfg.seed = derive_seed(ex_seed, k);
            cfg.record_trace = false;
            ExampleOutcome& out = rep.outcomes[k][i];
            out.clean_margin = clean_margin;
            if (broken) {
                out.adversarial = prev;
                out.objective = attack_objective(s, cfg, prev, y, nullptr);
                out.correct = false;
                continue;
            }
            AttackResult r = pgd_attack(s, x, y, cfg, k == 0 ? nullptr : &prev);
            out.adversarial = r.adversarial;
            out.objective = r.objective;
            out.correct = correctly_classified(s.scores(r.adversarial), y);
            broken = !out.correct;
            prev = r.adversarial;
        }
    });

    rep.clean_accuracy = double(std::count(clean_ok.begin(), clean_ok.end(), 1)) / double(n);
    for (size_t k = 0; k < deltas.size(); ++k) {
        Index ok = 0;
        for (const auto& o : rep.outcomes[k]) ok += o.correct;
        rep.robust_accuracy.push_back(double(ok) / double(n));
    }
    return rep;
}

}  // namespace lipkernel
