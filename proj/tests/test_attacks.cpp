#include <doctest.h>

#include "lipkernel/attacks.hpp"
#include "lipkernel/parallel.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace lipkernel;

namespace {

Model random_model(Rng& rng, int d, int m, double sigma) {
    Model f;
    f.kernel = KernelSpec::gaussian(sigma, d);
    f.anchors = oracle::uniform_points(rng, m, d, 0, 1);
    f.coeffs = oracle::uniform_vector(rng, m, -2, 2);
    return f;
}

MultiModel random_multi(Rng& rng, int d, int m, int C) {
    MultiModel ms;
    for (int c = 0; c < C; ++c) ms.push_back(random_model(rng, d, m, 0.3));
    return ms;
}

double dist(const Vector& a, const Vector& b, Norm n) { return vector_norm(a - b, n); }

}  // namespace

TEST_CASE("cw_margin examples") {
    CHECK(cw_margin(Vector{{3.0, 1.0}}, 0) == -2.0);
    CHECK(cw_margin(Vector{{1.0, 1.0}}, 0) == 0.0);
    CHECK(cw_margin(Vector{{0.0, 5.0, 1.0}}, 1) == -4.0);
    CHECK_THROWS_AS(cw_margin(Vector{{1.0}}, 0), ConfigError);
    CHECK_THROWS_AS(cw_margin(Vector{{1.0, 2.0}}, 2), ConfigError);
    CHECK_FALSE(correctly_classified(Vector{{1.0, 1.0}}, 0));
}

TEST_CASE("binary label mapping") {
    LinearScorer s(Vector{{1.0, -1.0}});
    CHECK(s.class_index(1) == 1);
    CHECK(s.class_index(-1) == 0);
    CHECK(s.label_of(0) == -1);
    CHECK_THROWS_AS(s.class_index(0), ConfigError);
    // binary margin is -y f
    const Vector x{{0.7, 0.2}};
    CHECK(cw_margin(s.scores(x), s.class_index(1)) == doctest::Approx(-0.5));
    CHECK(cw_margin(s.scores(x), s.class_index(-1)) == doctest::Approx(0.5));
}

TEST_CASE("delta zero returns the input") {
    Rng rng(1);
    KernelScorer s(random_model(rng, 3, 10, 0.4));
    AttackConfig cfg;
    cfg.random_init = true;
    const Vector x{{0.2, 0.5, 0.9}};
    CHECK(pgd_attack(s, x, 1, cfg).adversarial == x);
}

TEST_CASE("linear model analytic optima") {
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 2 + trial % 6;
        Vector w = oracle::uniform_vector(rng, d, -1, 1);
        LinearScorer s(w, 0.1);
        const Vector x = Vector::Constant(d, 0.5);
        for (int label : {-1, 1}) {
            AttackConfig cfg;
            cfg.delta = 0.1;
            cfg.norm = Norm::L2;
            Vector p = pgd_attack(s, x, s.class_index(label), cfg).adversarial - x;
            CHECK((p - (-label * cfg.delta * w / w.norm())).cwiseAbs().maxCoeff() <= 1e-6);
            cfg.norm = Norm::Linf;
            p = pgd_attack(s, x, s.class_index(label), cfg).adversarial - x;
            Vector sgn = w.unaryExpr([](double v) { return double((v > 0) - (v < 0)); });
            CHECK((p - (-label * cfg.delta * sgn)).cwiseAbs().maxCoeff() <= 1e-6);
        }
    }
}

TEST_CASE("ball and box projection is the Euclidean projection") {
    Rng rng(3);
    const Box box = Box::unit(4);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 200; ++trial) {
        Vector x = box.sample(rng);
        if (trial % 3 == 0) x[0] = 0.0;
        Vector z = x + 0.5 * oracle::uniform_vector(rng, 4, -1, 1);
        for (Norm n : {Norm::L2, Norm::Linf}) {
            const double delta = 0.05 + 0.3 * (trial % 5) / 4.0;
            const Vector p = project_ball_box(z, x, delta, n, box);
            CHECK(dist(p, x, n) <= delta + 1e-12);
            CHECK(box.contains(p, 0.0));
            // variational inequality <z - p, q - p> <= 0 for feasible q
            double worst = -1.0;
            for (int k = 0; k < 300; ++k) {
                Vector q = x + delta * oracle::uniform_vector(rng, 4, -1, 1);
                if (n == Norm::L2 && (q - x).norm() > delta) continue;
                q = box.clamp(q);
                worst = std::max(worst, (z - p).dot(q - p));
            }
            CHECK(worst <= 1e-9);
        }
    }
}

TEST_CASE("traces respect ball and box") {
    Rng rng(4);
    KernelScorer s(random_model(rng, 3, 20, 0.3));
    KernelScorer multi(random_multi(rng, 3, 15, 4));
    for (int trial = 0; trial < 20; ++trial) {
        Vector x = Box::unit(3).sample(rng);
        x[trial % 3] = trial % 2 ? 1.0 : 0.0;
        for (Norm n : {Norm::L2, Norm::Linf}) {
            for (auto obj : {AttackObjective::CWMargin, AttackObjective::CrossEntropy}) {
                AttackConfig cfg;
                cfg.norm = n;
                cfg.delta = 0.3;
                cfg.steps = 30;
                cfg.random_init = true;
                cfg.objective = obj;
                cfg.seed = trial;
                cfg.record_trace = true;
                for (const Scorer* sc : {static_cast<const Scorer*>(&s), static_cast<const Scorer*>(&multi)}) {
                    auto r = pgd_attack(*sc, x, trial % sc->classes(), cfg);
                    REQUIRE(r.trace.size() == 31u);
                    for (const auto& p : r.trace) {
                        CHECK(dist(p, x, n) <= cfg.delta + 1e-9);
                        CHECK(Box::unit(3).contains(p, 1e-9));
                    }
                    CHECK(r.objective >= r.initial_objective);
                    CHECK(r.objective == *std::max_element(r.trace_objective.begin(), r.trace_objective.end()));
                }
            }
        }
    }
}

TEST_CASE("objective gradients match finite differences") {
    Rng rng(5);
    KernelScorer s(random_multi(rng, 2, 10, 3));
    for (auto obj : {AttackObjective::CWMargin, AttackObjective::CrossEntropy}) {
        for (std::optional<int> tgt : {std::optional<int>{}, std::optional<int>{2}}) {
            AttackConfig cfg;
            cfg.objective = obj;
            cfg.targeted = tgt;
            for (int k = 0; k < 20; ++k) {
                const Vector x = Box::unit(2).sample(rng);
                Vector g;
                attack_objective(s, cfg, x, 0, &g);
                auto f = [&](const Vector& z) { return attack_objective(s, cfg, z, 0, nullptr); };
                CHECK((g - oracle::fd_gradient(f, x, 1e-6)).norm() <= 1e-5 * std::max(1.0, g.norm()));
            }
        }
    }
}

TEST_CASE("ten steps beat one step") {
    Rng rng(6);
    KernelScorer s(random_model(rng, 2, 30, 0.25));
    for (Norm n : {Norm::L2, Norm::Linf}) {
        int wins = 0;
        const int N = 200;
        for (int i = 0; i < N; ++i) {
            const Vector x = Box::unit(2).sample(rng);
            AttackConfig cfg;
            cfg.norm = n;
            cfg.delta = 0.1;
            cfg.steps = 1;
            const double one = pgd_attack(s, x, 1, cfg).objective;
            cfg.steps = 10;
            const double ten = pgd_attack(s, x, 1, cfg).objective;
            wins += ten >= one;
        }
        CHECK(wins >= 0.95 * N);
    }
}

TEST_CASE("targeted attack moves toward the target") {
    Matrix W{{1.0, 0.0}, {0.0, 1.0}, {-1.0, -1.0}};
    LinearScorer s(W, Vector{{0.0, 0.0, 0.2}});
    AttackConfig cfg;
    cfg.delta = 0.5;
    cfg.targeted = 2;
    // class 2 wins only near the origin, which is 0.42 away
    const Vector x{{0.3, 0.3}};
    CHECK_FALSE(correctly_classified(s.scores(x), 2));
    auto r = pgd_attack(s, x, 0, cfg);
    CHECK(r.objective > r.initial_objective);
    CHECK(r.success);
}

TEST_CASE("robust accuracy sweep") {
    Rng rng(7);
    KernelScorer s(random_model(rng, 2, 30, 0.3));
    const Points X = oracle::uniform_points(rng, 60, 2, 0, 1);
    std::vector<int> y(60);
    for (int i = 0; i < 60; ++i) y[i] = s.scores(X.row(i).transpose())[1] > 0 ? 1 : -1;
    y[0] = -y[0];
    for (Norm n : {Norm::L2, Norm::Linf}) {
        AttackConfig cfg;
        cfg.norm = n;
        cfg.random_init = true;
        cfg.seed = 11;
        auto rep = robust_accuracy(s, X, y, cfg, {0.0, 0.02, 0.05, 0.1, 0.2});
        CHECK(rep.robust_accuracy[0] == rep.clean_accuracy);
        CHECK(rep.clean_accuracy == doctest::Approx(59.0 / 60.0));
        for (size_t k = 1; k < rep.deltas.size(); ++k) CHECK(rep.robust_accuracy[k] <= rep.robust_accuracy[k - 1]);
        CHECK(rep.robust_accuracy.back() < rep.clean_accuracy);
        for (size_t k = 0; k < rep.deltas.size(); ++k)
            for (Index i = 0; i < 60; ++i) {
                const Vector x = X.row(i).transpose();
                CHECK(dist(rep.outcomes[k][i].adversarial, x, n) <= rep.deltas[k] + 1e-9);
            }
        // thread count does not change results
        set_thread_cap(1);
        auto one = robust_accuracy(s, X, y, cfg, {0.0, 0.05, 0.1});
        set_thread_cap(3);
        auto three = robust_accuracy(s, X, y, cfg, {0.0, 0.05, 0.1});
        set_thread_cap(0);
        for (size_t k = 0; k < 3; ++k)
            for (Index i = 0; i < 60; ++i) CHECK(one.outcomes[k][i].adversarial == three.outcomes[k][i].adversarial);
    }
    AttackConfig cfg;
    CHECK_THROWS_AS(robust_accuracy(s, X, y, cfg, {0.1, 0.05}), ConfigError);
    CHECK_THROWS_AS(robust_accuracy(s, X, y, cfg, {}), ConfigError);
}

TEST_CASE("attack config validation") {
    LinearScorer s(Vector{{1.0}});
    AttackConfig cfg;
    cfg.delta = -1;
    CHECK_THROWS_AS(pgd_attack(s, Vector{{0.5}}, 1, cfg), ConfigError);
    cfg.delta = 0.1;
    cfg.steps = 0;
    CHECK_THROWS_AS(pgd_attack(s, Vector{{0.5}}, 1, cfg), ConfigError);
    cfg.steps = 10;
    CHECK_THROWS_AS(pgd_attack(s, Vector{{1.5}}, 1, cfg), ConfigError);
    CHECK(cfg.resolved_step() == doctest::Approx(0.02));
}
