#include <doctest.h>

#include "lipkernel/dataset.hpp"
#include "lipkernel/trainer.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>

using namespace lipkernel;

namespace {

Dataset blobs(std::uint64_t seed, int classes = 2, int n = 100, double spread = 0.12) {
    return gen_synthetic(SyntheticKind::Blobs, n, classes, 2, seed, spread);
}

KernelSpec kernel_for(const Dataset& ds) { return KernelSpec::gaussian(median_bandwidth(ds.X), int(ds.dim())); }

void check_report_invariants(const TrainReport& r) {
    for (size_t i = 1; i < r.history.size(); ++i) {
        CHECK(r.history[i].n_witness == r.history[i - 1].n_witness + 1);
        CHECK(r.history[i].penalty >= r.history[i - 1].penalty);
    }
    for (const auto& h : r.history) CHECK(h.constraint_value <= r.constraint_budget * (1 + 1e-3));
}

}  // namespace

TEST_CASE("loss values") {
    CHECK(loss_value(LossKind::Hinge, Vector{{2.0}}, 1) == 0.0);
    CHECK(loss_value(LossKind::Hinge, Vector{{0.0}}, 1) == 1.0);
    CHECK(loss_value(LossKind::Hinge, Vector{{0.0}}, -1) == 1.0);
    CHECK(loss_value(LossKind::Hinge, Vector{{0.5}}, -1) == 1.5);
    CHECK(loss_value(LossKind::CrammerSinger, Vector{{0.3, 0.3, 0.3}}, 1) == 1.0);
    CHECK(loss_value(LossKind::CrammerSinger, Vector{{3.0, 0.5, 1.0}}, 0) == 0.0);
    CHECK(loss_value(LossKind::CrammerSinger, Vector{{0.0, 2.0, 1.0}}, 2) == 2.0);
    CHECK_THROWS_AS(loss_value(LossKind::Hinge, Vector{{0.0}}, 0), ConfigError);
    CHECK_THROWS_AS(loss_value(LossKind::CrammerSinger, Vector{{0.0, 1.0}}, 2), ConfigError);
    CHECK_THROWS_AS(loss_value(LossKind::Hinge, Vector{{NAN}}, 1), ConfigError);
}

TEST_CASE("landmark features") {
    const KernelSpec k = KernelSpec::gaussian(0.5, 2);
    Points one(1, 2);
    one << 0.3, 0.7;
    CHECK(landmark_features(k, one, one.row(0).transpose())[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(landmark_features(k, Points(0, 2), Vector::Zero(2)), ConfigError);

    Rng rng(1);
    const Points Z = oracle::uniform_points(rng, 30, 2, 0, 1);
    const LandmarkMap map = LandmarkMap::build(k, Z);
    const Matrix Phi = map.features_rows(Z);
    CHECK((Phi * Phi.transpose() - gram(k, Z)).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((map.features(Vector(Z.row(4).transpose())) - Phi.row(4).transpose()).norm() <= 1e-12);

    // Nystrom error at a fixed pair falls with nested landmark sets
    const Points all = oracle::uniform_points(rng, 64, 2, 0, 1);
    const Vector x{{0.21, 0.83}}, y{{0.64, 0.35}};
    std::vector<double> err;
    for (int m : {4, 16, 64}) {
        const LandmarkMap lm = LandmarkMap::build(KernelSpec::gaussian(0.3, 2), all.topRows(m));
        err.push_back(std::abs(eval_kernel(lm.kernel, x, y) - lm.features(x).dot(lm.features(y))));
    }
    CHECK(err[1] < err[0]);
    CHECK(err[2] < err[1]);
}

TEST_CASE("greedy witness") {
    for (int d : {1, 2, 3}) {
        Model bump;
        bump.kernel = KernelSpec::gaussian(1.0, d);
        bump.anchors = Points::Zero(1, d);
        bump.coeffs = Vector::Ones(1);
        const Box dom = Box::cube(d, -3, 3);
        const Vector w = greedy_witness(bump, dom, 7);
        CHECK(std::abs(w.norm() - 1.0) <= 0.02);
        CHECK(greedy_witness(bump, dom, 7) == w);
        // dense grid oracle in 1-D: |f'(x)| = |x| e^{-x^2/2} peaks at |x| = 1
        if (d == 1) {
            double best = 0, arg = 0;
            for (int i = 0; i <= 60000; ++i) {
                const double x = -3 + 6.0 * i / 60000;
                const double g = std::abs(x) * std::exp(-x * x / 2);
                if (g > best) best = g, arg = std::abs(x);
            }
            CHECK(std::abs(std::abs(w[0]) - arg) <= 0.02);
        }
        Model zero = bump;
        zero.coeffs.setZero();
        const Vector z = greedy_witness(zero, dom, 3);
        CHECK(dom.contains(z));
        CHECK(greedy_witness(zero, dom, 3) == z);
    }
}

TEST_CASE("generous budget separates two points") {
    Points X(2, 1);
    X << 0.2, 0.8;
    TrainConfig cfg;
    cfg.L = 100;
    for (auto mode : {ConstraintMode::BruteForce, ConstraintMode::HolisticNystrom, ConstraintMode::CoordNystrom}) {
        cfg.constraint_mode = mode;
        auto r = train_binary(X, {-1, 1}, KernelSpec::gaussian(0.3, 1), cfg);
        CHECK(r.report.train_accuracy == 1.0);
        CHECK(r.report.converged);
        CHECK(r.report.final_constraint <= cfg.L * cfg.L);
        CHECK(r.report.mean_loss < 0.05);
    }
}

TEST_CASE("vanishing budget forces a flat model") {
    const Dataset ds = blobs(2);
    TrainConfig cfg;
    cfg.L = 1e-6;
    cfg.outer_iters = 5;
    auto r = train_binary(ds.X, ds.labels, kernel_for(ds), cfg);
    CHECK(std::abs(r.report.mean_loss - 1.0) <= 0.05);
    CHECK(r.report.history.back().lip_estimate <= 1.05e-6);
}

TEST_CASE("binary training honours the Lipschitz budget in every mode") {
    const Dataset ds = blobs(3);
    const KernelSpec k = kernel_for(ds);
    for (auto mode : {ConstraintMode::BruteForce, ConstraintMode::HolisticNystrom, ConstraintMode::CoordNystrom}) {
        CAPTURE(to_string(mode));
        TrainConfig cfg;
        cfg.L = 2.0;
        cfg.constraint_mode = mode;
        cfg.seed = 5;
        auto r = train_binary(ds.X, ds.labels, k, cfg);
        CHECK(r.report.converged);
        CHECK(r.report.history.back().lip_estimate <= cfg.L * 1.05);
        CHECK(empirical_lipschitz(r.model, Box::unit(2), 20, 99).value <= cfg.L * 1.05);
        CHECK(r.report.train_accuracy >= 0.9);
        check_report_invariants(r.report);
    }
}

TEST_CASE("Linf budget for binary training") {
    const Dataset ds = blobs(4);
    TrainConfig cfg;
    cfg.L = 2.0;
    cfg.lip_norm = Norm::Linf;
    for (auto mode : {ConstraintMode::BruteForce, ConstraintMode::HolisticNystrom}) {
        cfg.constraint_mode = mode;
        auto r = train_binary(ds.X, ds.labels, kernel_for(ds), cfg);
        CHECK(r.report.converged);
        CHECK(empirical_lipschitz(r.model, Box::unit(2), 20, 99, Norm::L1).value <= cfg.L * 1.05);
        check_report_invariants(r.report);
    }
    cfg.constraint_mode = ConstraintMode::CoordNystrom;
    CHECK_THROWS_AS(train_binary(ds.X, ds.labels, kernel_for(ds), cfg), ConfigError);
}

TEST_CASE("training is deterministic") {
    const Dataset ds = blobs(6);
    TrainConfig cfg;
    cfg.L = 1.5;
    cfg.seed = 9;
    auto a = train_binary(ds.X, ds.labels, kernel_for(ds), cfg);
    auto b = train_binary(ds.X, ds.labels, kernel_for(ds), cfg);
    REQUIRE(a.report.history.size() == b.report.history.size());
    for (size_t i = 0; i < a.report.history.size(); ++i) {
        CHECK(a.report.history[i].lip_estimate == b.report.history[i].lip_estimate);
        CHECK(a.report.history[i].objective == b.report.history[i].objective);
    }
    CHECK(a.model.coeffs == b.model.coeffs);
}

TEST_CASE("greedy witnesses need no more outer iterations than random ones") {
    std::vector<int> greedy, random;
    for (std::uint64_t s = 0; s < 5; ++s) {
        // a narrow kernel makes the gradient peaky, so 15 random witnesses miss it
        const Dataset ds = blobs(10 + s);
        const KernelSpec k = KernelSpec::gaussian(0.1, 2);
        TrainConfig cfg;
        cfg.L = 1.0;
        cfg.seed = s;
        cfg.outer_iters = 25;
        cfg.witness_mode = WitnessMode::Greedy;
        greedy.push_back(train_binary(ds.X, ds.labels, k, cfg).report.outer_iterations);
        cfg.witness_mode = WitnessMode::Random;
        random.push_back(train_binary(ds.X, ds.labels, k, cfg).report.outer_iterations);
    }
    std::sort(greedy.begin(), greedy.end());
    std::sort(random.begin(), random.end());
    CHECK(greedy[2] <= random[2]);
}

TEST_CASE("multiclass training") {
    SUBCASE("generous budget fits three blobs") {
        const Dataset ds = blobs(20, 3, 40, 0.06);
        TrainConfig cfg;
        cfg.loss = LossKind::CrammerSinger;
        cfg.L = 50;
        auto r = train_multiclass(ds.X, ds.labels, kernel_for(ds), cfg);
        CHECK(r.models.size() == 3u);
        CHECK(r.report.train_accuracy >= 0.95);
    }
    SUBCASE("a tight budget still leaves the all-zero start") {
        // every wrong class ties at W = 0
        const Dataset ds = gen_synthetic(SyntheticKind::Blobs, 50, 3, 2, 1, 0.1);
        TrainConfig cfg;
        cfg.loss = LossKind::CrammerSinger;
        cfg.L = 1.0;
        cfg.seed = 0;
        auto r = train_multiclass(ds.X, ds.labels, kernel_for(ds), cfg);
        CHECK(r.report.mean_loss < 0.95);
        CHECK(r.report.train_accuracy >= 0.85);
        CHECK(r.report.final_constraint > 0.5 * r.report.constraint_budget);
    }
    SUBCASE("two classes respect the spectral budget") {
        Dataset ds = blobs(21, 2, 50);
        for (int& v : ds.labels) v = v > 0 ? 1 : 0;
        for (auto mode : {ConstraintMode::BruteForce, ConstraintMode::HolisticNystrom}) {
            TrainConfig cfg;
            cfg.loss = LossKind::CrammerSinger;
            cfg.L = 1.0;
            cfg.constraint_mode = mode;
            auto r = train_multiclass(ds.X, ds.labels, kernel_for(ds), cfg);
            CHECK(r.report.converged);
            CHECK(empirical_lipschitz_multiclass(r.models, Box::unit(2), 20, 3).value <= cfg.L * 1.05);
            check_report_invariants(r.report);
        }
    }
    SUBCASE("Linf budget of 1000 stays inactive on tiny data") {
        Points X(3, 2);
        X << 0.1, 0.1, 0.5, 0.9, 0.9, 0.2;
        TrainConfig cfg;
        cfg.loss = LossKind::CrammerSinger;
        cfg.lip_norm = Norm::Linf;
        cfg.L = 1000;
        auto r = train_multiclass(X, {0, 1, 2}, KernelSpec::gaussian(0.3, 2), cfg);
        CHECK(r.report.converged);
        CHECK(r.report.history.size() == 1u);
        CHECK_FALSE(r.report.history[0].rescaled);
        CHECK(r.report.history[0].penalty == cfg.penalty_init);
        CHECK(r.report.final_constraint < cfg.L);
    }
    SUBCASE("multiclass Linf respects the per-class budget") {
        const Dataset ds = blobs(22, 3, 30);
        TrainConfig cfg;
        cfg.loss = LossKind::CrammerSinger;
        cfg.lip_norm = Norm::Linf;
        cfg.L = 2.0;
        auto r = train_multiclass(ds.X, ds.labels, kernel_for(ds), cfg);
        CHECK(r.report.converged);
        CHECK(empirical_lipschitz_multiclass(r.models, Box::unit(2), 20, 3, Norm::L1).value <= cfg.L * 1.05);
    }
}

TEST_CASE("training configuration errors") {
    const Dataset ds = blobs(30, 2, 10);
    const KernelSpec k = kernel_for(ds);
    TrainConfig cfg;
    cfg.L = 0;
    CHECK_THROWS_AS(train_binary(ds.X, ds.labels, k, cfg), ConfigError);
    cfg.L = 1;
    cfg.penalty_growth = 1.0;
    CHECK_THROWS_AS(train_binary(ds.X, ds.labels, k, cfg), ConfigError);
    cfg.penalty_growth = 10;
    cfg.outer_iters = 0;
    CHECK_THROWS_AS(train_binary(ds.X, ds.labels, k, cfg), ConfigError);
    cfg.outer_iters = 5;
    CHECK_THROWS_AS(train_binary(ds.X, std::vector<int>(20, 0), k, cfg), ConfigError);
    cfg.loss = LossKind::CrammerSinger;
    cfg.constraint_mode = ConstraintMode::CoordNystrom;
    CHECK_THROWS_AS(train_multiclass(ds.X, std::vector<int>(20, 1), k, cfg), ConfigError);
    cfg.constraint_mode = ConstraintMode::HolisticNystrom;
    CHECK_THROWS_AS(train_multiclass(ds.X, std::vector<int>(20, 0), k, cfg), ConfigError);
    cfg.loss = LossKind::Hinge;
    cfg.constraint_mode = ConstraintMode::CoordNystrom;
    CHECK_THROWS_AS(train_binary(ds.X, ds.labels, KernelSpec::inverse(2), cfg), ConfigError);
}
