#include <doctest.h>

#include "lipkernel/certify.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace lipkernel;

namespace {

Vector linspace(double a, double b, int n) { return Vector::LinSpaced(n, a, b); }

Index nearest(const Vector& g, double x) {
    Index i = 0;
    (g.array() - x).abs().minCoeff(&i);
    return i;
}

DiscreteProblem make(const Vector& grid, const Vector& f, std::vector<double> xs, std::vector<double> ws, double r) {
    DiscreteProblem p;
    p.grid = grid;
    p.f = f;
    for (double x : xs) p.support.push_back(nearest(grid, x));
    p.weights = Vector(static_cast<Index>(ws.size()));
    for (size_t i = 0; i < ws.size(); ++i) p.weights[static_cast<Index>(i)] = ws[i];
    p.r = r;
    return p;
}

Vector tent(const Vector& g) { return (1.0 - g.array().abs()).matrix(); }

// Convex envelope by brute force over all chords.
Vector envelope_oracle(const Vector& x, const Vector& f) {
    Vector e = f;
    for (Index i = 0; i < x.size(); ++i)
        for (Index a = 0; a < i; ++a)
            for (Index b = i + 1; b < x.size(); ++b) {
                const double t = (x[i] - x[a]) / (x[b] - x[a]);
                e[i] = std::min(e[i], (1 - t) * f[a] + t * f[b]);
            }
    return e;
}

}  // namespace

TEST_CASE("lipschitz_on_grid equals the all-pairs maximum") {
    Rng rng(1);
    for (int t = 0; t < 50; ++t) {
        DiscreteProblem p = random_problem(rng, 3, 30);
        double brute = 0.0;
        for (Index i = 0; i < p.grid.size(); ++i)
            for (Index j = 0; j < p.grid.size(); ++j)
                if (i != j)
                    brute = std::max(brute, (p.f[i] - p.f[j]) / (p.cost_scale * std::abs(p.grid[i] - p.grid[j])));
        CHECK(lipschitz_on_grid(p.grid, p.f, p.cost_scale) == doctest::Approx(brute).epsilon(1e-12));
    }
}

TEST_CASE("convex_envelope_1d") {
    Vector g = linspace(-1, 1, 21);
    CHECK(convex_envelope_1d(g, tent(g)).cwiseAbs().maxCoeff() < 1e-15);
    Vector sq = g.array().square();
    CHECK((convex_envelope_1d(g, sq) - sq).cwiseAbs().maxCoeff() < 1e-15);
    Rng rng(2);
    for (int t = 0; t < 50; ++t) {
        DiscreteProblem p = random_problem(rng, 2, 40);
        Vector e = convex_envelope_1d(p.grid, p.f);
        CHECK((e - envelope_oracle(p.grid, p.f)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("robust_risk_dual examples") {
    Vector g = linspace(-2, 2, 41);
    CHECK(robust_risk_dual(make(g, g, {0.0}, {1.0}, 1.0)).value == doctest::Approx(1.0).epsilon(1e-9));
    DiscreteProblem p0 = make(g, g.array().sin().matrix(), {-1.0, 0.5}, {0.3, 0.7}, 0.0);
    CHECK(robust_risk_dual(p0).value == p0.expected_loss());
    Vector h = linspace(-1, 1, 21);
    CHECK(robust_risk_dual(make(h, tent(h), {0.0}, {1.0}, 0.5)).value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("robust_risk_dual rejects bad input") {
    Vector g = linspace(-1, 1, 5);
    DiscreteProblem p = make(g, g, {0.0}, {1.0}, -1.0);
    CHECK_THROWS_AS(robust_risk_dual(p), std::invalid_argument);
    p.r = 1.0;
    p.weights[0] = 0.5;
    CHECK_THROWS_AS(robust_risk_dual(p), std::invalid_argument);
}

TEST_CASE("robust_risk_primal examples") {
    Vector g = linspace(-2, 2, 41);
    CHECK(robust_risk_primal(make(g, g, {-1.0, 1.0}, {0.5, 0.5}, 1.0)) == doctest::Approx(1.0).epsilon(1e-12));
    Vector f = (g.array() * 3.0).sin().matrix();
    DiscreteProblem big = make(g, f, {0.0}, {1.0}, 100.0);
    CHECK(robust_risk_primal(big) == doctest::Approx(f.maxCoeff()).epsilon(1e-12));
    Rng rng(3);
    DiscreteProblem many = random_problem(rng, 5, 64);
    many.support.resize(9, 0);
    many.weights = Vector::Constant(9, 1.0 / 9);
    CHECK_THROWS_AS(robust_risk_primal(many), std::invalid_argument);
}

TEST_CASE("dual and primal agree on random instances") {
    Rng rng(4);
    for (int t = 0; t < 200; ++t) {
        DiscreteProblem p = random_problem(rng, 5, 64);
        CHECK(std::abs(robust_risk_dual(p).value - robust_risk_primal(p)) <= 1e-6);
    }
}

TEST_CASE("gap_delta examples") {
    Vector h = linspace(-1, 1, 21);
    GapReport a = gap_delta(make(h, tent(h), {0.0}, {1.0}, 0.5));
    CHECK(a.delta == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(a.delta_bound == doctest::Approx(0.5).epsilon(1e-12));

    GapReport b = gap_delta(make(h, tent(h), {-1.0, 1.0}, {0.5, 0.5}, 0.5));
    CHECK(std::abs(b.delta) <= 1e-9);
    CHECK(b.delta_bound == doctest::Approx(0.5).epsilon(1e-12));

    // convex f = x^2 with the budget spent inside the steepest segment
    Vector g = linspace(-2, 2, 41);
    Vector sq = g.array().square();
    const double hstep = g[40] - g[39];
    GapReport c = gap_delta(make(g, sq, {g[39]}, {1.0}, 0.5 * hstep));
    CHECK(std::abs(c.delta) <= 1e-6);
    CHECK(std::abs(c.delta_bound) <= 1e-6);
}

TEST_CASE("bounded grids without tail room can exceed the unbounded-domain bound") {
    // f = x^2, mu = delta_0: the steepest slope only exists at the boundary,
    // so transport cannot realise r * Lip and delta > bound = 0.
    Vector g = linspace(-2, 2, 41);
    GapReport c = gap_delta(make(g, g.array().square(), {0.0}, {1.0}, 1.0));
    CHECK(c.delta_bound == doctest::Approx(0.0));
    CHECK(c.delta > 1.0);
}

TEST_CASE("robust risk is sandwiched between E f and E f + r Lip") {
    Rng rng(5);
    for (int t = 0; t < 200; ++t) {
        DiscreteProblem p = random_problem(rng, 5, 64);
        GapReport g = gap_delta(p);
        CHECK(g.robust >= g.expected - 1e-12);
        CHECK(g.robust <= g.regularised + 1e-9);
    }
}

TEST_CASE("convex family attains E f + r Lip") {
    Rng rng(6);
    for (int t = 0; t < 100; ++t) {
        DiscreteProblem p = random_convex_problem(rng);
        GapReport g = gap_delta(p);
        CHECK(std::abs(g.robust - g.regularised) <= 1e-6);
        CHECK(std::abs(g.delta_bound) <= 1e-9);
    }
}

TEST_CASE("nonconvex family obeys the gap bound") {
    Rng rng(7);
    for (int t = 0; t < 100; ++t) {
        DiscreteProblem p = random_nonconvex_problem(rng);
        GapReport g = gap_delta(p);
        CHECK(g.delta >= -1e-9);
        CHECK(g.delta <= g.delta_bound + 1e-9);
    }
}

TEST_CASE("Dirac at the argmax is tight") {
    Rng rng(8);
    for (int t = 0; t < 100; ++t) {
        DiscreteProblem p = dirac_tent_problem(rng);
        GapReport g = gap_delta(p);
        CHECK(std::abs(g.delta - p.r * g.lip) <= 1e-6);
        CHECK(convex_envelope_1d(p.grid, p.f).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("scatter csv format") {
    std::vector<ScatterPoint> pts{{0, 0.1, 0.2}, {1, 1.0 / 3.0, 2.0}};
    std::string csv = scatter_csv(pts);
    CHECK(csv.rfind("model_id,adversarial_risk,regularised_risk\n", 0) == 0);
    CHECK(csv.find('\r') == std::string::npos);
    CHECK(csv.find("1,0.33333333333333331,2\n") != std::string::npos);
    CHECK(pearson(pts) == doctest::Approx(1.0));
}

TEST_CASE("oracle suites") {
    for (SuiteKind k : {SuiteKind::Convex, SuiteKind::Nonconvex, SuiteKind::Dirac, SuiteKind::Equivalence}) {
        CAPTURE(to_string(k));
        const SuiteResult r = run_suite(k, 60, 17);
        CHECK(r.instances == 60);
        CHECK(r.failures == 0);
        CHECK(r.passed());
        CHECK(r.worst <= r.tolerance);
        const SuiteResult again = run_suite(k, 60, 17);
        CHECK(again.worst == r.worst);
    }
    CHECK(run_suite(SuiteKind::Nonconvex, 1, 0).tolerance == 1e-9);
    CHECK(run_suite(SuiteKind::Convex, 1, 0).tolerance == 1e-6);
    CHECK_THROWS_AS(run_suite(SuiteKind::Convex, 0, 0), ConfigError);
}
