#include "lipkernel/certify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace lipkernel {

void DiscreteProblem::validate() const {
    if (grid.size() < 1) throw std::invalid_argument("problem: empty grid");
    if (f.size() != grid.size()) throw std::invalid_argument("problem: f and grid differ in length");
    for (Index i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("problem: grid must be strictly increasing");
    if (!grid.allFinite() || !f.allFinite()) throw std::invalid_argument("problem: non-finite values");
    if (support.empty() || static_cast<Index>(support.size()) != weights.size())
        throw std::invalid_argument("problem: support and weights differ in length");
    for (Index s : support)
        if (s < 0 || s >= grid.size()) throw std::invalid_argument("problem: support index off grid");
    if ((weights.array() < 0).any()) throw std::invalid_argument("problem: negative weight");
    if (std::abs(weights.sum() - 1.0) > 1e-12) throw std::invalid_argument("problem: weights must sum to 1");
    if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("problem: budget r must be >= 0");
    if (!(cost_scale > 0.0)) throw std::invalid_argument("problem: cost_scale must be positive");
}

double DiscreteProblem::expected_loss() const {
    double e = 0.0;
    for (size_t i = 0; i < support.size(); ++i) e += weights[static_cast<Index>(i)] * f[support[i]];
    return e;
}

double lipschitz_on_grid(const Vector& grid, const Vector& f, double cost_scale) {
    if (grid.size() != f.size()) throw std::invalid_argument("lipschitz_on_grid: length mismatch");
    double L = 0.0;
    for (Index i = 1; i < grid.size(); ++i)
        L = std::max(L, std::abs(f[i] - f[i - 1]) / (cost_scale * (grid[i] - grid[i - 1])));
    return L;
}

Vector convex_envelope_1d(const Vector& grid, const Vector& f) {
    const Index n = grid.size();
    if (f.size() != n) throw std::invalid_argument("convex_envelope_1d: length mismatch");
    std::vector<Index> hull;
    for (Index i = 0; i < n; ++i) {
        while (hull.size() >= 2) {
            const Index a = hull[hull.size() - 2], b = hull.back();
            // drop b if it lies on or above segment a -> i
            const double cross = (grid[b] - grid[a]) * (f[i] - f[a]) - (f[b] - f[a]) * (grid[i] - grid[a]);
            if (cross <= 0.0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(i);
    }
    Vector env(n);
    for (size_t h = 0; h + 1 < hull.size(); ++h) {
        const Index a = hull[h], b = hull[h + 1];
        for (Index i = a; i <= b; ++i) {
            const double t = (grid[i] - grid[a]) / (grid[b] - grid[a]);
            env[i] = (i == a) ? f[a] : (i == b ? f[b] : f[a] + t * (f[b] - f[a]));
        }
    }
    if (hull.size() == 1) env[0] = f[0];
    return env;
}

namespace {

double dual_objective(const DiscreteProblem& p, double lambda) {
    double s = 0.0;
    for (size_t i = 0; i < p.support.size(); ++i) {
        const double x = p.grid[p.support[i]];
        double best = -std::numeric_limits<double>::infinity();
        for (Index j = 0; j < p.grid.size(); ++j)
            best = std::max(best, p.f[j] - lambda * p.cost_scale * std::abs(x - p.grid[j]));
        s += p.weights[static_cast<Index>(i)] * best;
    }
    return lambda * p.r + s;
}

}  // namespace

DualSolution robust_risk_dual(const DiscreteProblem& p) {
    p.validate();
    const double lip = lipschitz_on_grid(p.grid, p.f, p.cost_scale);
    DualSolution best{dual_objective(p, 0.0), 0.0};
    if (lip == 0.0) return best;
    const int scan = 512;
    const double hi = 2.0 * lip;
    int kbest = 0;
    for (int k = 1; k < scan; ++k) {
        const double lam = hi * k / (scan - 1);
        const double v = dual_objective(p, lam);
        if (v < best.value) {
            best = {v, lam};
            kbest = k;
        }
    }
    double a = hi * std::max(0, kbest - 1) / (scan - 1);
    double b = hi * std::min(scan - 1, kbest + 1) / (scan - 1);
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = dual_objective(p, c), fd = dual_objective(p, d);
    const double tol = 1e-10 * std::max(1.0, lip);
    while (b - a > tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = dual_objective(p, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = dual_objective(p, d);
        }
    }
    for (double lam : {a, b, c, d}) {
        const double v = dual_objective(p, lam);
        if (v < best.value) best = {v, lam};
    }
    return best;
}

double robust_risk_primal(const DiscreteProblem& p, int max_support, int max_grid) {
    p.validate();
    if (static_cast<int>(p.support.size()) > max_support) throw std::invalid_argument("primal: support too large");
    if (p.grid.size() > max_grid) throw std::invalid_argument("primal: grid too large");
    struct Step {
        double efficiency, cost, gain;
    };
    std::vector<Step> steps;
    const Index n = p.grid.size();
    for (size_t i = 0; i < p.support.size(); ++i) {
        const double mu = p.weights[static_cast<Index>(i)];
        if (mu == 0.0) continue;
        const double x = p.grid[p.support[i]];
        // (cost, value) of moving all of this atom to grid point j
        std::vector<std::pair<double, double>> pts;
        for (Index j = 0; j < n; ++j) pts.emplace_back(p.cost_scale * std::abs(x - p.grid[j]), p.f[j]);
        std::sort(pts.begin(), pts.end(), [](const auto& u, const auto& v) {
            return u.first < v.first || (u.first == v.first && u.second > v.second);
        });
        // concave majorant from the zero-cost point
        std::vector<std::pair<double, double>> hull;
        for (const auto& q : pts) {
            if (!hull.empty() && q.first == hull.back().first) continue;
            while (hull.size() >= 2) {
                const auto& A = hull[hull.size() - 2];
                const auto& B = hull.back();
                const double cross = (B.first - A.first) * (q.second - A.second) - (B.second - A.second) * (q.first - A.first);
                if (cross >= 0.0)
                    hull.pop_back();
                else
                    break;
            }
            hull.push_back(q);
        }
        for (size_t h = 0; h + 1 < hull.size(); ++h) {
            const double dc = hull[h + 1].first - hull[h].first;
            const double df = hull[h + 1].second - hull[h].second;
            if (df <= 0.0) break;
            steps.push_back({df / dc, mu * dc, mu * df});
        }
    }
    std::stable_sort(steps.begin(), steps.end(), [](const Step& u, const Step& v) { return u.efficiency > v.efficiency; });
    double value = p.expected_loss();
    double budget = p.r;
    for (const Step& s : steps) {
        if (budget <= 0.0) break;
        if (s.cost <= budget) {
            value += s.gain;
            budget -= s.cost;
        } else {
            value += s.gain * (budget / s.cost);  // split the tied atom at the boundary
            budget = 0.0;
        }
    }
    return value;
}

GapReport gap_delta(const DiscreteProblem& p) {
    p.validate();
    GapReport g;
    g.expected = p.expected_loss();
    g.lip = lipschitz_on_grid(p.grid, p.f, p.cost_scale);
    g.robust = robust_risk_dual(p).value;
    g.regularised = g.expected + p.r * g.lip;
    g.delta = g.regularised - g.robust;
    Vector env = convex_envelope_1d(p.grid, p.f);
    g.lip_envelope = lipschitz_on_grid(p.grid, env, p.cost_scale);
    Vector gap = p.f - env;
    g.rho = gap.maxCoeff();
    for (size_t i = 0; i < p.support.size(); ++i) g.envelope_gap_integral += p.weights[static_cast<Index>(i)] * gap[p.support[i]];
    g.delta_bound = p.r * g.lip - std::max(p.r * g.lip_envelope - g.envelope_gap_integral, 0.0);
    return g;
}

namespace {

Vector random_grid(Rng& rng, int n) {
    std::uniform_real_distribution<double> u(0.2, 1.0);
    Vector x(n);
    x[0] = 0.0;
    for (int i = 1; i < n; ++i) x[i] = x[i - 1] + u(rng);
    // rescale onto [-2, 2]
    const double span = x[n - 1] > 0 ? x[n - 1] : 1.0;
    for (int i = 0; i < n; ++i) x[i] = -2.0 + 4.0 * x[i] / span;
    return x;
}

void random_measure(Rng& rng, DiscreteProblem& p, int k, std::vector<Index> forced = {}) {
    std::vector<Index> idx(static_cast<size_t>(p.grid.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    p.support = forced;
    for (Index i : idx) {
        if (static_cast<int>(p.support.size()) >= k) break;
        if (std::find(p.support.begin(), p.support.end(), i) == p.support.end()) p.support.push_back(i);
    }
    std::exponential_distribution<double> e(1.0);
    p.weights.resize(static_cast<Index>(p.support.size()));
    for (Index i = 0; i < p.weights.size(); ++i) p.weights[i] = e(rng) + 1e-3;
    p.weights /= p.weights.sum();
    // renormalise so the sum is 1 to rounding
    p.weights[p.weights.size() - 1] = 1.0 - p.weights.head(p.weights.size() - 1).sum();
}

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

// Convex piecewise-linear values on the grid whose last t..n-1 segment has raw
// slope S, the largest in absolute value.
struct TailShape {
    Vector f;
    Index tail_start;
    double slope;
};

TailShape convex_tail(Rng& rng, const Vector& x) {
    const Index n = x.size();
    TailShape t;
    t.slope = uniform(rng, 0.5, 3.0);
    t.tail_start = uniform_int(rng, static_cast<int>(n / 2), static_cast<int>(n - 3));
    std::vector<double> core(static_cast<size_t>(t.tail_start));
    for (double& s : core) s = uniform(rng, -0.9, 0.9) * t.slope;
    std::sort(core.begin(), core.end());
    t.f.resize(n);
    t.f[0] = uniform(rng, -1.0, 1.0);
    for (Index k = 0; k + 1 < n; ++k) {
        const double s = k < t.tail_start ? core[static_cast<size_t>(k)] : t.slope;
        t.f[k + 1] = t.f[k] + s * (x[k + 1] - x[k]);
    }
    return t;
}

void finish_tail_problem(Rng& rng, DiscreteProblem& p, Index tail_start, int max_support) {
    const Index n = p.grid.size();
    const Index anchor = uniform_int(rng, static_cast<int>(tail_start), static_cast<int>(n - 2));
    random_measure(rng, p, uniform_int(rng, 1, max_support), {anchor});
    double room = 0.0;
    for (size_t i = 0; i < p.support.size(); ++i)
        if (p.support[i] >= tail_start)
            room += p.weights[static_cast<Index>(i)] * (p.grid[n - 1] - p.grid[p.support[i]]);
    room *= p.cost_scale;
    p.r = uniform(rng, 0.01, 1.0) * room;
}

void maybe_mirror(Rng& rng, DiscreteProblem& p) {
    if (std::bernoulli_distribution(0.5)(rng)) {
        const Index n = p.grid.size();
        p.grid = (-p.grid).reverse().eval();
        p.f = p.f.reverse().eval();
        for (Index& s : p.support) s = n - 1 - s;
    }
}

}  // namespace

DiscreteProblem random_problem(Rng& rng, int max_support, int max_grid) {
    DiscreteProblem p;
    const int n = uniform_int(rng, 2, max_grid);
    p.grid = random_grid(rng, n);
    p.f.resize(n);
    const double a1 = uniform(rng, -2, 2), a2 = uniform(rng, -1, 1), w1 = uniform(rng, 0.5, 4), w2 = uniform(rng, 2, 8);
    for (int i = 0; i < n; ++i)
        p.f[i] = a1 * std::sin(w1 * p.grid[i]) + a2 * std::cos(w2 * p.grid[i]) + uniform(rng, -0.3, 0.3);
    random_measure(rng, p, uniform_int(rng, 1, std::min(max_support, n)));
    p.r = uniform(rng, 0.0, 2.0);
    p.cost_scale = uniform(rng, 0.5, 2.0);
    return p;
}

DiscreteProblem random_convex_problem(Rng& rng, int max_support, int max_grid) {
    DiscreteProblem p;
    const int n = uniform_int(rng, std::min(8, max_grid), max_grid);
    p.grid = random_grid(rng, n);
    TailShape t = convex_tail(rng, p.grid);
    p.f = t.f;
    p.cost_scale = uniform(rng, 0.5, 2.0);
    finish_tail_problem(rng, p, t.tail_start, max_support);
    maybe_mirror(rng, p);
    return p;
}

DiscreteProblem random_nonconvex_problem(Rng& rng, int max_support, int max_grid) {
    DiscreteProblem p;
    const int n = uniform_int(rng, std::min(8, max_grid), max_grid);
    p.grid = random_grid(rng, n);
    TailShape t = convex_tail(rng, p.grid);
    p.f = t.f;
    // nonnegative bumps strictly inside (0, tail_start)
    const int bumps = uniform_int(rng, 1, 3);
    for (int b = 0; b < bumps; ++b) {
        const double c = uniform(rng, p.grid[0], p.grid[t.tail_start]);
        const double w = uniform(rng, 0.2, 1.0);
        const double h = uniform(rng, 0.1, 1.5);
        for (Index i = 1; i < t.tail_start; ++i) p.f[i] += h * std::max(0.0, 1.0 - std::abs(p.grid[i] - c) / w);
    }
    p.cost_scale = uniform(rng, 0.5, 2.0);
    finish_tail_problem(rng, p, t.tail_start, max_support);
    maybe_mirror(rng, p);
    return p;
}

DiscreteProblem dirac_tent_problem(Rng& rng, int max_grid) {
    DiscreteProblem p;
    const int n = uniform_int(rng, std::min(5, max_grid), max_grid);
    p.grid = random_grid(rng, n);
    p.f = Vector::Zero(n);
    const int tents = uniform_int(rng, 1, 3);
    for (int b = 0; b < tents; ++b) {
        const double c = uniform(rng, -1.5, 1.5);
        const double w = uniform(rng, 0.2, 1.0);
        const double h = uniform(rng, 0.2, 2.0);
        for (int i = 1; i + 1 < n; ++i) p.f[i] += h * std::max(0.0, 1.0 - std::abs(p.grid[i] - c) / w);
    }
    Index arg = 0;
    p.f.maxCoeff(&arg);
    p.support = {arg};
    p.weights = Vector::Ones(1);
    p.cost_scale = uniform(rng, 0.5, 2.0);
    p.r = uniform(rng, 0.0, 2.0);
    return p;
}

std::string scatter_csv(const std::vector<ScatterPoint>& pts) {
    std::string out = "model_id,adversarial_risk,regularised_risk\n";
    char buf[96];
    for (const auto& p : pts) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", p.model_id, p.adversarial_risk, p.regularised_risk);
        out += buf;
    }
    return out;
}

double pearson(const std::vector<ScatterPoint>& pts) {
    const double n = static_cast<double>(pts.size());
    if (pts.size() < 2) return 0.0;
    double mx = 0, my = 0;
    for (const auto& p : pts) {
        mx += p.adversarial_risk;
        my += p.regularised_risk;
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (const auto& p : pts) {
        const double a = p.adversarial_risk - mx, b = p.regularised_risk - my;
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    return (sxx > 0 && syy > 0) ? sxy / std::sqrt(sxx * syy) : 0.0;
}

std::string to_string(SuiteKind k) {
    switch (k) {
        case SuiteKind::Convex: return "convex";
        case SuiteKind::Nonconvex: return "nonconvex";
        case SuiteKind::Dirac: return "dirac";
        case SuiteKind::Equivalence: return "equivalence";
    }
    return "?";
}

SuiteResult run_suite(SuiteKind kind, int instances, std::uint64_t seed) {
    if (instances < 1) throw ConfigError("suite needs at least one instance");
    SuiteResult res;
    res.kind = kind;
    res.instances = instances;
    res.tolerance = kind == SuiteKind::Nonconvex ? 1e-9 : 1e-6;
    Rng rng(seed);
    for (int i = 0; i < instances; ++i) {
        DiscreteProblem p;
        switch (kind) {
            case SuiteKind::Convex: p = random_convex_problem(rng); break;
            case SuiteKind::Nonconvex: p = random_nonconvex_problem(rng); break;
            case SuiteKind::Dirac: p = dirac_tent_problem(rng); break;
            case SuiteKind::Equivalence: p = random_problem(rng); break;
        }
        const GapReport g = gap_delta(p);
        double err = 0.0;
        switch (kind) {
            case SuiteKind::Convex: err = std::abs(g.robust - (p.expected_loss() + p.r * g.lip)); break;
            case SuiteKind::Nonconvex: err = std::max(-g.delta, g.delta - g.delta_bound); break;
            case SuiteKind::Dirac: err = std::abs(g.delta - p.r * g.lip); break;
            case SuiteKind::Equivalence: err = std::abs(g.robust - robust_risk_primal(p)); break;
        }
        res.worst = std::max(res.worst, err);
        if (err > res.tolerance || g.robust > g.regularised + 1e-9) ++res.failures;
    }
    return res;
}

}  // namespace lipkernel
