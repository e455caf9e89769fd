#include "lipkernel/spectrum.hpp"

#include "lipkernel/linalg.hpp"
#include "lipkernel/lipbound.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>

namespace lipkernel {

namespace {

void check_periodic(const BaseKernel& b) {
    b.validate();
    if (b.kind != BaseKind::Periodic) throw ConfigError("expected a periodic base kernel");
}

void check_quad(int q) {
    if (q < 1024 || q % 2 != 0) throw ConfigError("quad_points must be even and >= 1024");
}

double simpson(const std::function<double(double)>& g, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = g(a) + g(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * g(a + i * h);
    return s * h / 3.0;
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

SpectrumReport periodic_eigenvalues(const BaseKernel& base, int J, int quad_points) {
    check_periodic(base);
    check_quad(quad_points);
    if (J < 0) throw ConfigError("J must be >= 0");
    const double v = base.period;
    const double w0 = 2.0 * std::numbers::pi / v;
    SpectrumReport s;
    s.kernel = "periodic";
    s.quad_points = quad_points;
    s.eigenvalues.resize(J + 1);
    s.multiplicity.resize(J + 1);
    for (int j = 0; j <= J; ++j) {
        auto g = [&](double t) { return base.value(t, 0.0) * std::cos(j * w0 * t); };
        s.eigenvalues[j] = simpson(g, -v / 2, v / 2, quad_points) / v;
        s.multiplicity[j] = j == 0 ? 1.0 : 2.0;
    }
    s.trace_sum = s.multiplicity.dot(s.eigenvalues);
    return s;
}

double periodic_eigenvalue_sin(const BaseKernel& base, int j, int quad_points) {
    check_periodic(base);
    check_quad(quad_points);
    if (j < 1) throw ConfigError("sine eigenfunctions start at j = 1");
    const double v = base.period;
    const double w0 = 2.0 * std::numbers::pi / v;
    const double x = v / (4.0 * j);  // sin(j w0 x) = 1
    auto g = [&](double y) { return base.value(x, y) * std::sin(j * w0 * y); };
    return simpson(g, -v / 2, v / 2, quad_points) / v / std::sin(j * w0 * x);
}

constexpr double kNoiseFloor = 1e-13;

DecayCheck decay_condition(const SpectrumReport& s, double c4, double c6, int jmax) {
    if (jmax >= s.eigenvalues.size()) throw ConfigError("decay_condition: jmax exceeds computed spectrum");
    DecayCheck d;
    d.c4 = c4;
    d.c6 = c6;
    d.lhs.resize(jmax + 1);
    d.rhs.resize(jmax + 1);
    for (int j = 0; j <= jmax; ++j) {
        const double jj = j;
        d.lhs[j] = s.eigenvalues[j] * (1 + jj) * (1 + jj) * std::max(1.0, jj * jj) * (j >= 1 ? 2.0 : 1.0);
        d.rhs[j] = c6 * std::pow(c4, -jj);
        // below the quadrature noise floor the sign of lhs - rhs is not resolved
        if (std::abs(s.eigenvalues[j]) < kNoiseFloor * s.eigenvalues[0]) continue;
        d.resolved = j;
        if (d.lhs[j] > d.rhs[j]) {
            d.holds = false;
            d.failing.push_back(j);
        }
    }
    return d;
}

AssumptionConstants assumption_constants(const BaseKernel& base, double eps, double c4, double c6) {
    check_periodic(base);
    if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("eps must be in (0, 1]");
    if (!(c4 > 1.0)) throw ConfigError("c4 must be > 1");
    if (!(c6 > 0.0)) throw ConfigError("c6 must be positive");
    const double v = base.period;
    const double pi = std::numbers::pi;
    AssumptionConstants a;
    a.eps = eps;
    a.c4 = c4;
    a.c6 = c6;
    a.n_eps = std::log(2.1 * c6 / (eps * eps) * std::max(1.0, v * v / (4 * pi * pi))) / std::log(c4);
    a.N_eps = 1 + 2 * static_cast<int>(std::floor(a.n_eps));
    a.M_eps = std::sqrt(2.0) * pi / v * (a.N_eps - 1);
    a.Q_eps = std::sqrt(2.0);
    return a;
}

double theoretical_sample_size(const AssumptionConstants& a, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must be in (0, 1)");
    const double N = a.N_eps;
    return std::max(N, 5.0 / (3.0 * a.eps * a.eps) * N * a.Q_eps * a.Q_eps * std::log(2.0 * N / delta));
}

Vector gaussian_eigenvalues_closed_form(double sigma, int J) {
    if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
    const double c0 = (3.0 + std::sqrt(5.0)) / 2.0;
    Vector l(J + 1);
    for (int j = 0; j <= J; ++j) l[j] = std::pow(c0, -j - 0.5);
    return l;
}

Vector gaussian_empirical_eigenvalues(double sigma, int n, int k, std::uint64_t seed) {
    if (!(sigma > 0.0) || n < k || k < 1) throw ConfigError("gaussian_empirical_eigenvalues: bad arguments");
    Rng rng(seed);
    std::normal_distribution<double> g(0.0, sigma);
    Points X(n, 1);
    for (int i = 0; i < n; ++i) X(i, 0) = g(rng);
    Matrix K = gram(KernelSpec::gaussian(sigma, 1), X) / double(n);
    return top_eigenvalues(K, k);
}

std::vector<MultiIndex> graded_lex_indices(int d, int cap) {
    if (d < 1 || cap < 0) throw ConfigError("graded_lex_indices: bad arguments");
    std::vector<MultiIndex> out;
    MultiIndex cur(static_cast<size_t>(d), 0);
    // all compositions of each degree, lexicographically descending in the first entry
    std::function<void(int, int)> rec = [&](int pos, int left) {
        if (pos == d - 1) {
            cur[static_cast<size_t>(pos)] = left;
            out.push_back(cur);
            return;
        }
        for (int a = left; a >= 0; --a) {
            cur[static_cast<size_t>(pos)] = a;
            rec(pos + 1, left - a);
        }
    };
    for (int deg = 0; deg <= cap; ++deg) rec(0, deg);
    return out;
}

double ball_moment(const MultiIndex& alpha) {
    const int d = static_cast<int>(alpha.size());
    int total = 0;
    for (int a : alpha) {
        if (a < 0) throw std::invalid_argument("ball_moment: negative index");
        if (a % 2) return 0.0;
        total += a;
    }
    const double pi = std::numbers::pi;
    const double vd = std::pow(pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
    // ratio of Gamma products in log space for large degrees
    double lognum = std::log(2.0);
    for (int a : alpha) lognum += std::lgamma((a + 1) / 2.0);
    const double logden = std::log(vd) + std::log(double(total + d)) + std::lgamma((total + d) / 2.0);
    return std::exp(lognum - logden);
}

MultiIndexSpectrum inverse_kernel_spectrum(int d, int degree_cap) {
    if (d < 1 || d > 4) throw ConfigError("inverse_kernel_spectrum: d must be in [1, 4]");
    if (degree_cap < 0 || degree_cap > 10) throw ConfigError("inverse_kernel_spectrum: degree_cap must be in [0, 10]");
    MultiIndexSpectrum s;
    s.indices = graded_lex_indices(d, degree_cap);
    const Index n = static_cast<Index>(s.indices.size());
    Vector w(n);
    for (Index i = 0; i < n; ++i) {
        const auto& a = s.indices[static_cast<size_t>(i)];
        int tot = 0;
        double logc = 0.0;
        for (int ai : a) {
            tot += ai;
            logc -= std::lgamma(ai + 1.0);
        }
        logc += std::lgamma(tot + 1.0);
        w[i] = std::sqrt(std::exp(logc - (tot + 1) * std::log(2.0)));
    }
    s.M.resize(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = i; j < n; ++j) {
            MultiIndex sum(static_cast<size_t>(d));
            for (int m = 0; m < d; ++m)
                sum[static_cast<size_t>(m)] = s.indices[static_cast<size_t>(i)][static_cast<size_t>(m)] +
                                               s.indices[static_cast<size_t>(j)][static_cast<size_t>(m)];
            s.M(i, j) = s.M(j, i) = w[i] * w[j] * ball_moment(sum);
        }
    Eigen::SelfAdjointEigenSolver<Matrix> es(s.M);
    s.eigenvalues = es.eigenvalues().reverse();
    return s;
}

NystromCurve nystrom_error_curve(const BaseKernel& base, int d, const std::vector<int>& n_list, int trials,
                                 std::uint64_t seed, const Box& domain, int anchors) {
    base.validate();
    domain.validate();
    if (domain.dim() != d) throw ConfigError("nystrom_error_curve: domain dimension mismatch");
    if (n_list.empty() || trials < 1) throw ConfigError("nystrom_error_curve: need n_list and trials");
    std::vector<int> ns = n_list;
    if (!std::is_sorted(ns.begin(), ns.end())) throw ConfigError("n_list must be increasing");
    const int nmax = ns.back();
    const KernelSpec k = KernelSpec::product(base, d);
    std::vector<std::vector<double>> err(ns.size()), rel(ns.size());
    for (int t = 0; t < trials; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        Model m;
        m.kernel = k;
        m.anchors.resize(anchors, d);
        for (int a = 0; a < anchors; ++a) m.anchors.row(a) = domain.sample(rng).transpose();
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        m.coeffs.resize(anchors);
        for (int a = 0; a < anchors; ++a) m.coeffs[a] = u(rng);
        const double exact = gtg_bound(m, nullptr, GtgMode::ExactDiag).value;
        WitnessSet all = WitnessSet::random(domain, nmax, rng());
        for (size_t i = 0; i < ns.size(); ++i) {
            WitnessSet w;
            w.points = all.points.topRows(ns[i]);
            w.origin.assign(static_cast<size_t>(ns[i]), WitnessOrigin::Random);
            const double approx = gtg_bound(m, &w, GtgMode::CoordNystrom).value;
            err[i].push_back(std::abs(approx - exact));
            rel[i].push_back(exact > 0 ? std::abs(approx - exact) / exact : 0.0);
        }
    }
    auto median = [](std::vector<double> v) {
        auto mid = v.begin() + static_cast<std::ptrdiff_t>((v.size() - 1) / 2);
        std::nth_element(v.begin(), mid, v.end());
        return *mid;
    };
    NystromCurve c;
    c.n_list = ns;
    c.median_error.resize(static_cast<Index>(ns.size()));
    c.median_rel_error.resize(static_cast<Index>(ns.size()));
    for (size_t i = 0; i < ns.size(); ++i) {
        c.median_error[static_cast<Index>(i)] = median(err[i]);
        c.median_rel_error[static_cast<Index>(i)] = median(rel[i]);
        if (i > 0 && c.median_error[static_cast<Index>(i)] > c.median_error[static_cast<Index>(i - 1)]) ++c.inversions;
    }
    if (base.kind == BaseKind::Periodic)
        c.theoretical_n = theoretical_sample_size(assumption_constants(base, 0.1, 2.0, 1.6), 0.05);
    return c;
}

std::string spectrum_csv(const Vector& ev) {
    std::string out = "j,lambda\n";
    for (Index j = 0; j < ev.size(); ++j) out += std::to_string(j) + "," + fmt17(ev[j]) + "\n";
    return out;
}

std::string spectrum_csv(const SpectrumReport& s) { return spectrum_csv(s.eigenvalues); }

std::string nystrom_csv(const NystromCurve& c) {
    std::string out = "n,median_error\n";
    for (size_t i = 0; i < c.n_list.size(); ++i)
        out += std::to_string(c.n_list[i]) + "," + fmt17(c.median_error[static_cast<Index>(i)]) + "\n";
    return out;
}

}  // namespace lipkernel
