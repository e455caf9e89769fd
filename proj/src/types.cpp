#include "lipkernel/types.hpp"

#include <algorithm>
#include <cmath>

namespace lipkernel {

std::string to_string(Norm n) {
    switch (n) {
    case Norm::L1: return "l1";
    case Norm::L2: return "l2";
    case Norm::Linf: return "linf";
    }
    return "?";
}

Norm norm_from_string(const std::string& s) {
    if (s == "l1" || s == "L1") return Norm::L1;
    if (s == "l2" || s == "L2") return Norm::L2;
    if (s == "linf" || s == "Linf" || s == "inf") return Norm::Linf;
    throw ConfigError("unknown norm: " + s);
}

Norm dual_norm(Norm n) {
    switch (n) {
    case Norm::L1: return Norm::Linf;
    case Norm::L2: return Norm::L2;
    case Norm::Linf: return Norm::L1;
    }
    return Norm::L2;
}

double vector_norm(const Vector& x, Norm n) {
    switch (n) {
    case Norm::L1: return x.lpNorm<1>();
    case Norm::L2: return x.norm();
    case Norm::Linf: return x.size() ? x.lpNorm<Eigen::Infinity>() : 0.0;
    }
    return 0.0;
}

Box Box::unit(Index d) { return cube(d, 0.0, 1.0); }

Box Box::cube(Index d, double lo, double hi) {
    Box b;
    b.lo = Vector::Constant(d, lo);
    b.hi = Vector::Constant(d, hi);
    b.validate();
    return b;
}

bool Box::contains(const Vector& x, double tol) const {
    if (x.size() != dim()) return false;
    for (Index i = 0; i < x.size(); ++i)
        if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
    return true;
}

Vector Box::clamp(const Vector& x) const { return x.cwiseMax(lo).cwiseMin(hi); }

Vector Box::sample(Rng& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vector x(dim());
    for (Index i = 0; i < dim(); ++i) x[i] = lo[i] + (hi[i] - lo[i]) * u(rng);
    return x;
}

double Box::diameter() const { return (hi - lo).norm(); }

void Box::validate() const {
    if (lo.size() != hi.size() || lo.size() == 0) throw ConfigError("box: bad dimensions");
    for (Index i = 0; i < lo.size(); ++i)
        if (!(lo[i] <= hi[i]) || !std::isfinite(lo[i]) || !std::isfinite(hi[i]))
            throw ConfigError("box: need finite lo <= hi");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 over the pair
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace lipkernel
