#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace lipkernel {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// One point per row.
using Points = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;
using Rng = std::mt19937_64;
using VecRef = Eigen::Ref<const Vector>;

enum class Norm { L1, L2, Linf };

// Bad arguments or configuration. The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

std::string to_string(Norm n);
Norm norm_from_string(const std::string& s);
// Dual of the attack norm: L2 -> L2, Linf -> L1.
Norm dual_norm(Norm n);
double vector_norm(const Vector& x, Norm n);

// Axis-aligned box.
struct Box {
    Vector lo;
    Vector hi;

    static Box unit(Index d);
    static Box cube(Index d, double lo, double hi);

    Index dim() const { return lo.size(); }
    bool contains(const Vector& x, double tol = 0.0) const;
    Vector clamp(const Vector& x) const;
    Vector sample(Rng& rng) const;
    double diameter() const;
    void validate() const;
};

// Deterministic child seed for stream `index` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace lipkernel
