#pragma once

#include "lipkernel/lipbound.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lipkernel {

enum class LossKind { Hinge, CrammerSinger };
enum class ConstraintMode { BruteForce, HolisticNystrom, CoordNystrom };
enum class WitnessMode { Random, Greedy };

std::string to_string(LossKind k);
std::string to_string(ConstraintMode m);
std::string to_string(WitnessMode m);
LossKind loss_kind_from_string(const std::string& s);
ConstraintMode constraint_mode_from_string(const std::string& s);
WitnessMode witness_mode_from_string(const std::string& s);

// Hinge: max(0, 1 - y s) with y in {-1, +1} and scores = {s}.
// CrammerSinger: max(0, max_{c != y} 1 + f^c - f^y) with y a class index.
double loss_value(LossKind kind, const Vector& scores, int label);

// phi(x) = (K_ZZ^+)^{1/2} k(Z, x), so phi(x).phi(y) is the Nystrom kernel.
struct LandmarkMap {
    KernelSpec kernel;
    Points landmarks;
    Matrix S;  // (K_ZZ^+)^{1/2}, symmetric

    static LandmarkMap build(const KernelSpec& k, const Points& landmarks);
    Vector features(const VecRef& x) const;
    Matrix features_rows(const Points& X) const;  // one row per point
};

Vector landmark_features(const KernelSpec& k, const Points& landmarks, const VecRef& x);

struct TrainConfig {
    double L = 1.0;
    double reg_weight = 1e-4;
    LossKind loss = LossKind::Hinge;
    ConstraintMode constraint_mode = ConstraintMode::HolisticNystrom;
    WitnessMode witness_mode = WitnessMode::Greedy;
    int outer_iters = 50;
    int initial_witnesses = 15;
    double penalty_init = 1.0;
    double penalty_growth = 10.0;
    double penalty_max = 1e6;
    int inner_max_iter = 300;
    double inner_tol = 1e-9;
    double constraint_tol = 1e-3;  // relative violation accepted after the inner solve
    double stop_slack = 0.05;      // stop once the empirical constant is <= L (1 + slack)
    int search_restarts = 10;
    int n_landmarks = 0;  // 0 selects min(l, 256)
    std::optional<Box> domain;  // default unit box
    std::uint64_t seed = 0;
    Norm lip_norm = Norm::L2;  // attack norm the constraint defends

    Box resolved_domain(Index d) const;
    void validate(Index d) const;
};

struct OuterRecord {
    double lip_estimate = 0.0;      // empirical constant in the dual norm
    double constraint_value = 0.0;  // after feasibility restoration
    double objective = 0.0;         // regularised risk
    Index n_witness = 0;
    double penalty = 0.0;
    int inner_iters = 0;
    bool penalty_capped = false;
    bool rescaled = false;
};

struct TrainReport {
    std::vector<OuterRecord> history;
    bool converged = false;
    int outer_iterations = 0;  // iterations run until the stop test held (or the cap)
    double train_accuracy = 0.0;
    double mean_loss = 0.0;
    double final_constraint = 0.0;
    double constraint_budget = 0.0;  // L^2 for quadratic forms, L for Linf forms
    std::string solver = "exact-penalty subgradient descent with monotone backtracking and radial rescaling";
    WitnessSet witnesses;
};

struct BinaryResult {
    Model model;
    TrainReport report;
};

struct MulticlassResult {
    MultiModel models;
    TrainReport report;
};

// Best local maximiser of the dual norm of grad f over 10 seeded restarts.
// A zero model returns a seeded random domain point.
Vector greedy_witness(const Model& model, const Box& domain, std::uint64_t seed, Norm dual = Norm::L2);

// Labels in {-1, +1}.
BinaryResult train_binary(const Points& X, const std::vector<int>& y, const KernelSpec& k, const TrainConfig& cfg);
// Labels in 0..C-1, 2 <= C <= 10.
MulticlassResult train_multiclass(const Points& X, const std::vector<int>& y, const KernelSpec& k,
                                  const TrainConfig& cfg);

}  // namespace lipkernel
