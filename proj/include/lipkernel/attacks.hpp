#pragma once

#include "lipkernel/model.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace lipkernel {

// Differentiable classifier seen by the attacker. Binary classifiers expose
// two scores (0, f) so that class 1 is label +1 and class 0 is label -1.
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual int classes() const = 0;
    virtual int dim() const = 0;
    virtual Vector scores(const VecRef& x) const = 0;
    // classes x dim
    virtual Matrix jacobian(const VecRef& x) const = 0;
    virtual bool binary() const = 0;

    // Dataset label -> class index. Binary: -1 -> 0, +1 -> 1.
    int class_index(int label) const;
    int label_of(int cls) const;
};

class KernelScorer : public Scorer {
public:
    explicit KernelScorer(Model binary_model);
    explicit KernelScorer(MultiModel per_class);
    int classes() const override;
    int dim() const override;
    Vector scores(const VecRef& x) const override;
    Matrix jacobian(const VecRef& x) const override;
    bool binary() const override { return binary_; }

private:
    MultiModel models_;
    bool binary_;
};

// f(x) = W x + b. A single row is a binary scorer.
class LinearScorer : public Scorer {
public:
    explicit LinearScorer(Vector w, double b = 0.0);
    LinearScorer(Matrix W, Vector b);
    int classes() const override;
    int dim() const override;
    Vector scores(const VecRef& x) const override;
    Matrix jacobian(const VecRef& x) const override;
    bool binary() const override { return binary_; }

private:
    Matrix W_;
    Vector b_;
    bool binary_;
};

// max_{c != y} f^c - f^y. Positive means misclassified.
double cw_margin(const Vector& scores, int y);
// Strictly correct: f^y exceeds every other score.
bool correctly_classified(const Vector& scores, int y);

enum class AttackObjective { CrossEntropy, CWMargin };
std::string to_string(AttackObjective o);
AttackObjective attack_objective_from_string(const std::string& s);

struct AttackConfig {
    Norm norm = Norm::L2;
    double delta = 0.0;
    int steps = 100;
    double step_size = 0.0;  // <= 0 selects 2 delta / steps
    AttackObjective objective = AttackObjective::CWMargin;
    std::optional<int> targeted;  // target class index
    bool random_init = false;
    std::optional<Box> input_box;  // default unit box
    std::uint64_t seed = 0;
    bool record_trace = false;

    double resolved_step() const;
    Box resolved_box(Index d) const;
    void validate(Index d) const;
};

struct AttackResult {
    Vector adversarial;
    double initial_objective = 0.0;
    double objective = 0.0;  // best over the trace
    bool success = false;
    std::vector<Vector> trace;  // every iterate when record_trace is set
    std::vector<double> trace_objective;
};

// Euclidean projection onto {y : ||y - x|| <= delta} intersected with box.
// x must lie in the box.
Vector project_ball_box(const Vector& z, const Vector& x, double delta, Norm norm, const Box& box);

// Objective value and gradient for class y (class index).
double attack_objective(const Scorer& s, const AttackConfig& cfg, const Vector& x, int y, Vector* grad);

// PGD from x (or from `start` when given, which must lie in the ball).
// y is a class index. Returns the best iterate by objective.
AttackResult pgd_attack(const Scorer& s, const Vector& x, int y, const AttackConfig& cfg,
                        const Vector* start = nullptr);

struct ExampleOutcome {
    double clean_margin = 0.0;  // cw_margin at the clean point
    double objective = 0.0;
    bool correct = false;
    Vector adversarial;
};

struct AttackReport {
    std::vector<double> deltas;
    std::vector<double> robust_accuracy;
    double clean_accuracy = 0.0;
    double step_rule = 2.0;  // step = step_rule * delta / steps when not overridden
    std::vector<std::vector<ExampleOutcome>> outcomes;  // [delta][example]
};

// Sweeps nondecreasing deltas. Each example warm-starts from its adversary at
// the previous delta and stays broken once broken, so accuracy is monotone.
// labels are dataset labels (converted with Scorer::class_index).
AttackReport robust_accuracy(const Scorer& s, const Points& X, const std::vector<int>& labels,
                             const AttackConfig& base, const std::vector<double>& deltas);

}  // namespace lipkernel
