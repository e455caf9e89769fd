#pragma once

#include "lipkernel/types.hpp"

#include <string>
#include <vector>

namespace lipkernel {

// Labels are -1/+1 for binary data and 0..C-1 otherwise.
struct Dataset {
    Points X;
    std::vector<int> labels;
    Vector feature_min;  // normalisation constants: x' = (x - min) / (max - min)
    Vector feature_max;

    Index size() const { return X.rows(); }
    Index dim() const { return X.cols(); }
    bool binary() const;
    int num_classes() const;  // 2 for binary data
    Box feature_box() const { return Box::unit(dim()); }
};

// Maps raw features into [0,1] with the given constants, clamping values
// outside the fitted range. Constant features map to 0.
Points normalise(const Points& raw, const Vector& min, const Vector& max);

// Column 0 is an integer label, the rest are features. A header row is
// detected by a non-numeric first cell. Features are min-max normalised.
Dataset load_csv(const std::string& path);
Dataset parse_csv(const std::string& text, const std::string& source = "<memory>");
// Writes label,x1..xd with 17 significant digits (normalised features).
std::string to_csv(const Dataset& ds);

enum class SyntheticKind { Blobs, TwoMoons };
SyntheticKind synthetic_kind_from_string(const std::string& s);
std::string to_string(SyntheticKind k);

// Blobs: Gaussian clusters (std `spread`) around seeded centres in
// [0.2, 0.8]^d kept at least 0.3 sqrt(d) / classes^(1/d) apart, clamped to
// [0,1]^d. TwoMoons: two interleaved half circles rescaled into [0,1]^2
// (d must be 2, classes 2).
Dataset gen_synthetic(SyntheticKind kind, int n_per_class, int classes, int d, std::uint64_t seed,
                      double spread = 0.1);

}  // namespace lipkernel
