#pragma once

#include "lipkernel/model.hpp"

#include <string>

namespace lipkernel {

// A trained classifier with the feature normalisation of its training data.
// Binary files hold one model; multiclass files one model per class. All
// models share the kernel and anchors.
struct SavedModel {
    MultiModel models;
    bool binary = true;
    Vector feature_min;
    Vector feature_max;
};

// Text format: header "lipkernel-model v1", key-value lines, then anchors
// and coefficients row-major with 17 significant digits.
std::string model_to_text(const SavedModel& m);
SavedModel model_from_text(const std::string& text);
void save_model(const SavedModel& m, const std::string& path);
SavedModel load_model(const std::string& path);

}  // namespace lipkernel
