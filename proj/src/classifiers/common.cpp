#include "botflow/classifiers/common.hpp"

#include <cctype>
#include <cmath>
#include <string>

#include "botflow/error.hpp"

namespace botflow {

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::nb: return "NB";
        case ModelKind::knn: return "KNN";
        case ModelKind::rf: return "RF";
        case ModelKind::lr: return "LR";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view name) {
    std::string up;
    for (char c : name) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (up == "NB") return ModelKind::nb;
    if (up == "KNN") return ModelKind::knn;
    if (up == "RF") return ModelKind::rf;
    if (up == "LR") return ModelKind::lr;
    throw ValidationError("unknown classifier '" + std::string(name) + "' (expected NB, KNN, RF or LR)");
}

void validate_training_data(const Matrix& x, std::span<const int> y) {
    if (x.rows() == 0) throw ValidationError("training set is empty");
    if (y.size() != x.rows()) throw ValidationError("label count does not match row count");
    bool seen[2] = {false, false};
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != 0 && y[i] != 1) throw ValidationError("label at row " + std::to_string(i) + " is not 0/1");
        seen[y[i]] = true;
    }
    if (!seen[0] || !seen[1]) throw ValidationError("training labels contain a single class");
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
            if (!std::isfinite(x(i, j))) {
                throw ValidationError("non-finite value at row " + std::to_string(i) + ", column " +
                                      std::to_string(j));
            }
        }
    }
}

void validate_width(const Matrix& x, std::size_t width) {
    if (x.rows() > 0 && x.cols() != width) {
        throw ValidationError("input has " + std::to_string(x.cols()) + " columns, model expects " +
                              std::to_string(width));
    }
}

}  // namespace botflow
