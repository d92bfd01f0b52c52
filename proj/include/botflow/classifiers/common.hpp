#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "botflow/matrix.hpp"

namespace botflow {

enum class ModelKind { nb, knn, rf, lr };

std::string_view to_string(ModelKind kind);
/// Accepts "NB", "KNN", "RF", "LR" (any case). Throws ValidationError otherwise.
ModelKind parse_model_kind(std::string_view name);

/// Shared fit preconditions: y has one 0/1 entry per row, both classes occur,
/// every cell is finite. Throws ValidationError naming the offending cell.
void validate_training_data(const Matrix& x, std::span<const int> y);

/// Throws ValidationError when x.cols() != width.
void validate_width(const Matrix& x, std::size_t width);

}  // namespace botflow
