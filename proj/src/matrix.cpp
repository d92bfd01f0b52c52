#include "botflow/matrix.hpp"

#include "botflow/error.hpp"

namespace botflow {

void Matrix::push_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_) {
        throw ValidationError("row width " + std::to_string(values.size()) + " != " + std::to_string(cols_));
    }
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
}

}  // namespace botflow
