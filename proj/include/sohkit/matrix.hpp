#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sohkit/errors.hpp"

namespace sohkit {

/// Row-major sample matrix (rows = samples, cols = features).
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    static FeatureMatrix zeros(std::size_t rows, std::size_t cols) {
        return {rows, cols, std::vector<double>(rows * cols, 0.0)};
    }

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    std::span<const double> row(std::size_t r) const {
        return {values.data() + r * cols, cols};
    }
};

}  // namespace sohkit
