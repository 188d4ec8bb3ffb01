#pragma once

#include "mmen/common.hpp"

#include <Eigen/Core>

#include <span>
#include <string>
#include <vector>

namespace mmen {

/// Dense row-major f64 matrix. Vectors are 1xC or Rx1; scalars are 1x1.
struct Tensor {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
    Tensor(std::size_t r, std::size_t c, std::vector<double> values) : rows(r), cols(c), data(std::move(values)) {
        if (data.size() != r * c) throw ArgumentError("Tensor: value count does not match shape");
    }

    static Tensor scalar(double x) { return Tensor(1, 1, x); }

    std::size_t numel() const noexcept { return data.size(); }
    bool empty() const noexcept { return data.empty(); }
    bool same_shape(const Tensor &o) const noexcept { return rows == o.rows && cols == o.cols; }

    double &operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    double item() const { return data.at(0); }

    std::string shape_str() const { return "(" + std::to_string(rows) + "x" + std::to_string(cols) + ")"; }

    bool operator==(const Tensor &) const = default;
};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Eigen::Map<RowMatrix> as_matrix(Tensor &t) {
    return {t.data.data(), static_cast<Eigen::Index>(t.rows), static_cast<Eigen::Index>(t.cols)};
}
inline Eigen::Map<const RowMatrix> as_matrix(const Tensor &t) {
    return {t.data.data(), static_cast<Eigen::Index>(t.rows), static_cast<Eigen::Index>(t.cols)};
}

} // namespace mmen
